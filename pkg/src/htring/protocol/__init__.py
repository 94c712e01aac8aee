from .actions import (CancelTimer, Completed, Decide, Execute, Mcast, Notify, Persist, Send,
                      SetTimer)
from .instance import (AcceptorInstance, ProtocolViolation, accept_local, choose_value,
                       phase1a, phase2)
from .proposer import Proposer
from .site import CoordinatorInstance, ProtocolConfig, Site
