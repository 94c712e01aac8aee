from .checks import SAFETY_CHECKS, check_progress, check_trace
from .cluster import Cluster
from .run import (RunResult, SweepAborted, plot_sweep, replay, run_scenario, run_sweep,
                  simulate)
from .scenario import (CrashEntry, FaultSpec, LearnerPlacement, RequestSchedule, Scenario,
                       ScenarioError, load_scenario, scenario_from_dict)
