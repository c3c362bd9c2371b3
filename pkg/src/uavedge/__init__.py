"""uavedge: UAV-serviced edge-device network simulator and DQN visit planner.

A seedable discrete-slot simulator of heterogeneous edge devices losing
power and communication, a from-scratch deep Q-learner that learns which
device the UAV should visit each slot to keep the system alive longest,
and evaluation tooling for availability sweeps, first-failure statistics,
and traffic-priority evacuation scenarios.
"""

__version__ = "0.1.0"

from ._kernels import available_backends, backend_name, get_backend
from .dqn import QNetwork, TrainConfig, train
from .policy_eval import EpisodeResult, failure_stats, make_policy, rollout, sweep
from .rewards import REWARD_IDS, RewardInputs, RewardSpec, compute_reward
from .scenario import Scenario, assign_outages, generate
from .simcore import (CommModel, DeviceSpec, DeviceState, SimConfig, Simulation,
                      TerminationCause, TimeSlotOutcome, UavSpec, UavState)
from .tables import DeviceKind, TaskKind

__all__ = [
    "__version__",
    "available_backends", "backend_name", "get_backend",
    "QNetwork", "TrainConfig", "train",
    "EpisodeResult", "failure_stats", "make_policy", "rollout", "sweep",
    "REWARD_IDS", "RewardInputs", "RewardSpec", "compute_reward",
    "Scenario", "assign_outages", "generate",
    "CommModel", "DeviceSpec", "DeviceState", "SimConfig", "Simulation",
    "TerminationCause", "TimeSlotOutcome", "UavSpec", "UavState",
    "DeviceKind", "TaskKind",
]
