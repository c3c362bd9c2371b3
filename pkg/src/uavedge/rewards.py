"""Per-slot reward functions for the visit planner.

Eleven variants over four signals: A, the data age of the visited device
when the UAV arrives; U, the number of slots completed; M, the minimum
battery fraction across devices after the slot; O, the oldest data age in
the system when the slot began. Log variants use natural logs of shifted
arguments, log(1 + x) for the counters and a 1e-6 floor for the battery
fraction, so every reward is finite on its whole domain. When a scenario
carries priority weights, kappa times the visited device's weight is added
on top of any variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class RewardInputs:
    A: float            # age of visited device at visit time (pre-slot)
    U: float            # slots completed, counting this one (>= 1)
    M: float            # min battery fraction after the slot, in [0, 1]
    O: float            # oldest age in the system at slot start (>= A)
    priority_w: float = 0.0  # visited device's priority weight, 0 if unused


@dataclass(frozen=True)
class RewardSpec:
    id: str = "U_logAoverO"
    kappa: float = 1.0


_MIN_BATTERY_FRACTION = 1e-6


def _log_m(m: float) -> float:
    return math.log(max(m, _MIN_BATTERY_FRACTION))


_FUNCTIONS = {
    "A": lambda r: r.A,
    "U": lambda r: r.U,
    "M": lambda r: r.M,
    "negO": lambda r: -r.O,
    "sum": lambda r: r.A + r.U + r.M - r.O,
    "logA": lambda r: math.log1p(r.A),
    "logU": lambda r: math.log1p(r.U),
    "logM": lambda r: _log_m(r.M),
    "neglogO": lambda r: -math.log1p(r.O),
    "logsum": lambda r: math.log1p(r.A) + math.log1p(r.U) + _log_m(r.M) - math.log1p(r.O),
    "U_logAoverO": lambda r: r.U + math.log((r.A + 1.0) / (r.O + 1.0)),
}

REWARD_IDS = tuple(_FUNCTIONS)


class UnknownRewardError(ValueError):
    pass


def compute_reward(spec: RewardSpec, inputs: RewardInputs) -> float:
    try:
        base = _FUNCTIONS[spec.id]
    except KeyError:
        raise UnknownRewardError(
            f"unknown reward id {spec.id!r}; valid ids: {', '.join(REWARD_IDS)}"
        ) from None
    return base(inputs) + spec.kappa * inputs.priority_w
