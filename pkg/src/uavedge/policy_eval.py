"""Deterministic rollouts, heuristic baselines, sweeps, and failure tallies.

A policy is any callable mapping the state vector to a device index;
stateful baselines (round robin, seeded random) are built fresh per rollout
via make_policy. Sweeps train one network per (power, comm, seed) cell and
report greedy episode lengths; failure statistics repeat training over
fresh outage draws and count which device fails first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from multiprocessing import Pool

import numpy as np

from . import rng as streams
from .dqn import QNetwork, TrainConfig, train
from .rewards import RewardSpec
from .scenario import Scenario, assign_outages, generate
from .simcore import (DATA_EXPIRED, DEVICE_BATTERY_DEPLETED, Simulation,
                      TerminationCause, TimeSlotOutcome)

BASELINE_NAMES = ("random", "round_robin", "oldest_data_first", "lowest_battery_first")


@dataclass
class EpisodeResult:
    length: int
    cause: TerminationCause
    first_failure_device: int | None
    trace: list[TimeSlotOutcome] = field(repr=False, default_factory=list)


def greedy_policy(net: QNetwork, state: np.ndarray) -> int:
    """Argmax action; ties break toward the lowest index."""
    return int(np.argmax(net.forward(state)))


def make_greedy(net: QNetwork):
    return lambda state: greedy_policy(net, state)


def make_policy(name: str, scenario: Scenario, seed: int = 0, net: QNetwork | None = None):
    """Instantiate a named policy, fresh state included."""
    n = scenario.n_devices
    if name == "greedy":
        if net is None:
            raise ValueError("greedy policy needs a trained network")
        return make_greedy(net)
    if name == "random":
        gen = streams.policy_stream(seed)
        return lambda state: int(gen.integers(0, n))
    if name == "round_robin":
        counter = {"next": 0}

        def rr(state):
            a = counter["next"]
            counter["next"] = (a + 1) % n
            return a
        return rr
    if name == "oldest_data_first":
        return lambda state: int(np.argmax(state[n:]))
    if name == "lowest_battery_first":
        unpowered = np.array([not d.has_power for d in scenario.devices])

        def lbf(state):
            if not unpowered.any():
                return int(np.argmax(state[n:]))
            fractions = np.where(unpowered, state[:n], np.inf)
            return int(np.argmin(fractions))
        return lbf
    raise ValueError(f"unknown policy {name!r}; choose from greedy, {', '.join(BASELINE_NAMES)}")


def baselines() -> tuple[str, ...]:
    return BASELINE_NAMES


def rollout(scenario: Scenario, policy, seed: int = 0, keep_trace: bool = True) -> EpisodeResult:
    """Play one episode to termination under a fixed policy.

    Pure in (scenario, policy, seed): the task-volume stream is derived
    from the seed, and the policy is queried on the state vector only.
    """
    sim = Simulation(scenario, streams.episode_stream(seed, 0))
    trace = []
    state = sim.state_vector()
    while sim.terminated is None:
        action = policy(state)
        outcome = sim.step(action)
        if keep_trace:
            trace.append(outcome)
        state = sim.state_vector()
    cause = sim.terminated
    first_failure = cause.device_id if cause.kind in (DEVICE_BATTERY_DEPLETED, DATA_EXPIRED) else None
    return EpisodeResult(length=sim.slot_count, cause=cause,
                         first_failure_device=first_failure, trace=trace)


# ---------------------------------------------------------------------------
# grid sweeps


@dataclass
class SweepRecord:
    power: int
    comm: int
    seed: int
    length: int
    cause: TerminationCause
    first_failure: int | None


@dataclass
class SweepTable:
    power_counts: tuple[int, ...]
    comm_counts: tuple[int, ...]
    records: list[SweepRecord]

    def cell_mean(self, power: int, comm: int) -> float:
        lengths = [r.length for r in self.records if r.power == power and r.comm == comm]
        return float(np.mean(lengths)) if lengths else float("nan")

    def as_grid(self) -> np.ndarray:
        return np.array([[self.cell_mean(p, c) for c in self.comm_counts]
                         for p in self.power_counts])


def _run_sweep_cell(job):
    (power, comm, seed, cfg, reward_spec, scenario) = job
    sc = assign_outages(scenario, power, comm, seed=seed)
    net, _ = train(sc, reward_spec, cfg, seed=seed)
    result = rollout(sc, make_greedy(net), seed=seed, keep_trace=False)
    return SweepRecord(power=power, comm=comm, seed=seed, length=result.length,
                       cause=result.cause, first_failure=result.first_failure_device)


def sweep(power_counts, comm_counts, seeds, cfg: TrainConfig,
          reward_spec: RewardSpec = RewardSpec(), workers: int = 1,
          scenario_factory=generate) -> SweepTable:
    """Train and evaluate one policy per (power, comm, seed) grid cell.

    The base world for a seed is shared across all cells so the grid varies
    only in availability. Jobs are independent; the merge order is fixed,
    so results do not depend on the worker count.
    """
    scenarios = {seed: scenario_factory(seed) for seed in seeds}
    jobs = [(p, c, s, cfg, reward_spec, scenarios[s])
            for p in power_counts for c in comm_counts for s in seeds]
    if workers > 1:
        with Pool(workers) as pool:
            records = pool.map(_run_sweep_cell, jobs)
    else:
        records = [_run_sweep_cell(job) for job in jobs]
    return SweepTable(tuple(power_counts), tuple(comm_counts), records)


# ---------------------------------------------------------------------------
# repeated-failure statistics


@dataclass
class FailureRun:
    run: int
    length: int
    cause: TerminationCause
    first_failure: int | None


@dataclass
class FailureTally:
    counts: dict[int, int]
    runs: list[FailureRun]

    @property
    def n_device_failures(self) -> int:
        return sum(self.counts.values())


def _run_failure_case(job):
    (run_idx, base, n_power, n_comm, cfg, reward_spec, seed) = job
    sc = assign_outages(base, n_power, n_comm, seed=seed)
    net, _ = train(sc, reward_spec, cfg, seed=seed)
    result = rollout(sc, make_greedy(net), seed=seed, keep_trace=False)
    return FailureRun(run=run_idx, length=result.length, cause=result.cause,
                      first_failure=result.first_failure_device)


def failure_stats(base_scenario: Scenario, n_runs: int, cfg: TrainConfig,
                  reward_spec: RewardSpec = RewardSpec(), n_power: int = 8,
                  n_comm: int = 6, seed: int = 0, workers: int = 1) -> FailureTally:
    """Repeat (fresh outages, train, greedy rollout) and tally first failures.

    Each run draws its own outage assignment and training seed from the
    base seed; runs that end on UAV battery contribute no tally entry.
    """
    jobs = [(r, base_scenario, n_power, n_comm, cfg, reward_spec, seed + r)
            for r in range(n_runs)]
    if workers > 1:
        with Pool(workers) as pool:
            runs = pool.map(_run_failure_case, jobs)
    else:
        runs = [_run_failure_case(job) for job in jobs]
    counts: dict[int, int] = {d.id: 0 for d in base_scenario.devices}
    for run in runs:
        if run.first_failure is not None:
            counts[run.first_failure] += 1
    return FailureTally(counts=counts, runs=runs)
