"""Scenario generation, outage assignment, and JSON persistence.

A scenario is a complete reproducible world: region and comm/UAV parameters,
the device roster (kind, task, position, battery capacity, outage flags),
the seed it was drawn from, and optional per-device priority weights used by
the priority reward. Generation and outage assignment are pure functions of
their inputs and seeds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from . import rng
from .simcore import CommModel, DeviceSpec, SimConfig, UavSpec
from .tables import CapabilityTable, DeviceKind, TaskKind, default_capability_table

FORMAT_VERSION = "1"

_KINDS = list(DeviceKind)
_TASKS = list(TaskKind)


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    config: SimConfig
    comm: CommModel
    uav: UavSpec
    devices: tuple[DeviceSpec, ...]
    seed: int
    priority_weights: tuple[float, ...] | None = None

    @property
    def n_devices(self) -> int:
        return len(self.devices)

    def with_priority_weights(self, weights) -> "Scenario":
        w = tuple(float(x) for x in weights)
        if len(w) != self.n_devices:
            raise ScenarioError(f"expected {self.n_devices} priority weights, got {len(w)}")
        if any(not 0.0 <= x <= 1.0 for x in w):
            raise ScenarioError("priority weights must lie in [0, 1]")
        return replace(self, priority_weights=w)


def generate(seed: int, config: SimConfig = SimConfig(), comm: CommModel = CommModel(),
             uav: UavSpec = UavSpec(), table: CapabilityTable | None = None) -> Scenario:
    """Draw a fresh world: uniform positions, kinds, tasks, and capacities.

    All devices start with both power and communication available; use
    assign_outages to knock some out. Deterministic in (seed, config).
    """
    table = table if table is not None else default_capability_table()
    gen = rng.scenario_stream(seed)
    n = config.n_devices
    xs = gen.uniform(0.0, config.region_width, n)
    ys = gen.uniform(0.0, config.region_height, n)
    kind_idx = gen.integers(0, len(_KINDS), n)
    task_idx = gen.integers(0, len(_TASKS), n)
    capacities = gen.uniform(50_000.0, 80_000.0, n)

    devices = []
    for i in range(n):
        kind = _KINDS[int(kind_idx[i])]
        task = _TASKS[int(task_idx[i])]
        power, rate = table[(kind, task)]
        devices.append(DeviceSpec(
            id=i, kind=kind, task=task,
            x=float(xs[i]), y=float(ys[i]),
            battery_capacity=float(capacities[i]),
            has_power=True, has_comm=True,
            task_power=power, processing_rate=rate,
        ))
    return Scenario(config=config, comm=comm, uav=uav, devices=tuple(devices), seed=int(seed))


def assign_outages(scenario: Scenario, n_power: int, n_comm: int, seed: int) -> Scenario:
    """Keep power on exactly n_power devices and comm on exactly n_comm.

    The two kept sets are drawn independently and uniformly without
    replacement, so they may overlap arbitrarily.
    """
    n = scenario.n_devices
    if not 0 <= n_power <= n:
        raise ScenarioError(f"n_power must be in [0, {n}], got {n_power}")
    if not 0 <= n_comm <= n:
        raise ScenarioError(f"n_comm must be in [0, {n}], got {n_comm}")
    gen = rng.outage_stream(seed)
    powered = set(int(i) for i in gen.choice(n, size=n_power, replace=False))
    connected = set(int(i) for i in gen.choice(n, size=n_comm, replace=False))
    devices = tuple(
        replace(d, has_power=d.id in powered, has_comm=d.id in connected)
        for d in scenario.devices
    )
    return replace(scenario, devices=devices)


# ---------------------------------------------------------------------------
# persistence


def to_dict(scenario: Scenario) -> dict:
    cfg = scenario.config
    return {
        "version": FORMAT_VERSION,
        "seed": scenario.seed,
        "config": {
            "region_width": cfg.region_width,
            "region_height": cfg.region_height,
            "n_devices": cfg.n_devices,
            "task_volume_min": cfg.task_volume_min,
            "task_volume_max": cfg.task_volume_max,
            "data_age_limit": cfg.data_age_limit,
            "slot_processing_cap": cfg.slot_processing_cap,
            "result_payload": cfg.result_payload,
        },
        "comm": {
            "bandwidth": scenario.comm.bandwidth,
            "beta0": scenario.comm.beta0,
            "theta": scenario.comm.theta,
            "noise_power": scenario.comm.noise_power,
        },
        "uav": {
            "speed": scenario.uav.speed,
            "fly_power": scenario.uav.fly_power,
            "hover_power": scenario.uav.hover_power,
            "signal_range": scenario.uav.signal_range,
            "altitude": scenario.uav.altitude,
            "battery_capacity": scenario.uav.battery_capacity,
            "tx_power": scenario.uav.tx_power,
        },
        "devices": [
            {
                "id": d.id,
                "kind": d.kind.value,
                "task": d.task.value,
                "x": d.x,
                "y": d.y,
                "capacity_J": d.battery_capacity,
                "has_power": d.has_power,
                "has_comm": d.has_comm,
                "task_power_W": d.task_power,
                "processing_rate_Bps": d.processing_rate,
            }
            for d in scenario.devices
        ],
        **({"priority_weights": list(scenario.priority_weights)}
           if scenario.priority_weights is not None else {}),
    }


def from_dict(data: dict) -> Scenario:
    if data.get("version") != FORMAT_VERSION:
        raise ScenarioError(f"unsupported scenario format version {data.get('version')!r}")
    cfg = SimConfig(**data["config"])
    comm = CommModel(**data["comm"])
    uav = UavSpec(**data["uav"])
    kinds = {k.value: k for k in DeviceKind}
    tasks = {t.value: t for t in TaskKind}
    devices = tuple(
        DeviceSpec(
            id=d["id"], kind=kinds[d["kind"]], task=tasks[d["task"]],
            x=d["x"], y=d["y"], battery_capacity=d["capacity_J"],
            has_power=d["has_power"], has_comm=d["has_comm"],
            task_power=d["task_power_W"], processing_rate=d["processing_rate_Bps"],
        )
        for d in data["devices"]
    )
    weights = data.get("priority_weights")
    scenario = Scenario(
        config=cfg, comm=comm, uav=uav, devices=devices, seed=data["seed"],
        priority_weights=tuple(float(w) for w in weights) if weights is not None else None,
    )
    validate(scenario)
    return scenario


def save(scenario: Scenario, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(to_dict(scenario), fh, indent=2)
        fh.write("\n")


def load(path: str | Path) -> Scenario:
    with open(path) as fh:
        return from_dict(json.load(fh))


def validate(scenario: Scenario) -> None:
    cfg = scenario.config
    if len(scenario.devices) != cfg.n_devices:
        raise ScenarioError(f"device count {len(scenario.devices)} != n_devices {cfg.n_devices}")
    for d in scenario.devices:
        if not (0.0 <= d.x <= cfg.region_width and 0.0 <= d.y <= cfg.region_height):
            raise ScenarioError(f"device {d.id} position ({d.x}, {d.y}) outside region")
        if not 50_000.0 <= d.battery_capacity <= 80_000.0:
            raise ScenarioError(f"device {d.id} capacity {d.battery_capacity} outside [50e3, 80e3] J")
    if scenario.priority_weights is not None and len(scenario.priority_weights) != cfg.n_devices:
        raise ScenarioError("priority_weights length mismatch")
