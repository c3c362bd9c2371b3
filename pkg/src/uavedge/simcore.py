"""Physics and bookkeeping of one time slot.

A slot begins with the UAV flying from its current position to a hover
point directly above the chosen device. Every device drew a fresh task
volume at the start of the slot. Devices inside the UAV signal sphere
upload their task data one after another (the UAV computes for them);
everyone else grinds through the task locally, wall-clock capped. The slot
ends when both the UAV (travel + uploads) and the slowest local computation
are finished. Batteries of devices without grid power drain by either the
upload cost or the local-compute cost; the data age of a device without a
communication channel grows by one unless the UAV visited it this slot.

The episode ends the first time a device battery would go negative, a data
age passes the configured limit, or the UAV battery runs out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tables import DeviceKind, TaskKind


@dataclass(frozen=True)
class CommModel:
    """Uplink model: distance-dependent gain driving a Shannon-rate SNR."""

    bandwidth: float = 2.0e7      # Hz
    beta0: float = 1.0e-5        # reference gain at 1 m (-50 dB)
    theta: float = 4.0           # path-loss exponent
    noise_power: float = 1.0e-13  # W (-100 dBm)


@dataclass(frozen=True)
class UavSpec:
    speed: float = 5.0                 # m/s
    fly_power: float = 150.0           # W while moving
    hover_power: float = 80.0          # W while stationary
    signal_range: float = 65.0         # m, 3-D
    altitude: float = 10.0             # m above ground
    battery_capacity: float = 1.6e6    # J
    tx_power: float = 0.1              # W, upload transmit power


@dataclass(frozen=True)
class SimConfig:
    region_width: float = 800.0
    region_height: float = 800.0
    n_devices: int = 12
    task_volume_min: float = 2.0e6     # bytes
    task_volume_max: float = 4.0e6     # bytes
    data_age_limit: int = 10           # slots a device may go unheard
    slot_processing_cap: float = 600.0  # s, local compute wall-clock cap
    result_payload: float = 1024.0     # bytes, result upload for connected devices


@dataclass(frozen=True)
class DeviceSpec:
    id: int
    kind: DeviceKind
    task: TaskKind
    x: float
    y: float
    battery_capacity: float            # J, in [50e3, 80e3]
    has_power: bool = True             # grid power available (battery never drains)
    has_comm: bool = True              # own backhaul (data age pinned at 0)
    task_power: float = 0.0            # W while computing, from the capability table
    processing_rate: float = 1.0       # bytes/s, from the capability table

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    @property
    def standby_power(self) -> float:
        return self.kind.standby_power


@dataclass
class DeviceState:
    battery: float
    data_age: int = 0


@dataclass
class UavState:
    x: float = 0.0
    y: float = 0.0
    battery: float = 1.6e6


DEVICE_BATTERY_DEPLETED = "DeviceBatteryDepleted"
DATA_EXPIRED = "DataExpired"
UAV_BATTERY_DEPLETED = "UavBatteryDepleted"


@dataclass(frozen=True)
class TerminationCause:
    kind: str
    device_id: int | None = None

    @classmethod
    def device_battery(cls, device_id: int) -> "TerminationCause":
        return cls(DEVICE_BATTERY_DEPLETED, device_id)

    @classmethod
    def data_expired(cls, device_id: int) -> "TerminationCause":
        return cls(DATA_EXPIRED, device_id)

    @classmethod
    def uav_battery(cls) -> "TerminationCause":
        return cls(UAV_BATTERY_DEPLETED)

    def __str__(self) -> str:
        if self.device_id is None:
            return self.kind
        return f"{self.kind}({self.device_id})"


@dataclass(frozen=True)
class TimeSlotOutcome:
    """Everything that happened in one slot.

    per_device_energy is the battery draw per device (zero for devices on
    grid power), pre-clamp; per_device_age are the ages after the slot.
    """

    action: int
    served_ids: tuple[int, ...]
    travel_time: float
    travel_energy: float
    offload_times: dict[int, float]
    slot_duration: float
    per_device_energy: tuple[float, ...]
    per_device_age: tuple[int, ...]
    uav_energy: float
    terminated: TerminationCause | None = None


# ---------------------------------------------------------------------------
# per-quantity operations


def channel_gain(l: float, comm: CommModel = CommModel()) -> float:
    """Dimensionless link gain at distance l meters: beta0 * l**-theta."""
    if l <= 0:
        raise ValueError(f"link distance must be positive, got {l}")
    return comm.beta0 * l ** -comm.theta


def transmission_rate(l: float, comm: CommModel = CommModel(), uav: UavSpec = UavSpec()) -> float:
    """Shannon uplink rate in bits/s at distance l meters."""
    snr = uav.tx_power * channel_gain(l, comm) / comm.noise_power
    return comm.bandwidth * math.log2(1.0 + snr)


def local_processing_time(spec: DeviceSpec, volume: float, cap: float) -> float:
    """Wall-clock seconds to process volume bytes locally, capped."""
    if volume < 0:
        raise ValueError("task volume must be nonnegative")
    return min(volume / spec.processing_rate, cap)


def local_processing_energy(spec: DeviceSpec, t_proc: float, t_slot: float) -> float:
    """Compute draw while processing plus standby draw for the whole slot."""
    if not 0 <= t_proc <= t_slot:
        raise ValueError(f"processing time {t_proc} not in [0, {t_slot}]")
    return (spec.task_power + spec.standby_power) * t_proc + spec.standby_power * (t_slot - t_proc)


def offload_energy(uav: UavSpec, spec: DeviceSpec, t_tx: float, t_slot: float) -> float:
    """Upload draw at transmit power plus standby for the slot; no local compute."""
    if not 0 <= t_tx <= t_slot:
        raise ValueError(f"transmission time {t_tx} not in [0, {t_slot}]")
    return uav.tx_power * t_tx + spec.standby_power * t_slot


def travel(origin: tuple[float, float], dest: tuple[float, float], uav: UavSpec) -> tuple[float, float]:
    """(seconds, joules) for a straight constant-speed hop."""
    dist = math.hypot(dest[0] - origin[0], dest[1] - origin[1])
    t = dist / uav.speed
    return t, uav.fly_power * t


def devices_in_range(hover_point: tuple[float, float], uav: UavSpec, devices) -> set[int]:
    """Ids whose 3-D distance to the UAV hovering above hover_point is within signal range."""
    hx, hy = hover_point
    alt2 = uav.altitude ** 2
    out = set()
    for dev in devices:
        d3 = math.sqrt((dev.x - hx) ** 2 + (dev.y - hy) ** 2 + alt2)
        if d3 <= uav.signal_range:
            out.add(dev.id)
    return out


# ---------------------------------------------------------------------------
# episode engine


class Simulation:
    """One episode of one scenario: owns device/UAV state and a volume stream.

    Single-threaded and self-contained; run one instance per worker for
    parallel sweeps. Device parameters are pre-packed into arrays so a step
    is a handful of vectorized operations.
    """

    def __init__(self, scenario, volume_rng: np.random.Generator):
        cfg = scenario.config
        devs = scenario.devices
        self.scenario = scenario
        self.config = cfg
        self.uav_spec = scenario.uav
        self.comm = scenario.comm
        self.n = len(devs)

        self._xs = np.array([d.x for d in devs])
        self._ys = np.array([d.y for d in devs])
        self._capacity = np.array([d.battery_capacity for d in devs])
        self._task_power = np.array([d.task_power for d in devs])
        self._standby = np.array([d.standby_power for d in devs])
        self._proc_rate = np.array([d.processing_rate for d in devs])
        self._has_power = np.array([d.has_power for d in devs])
        self._has_comm = np.array([d.has_comm for d in devs])
        self._ids = np.arange(self.n)

        self.reset(volume_rng)

    def reset(self, volume_rng: np.random.Generator) -> None:
        """Full batteries, zero ages, UAV at the region origin."""
        self._rng = volume_rng
        self.batteries = self._capacity.copy()
        self.ages = np.zeros(self.n, dtype=np.int64)
        self.uav_x = 0.0
        self.uav_y = 0.0
        self.uav_battery = self.uav_spec.battery_capacity
        self.slot_count = 0
        self.terminated: TerminationCause | None = None

    # -- observations -------------------------------------------------

    def battery_fractions(self) -> np.ndarray:
        return self.batteries / self._capacity

    def min_battery_fraction(self) -> float:
        return float(np.min(self.batteries / self._capacity))

    def state_vector(self, normalize_age: bool = False) -> np.ndarray:
        """Battery fractions followed by data ages, length 2 * n_devices."""
        ages = self.ages / self.config.data_age_limit if normalize_age else self.ages
        return np.concatenate([self.batteries / self._capacity, ages.astype(float)])

    # -- dynamics -------------------------------------------------------

    def step(self, action: int) -> TimeSlotOutcome:
        if self.terminated is not None:
            raise RuntimeError(f"episode already terminated ({self.terminated})")
        if not 0 <= action < self.n:
            raise ValueError(f"action {action} outside [0, {self.n})")
        cfg = self.config
        uav = self.uav_spec
        comm = self.comm

        volumes = self._rng.uniform(cfg.task_volume_min, cfg.task_volume_max, self.n)

        hx = self._xs[action]
        hy = self._ys[action]
        travel_dist = math.hypot(hx - self.uav_x, hy - self.uav_y)
        travel_time = travel_dist / uav.speed
        travel_energy = uav.fly_power * travel_time

        d3 = np.sqrt((self._xs - hx) ** 2 + (self._ys - hy) ** 2 + uav.altitude ** 2)
        served = d3 <= uav.signal_range

        snr = uav.tx_power * comm.beta0 * d3 ** -comm.theta / comm.noise_power
        rate = comm.bandwidth * np.log2(1.0 + snr)
        t_tx = np.where(served, volumes * 8.0 / rate, 0.0)
        t_proc = np.where(served, 0.0, np.minimum(volumes / self._proc_rate, cfg.slot_processing_cap))

        slot_duration = max(travel_time + float(t_tx.sum()), float(t_proc.max()))

        draw = np.where(
            served,
            uav.tx_power * t_tx + self._standby * slot_duration,
            (self._task_power + self._standby) * t_proc + self._standby * (slot_duration - t_proc),
        )
        draw = np.where(self._has_power, 0.0, draw)
        new_batt = self.batteries - draw

        new_ages = np.where(self._has_comm, 0, self.ages + 1)
        new_ages[action] = 0

        uav_energy = travel_energy + uav.hover_power * (slot_duration - travel_time)
        new_uav_battery = self.uav_battery - uav_energy

        cause = None
        depleted = new_batt < 0.0
        expired = new_ages > cfg.data_age_limit
        if depleted.any():
            cause = TerminationCause.device_battery(int(np.argmax(depleted)))
        elif expired.any():
            cause = TerminationCause.data_expired(int(np.argmax(expired)))
        elif new_uav_battery <= 0.0:
            cause = TerminationCause.uav_battery()

        self.batteries = np.maximum(new_batt, 0.0)
        self.ages = new_ages
        self.uav_x = float(hx)
        self.uav_y = float(hy)
        self.uav_battery = new_uav_battery
        self.slot_count += 1
        self.terminated = cause

        served_ids = tuple(int(i) for i in self._ids[served])
        return TimeSlotOutcome(
            action=action,
            served_ids=served_ids,
            travel_time=travel_time,
            travel_energy=travel_energy,
            offload_times={i: float(t_tx[i]) for i in served_ids},
            slot_duration=slot_duration,
            per_device_energy=tuple(float(e) for e in draw),
            per_device_age=tuple(int(a) for a in new_ages),
            uav_energy=uav_energy,
            terminated=cause,
        )


def step(scenario, uav_state: UavState, device_states: list[DeviceState], action: int,
         rng: np.random.Generator) -> tuple[TimeSlotOutcome, UavState, list[DeviceState]]:
    """Pure single-slot transition on explicit states.

    Convenience wrapper over Simulation for callers that hold their own
    state; returns the outcome plus the successor states.
    """
    sim = Simulation(scenario, rng)
    sim.batteries = np.array([s.battery for s in device_states], dtype=float)
    sim.ages = np.array([s.data_age for s in device_states], dtype=np.int64)
    sim.uav_x = uav_state.x
    sim.uav_y = uav_state.y
    sim.uav_battery = uav_state.battery
    outcome = sim.step(action)
    new_dev = [DeviceState(battery=float(b), data_age=int(a))
               for b, a in zip(sim.batteries, sim.ages)]
    new_uav = UavState(x=sim.uav_x, y=sim.uav_y, battery=sim.uav_battery)
    return outcome, new_uav, new_dev
