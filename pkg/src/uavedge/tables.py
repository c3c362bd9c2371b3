"""Device capability data.

Five single-board-computer models running five computer-vision workloads.
For every (device kind, task) pair the table carries the active compute
power draw in watts and the local processing throughput in bytes/second;
each device kind additionally has a standby draw that applies for the whole
time slot. The built-in numbers can be overridden row-by-row from a CSV
file with columns ``kind,task,power_w,rate_Bps``.
"""

from __future__ import annotations

import csv
from enum import Enum
from pathlib import Path


class DeviceKind(Enum):
    RASPBERRY_PI_4B = "RaspberryPi4B"
    RASPBERRY_PI_3B = "RaspberryPi3B"
    FIREFLY = "Firefly"
    JETSON_NANO = "JetsonNano"
    NANO_PC_T4 = "NanoPCT4"

    @property
    def standby_power(self) -> float:
        """Idle draw in watts, paid in every time slot."""
        return STANDBY_POWER_W[self]


class TaskKind(Enum):
    HAAR = "HAAR"
    MMOD = "MMOD"
    DNN = "DNN"
    DLIB = "Dlib"
    YOLOV3 = "YOLOv3"


STANDBY_POWER_W = {
    DeviceKind.RASPBERRY_PI_4B: 2.65,
    DeviceKind.RASPBERRY_PI_3B: 1.69,
    DeviceKind.FIREFLY: 4.87,
    DeviceKind.JETSON_NANO: 2.82,
    DeviceKind.NANO_PC_T4: 1.88,
}

_KIND_ORDER = [
    DeviceKind.RASPBERRY_PI_4B,
    DeviceKind.RASPBERRY_PI_3B,
    DeviceKind.FIREFLY,
    DeviceKind.JETSON_NANO,
    DeviceKind.NANO_PC_T4,
]

# Active compute power, watts, rows keyed by task.
_TASK_POWER_ROWS = {
    TaskKind.HAAR: [2.165, 1.287, 2.352, 1.36, 3.391],
    TaskKind.MMOD: [1.335, 1.621, 1.124, 0.92, 1.582],
    TaskKind.DNN: [3.234, 1.9, 2.972, 2.421, 2.595],
    TaskKind.DLIB: [1.91, 4.38, 2.54, 1.01, 5.06],
    TaskKind.YOLOV3: [3.268, 1.925, 3.07, 1.35, 2.874],
}

# Local processing throughput, bytes/second.
_PROCESSING_RATE_ROWS = {
    TaskKind.HAAR: [74536.25, 2758.14, 4734.16, 23867.61, 1854.59],
    TaskKind.MMOD: [12318.36, 1114.03, 1183.72, 5277.71, 949.66],
    TaskKind.DNN: [71731.84, 3767.51, 949.36, 40294.21, 973.1],
    TaskKind.DLIB: [65088.52, 87894.05, 13020.39, 65264.07, 6957.73],
    TaskKind.YOLOV3: [69985.94, 7066.79, 2733.97, 22230.58, 8298.13],
}

# (kind, task) -> (power_w, rate_Bps)
CapabilityTable = dict


def default_capability_table() -> CapabilityTable:
    table = {}
    for task, powers in _TASK_POWER_ROWS.items():
        rates = _PROCESSING_RATE_ROWS[task]
        for kind, power, rate in zip(_KIND_ORDER, powers, rates):
            table[(kind, task)] = (power, rate)
    return table


class CapabilityTableError(ValueError):
    pass


def load_capability_table(path: str | Path, base: CapabilityTable | None = None) -> CapabilityTable:
    """Read capability overrides from a CSV file onto the built-in table.

    Expected header: ``kind,task,power_w,rate_Bps``. Unknown kind/task names,
    missing fields, or non-positive rates raise CapabilityTableError with the
    offending line number.
    """
    table = dict(base) if base is not None else default_capability_table()
    kinds = {k.value: k for k in DeviceKind}
    tasks = {t.value: t for t in TaskKind}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["kind", "task", "power_w", "rate_Bps"]:
            raise CapabilityTableError(f"{path}: expected header kind,task,power_w,rate_Bps")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise CapabilityTableError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            kind_name, task_name, power_s, rate_s = (c.strip() for c in row)
            if kind_name not in kinds:
                raise CapabilityTableError(f"{path}:{lineno}: unknown device kind {kind_name!r}")
            if task_name not in tasks:
                raise CapabilityTableError(f"{path}:{lineno}: unknown task {task_name!r}")
            try:
                power = float(power_s)
                rate = float(rate_s)
            except ValueError:
                raise CapabilityTableError(f"{path}:{lineno}: non-numeric power or rate") from None
            if power < 0 or rate <= 0:
                raise CapabilityTableError(f"{path}:{lineno}: power must be >= 0 and rate > 0")
            table[(kinds[kind_name], tasks[task_name])] = (power, rate)
    return table
