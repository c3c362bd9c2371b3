"""Traffic-density ingestion for evacuation-priority runs.

Road-segment densities come from an external traffic simulation, exported
as a CSV of segment midpoints (already transformed into the scenario's
local meter frame) and mean vehicle densities. A device's priority weight
is the densest segment within a fixed radius, normalized by the densest
segment anywhere, so weights live in [0, 1] and are invariant to rescaling
all densities.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

from .scenario import Scenario
from .simcore import DeviceSpec

DEFAULT_RADIUS = 50.0

HEADER = ["segment_id", "x", "y", "mean_density"]


@dataclass(frozen=True)
class RoadSegment:
    id: str
    x: float
    y: float
    mean_density: float  # vehicles per km, >= 0


class DensityFormatError(ValueError):
    pass


def load_density(path: str | Path) -> list[RoadSegment]:
    """Parse a density CSV; malformed rows are rejected with line numbers."""
    segments = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != HEADER:
            raise DensityFormatError(f"{path}: expected header {','.join(HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise DensityFormatError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            seg_id, xs, ys, ds = (c.strip() for c in row)
            try:
                x, y, density = float(xs), float(ys), float(ds)
            except ValueError:
                raise DensityFormatError(f"{path}:{lineno}: non-numeric coordinate or density") from None
            if density < 0:
                raise DensityFormatError(f"{path}:{lineno}: negative density {density}")
            segments.append(RoadSegment(id=seg_id, x=x, y=y, mean_density=density))
    return segments


def device_priority(device: DeviceSpec, segments: list[RoadSegment],
                    radius: float = DEFAULT_RADIUS) -> float:
    """Priority weight in [0, 1] for one device.

    Max density among segments within radius meters of the device, divided
    by the global max density; 0 when no segment is near (or none exist).
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if not segments:
        return 0.0
    global_max = max(s.mean_density for s in segments)
    if global_max <= 0:
        return 0.0
    near = [s.mean_density for s in segments
            if math.hypot(s.x - device.x, s.y - device.y) <= radius]
    if not near:
        return 0.0
    return max(near) / global_max


def scenario_priorities(scenario: Scenario, segments: list[RoadSegment],
                        radius: float = DEFAULT_RADIUS) -> Scenario:
    """Attach per-device priority weights derived from the density map."""
    weights = [device_priority(d, segments, radius) for d in scenario.devices]
    return scenario.with_priority_weights(weights)
