"""Four-path cost aggregation along the raster-compatible directions.

The recursion for one path step is

    L(d) = C(d) + min(prev(d), prev(d-1)+P1, prev(d+1)+P1, min_i prev(i) + P2)
                - min_i prev(i)

with out-of-range d+-1 candidates omitted and a path restart (L = C) at
image borders. Directions are 0, 45, 90 and 135 degrees; their sum S is the
aggregated volume. Two executors are provided: the plain raster-order scan
(:func:`aggregate`) and the interleave-and-reorder schedule
(:func:`aggregate_interleaved`); they are bit-identical by construction and
by test.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np

from . import kernels
from .costvolume import CostVolume, _dump_volume

#: Penalty cap keeping all path arithmetic comfortably inside 32 bits.
MAX_PENALTY = 1 << 20


@dataclass(frozen=True)
class AggregationParams:
    """Path penalties: P1 for +-1 disparity steps, P2 for larger jumps."""

    p1: int
    p2: int
    skip_validation: InitVar[bool] = False

    def __post_init__(self, skip_validation: bool):
        if skip_validation:
            return
        if not (0 < self.p1 < self.p2):
            raise ValueError(f"penalties must satisfy 0 < P1 < P2, got P1={self.p1} P2={self.p2}")
        if self.p2 > MAX_PENALTY:
            raise ValueError(f"P2={self.p2} exceeds the supported maximum {MAX_PENALTY}")


@dataclass(frozen=True, eq=False)
class AggregatedVolume:
    """H x W x d_max summed path costs S(p, d) with their bit width."""

    sums: np.ndarray
    sum_width: int

    def __post_init__(self):
        s = np.asarray(self.sums)
        if s.ndim != 3:
            raise ValueError(f"sums must be 3-D (H, W, d_max), got shape {s.shape}")
        object.__setattr__(self, "sums", np.ascontiguousarray(s, dtype=np.uint32))

    @property
    def height(self) -> int:
        return self.sums.shape[0]

    @property
    def width(self) -> int:
        return self.sums.shape[1]

    @property
    def d_max(self) -> int:
        return self.sums.shape[2]


def path_recurrence(prev, cur_costs, params: AggregationParams) -> list[int]:
    """One recursion step over the disparity axis (prev=None restarts)."""
    cur = [int(v) for v in cur_costs]
    if prev is None:
        return cur
    prev = [int(v) for v in prev]
    if len(prev) != len(cur):
        raise ValueError("prev and cur_costs must have equal length")
    out = []
    m = min(prev)
    d_max = len(prev)
    for d in range(d_max):
        candidates = [prev[d], m + params.p2]
        if d > 0:
            candidates.append(prev[d - 1] + params.p1)
        if d + 1 < d_max:
            candidates.append(prev[d + 1] + params.p1)
        out.append(cur[d] + min(candidates) - m)
    return out


def _sum_width(volume: CostVolume, params: AggregationParams) -> int:
    from .hwmodel import sum_bit_width

    return sum_bit_width(volume.fn.kind, volume.fn.window, params.p2)


def aggregate(volume: CostVolume, params: AggregationParams) -> AggregatedVolume:
    """Aggregate along the four forward directions in plain raster order."""
    sums = kernels.aggregate(volume.costs, params.p1, params.p2)
    return AggregatedVolume(sums=sums, sum_width=_sum_width(volume, params))


def aggregate_interleaved(volume: CostVolume, params: AggregationParams) -> AggregatedVolume:
    """Aggregate with the interleaved row schedule; bit-identical to aggregate()."""
    sums = kernels.aggregate_interleaved(volume.costs, params.p1, params.p2)
    return AggregatedVolume(sums=sums, sum_width=_sum_width(volume, params))


def interleave_schedule(width: int) -> list[int]:
    """Slot order of one row under interleaving: 0, W/2, 1, W/2+1, ...

    For odd widths the internal padding slot is dropped, so the result is
    always a permutation of range(width).
    """
    if width < 1:
        raise ValueError(f"width must be >= 1, got {width}")
    half = (width + 1) // 2
    order = []
    for k in range(half):
        order.append(k)
        if half + k < width:
            order.append(half + k)
    return order


def dependency_distance(schedule, width: int) -> int:
    """Minimum slot gap between horizontally dependent pixels of a schedule.

    The 0-degree recursion makes pixel x+1 depend on pixel x of the same
    row chain; the returned value is the smallest slot-index distance over
    all such pairs (1 for plain raster order, 2 for the interleaved order).
    """
    schedule = [int(v) for v in schedule]
    if sorted(schedule) != list(range(width)):
        raise ValueError(f"schedule is not a permutation of range({width})")
    if width < 2:
        return 0
    slot_of = [0] * width
    for slot, x in enumerate(schedule):
        slot_of[x] = slot
    return min(abs(slot_of[x + 1] - slot_of[x]) for x in range(width - 1))


def dump_aggregated_volume(volume: AggregatedVolume, path) -> None:
    """Binary dump in the cost-volume format, with sum_width in the header."""
    _dump_volume(volume.width, volume.height, volume.d_max, volume.sum_width,
                 volume.sums, path)


__all__ = [
    "AggregationParams",
    "AggregatedVolume",
    "MAX_PENALTY",
    "aggregate",
    "aggregate_interleaved",
    "dependency_distance",
    "dump_aggregated_volume",
    "interleave_schedule",
    "path_recurrence",
]
