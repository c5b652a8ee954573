"""Design-space sweep: run configurations over stereo pairs, score D1 accuracy,
attach hardware estimates, and emit CSV plus Pareto fronts."""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .aggregation import AggregationParams
from .costvolume import CostFunction, CostKind
from .hwmodel import HwEstimate, PipelineConfig, estimate
from .pixelio import INVALID, ConfigError, DisparityMap, GrayImage, StereoPair
from .refine import LrMode, RefinementConfig, d1_error, run_pipeline

logger = logging.getLogger(__name__)

#: Fixed CSV schema; keep stable for downstream plotting.
CSV_HEADER = (
    "cost,win,dmax,uf,lr,median,width,height,d1_all,cycles,runtime_s,fps,"
    "mem_bits_packed,cost_width,path_width,sum_width,wall_time_s"
)


@dataclass(frozen=True)
class SweepSpec:
    """Axes of the configuration grid; invalid combinations are skipped."""

    cost_fns: tuple = (CostKind.CENSUS,)
    windows: tuple = (5,)
    d_maxes: tuple = (64,)
    ufs: tuple = (16,)
    lr_modes: tuple = (LrMode.NLR,)
    medians: tuple = (True,)
    resolutions: tuple = ()  # (width, height) downscale targets; empty = native
    penalties: AggregationParams | None = None  # None = per-cost-function defaults


@dataclass(frozen=True)
class SweepRecord:
    """One evaluated configuration, pooled over the dataset."""

    cost: str
    win: int
    dmax: int
    uf: int
    lr: str
    median: bool
    width: int
    height: int
    d1_all: float | None
    estimate: HwEstimate
    wall_time_s: float | None

    @property
    def runtime_s(self) -> float:
        return self.estimate.seconds

    @property
    def mem_bits(self) -> int:
        return self.estimate.mem_bits_packed

    def csv_row(self, include_wall_time: bool) -> list[str]:
        est = self.estimate
        return [
            self.cost,
            str(self.win),
            str(self.dmax),
            str(self.uf),
            self.lr,
            "true" if self.median else "false",
            str(self.width),
            str(self.height),
            "" if self.d1_all is None else f"{self.d1_all:.6f}",
            str(est.total_cycles),
            f"{est.seconds:.9f}",
            str(int(1.0 / est.seconds)),
            str(est.mem_bits_packed),
            str(est.cost_width),
            str(est.path_width),
            str(est.sum_width),
            "" if (self.wall_time_s is None or not include_wall_time)
            else f"{self.wall_time_s:.3f}",
        ]


# ---------------------------------------------------------------------------
# Downscaling
# ---------------------------------------------------------------------------


def _axis_factor(original: int, target: int) -> int:
    if target < 1:
        raise ValueError(f"downscale target must be positive, got {target}")
    return max(1, _round_half_up(original, target))


def _round_half_up(num: int, den: int) -> int:
    return (2 * num + den) // (2 * den)


def downscale_image(image: GrayImage, fx: int, fy: int) -> GrayImage:
    """Integer-factor downscale by block averaging (remainder pixels dropped)."""
    h, w = image.height // fy, image.width // fx
    px = image.pixels[: h * fy, : w * fx].astype(np.uint32)
    blocks = px.reshape(h, fy, w, fx)
    avg = blocks.sum(axis=(1, 3)) // (fx * fy)
    return GrayImage(avg.astype(np.uint8))


def downscale_disparity(disp: DisparityMap, fx: int, fy: int) -> DisparityMap:
    """Subsample ground truth; disparities scale by the horizontal factor."""
    h, w = disp.height // fy, disp.width // fx
    sampled = disp.data[: h * fy : fy, : w * fx : fx]
    scaled = np.where(sampled == INVALID, INVALID, _round_half_up(sampled, fx))
    return DisparityMap(scaled.astype(np.int32))


def downscale_pair(pair: StereoPair, target: tuple[int, int]) -> StereoPair:
    """Downscale a pair toward a (width, height) target with integer factors."""
    fx = _axis_factor(pair.width, target[0])
    fy = _axis_factor(pair.height, target[1])
    if fx == 1 and fy == 1:
        return pair
    gt = pair.ground_truth
    return StereoPair(
        base=downscale_image(pair.base, fx, fy),
        match=downscale_image(pair.match, fx, fy),
        ground_truth=None if gt is None else downscale_disparity(gt, fx, fy),
    )


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------


def _grid(spec: SweepSpec):
    """Deterministic (lexicographic) enumeration of the configuration grid."""
    kinds = sorted(CostKind(k).value for k in spec.cost_fns)
    lrs = sorted(LrMode(m).value for m in spec.lr_modes)
    resolutions = tuple(spec.resolutions) or (None,)
    for kind in kinds:
        for win in sorted(spec.windows):
            for dmax in sorted(spec.d_maxes):
                for uf in sorted(spec.ufs):
                    for lr in lrs:
                        for median in sorted(spec.medians):
                            for res in resolutions:
                                yield kind, win, dmax, uf, lr, median, res


def run_sweep(
    spec: SweepSpec,
    dataset: list[StereoPair],
    out,
    *,
    include_wall_time: bool = False,
) -> list[SweepRecord]:
    """Evaluate every valid grid point over the dataset and write one CSV.

    D1 is pixel-pooled over the pairs that carry ground truth; pairs without
    it still run (the d1 column stays empty when no pair has truth). Invalid
    combinations (uf not dividing d_max, unsupported windows, d_max >= width)
    are skipped with a logged notice. Two runs over the same inputs produce
    byte-identical CSVs; wall-clock times are only written on request since
    they are not reproducible.
    """
    if not dataset:
        raise ValueError("dataset must contain at least one stereo pair")
    dims = {(p.width, p.height) for p in dataset}
    if len(dims) > 1:
        raise ValueError(f"dataset pairs must share one resolution, got {sorted(dims)}")
    records: list[SweepRecord] = []
    for kind, win, dmax, uf, lr, median, res in _grid(spec):
        label = f"cost={kind} win={win} dmax={dmax} uf={uf} lr={lr} median={median}" + (
            "" if res is None else f" res={res[0]}x{res[1]}"
        )
        pairs = dataset if res is None else [downscale_pair(p, res) for p in dataset]
        if dmax >= pairs[0].width:
            logger.info("skipping %s: d_max %d >= image width %d", label, dmax, pairs[0].width)
            continue
        try:
            fn = CostFunction(CostKind(kind), win)
            config = PipelineConfig(
                cost_fn=fn,
                d_max=dmax,
                uf=uf,
                width=pairs[0].width,
                height=pairs[0].height,
                params=spec.penalties,
                refine=RefinementConfig(lr_mode=LrMode(lr), median=median),
            )
        except (ConfigError, ValueError) as exc:
            logger.info("skipping %s: %s", label, exc)
            continue

        t0 = time.perf_counter()
        total_eval = 0
        total_bad = 0
        for pair in pairs:
            disp = run_pipeline(pair, config)
            if pair.ground_truth is not None:
                report = d1_error(disp, pair.ground_truth)
                total_eval += report.evaluated_pixels
                total_bad += report.erroneous_pixels
        wall = time.perf_counter() - t0
        records.append(
            SweepRecord(
                cost=kind,
                win=win,
                dmax=dmax,
                uf=uf,
                lr=lr,
                median=median,
                width=config.width,
                height=config.height,
                d1_all=(total_bad / total_eval) if total_eval else None,
                estimate=estimate(config),
                wall_time_s=wall,
            )
        )
    if not records:
        raise ConfigError("sweep grid contains no valid configuration")
    if out is not None:
        write_csv(records, out, include_wall_time=include_wall_time)
    return records


def write_csv(records: list[SweepRecord], out, *, include_wall_time: bool = False) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for rec in records:
        writer.writerow(rec.csv_row(include_wall_time))
    Path(out).write_text(buf.getvalue(), encoding="utf-8")


# ---------------------------------------------------------------------------
# Pareto front
# ---------------------------------------------------------------------------

#: Objective name -> value extractor (all minimized).
OBJECTIVES = {
    "d1_all": lambda r: r.d1_all,
    "runtime": lambda r: r.runtime_s,
    "mem_bits": lambda r: r.mem_bits,
}


def pareto_front(records: list[SweepRecord], objectives=("d1_all", "runtime")) -> list[SweepRecord]:
    """Non-dominated records under strict Pareto dominance (minimization).

    Records missing a requested objective value (for example d1 without
    ground truth) are excluded with a logged notice. The result is sorted
    by the first objective.
    """
    if not records:
        raise ValueError("need at least one record")
    if len(objectives) < 2:
        raise ValueError("need at least two objectives")
    for name in objectives:
        if name not in OBJECTIVES:
            raise ValueError(f"unknown objective {name!r} (known: {sorted(OBJECTIVES)})")
    getters = [OBJECTIVES[name] for name in objectives]

    scored = []
    for rec in records:
        values = tuple(g(rec) for g in getters)
        if any(v is None for v in values):
            logger.info("pareto_front: record %s lacks %s, excluded", rec, objectives)
            continue
        scored.append((values, rec))

    front = []
    for i, (vi, ri) in enumerate(scored):
        dominated = False
        for j, (vj, _) in enumerate(scored):
            if j == i:
                continue
            if all(a <= b for a, b in zip(vj, vi)) and any(a < b for a, b in zip(vj, vi)):
                dominated = True
                break
        if not dominated:
            front.append((vi, ri))
    front.sort(key=lambda item: item[0][0])
    return [rec for _, rec in front]
