"""Disparity selection and refinement: WTA, L-R consistency, median, D1 metric."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .aggregation import AggregatedVolume, AggregationParams, aggregate
from .costvolume import compute_cost_volume, compute_cost_volume_pair
from .pixelio import INVALID, DisparityMap, StereoPair


class LrMode(str, enum.Enum):
    NLR = "nlr"  # no consistency check
    LR1 = "lr1"  # match disparity reused from the base aggregated volume
    LR2 = "lr2"  # match disparity aggregated from scratch


@dataclass(frozen=True)
class RefinementConfig:
    lr_mode: LrMode = LrMode.NLR
    lr_threshold: int = 1
    median: bool = True
    median_window: int = 3

    def __post_init__(self):
        object.__setattr__(self, "lr_mode", LrMode(self.lr_mode))
        if self.lr_threshold < 0:
            raise ValueError(f"lr_threshold must be >= 0, got {self.lr_threshold}")
        if self.median_window < 3 or self.median_window % 2 == 0:
            raise ValueError(f"median window must be odd and >= 3, got {self.median_window}")


@dataclass(frozen=True)
class D1Report:
    """KITTI-style error rate: wrong by more than 3 px and more than 5%."""

    d1_all: float
    evaluated_pixels: int
    erroneous_pixels: int


def wta(agg: AggregatedVolume) -> DisparityMap:
    """Winner-takes-all: argmin_d S(p, d), ties broken toward the smaller d."""
    return DisparityMap(np.argmin(agg.sums, axis=2).astype(np.int32))


def match_disparity_reuse(agg: AggregatedVolume) -> DisparityMap:
    """Match-image disparity from the base volume: argmin_d S(x+d, d).

    Runs the streaming register-cascade scheme; candidates with x+d outside
    the image are excluded. Ties break toward the smaller d.
    """
    return DisparityMap(kernels.match_disparity(agg.sums))


def reference_match_disparity(agg: AggregatedVolume) -> DisparityMap:
    """Naive argmin over the anti-diagonal S(x+d, d); oracle for the cascade."""
    sums = agg.sums
    h, w, d_max = sums.shape
    out = np.empty((h, w), dtype=np.int32)
    for y in range(h):
        for x in range(w):
            best_v = None
            best_d = 0
            for d in range(d_max):
                if x + d >= w:
                    break
                v = int(sums[y, x + d, d])
                if best_v is None or v < best_v:
                    best_v = v
                    best_d = d
            out[y, x] = best_d
    return DisparityMap(out)


def lr_check(d_base: DisparityMap, d_match: DisparityMap, threshold: int = 1) -> DisparityMap:
    """Invalidate base pixels whose match-image disparity disagrees.

    Pixel p keeps d_base(p) when |d_base(p) - d_match(p - d_base(p))| <=
    threshold; pixels whose counterpart falls outside the image (or is
    itself invalid) become INVALID.
    """
    if d_base.data.shape != d_match.data.shape:
        raise ValueError("disparity maps must have identical dimensions")
    db = d_base.data
    dm = d_match.data
    h, w = db.shape
    xs = np.arange(w)[None, :]
    target = xs - db
    in_image = (db != INVALID) & (target >= 0)
    # clip only to index safely; out-of-image pixels are masked off anyway
    counterpart = np.take_along_axis(dm, np.clip(target, 0, w - 1), axis=1)
    consistent = in_image & (counterpart != INVALID) & (np.abs(db - counterpart) <= threshold)
    return DisparityMap(np.where(consistent, db, INVALID).astype(np.int32))


def median_filter(disp: DisparityMap, window: int) -> DisparityMap:
    """Median of the valid values in each clamped window.

    Windows with fewer than ceil(window^2 / 2) valid samples produce
    INVALID; even-sized value sets take the lower middle value.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError(f"median window must be odd and >= 3, got {window}")
    return DisparityMap(kernels.median_filter(disp.data, window, INVALID))


def d1_error(
    estimate: DisparityMap, truth: DisparityMap, mask: np.ndarray | None = None
) -> D1Report:
    """KITTI default criterion: erroneous iff |err| > 3 px and |err| > 5% of gt.

    Pixels with invalid/missing ground truth (or outside the optional
    non-occlusion mask) are excluded; INVALID estimates at evaluated pixels
    count as erroneous.
    """
    if estimate.data.shape != truth.data.shape:
        raise ValueError("estimate and truth must have identical dimensions")
    evaluated = truth.data != INVALID
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != truth.data.shape:
            raise ValueError("mask must match the disparity dimensions")
        evaluated &= mask
    est = estimate.data.astype(np.float64)
    gt = truth.data.astype(np.float64)
    err = np.abs(est - gt)
    wrong = (err > 3.0) & (err > 0.05 * gt)
    wrong |= estimate.data == INVALID
    n_eval = int(np.count_nonzero(evaluated))
    n_bad = int(np.count_nonzero(wrong & evaluated))
    d1 = n_bad / n_eval if n_eval else 0.0
    return D1Report(d1_all=d1, evaluated_pixels=n_eval, erroneous_pixels=n_bad)


def run_pipeline(pair: StereoPair, config) -> DisparityMap:
    """Full pipeline: costs, aggregation, WTA, optional L-R check, median."""
    fn = config.cost_fn
    params: AggregationParams = config.params
    refine: RefinementConfig = config.refine
    mode = LrMode(refine.lr_mode)

    if mode is LrMode.LR2:
        vol_b, vol_m = compute_cost_volume_pair(pair, fn, config.d_max)
        agg_b = aggregate(vol_b, params)
        agg_m = aggregate(vol_m, params)
        disp = lr_check(wta(agg_b), wta(agg_m), refine.lr_threshold)
    else:
        volume = compute_cost_volume(pair, fn, config.d_max)
        agg = aggregate(volume, params)
        disp = wta(agg)
        if mode is LrMode.LR1:
            disp = lr_check(disp, match_disparity_reuse(agg), refine.lr_threshold)

    if refine.median:
        disp = median_filter(disp, refine.median_window)
    return disp
