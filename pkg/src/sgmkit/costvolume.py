"""Matching cost volumes: SAD, ZSAD, census and rank costs.

Two executors are provided for every cost function:

* the streaming executor (:func:`compute_cost_volume`), which follows the
  raster-order window/line-buffer design and runs on the selected kernel
  backend, and
* a naive vectorized reference (:func:`reference_cost_volume`) used as the
  independent oracle in tests.

Border policy everywhere is edge replication: window reads and match-image
coordinates ``x - d`` are clamped into the image. The census bit string
excludes the center pixel (it would always contribute a zero bit) and packs
neighbors in raster order, first neighbor in the most significant bit.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import kernels
from .pixelio import GrayImage, StereoPair


class CostKind(str, enum.Enum):
    SAD = "sad"
    ZSAD = "zsad"
    CENSUS = "census"
    RANK = "rank"


_KIND_CODE = {
    CostKind.SAD: kernels.SAD,
    CostKind.ZSAD: kernels.ZSAD,
    CostKind.CENSUS: kernels.CENSUS,
    CostKind.RANK: kernels.RANK,
}

#: Largest window per cost function keeping cost values within 16 bits
#: (and census bit strings within 64 bits).
MAX_WINDOW = {CostKind.SAD: 15, CostKind.ZSAD: 11, CostKind.CENSUS: 7, CostKind.RANK: 15}


@dataclass(frozen=True)
class CostFunction:
    """A matching cost function: the kind plus its square window side length."""

    kind: CostKind
    window: int = 5

    def __post_init__(self):
        kind = CostKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 3, got {self.window}")
        if self.window > MAX_WINDOW[kind]:
            raise ValueError(
                f"window {self.window} too large for {kind.value} "
                f"(max {MAX_WINDOW[kind]} in the 16-bit cost pipeline)"
            )


@dataclass(frozen=True, eq=False)
class CostVolume:
    """H x W x d_max unsigned matching costs with their derived bit width."""

    costs: np.ndarray
    cost_width: int
    fn: CostFunction

    def __post_init__(self):
        c = np.asarray(self.costs)
        if c.ndim != 3:
            raise ValueError(f"costs must be 3-D (H, W, d_max), got shape {c.shape}")
        object.__setattr__(self, "costs", np.ascontiguousarray(c, dtype=np.uint16))

    @property
    def height(self) -> int:
        return self.costs.shape[0]

    @property
    def width(self) -> int:
        return self.costs.shape[1]

    @property
    def d_max(self) -> int:
        return self.costs.shape[2]


def _pixels(image) -> np.ndarray:
    if isinstance(image, GrayImage):
        return image.pixels
    return np.ascontiguousarray(image, dtype=np.uint8)


def census_transform(image, window: int) -> np.ndarray:
    """Per-pixel census bit strings as uint64 (streaming executor)."""
    _check_window(window)
    return kernels.census_transform(_pixels(image), window)


def rank_transform(image, window: int) -> np.ndarray:
    """Per-pixel count of window neighbors darker than the center (streaming)."""
    _check_window(window)
    return kernels.rank_transform(_pixels(image), window)


def _check_window(window: int) -> None:
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")


def _check_geometry(pair: StereoPair, d_max: int) -> None:
    if d_max < 1:
        raise ValueError(f"d_max must be >= 1, got {d_max}")
    if d_max >= pair.width:
        raise ValueError(
            f"d_max {d_max} >= image width {pair.width}: no valid disparity column exists"
        )


def _make_volume(costs: np.ndarray, fn: CostFunction) -> CostVolume:
    from .hwmodel import cost_bit_width

    return CostVolume(costs=costs, cost_width=cost_bit_width(fn.kind, fn.window), fn=fn)


def compute_cost_volume(pair: StereoPair, fn: CostFunction, d_max: int) -> CostVolume:
    """Matching cost volume C(p, d) for the base image (streaming executor)."""
    _check_geometry(pair, d_max)
    costs = kernels.cost_volume(
        pair.base.pixels, pair.match.pixels, _KIND_CODE[fn.kind], fn.window, d_max
    )
    return _make_volume(costs, fn)


def compute_cost_volume_pair(
    pair: StereoPair, fn: CostFunction, d_max: int
) -> tuple[CostVolume, CostVolume]:
    """Base and match cost volumes computed together (for the LR2 pipeline).

    The match volume compares match pixel x against base pixel x+d, with
    out-of-range base columns clamped to width-1.
    """
    _check_geometry(pair, d_max)
    code = _KIND_CODE[fn.kind]
    cb = kernels.cost_volume(pair.base.pixels, pair.match.pixels, code, fn.window, d_max)
    cm = kernels.match_cost_volume(pair.base.pixels, pair.match.pixels, code, fn.window, d_max)
    return _make_volume(cb, fn), _make_volume(cm, fn)


# ---------------------------------------------------------------------------
# Naive reference implementations (the independent oracle)
# ---------------------------------------------------------------------------


def reference_census_transform(image, window: int) -> np.ndarray:
    _check_window(window)
    img = _pixels(image).astype(np.int16)
    r = window // 2
    h, w = img.shape
    padded = np.pad(img, r, mode="edge")
    out = np.zeros((h, w), dtype=np.uint64)
    for oy in range(window):
        for ox in range(window):
            if oy == r and ox == r:
                continue
            neighbor = padded[oy : oy + h, ox : ox + w]
            out = (out << np.uint64(1)) | (img > neighbor).astype(np.uint64)
    return out


def reference_rank_transform(image, window: int) -> np.ndarray:
    _check_window(window)
    img = _pixels(image).astype(np.int16)
    r = window // 2
    h, w = img.shape
    padded = np.pad(img, r, mode="edge")
    out = np.zeros((h, w), dtype=np.int32)
    for oy in range(window):
        for ox in range(window):
            out += padded[oy : oy + h, ox : ox + w] < img
    return out.astype(np.uint8)


def _window_sum(arr: np.ndarray, window: int) -> np.ndarray:
    """Sum over (window, window) neighborhoods; arr already column-extended."""
    r = window // 2
    padded = np.pad(arr, ((r, r), (0, 0)), mode="edge")
    view = sliding_window_view(padded, (window, window))
    return view.sum(axis=(2, 3))


def reference_cost_volume(pair: StereoPair, fn: CostFunction, d_max: int) -> CostVolume:
    """Naive per-pixel recomputation of the base cost volume."""
    _check_geometry(pair, d_max)
    base = pair.base.pixels
    match = pair.match.pixels
    h, w = base.shape
    window = fn.window
    r = window // 2
    out = np.zeros((h, w, d_max), dtype=np.uint16)

    if fn.kind in (CostKind.CENSUS, CostKind.RANK):
        if fn.kind is CostKind.CENSUS:
            tb = reference_census_transform(base, window)
            tm = reference_census_transform(match, window)
        else:
            tb = reference_rank_transform(base, window).astype(np.int32)
            tm = reference_rank_transform(match, window).astype(np.int32)
        cols = np.arange(w)
        for d in range(d_max):
            mc = np.clip(cols - d, 0, w - 1)
            if fn.kind is CostKind.CENSUS:
                out[:, :, d] = np.bitwise_count(tb ^ tm[:, mc])
            else:
                out[:, :, d] = np.abs(tb - tm[:, mc])
        return _make_volume(out, fn)

    ww = window * window
    ext = np.arange(-r, w + r)
    bext = base[:, np.clip(ext, 0, w - 1)].astype(np.int32)
    if fn.kind is CostKind.ZSAD:
        mean_b = _window_sum(bext, window) // ww
    for d in range(d_max):
        mext = match[:, np.clip(ext - d, 0, w - 1)].astype(np.int32)
        if fn.kind is CostKind.SAD:
            out[:, :, d] = _window_sum(np.abs(bext - mext), window)
        else:
            mean_m = _window_sum(mext, window) // ww
            mu = (mean_b - mean_m)[:, :, None, None]
            diff = bext - mext
            padded = np.pad(diff, ((r, r), (0, 0)), mode="edge")
            view = sliding_window_view(padded, (window, window))
            out[:, :, d] = np.abs(view - mu).sum(axis=(2, 3))
    return _make_volume(out, fn)


def reference_cost_volume_pair(
    pair: StereoPair, fn: CostFunction, d_max: int
) -> tuple[CostVolume, CostVolume]:
    """Naive recomputation of both volumes (base plus match)."""
    cb = reference_cost_volume(pair, fn, d_max)
    base = pair.base.pixels
    match = pair.match.pixels
    h, w = base.shape
    window = fn.window
    r = window // 2
    out = np.zeros((h, w, d_max), dtype=np.uint16)

    if fn.kind in (CostKind.CENSUS, CostKind.RANK):
        if fn.kind is CostKind.CENSUS:
            tb = reference_census_transform(base, window)
            tm = reference_census_transform(match, window)
        else:
            tb = reference_rank_transform(base, window).astype(np.int32)
            tm = reference_rank_transform(match, window).astype(np.int32)
        cols = np.arange(w)
        for d in range(d_max):
            bc = np.clip(cols + d, 0, w - 1)
            if fn.kind is CostKind.CENSUS:
                out[:, :, d] = np.bitwise_count(tb[:, bc] ^ tm)
            else:
                out[:, :, d] = np.abs(tb[:, bc] - tm)
        return cb, _make_volume(out, fn)

    ww = window * window
    ext = np.arange(-r, w + r)
    mext = match[:, np.clip(ext, 0, w - 1)].astype(np.int32)
    if fn.kind is CostKind.ZSAD:
        mean_m = _window_sum(mext, window) // ww
    for d in range(d_max):
        bext = base[:, np.clip(ext + d, 0, w - 1)].astype(np.int32)
        if fn.kind is CostKind.SAD:
            out[:, :, d] = _window_sum(np.abs(mext - bext), window)
        else:
            mean_b = _window_sum(bext, window) // ww
            mu = (mean_m - mean_b)[:, :, None, None]
            diff = mext - bext
            padded = np.pad(diff, ((r, r), (0, 0)), mode="edge")
            view = sliding_window_view(padded, (window, window))
            out[:, :, d] = np.abs(view - mu).sum(axis=(2, 3))
    return cb, _make_volume(out, fn)


# ---------------------------------------------------------------------------
# Debug dump
# ---------------------------------------------------------------------------


def dump_cost_volume(volume: CostVolume, path) -> None:
    """Binary dump: header (width, height, d_max, cost_width as little-endian
    32-bit integers) followed by row-major 32-bit costs."""
    _dump_volume(volume.width, volume.height, volume.d_max, volume.cost_width,
                 volume.costs, path)


def _dump_volume(width, height, d_max, value_width, values, path) -> None:
    header = struct.pack("<4I", width, height, d_max, value_width)
    payload = np.ascontiguousarray(values, dtype="<u4").tobytes()
    Path(path).write_bytes(header + payload)
