"""Shared test helpers: random data generators and independent oracles.

The oracles here are deliberately written from the mathematical definitions
(plain loops, whole-volume arrays) rather than reusing any package code, so
they stay independent of the streaming executors they check.
"""

from __future__ import annotations

import numpy as np
import pytest

from sgmkit import GrayImage, StereoPair
from sgmkit.pixelio import INVALID


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_image(rng, height, width, lo=0, hi=256) -> GrayImage:
    return GrayImage(rng.integers(lo, hi, (height, width), dtype=np.uint8))


def random_pair(rng, height, width) -> StereoPair:
    return StereoPair(random_image(rng, height, width), random_image(rng, height, width))


def shifted_pair(rng, height, width, shift) -> StereoPair:
    """match(x) = base(x + shift), right border replicated: true disparity = shift."""
    base = rng.integers(0, 256, (height, width), dtype=np.uint8)
    cols = np.minimum(np.arange(width) + shift, width - 1)
    match = base[:, cols]
    return StereoPair(GrayImage(base), GrayImage(match))


def _clamp(v, lo, hi):
    return lo if v < lo else (hi if v > hi else v)


def slow_census(img: np.ndarray, window: int) -> np.ndarray:
    h, w = img.shape
    r = window // 2
    out = np.zeros((h, w), np.uint64)
    for y in range(h):
        for x in range(w):
            center = int(img[y, x])
            v = 0
            for oy in range(-r, r + 1):
                for ox in range(-r, r + 1):
                    if oy == 0 and ox == 0:
                        continue
                    q = int(img[_clamp(y + oy, 0, h - 1), _clamp(x + ox, 0, w - 1)])
                    v = (v << 1) | (1 if center > q else 0)
            out[y, x] = v
    return out


def slow_rank(img: np.ndarray, window: int) -> np.ndarray:
    h, w = img.shape
    r = window // 2
    out = np.zeros((h, w), np.int64)
    for y in range(h):
        for x in range(w):
            center = int(img[y, x])
            cnt = 0
            for oy in range(-r, r + 1):
                for ox in range(-r, r + 1):
                    q = int(img[_clamp(y + oy, 0, h - 1), _clamp(x + ox, 0, w - 1)])
                    if q < center:
                        cnt += 1
            out[y, x] = cnt
    return out


def slow_cost_volume(base, match, kind: str, window: int, d_max: int) -> np.ndarray:
    """Definitional per-pixel cost volume (base image), edge-replicated reads."""
    h, w = base.shape
    r = window // 2
    ww = window * window
    out = np.zeros((h, w, d_max), np.int64)
    if kind in ("census", "rank"):
        slow = slow_census if kind == "census" else slow_rank
        tb, tm = slow(base, window), slow(match, window)
        for y in range(h):
            for x in range(w):
                for d in range(d_max):
                    mb = int(tb[y, x])
                    mm = int(tm[y, _clamp(x - d, 0, w - 1)])
                    out[y, x, d] = (mb ^ mm).bit_count() if kind == "census" else abs(mb - mm)
        return out
    for y in range(h):
        for x in range(w):
            for d in range(d_max):
                bs, ms, terms = 0, 0, []
                for oy in range(-r, r + 1):
                    yy = _clamp(y + oy, 0, h - 1)
                    for ox in range(-r, r + 1):
                        bv = int(base[yy, _clamp(x + ox, 0, w - 1)])
                        mv = int(match[yy, _clamp(x + ox - d, 0, w - 1)])
                        bs += bv
                        ms += mv
                        terms.append((bv, mv))
                if kind == "sad":
                    out[y, x, d] = sum(abs(b - m) for b, m in terms)
                else:
                    mb, mm = bs // ww, ms // ww
                    out[y, x, d] = sum(abs((b - mb) - (m - mm)) for b, m in terms)
    return out


def slow_match_cost_volume(base, match, kind: str, window: int, d_max: int) -> np.ndarray:
    """Definitional match-image cost volume: compares column x against x+d."""
    h, w = base.shape
    r = window // 2
    ww = window * window
    out = np.zeros((h, w, d_max), np.int64)
    if kind in ("census", "rank"):
        slow = slow_census if kind == "census" else slow_rank
        tb, tm = slow(base, window), slow(match, window)
        for y in range(h):
            for x in range(w):
                for d in range(d_max):
                    mm = int(tm[y, x])
                    mb = int(tb[y, _clamp(x + d, 0, w - 1)])
                    out[y, x, d] = (mb ^ mm).bit_count() if kind == "census" else abs(mb - mm)
        return out
    for y in range(h):
        for x in range(w):
            for d in range(d_max):
                bs, ms, terms = 0, 0, []
                for oy in range(-r, r + 1):
                    yy = _clamp(y + oy, 0, h - 1)
                    for ox in range(-r, r + 1):
                        mv = int(match[yy, _clamp(x + ox, 0, w - 1)])
                        bv = int(base[yy, _clamp(x + ox + d, 0, w - 1)])
                        bs += bv
                        ms += mv
                        terms.append((bv, mv))
                if kind == "sad":
                    out[y, x, d] = sum(abs(m - b) for b, m in terms)
                else:
                    mb, mm = bs // ww, ms // ww
                    out[y, x, d] = sum(abs((m - mm) - (b - mb)) for b, m in terms)
    return out


def brute_force_aggregate(costs, p1: int, p2: int) -> np.ndarray:
    """Independent four-pass dynamic program over whole volumes."""
    h, w, d_max = costs.shape
    total = np.zeros((h, w, d_max), np.int64)
    for dy, dx in [(0, -1), (-1, 1), (-1, 0), (-1, -1)]:
        path = np.zeros((h, w, d_max), np.int64)
        for y in range(h):
            for x in range(w):
                py, px = y + dy, x + dx
                if 0 <= py < h and 0 <= px < w:
                    prev = path[py, px]
                    m = int(prev.min())
                    for d in range(d_max):
                        cands = [int(prev[d]), m + p2]
                        if d > 0:
                            cands.append(int(prev[d - 1]) + p1)
                        if d + 1 < d_max:
                            cands.append(int(prev[d + 1]) + p1)
                        path[y, x, d] = int(costs[y, x, d]) + min(cands) - m
                else:
                    path[y, x] = costs[y, x]
        total += path
    return total.astype(np.uint32)


def naive_match_disparity(sums) -> np.ndarray:
    """argmin_d S(x+d, d) with in-image candidates, ties to the smaller d."""
    h, w, d_max = sums.shape
    out = np.empty((h, w), np.int32)
    for y in range(h):
        for x in range(w):
            best_v, best_d = None, 0
            for d in range(d_max):
                if x + d >= w:
                    break
                v = int(sums[y, x + d, d])
                if best_v is None or v < best_v:
                    best_v, best_d = v, d
            out[y, x] = best_d
    return out


def slow_median(disp, window: int) -> np.ndarray:
    h, w = disp.shape
    r = window // 2
    need = (window * window + 1) // 2
    out = np.empty((h, w), np.int32)
    for y in range(h):
        for x in range(w):
            vals = []
            for oy in range(-r, r + 1):
                for ox in range(-r, r + 1):
                    v = int(disp[_clamp(y + oy, 0, h - 1), _clamp(x + ox, 0, w - 1)])
                    if v != INVALID:
                        vals.append(v)
            if len(vals) >= need:
                vals.sort()
                out[y, x] = vals[(len(vals) - 1) // 2]
            else:
                out[y, x] = INVALID
    return out


@pytest.fixture
def rng():
    return make_rng(12345)
