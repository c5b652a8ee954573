"""Pure-Python kernels: raster-order streaming executors for the hot loops.

This module is the fallback twin of the compiled extension ``_core.pyx``.
Both backends must produce bit-identical outputs for identical inputs; keep
the two files in lockstep when changing either.

All kernels take/return numpy arrays with fixed dtypes:

* images             uint8   (H, W)
* census raster      uint64  (H, W)   MSB-first raster-order neighbor bits
* rank raster        uint8   (H, W)
* cost volumes       uint16  (H, W, d_max)
* aggregated sums    uint32  (H, W, d_max)
* disparity maps     int32   (H, W)
"""

from __future__ import annotations

import numpy as np

# cost function codes shared with the compiled backend
SAD = 0
ZSAD = 1
CENSUS = 2
RANK = 3


def _clamp(v: int, lo: int, hi: int) -> int:
    return lo if v < lo else (hi if v > hi else v)


class PixelStreamScanner:
    """Pixel-at-a-time line buffer, exposed for state instrumentation.

    Mirrors the canonical hardware structure: a (window-1) x width line
    buffer plus the incoming pixel form one full window column per cycle.
    ``feed`` must be called in raster order.
    """

    def __init__(self, width: int, window: int):
        if window < 3 or window % 2 == 0:
            raise ValueError(f"window must be odd and >= 3, got {window}")
        self.width = width
        self.window = window
        # line_buffer[k][c]: k = 0 oldest of the most recent window-1 rows
        self.line_buffer = [[0] * width for _ in range(window - 1)]

    def feed(self, x: int, value: int) -> list[int]:
        """Consume one pixel; return its full window column (oldest row first)."""
        lb = self.line_buffer
        w = self.window
        column = [lb[k][x] for k in range(w - 1)] + [value]
        for k in range(w - 2):
            lb[k][x] = lb[k + 1][x]
        lb[w - 2][x] = value
        return column


def _row_history(img_rows, h: int, window: int, r: int):
    """Initial w-row history for output row 0 (top border replicated).

    Rows are plain-int lists: uint8 numpy scalars would wrap around in the
    SAD/ZSAD subtractions.
    """
    return [img_rows[_clamp(k - r, 0, h - 1)].tolist() for k in range(window)]


def _advance_rows(rows, img_rows, y: int, h: int, r: int) -> None:
    rows.pop(0)
    rows.append(img_rows[_clamp(y + r, 0, h - 1)].tolist())


def census_transform(img, window: int):
    img = np.ascontiguousarray(img, dtype=np.uint8)
    h, w = img.shape
    r = window // 2
    out = np.zeros((h, w), dtype=np.uint64)
    rows = _row_history(img, h, window, r)
    win = [[0] * window for _ in range(window)]
    for y in range(h):
        if y > 0:
            _advance_rows(rows, img, y, h, r)
        for j in range(window):
            c = _clamp(j - r, 0, w - 1)
            for i in range(window):
                win[i][j] = rows[i][c]
        orow = [0] * w
        for x in range(w):
            center = win[r][r]
            v = 0
            for i in range(window):
                wrow = win[i]
                for j in range(window):
                    if i == r and j == r:
                        continue
                    v = (v << 1) | (1 if center > wrow[j] else 0)
            orow[x] = v
            if x + 1 < w:
                c = _clamp(x + 1 + r, 0, w - 1)
                for i in range(window):
                    wrow = win[i]
                    wrow.pop(0)
                    wrow.append(rows[i][c])
        out[y] = orow
    return out


def rank_transform(img, window: int):
    img = np.ascontiguousarray(img, dtype=np.uint8)
    h, w = img.shape
    r = window // 2
    out = np.zeros((h, w), dtype=np.uint8)
    rows = _row_history(img, h, window, r)
    win = [[0] * window for _ in range(window)]
    for y in range(h):
        if y > 0:
            _advance_rows(rows, img, y, h, r)
        for j in range(window):
            c = _clamp(j - r, 0, w - 1)
            for i in range(window):
                win[i][j] = rows[i][c]
        orow = [0] * w
        for x in range(w):
            center = win[r][r]
            cnt = 0
            for i in range(window):
                wrow = win[i]
                for j in range(window):
                    if wrow[j] < center:
                        cnt += 1
            orow[x] = cnt
            if x + 1 < w:
                c = _clamp(x + 1 + r, 0, w - 1)
                for i in range(window):
                    wrow = win[i]
                    wrow.pop(0)
                    wrow.append(rows[i][c])
        out[y] = orow
    return out


def _transform_cost_volume(base, match, kind: int, window: int, d_max: int):
    """Census/rank cost volume: per-row FIFO over the match-image transform."""
    if kind == CENSUS:
        tb = census_transform(base, window)
        tm = census_transform(match, window)
    else:
        tb = rank_transform(base, window)
        tm = rank_transform(match, window)
    h, w = tb.shape
    out = np.zeros((h, w, d_max), dtype=np.uint16)
    for y in range(h):
        tbr = [int(v) for v in tb[y]]
        tmr = [int(v) for v in tm[y]]
        fifo = [tmr[0]] * d_max
        orow = [[0] * d_max for _ in range(w)]
        for x in range(w):
            if x > 0:
                fifo.pop()
                fifo.insert(0, tmr[x])
            b = tbr[x]
            ovec = orow[x]
            if kind == CENSUS:
                for d in range(d_max):
                    ovec[d] = (b ^ fifo[d]).bit_count()
            else:
                for d in range(d_max):
                    m = fifo[d]
                    ovec[d] = b - m if b >= m else m - b
        out[y] = orow
    return out


def _window_cost_volume(base, match, kind: int, window: int, d_max: int):
    """SAD/ZSAD cost volume with a w x (d_max+w-1) match-image window buffer."""
    h, w = base.shape
    r = window // 2
    span = d_max + window - 1
    ww = window * window
    rows_b = _row_history(base, h, window, r)
    rows_m = _row_history(match, h, window, r)
    winb = [[0] * window for _ in range(window)]
    wide = [[0] * span for _ in range(window)]
    out = np.zeros((h, w, d_max), dtype=np.uint16)
    for y in range(h):
        if y > 0:
            _advance_rows(rows_b, base, y, h, r)
            _advance_rows(rows_m, match, y, h, r)
        for j in range(window):
            c = _clamp(j - r, 0, w - 1)
            for i in range(window):
                winb[i][j] = rows_b[i][c]
        for k in range(span):
            # wide slot k covers match column x - (d_max-1) - r + k
            c = _clamp(k - (d_max - 1) - r, 0, w - 1)
            for i in range(window):
                wide[i][k] = rows_m[i][c]
        orow = [[0] * d_max for _ in range(w)]
        for x in range(w):
            ovec = orow[x]
            if kind == SAD:
                for d in range(d_max):
                    k0 = d_max - 1 - d
                    s = 0
                    for i in range(window):
                        bi = winb[i]
                        mi = wide[i]
                        for j in range(window):
                            t = bi[j] - mi[k0 + j]
                            s += t if t >= 0 else -t
                    ovec[d] = s
            else:
                sum_b = 0
                for i in range(window):
                    bi = winb[i]
                    for j in range(window):
                        sum_b += bi[j]
                mean_b = sum_b // ww
                for d in range(d_max):
                    k0 = d_max - 1 - d
                    sum_m = 0
                    for i in range(window):
                        mi = wide[i]
                        for j in range(window):
                            sum_m += mi[k0 + j]
                    mean_m = sum_m // ww
                    s = 0
                    for i in range(window):
                        bi = winb[i]
                        mi = wide[i]
                        for j in range(window):
                            t = (bi[j] - mean_b) - (mi[k0 + j] - mean_m)
                            s += t if t >= 0 else -t
                    ovec[d] = s
            if x + 1 < w:
                cb = _clamp(x + 1 + r, 0, w - 1)
                for i in range(window):
                    wrow = winb[i]
                    wrow.pop(0)
                    wrow.append(rows_b[i][cb])
                    mrow = wide[i]
                    mrow.pop(0)
                    mrow.append(rows_m[i][cb])
        out[y] = orow
    return out


def cost_volume(base, match, kind: int, window: int, d_max: int):
    """Streaming (window/line-buffer) cost volume for the base image."""
    base = np.ascontiguousarray(base, dtype=np.uint8)
    match = np.ascontiguousarray(match, dtype=np.uint8)
    if kind in (CENSUS, RANK):
        return _transform_cost_volume(base, match, kind, window, d_max)
    return _window_cost_volume(base, match, kind, window, d_max)


def match_cost_volume(base, match, kind: int, window: int, d_max: int):
    """Cost volume for the match image: C_m(x, d) compares against column x+d.

    Out-of-range base columns are clamped to width-1. Computed by direct
    clamped scans; value-equivalent to the mirrored streaming scheme.
    """
    base = np.ascontiguousarray(base, dtype=np.uint8)
    match = np.ascontiguousarray(match, dtype=np.uint8)
    h, w = base.shape
    out = np.zeros((h, w, d_max), dtype=np.uint16)
    if kind in (CENSUS, RANK):
        if kind == CENSUS:
            tb = census_transform(base, window)
            tm = census_transform(match, window)
        else:
            tb = rank_transform(base, window)
            tm = rank_transform(match, window)
        for y in range(h):
            tbr = [int(v) for v in tb[y]]
            tmr = [int(v) for v in tm[y]]
            orow = [[0] * d_max for _ in range(w)]
            for x in range(w):
                m = tmr[x]
                ovec = orow[x]
                for d in range(d_max):
                    b = tbr[_clamp(x + d, 0, w - 1)]
                    if kind == CENSUS:
                        ovec[d] = (b ^ m).bit_count()
                    else:
                        ovec[d] = b - m if b >= m else m - b
            out[y] = orow
        return out

    r = window // 2
    ww = window * window
    bl = base.tolist()
    ml = match.tolist()
    for y in range(h):
        ys = [_clamp(y + oy, 0, h - 1) for oy in range(-r, r + 1)]
        orow = [[0] * d_max for _ in range(w)]
        for x in range(w):
            ovec = orow[x]
            for d in range(d_max):
                if kind == SAD:
                    s = 0
                    for yy in ys:
                        brow = bl[yy]
                        mrow = ml[yy]
                        for ox in range(-r, r + 1):
                            mv = mrow[_clamp(x + ox, 0, w - 1)]
                            bv = brow[_clamp(x + ox + d, 0, w - 1)]
                            t = mv - bv
                            s += t if t >= 0 else -t
                    ovec[d] = s
                else:
                    sum_m = 0
                    sum_b = 0
                    for yy in ys:
                        brow = bl[yy]
                        mrow = ml[yy]
                        for ox in range(-r, r + 1):
                            sum_m += mrow[_clamp(x + ox, 0, w - 1)]
                            sum_b += brow[_clamp(x + ox + d, 0, w - 1)]
                    mean_m = sum_m // ww
                    mean_b = sum_b // ww
                    s = 0
                    for yy in ys:
                        brow = bl[yy]
                        mrow = ml[yy]
                        for ox in range(-r, r + 1):
                            mv = mrow[_clamp(x + ox, 0, w - 1)]
                            bv = brow[_clamp(x + ox + d, 0, w - 1)]
                            t = (mv - mean_m) - (bv - mean_b)
                            s += t if t >= 0 else -t
                    ovec[d] = s
        out[y] = orow
    return out


def _recurrence(prev, costs, p1: int, p2: int):
    """One step of the pathwise recursion; prev=None restarts the path."""
    if prev is None:
        return list(costs)
    d_max = len(prev)
    m = min(prev)
    out = [0] * d_max
    for d in range(d_max):
        best = prev[d]
        if d > 0:
            v = prev[d - 1] + p1
            if v < best:
                best = v
        if d + 1 < d_max:
            v = prev[d + 1] + p1
            if v < best:
                best = v
        v = m + p2
        if v < best:
            best = v
        out[d] = costs[d] + best - m
    return out


def aggregate(costs, p1: int, p2: int):
    """Sequential raster-order 4-path aggregation (0/45/90/135 degrees)."""
    costs = np.ascontiguousarray(costs, dtype=np.uint16)
    h, w, d_max = costs.shape
    cl = costs.tolist()
    out = np.empty((h, w, d_max), dtype=np.uint32)
    lb45 = [[0] * d_max for _ in range(w)]
    lb90 = [[0] * d_max for _ in range(w)]
    lb135 = [[0] * d_max for _ in range(w)]
    for y in range(h):
        crow = cl[y]
        orow = [None] * w
        reg0 = None
        carry135 = None
        for x in range(w):
            c = crow[x]
            l0 = _recurrence(reg0 if x > 0 else None, c, p1, p2)
            prev45 = lb45[x + 1] if (y > 0 and x + 1 < w) else None
            l45 = _recurrence(prev45, c, p1, p2)
            l90 = _recurrence(lb90[x] if y > 0 else None, c, p1, p2)
            old135 = lb135[x]  # (x, y-1) value, becomes the 135 dep of x+1
            l135 = _recurrence(carry135 if (y > 0 and x > 0) else None, c, p1, p2)
            carry135 = old135
            lb45[x] = l45
            lb90[x] = l90
            lb135[x] = l135
            reg0 = l0
            orow[x] = [l0[d] + l45[d] + l90[d] + l135[d] for d in range(d_max)]
        out[y] = orow
    return out


def aggregate_interleaved(costs, p1: int, p2: int):
    """Interleave-and-reorder scheduled aggregation, bit-identical to aggregate().

    Rows are processed in the slot order x = 0, W/2, 1, W/2+1, ... with the
    right half lagging one image row. Registers carry the two values crossing
    the cutting edge (the 0-degree and 135-degree results of column W/2-1).
    Pad slots (odd widths, first/last virtual row) are schedule filler only.
    """
    costs = np.ascontiguousarray(costs, dtype=np.uint16)
    h, w, d_max = costs.shape
    if w <= 2:
        # a 1-column half leaves the cutting-edge 45-degree dependency
        # pointing at a later slot of the same virtual row; such widths gain
        # nothing from interleaving, so run the sequential scan instead
        return aggregate(costs, p1, p2)
    half = (w + 1) // 2
    cl = costs.tolist()
    out = np.empty((h, w, d_max), dtype=np.uint32)
    lb45 = [[0] * d_max for _ in range(w)]
    lb90 = [[0] * d_max for _ in range(w)]
    lb135 = [[0] * d_max for _ in range(w)]
    edge_l0 = None  # 0-deg result of (half-1, t) saved for the next virtual row
    edge135 = None  # pre-overwrite lb135[half-1], i.e. (half-1, t-1)
    for t in range(h + 1):
        reg0_left = None
        reg0_right = None
        carry_left = None
        carry_right = None
        for s in range(2 * half):
            if s % 2 == 0:
                left = True
                x = s // 2
                y = t
                if y >= h:
                    continue
            else:
                left = False
                x = half + s // 2
                y = t - 1
                if y < 0 or x >= w:
                    continue
            c = cl[y][x]
            if x == 0:
                p0 = None
            elif not left and x == half:
                p0 = edge_l0
            else:
                p0 = reg0_left if left else reg0_right
            l0 = _recurrence(p0, c, p1, p2)
            prev45 = lb45[x + 1] if (y > 0 and x + 1 < w) else None
            l45 = _recurrence(prev45, c, p1, p2)
            l90 = _recurrence(lb90[x] if y > 0 else None, c, p1, p2)
            old135 = lb135[x]
            if y > 0 and x > 0:
                p135 = edge135 if (not left and x == half) else (carry_left if left else carry_right)
            else:
                p135 = None
            l135 = _recurrence(p135, c, p1, p2)
            lb45[x] = l45
            lb90[x] = l90
            lb135[x] = l135
            if left:
                carry_left = old135
                reg0_left = l0
                if x == half - 1:
                    edge_l0 = l0
                    edge135 = old135
            else:
                carry_right = old135
                reg0_right = l0
            out[y, x] = [l0[d] + l45[d] + l90[d] + l135[d] for d in range(d_max)]
    return out


def match_disparity(sums):
    """Match-image disparity via the shifting register cascade.

    Register j tracks the running minimum for match pixel u-j while base
    pixel u streams in; after d_max updates the rightmost register holds
    argmin_d S(x+d, d). Candidates with x+d >= width never arrive, which
    restricts right-border pixels to their in-image candidates.
    """
    sums = np.ascontiguousarray(sums, dtype=np.uint32)
    h, w, d_max = sums.shape
    sl = sums.tolist()
    out = np.empty((h, w), dtype=np.int32)
    for y in range(h):
        srow = sl[y]
        rv = [0] * d_max
        rd = [0] * d_max
        orow = [0] * w
        for u in range(w):
            svec = srow[u]
            for j in range(d_max - 1, 0, -1):
                rv[j] = rv[j - 1]
                rd[j] = rd[j - 1]
            rv[0] = svec[0]
            rd[0] = 0
            for j in range(1, d_max):
                v = svec[j]
                if v < rv[j]:
                    rv[j] = v
                    rd[j] = j
            if u >= d_max - 1:
                orow[u - (d_max - 1)] = rd[d_max - 1]
        for x in range(max(0, w - d_max + 1), w):
            orow[x] = rd[w - 1 - x]
        out[y] = orow
    return out


def median_filter(disp, window: int, invalid: int):
    """Median over valid values in the clamped window; needs a validity majority.

    Fewer than ceil(window^2 / 2) valid samples yield ``invalid``; even-count
    medians take the lower of the two middle values.
    """
    disp = np.ascontiguousarray(disp, dtype=np.int32)
    h, w = disp.shape
    r = window // 2
    need = (window * window + 1) // 2
    dl = disp.tolist()
    out = np.empty((h, w), dtype=np.int32)
    for y in range(h):
        ys = [_clamp(y + oy, 0, h - 1) for oy in range(-r, r + 1)]
        orow = [0] * w
        for x in range(w):
            xs = [_clamp(x + ox, 0, w - 1) for ox in range(-r, r + 1)]
            vals = []
            for yy in ys:
                row = dl[yy]
                for xx in xs:
                    v = row[xx]
                    if v != invalid:
                        vals.append(v)
            if len(vals) >= need:
                vals.sort()
                orow[x] = vals[(len(vals) - 1) // 2]
            else:
                orow[x] = invalid
        out[y] = orow
    return out
