# cython: language_level=3
# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled kernels: raster-order streaming executors for the hot loops.

Twin of ``_pykernels.py``; both backends must produce bit-identical outputs
for identical inputs. Keep the two files in lockstep when changing either.
"""

import numpy as np

from libc.stdint cimport int32_t, int64_t, uint8_t, uint16_t, uint32_t, uint64_t

SAD = 0
ZSAD = 1
CENSUS = 2
RANK = 3

DEF MAX_MEDIAN_CELLS = 1225  # window 35x35; validated far smaller upstream

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define sgm_popcount64(x) __builtin_popcountll(x)
    #else
    static int sgm_popcount64(unsigned long long x) {
        int n = 0;
        while (x) { x &= x - 1; n++; }
        return n;
    }
    #endif
    """
    int sgm_popcount64(unsigned long long x) nogil


cdef inline int _clamp(int v, int lo, int hi) nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


cdef void _load_row_history(uint8_t[:, ::1] rows, uint8_t[:, ::1] img,
                            int h, int window, int r) noexcept:
    cdef int k
    for k in range(window):
        rows[k, :] = img[_clamp(k - r, 0, h - 1), :]


cdef void _advance_rows(uint8_t[:, ::1] rows, uint8_t[:, ::1] img,
                        int y, int h, int window, int r) noexcept:
    cdef int k
    for k in range(window - 1):
        rows[k, :] = rows[k + 1, :]
    rows[window - 1, :] = img[_clamp(y + r, 0, h - 1), :]


def census_transform(img, int window):
    cdef uint8_t[:, ::1] g = np.ascontiguousarray(img, dtype=np.uint8)
    cdef int h = g.shape[0], w = g.shape[1]
    cdef int r = window // 2
    out_arr = np.zeros((h, w), dtype=np.uint64)
    cdef uint64_t[:, ::1] out = out_arr
    rows_arr = np.empty((window, w), dtype=np.uint8)
    cdef uint8_t[:, ::1] rows = rows_arr
    win_arr = np.empty((window, window), dtype=np.int32)
    cdef int32_t[:, ::1] win = win_arr
    cdef int x, y, i, j, c, center
    cdef uint64_t v
    _load_row_history(rows, g, h, window, r)
    for y in range(h):
        if y > 0:
            _advance_rows(rows, g, y, h, window, r)
        for j in range(window):
            c = _clamp(j - r, 0, w - 1)
            for i in range(window):
                win[i, j] = rows[i, c]
        for x in range(w):
            center = win[r, r]
            v = 0
            for i in range(window):
                for j in range(window):
                    if i == r and j == r:
                        continue
                    v = (v << 1) | (1 if center > win[i, j] else 0)
            out[y, x] = v
            if x + 1 < w:
                c = _clamp(x + 1 + r, 0, w - 1)
                for i in range(window):
                    for j in range(window - 1):
                        win[i, j] = win[i, j + 1]
                    win[i, window - 1] = rows[i, c]
    return out_arr


def rank_transform(img, int window):
    cdef uint8_t[:, ::1] g = np.ascontiguousarray(img, dtype=np.uint8)
    cdef int h = g.shape[0], w = g.shape[1]
    cdef int r = window // 2
    out_arr = np.zeros((h, w), dtype=np.uint8)
    cdef uint8_t[:, ::1] out = out_arr
    rows_arr = np.empty((window, w), dtype=np.uint8)
    cdef uint8_t[:, ::1] rows = rows_arr
    win_arr = np.empty((window, window), dtype=np.int32)
    cdef int32_t[:, ::1] win = win_arr
    cdef int x, y, i, j, c, center, cnt
    _load_row_history(rows, g, h, window, r)
    for y in range(h):
        if y > 0:
            _advance_rows(rows, g, y, h, window, r)
        for j in range(window):
            c = _clamp(j - r, 0, w - 1)
            for i in range(window):
                win[i, j] = rows[i, c]
        for x in range(w):
            center = win[r, r]
            cnt = 0
            for i in range(window):
                for j in range(window):
                    if win[i, j] < center:
                        cnt += 1
            out[y, x] = <uint8_t> cnt
            if x + 1 < w:
                c = _clamp(x + 1 + r, 0, w - 1)
                for i in range(window):
                    for j in range(window - 1):
                        win[i, j] = win[i, j + 1]
                    win[i, window - 1] = rows[i, c]
    return out_arr


def _transform_cost_volume(base, match, int kind, int window, int d_max):
    cdef uint64_t[:, ::1] tb64
    cdef uint64_t[:, ::1] tm64
    cdef uint8_t[:, ::1] tb8
    cdef uint8_t[:, ::1] tm8
    cdef int h, w, x, y, d, b8, m8
    cdef uint64_t b, m
    if kind == CENSUS:
        tb_arr = census_transform(base, window)
        tm_arr = census_transform(match, window)
        tb64 = tb_arr
        tm64 = tm_arr
        h = tb64.shape[0]
        w = tb64.shape[1]
    else:
        tb_arr = rank_transform(base, window)
        tm_arr = rank_transform(match, window)
        tb8 = tb_arr
        tm8 = tm_arr
        h = tb8.shape[0]
        w = tb8.shape[1]
    out_arr = np.zeros((h, w, d_max), dtype=np.uint16)
    cdef uint16_t[:, :, ::1] out = out_arr
    fifo_arr = np.empty(d_max, dtype=np.uint64)
    cdef uint64_t[::1] fifo = fifo_arr
    cdef int j
    for y in range(h):
        if kind == CENSUS:
            for d in range(d_max):
                fifo[d] = tm64[y, 0]
        else:
            for d in range(d_max):
                fifo[d] = tm8[y, 0]
        for x in range(w):
            if x > 0:
                for j in range(d_max - 1, 0, -1):
                    fifo[j] = fifo[j - 1]
                fifo[0] = tm64[y, x] if kind == CENSUS else tm8[y, x]
            if kind == CENSUS:
                b = tb64[y, x]
                for d in range(d_max):
                    out[y, x, d] = <uint16_t> sgm_popcount64(b ^ fifo[d])
            else:
                b8 = tb8[y, x]
                for d in range(d_max):
                    m8 = <int> fifo[d]
                    out[y, x, d] = <uint16_t> (b8 - m8 if b8 >= m8 else m8 - b8)
    return out_arr


def _window_cost_volume(base, match, int kind, int window, int d_max):
    cdef uint8_t[:, ::1] gb = np.ascontiguousarray(base, dtype=np.uint8)
    cdef uint8_t[:, ::1] gm = np.ascontiguousarray(match, dtype=np.uint8)
    cdef int h = gb.shape[0], w = gb.shape[1]
    cdef int r = window // 2
    cdef int span = d_max + window - 1
    cdef int ww = window * window
    rows_b_arr = np.empty((window, w), dtype=np.uint8)
    rows_m_arr = np.empty((window, w), dtype=np.uint8)
    cdef uint8_t[:, ::1] rows_b = rows_b_arr
    cdef uint8_t[:, ::1] rows_m = rows_m_arr
    winb_arr = np.empty((window, window), dtype=np.int32)
    wide_arr = np.empty((window, span), dtype=np.int32)
    cdef int32_t[:, ::1] winb = winb_arr
    cdef int32_t[:, ::1] wide = wide_arr
    out_arr = np.zeros((h, w, d_max), dtype=np.uint16)
    cdef uint16_t[:, :, ::1] out = out_arr
    cdef int x, y, i, j, k, c, d, k0, s, t
    cdef int sum_b, sum_m, mean_b, mean_m
    _load_row_history(rows_b, gb, h, window, r)
    _load_row_history(rows_m, gm, h, window, r)
    for y in range(h):
        if y > 0:
            _advance_rows(rows_b, gb, y, h, window, r)
            _advance_rows(rows_m, gm, y, h, window, r)
        for j in range(window):
            c = _clamp(j - r, 0, w - 1)
            for i in range(window):
                winb[i, j] = rows_b[i, c]
        for k in range(span):
            c = _clamp(k - (d_max - 1) - r, 0, w - 1)
            for i in range(window):
                wide[i, k] = rows_m[i, c]
        for x in range(w):
            if kind == SAD:
                for d in range(d_max):
                    k0 = d_max - 1 - d
                    s = 0
                    for i in range(window):
                        for j in range(window):
                            t = winb[i, j] - wide[i, k0 + j]
                            s += t if t >= 0 else -t
                    out[y, x, d] = <uint16_t> s
            else:
                sum_b = 0
                for i in range(window):
                    for j in range(window):
                        sum_b += winb[i, j]
                mean_b = sum_b // ww
                for d in range(d_max):
                    k0 = d_max - 1 - d
                    sum_m = 0
                    for i in range(window):
                        for j in range(window):
                            sum_m += wide[i, k0 + j]
                    mean_m = sum_m // ww
                    s = 0
                    for i in range(window):
                        for j in range(window):
                            t = (winb[i, j] - mean_b) - (wide[i, k0 + j] - mean_m)
                            s += t if t >= 0 else -t
                    out[y, x, d] = <uint16_t> s
            if x + 1 < w:
                c = _clamp(x + 1 + r, 0, w - 1)
                for i in range(window):
                    for j in range(window - 1):
                        winb[i, j] = winb[i, j + 1]
                    winb[i, window - 1] = rows_b[i, c]
                    for j in range(span - 1):
                        wide[i, j] = wide[i, j + 1]
                    wide[i, span - 1] = rows_m[i, c]
    return out_arr


def cost_volume(base, match, int kind, int window, int d_max):
    """Streaming (window/line-buffer) cost volume for the base image."""
    if kind == CENSUS or kind == RANK:
        return _transform_cost_volume(base, match, kind, window, d_max)
    return _window_cost_volume(base, match, kind, window, d_max)


def match_cost_volume(base, match, int kind, int window, int d_max):
    """Cost volume for the match image: C_m(x, d) compares against column x+d."""
    cdef uint8_t[:, ::1] gb = np.ascontiguousarray(base, dtype=np.uint8)
    cdef uint8_t[:, ::1] gm = np.ascontiguousarray(match, dtype=np.uint8)
    cdef int h = gb.shape[0], w = gb.shape[1]
    out_arr = np.zeros((h, w, d_max), dtype=np.uint16)
    cdef uint16_t[:, :, ::1] out = out_arr
    cdef uint64_t[:, ::1] tb64
    cdef uint64_t[:, ::1] tm64
    cdef uint8_t[:, ::1] tb8
    cdef uint8_t[:, ::1] tm8
    cdef int x, y, d, oy, ox, yy, mx, bx, b8, m8, s, t
    cdef int r, ww, sum_b, sum_m, mean_b, mean_m, mv, bv
    cdef uint64_t b, m
    if kind == CENSUS or kind == RANK:
        if kind == CENSUS:
            tb_arr = census_transform(base, window)
            tm_arr = census_transform(match, window)
            tb64 = tb_arr
            tm64 = tm_arr
        else:
            tb_arr = rank_transform(base, window)
            tm_arr = rank_transform(match, window)
            tb8 = tb_arr
            tm8 = tm_arr
        for y in range(h):
            for x in range(w):
                if kind == CENSUS:
                    m = tm64[y, x]
                    for d in range(d_max):
                        b = tb64[y, _clamp(x + d, 0, w - 1)]
                        out[y, x, d] = <uint16_t> sgm_popcount64(b ^ m)
                else:
                    m8 = tm8[y, x]
                    for d in range(d_max):
                        b8 = tb8[y, _clamp(x + d, 0, w - 1)]
                        out[y, x, d] = <uint16_t> (b8 - m8 if b8 >= m8 else m8 - b8)
        return out_arr

    r = window // 2
    ww = window * window
    for y in range(h):
        for x in range(w):
            for d in range(d_max):
                if kind == SAD:
                    s = 0
                    for oy in range(-r, r + 1):
                        yy = _clamp(y + oy, 0, h - 1)
                        for ox in range(-r, r + 1):
                            mv = gm[yy, _clamp(x + ox, 0, w - 1)]
                            bv = gb[yy, _clamp(x + ox + d, 0, w - 1)]
                            t = mv - bv
                            s += t if t >= 0 else -t
                    out[y, x, d] = <uint16_t> s
                else:
                    sum_m = 0
                    sum_b = 0
                    for oy in range(-r, r + 1):
                        yy = _clamp(y + oy, 0, h - 1)
                        for ox in range(-r, r + 1):
                            sum_m += gm[yy, _clamp(x + ox, 0, w - 1)]
                            sum_b += gb[yy, _clamp(x + ox + d, 0, w - 1)]
                    mean_m = sum_m // ww
                    mean_b = sum_b // ww
                    s = 0
                    for oy in range(-r, r + 1):
                        yy = _clamp(y + oy, 0, h - 1)
                        for ox in range(-r, r + 1):
                            mv = gm[yy, _clamp(x + ox, 0, w - 1)]
                            bv = gb[yy, _clamp(x + ox + d, 0, w - 1)]
                            t = (mv - mean_m) - (bv - mean_b)
                            s += t if t >= 0 else -t
                    out[y, x, d] = <uint16_t> s
    return out_arr


cdef inline void _recurrence(int32_t* prev, bint has_prev, uint16_t* c,
                             int d_max, int p1, int p2, int32_t* out) noexcept nogil:
    cdef int d, m, best, v
    if not has_prev:
        for d in range(d_max):
            out[d] = c[d]
        return
    m = prev[0]
    for d in range(1, d_max):
        if prev[d] < m:
            m = prev[d]
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
        out[d] = c[d] + best - m


def aggregate(costs, int p1, int p2):
    """Sequential raster-order 4-path aggregation (0/45/90/135 degrees)."""
    cdef uint16_t[:, :, ::1] cv = np.ascontiguousarray(costs, dtype=np.uint16)
    cdef int h = cv.shape[0], w = cv.shape[1], d_max = cv.shape[2]
    out_arr = np.empty((h, w, d_max), dtype=np.uint32)
    cdef uint32_t[:, :, ::1] out = out_arr
    lb_arr = np.zeros((3, w, d_max), dtype=np.int32)
    cdef int32_t[:, :, ::1] lb = lb_arr  # 0: 45 deg, 1: 90 deg, 2: 135 deg
    work_arr = np.zeros((6, d_max), dtype=np.int32)
    cdef int32_t[:, ::1] wk = work_arr  # l0, l45, l90, l135, reg0, carry135
    tmp_arr = np.zeros(d_max, dtype=np.int32)
    cdef int32_t[::1] tmp135 = tmp_arr
    cdef int x, y, d
    for y in range(h):
        for x in range(w):
            _recurrence(&wk[4, 0], x > 0, &cv[y, x, 0], d_max, p1, p2, &wk[0, 0])
            _recurrence(&lb[0, x + 1, 0] if x + 1 < w else NULL,
                        y > 0 and x + 1 < w, &cv[y, x, 0], d_max, p1, p2, &wk[1, 0])
            _recurrence(&lb[1, x, 0], y > 0, &cv[y, x, 0], d_max, p1, p2, &wk[2, 0])
            for d in range(d_max):
                tmp135[d] = lb[2, x, d]
            _recurrence(&wk[5, 0], y > 0 and x > 0, &cv[y, x, 0], d_max, p1, p2, &wk[3, 0])
            for d in range(d_max):
                wk[5, d] = tmp135[d]
                lb[0, x, d] = wk[1, d]
                lb[1, x, d] = wk[2, d]
                lb[2, x, d] = wk[3, d]
                wk[4, d] = wk[0, d]
                out[y, x, d] = <uint32_t> (wk[0, d] + wk[1, d] + wk[2, d] + wk[3, d])
    return out_arr


def aggregate_interleaved(costs, int p1, int p2):
    """Interleave-and-reorder scheduled aggregation, bit-identical to aggregate()."""
    cdef uint16_t[:, :, ::1] cv = np.ascontiguousarray(costs, dtype=np.uint16)
    cdef int h = cv.shape[0], w = cv.shape[1], d_max = cv.shape[2]
    if w <= 2:
        # a 1-column half leaves the cutting-edge 45-degree dependency
        # pointing at a later slot of the same virtual row; such widths gain
        # nothing from interleaving, so run the sequential scan instead
        return aggregate(costs, p1, p2)
    cdef int half = (w + 1) // 2
    out_arr = np.empty((h, w, d_max), dtype=np.uint32)
    cdef uint32_t[:, :, ::1] out = out_arr
    lb_arr = np.zeros((3, w, d_max), dtype=np.int32)
    cdef int32_t[:, :, ::1] lb = lb_arr
    # work rows: l0, l45, l90, l135, reg0_left, reg0_right,
    #            carry_left, carry_right, edge_l0, edge135, tmp135
    work_arr = np.zeros((11, d_max), dtype=np.int32)
    cdef int32_t[:, ::1] wk = work_arr
    cdef int t, s, x, y, d
    cdef bint left, has_p0, has_p135
    cdef int32_t* p0
    cdef int32_t* p135
    for t in range(h + 1):
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
            if x == 0:
                p0 = NULL
                has_p0 = False
            elif (not left) and x == half:
                p0 = &wk[8, 0]
                has_p0 = True
            elif left:
                p0 = &wk[4, 0]
                has_p0 = True
            else:
                p0 = &wk[5, 0]
                has_p0 = True
            _recurrence(p0, has_p0, &cv[y, x, 0], d_max, p1, p2, &wk[0, 0])
            _recurrence(&lb[0, x + 1, 0] if x + 1 < w else NULL,
                        y > 0 and x + 1 < w, &cv[y, x, 0], d_max, p1, p2, &wk[1, 0])
            _recurrence(&lb[1, x, 0], y > 0, &cv[y, x, 0], d_max, p1, p2, &wk[2, 0])
            for d in range(d_max):
                wk[10, d] = lb[2, x, d]
            if y > 0 and x > 0:
                has_p135 = True
                if (not left) and x == half:
                    p135 = &wk[9, 0]
                elif left:
                    p135 = &wk[6, 0]
                else:
                    p135 = &wk[7, 0]
            else:
                has_p135 = False
                p135 = NULL
            _recurrence(p135, has_p135, &cv[y, x, 0], d_max, p1, p2, &wk[3, 0])
            for d in range(d_max):
                lb[0, x, d] = wk[1, d]
                lb[1, x, d] = wk[2, d]
                lb[2, x, d] = wk[3, d]
            if left:
                for d in range(d_max):
                    wk[6, d] = wk[10, d]
                    wk[4, d] = wk[0, d]
                if x == half - 1:
                    for d in range(d_max):
                        wk[8, d] = wk[0, d]
                        wk[9, d] = wk[10, d]
            else:
                for d in range(d_max):
                    wk[7, d] = wk[10, d]
                    wk[5, d] = wk[0, d]
            for d in range(d_max):
                out[y, x, d] = <uint32_t> (wk[0, d] + wk[1, d] + wk[2, d] + wk[3, d])
    return out_arr


def match_disparity(sums):
    """Match-image disparity via the shifting register cascade."""
    cdef uint32_t[:, :, ::1] sv = np.ascontiguousarray(sums, dtype=np.uint32)
    cdef int h = sv.shape[0], w = sv.shape[1], d_max = sv.shape[2]
    out_arr = np.empty((h, w), dtype=np.int32)
    cdef int32_t[:, ::1] out = out_arr
    rv_arr = np.zeros(d_max, dtype=np.int64)
    rd_arr = np.zeros(d_max, dtype=np.int32)
    cdef int64_t[::1] rv = rv_arr
    cdef int32_t[::1] rd = rd_arr
    cdef int x, y, u, j
    cdef int64_t v
    for y in range(h):
        for j in range(d_max):
            rv[j] = 0
            rd[j] = 0
        for u in range(w):
            for j in range(d_max - 1, 0, -1):
                rv[j] = rv[j - 1]
                rd[j] = rd[j - 1]
            rv[0] = sv[y, u, 0]
            rd[0] = 0
            for j in range(1, d_max):
                v = sv[y, u, j]
                if v < rv[j]:
                    rv[j] = v
                    rd[j] = j
            if u >= d_max - 1:
                out[y, u - (d_max - 1)] = rd[d_max - 1]
        for x in range(max(0, w - d_max + 1), w):
            out[y, x] = rd[w - 1 - x]
    return out_arr


def median_filter(disp, int window, int invalid):
    """Median over valid values in the clamped window; needs a validity majority."""
    cdef int32_t[:, ::1] dm = np.ascontiguousarray(disp, dtype=np.int32)
    cdef int h = dm.shape[0], w = dm.shape[1]
    cdef int r = window // 2
    cdef int need = (window * window + 1) // 2
    if window * window > MAX_MEDIAN_CELLS:
        raise ValueError(f"median window {window} too large")
    out_arr = np.empty((h, w), dtype=np.int32)
    cdef int32_t[:, ::1] out = out_arr
    cdef int32_t vals[MAX_MEDIAN_CELLS]
    cdef int x, y, oy, ox, yy, n, i, j
    cdef int32_t v
    for y in range(h):
        for x in range(w):
            n = 0
            for oy in range(-r, r + 1):
                yy = _clamp(y + oy, 0, h - 1)
                for ox in range(-r, r + 1):
                    v = dm[yy, _clamp(x + ox, 0, w - 1)]
                    if v != invalid:
                        # insertion sort keeps vals ascending
                        i = n
                        while i > 0 and vals[i - 1] > v:
                            vals[i] = vals[i - 1]
                            i -= 1
                        vals[i] = v
                        n += 1
            if n >= need:
                out[y, x] = vals[(n - 1) // 2]
            else:
                out[y, x] = invalid
    return out_arr
