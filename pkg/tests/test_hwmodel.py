"""Latency formula, data widths, memory model, BRAM packing."""

import math

import pytest

from conftest import make_rng, random_pair
from sgmkit import (
    AggregationParams,
    CostFunction,
    CostKind,
    PipelineConfig,
    RefinementConfig,
    aggregate,
    compute_cost_volume,
    estimate,
    estimate_cycles,
    estimate_memory,
    path_buffer_bram_blocks,
)
from sgmkit.hwmodel import (
    bit_width,
    cost_bit_width,
    cost_max,
    default_penalties,
    lr_overhead_cycles,
    path_bit_width,
    sum_bit_width,
    transform_bit_width,
)
from sgmkit.pixelio import ConfigError
from sgmkit.refine import LrMode

KITTI = dict(width=1242, height=374)


def cfg(**kw):
    kw.setdefault("width", KITTI["width"])
    kw.setdefault("height", KITTI["height"])
    return PipelineConfig(**kw)


class TestCycles:
    def test_published_runtime_c0(self):
        # census 5x5, d_max 64, uf 16 at 1242x374, IL=100, II=1, 300 MHz
        c = cfg(cost_fn=CostFunction(CostKind.CENSUS, 5), d_max=64, uf=16)
        cycles = estimate_cycles(c)
        assert cycles == 100 + 374 * 1242 * 4 - 1 == 1_858_131
        est = estimate(c)
        assert 0.00619 <= est.seconds <= 0.00625
        assert math.floor(est.fps) == 161

    def test_single_iteration_degenerates_to_il(self):
        c = cfg(cost_fn=CostFunction(CostKind.SAD, 3), d_max=1, uf=1,
                width=1, height=1, il=100)
        assert estimate_cycles(c) == 100

    def test_cycles_depend_on_ratio_only(self):
        a = cfg(d_max=64, uf=16)
        b = cfg(cost_fn=CostFunction(CostKind.CENSUS, 5), d_max=128, uf=32)
        assert estimate_cycles(a) == estimate_cycles(b)

    def test_formula_exactness_randomized(self):
        rng = make_rng(81)
        for _ in range(200):
            d_max = int(rng.choice([4, 8, 16, 32, 64, 128]))
            ufs = [u for u in (1, 2, 4, 8, 16, 32) if d_max % u == 0]
            uf = int(rng.choice(ufs))
            w = int(rng.integers(d_max + 1, 2000))
            h = int(rng.integers(1, 1000))
            il = int(rng.integers(0, 5000))
            ii = int(rng.integers(1, 4))
            c = cfg(d_max=d_max, uf=uf, width=w, height=h, il=il, ii=ii)
            assert estimate_cycles(c) == il + ii * (h * w * (d_max // uf) - 1)

    def test_uf_monotonicity(self):
        cycles = [estimate_cycles(cfg(d_max=64, uf=u)) for u in (1, 2, 4, 8, 16, 32, 64)]
        assert cycles == sorted(cycles, reverse=True)

    def test_uf_divisibility_rejected(self):
        with pytest.raises(ConfigError, match="divide"):
            cfg(d_max=64, uf=48)

    def test_lr_overhead_increases_runtime(self):
        nlr = cfg(refine=RefinementConfig(lr_mode=LrMode.NLR))
        lr1 = cfg(refine=RefinementConfig(lr_mode=LrMode.LR1))
        lr2 = cfg(refine=RefinementConfig(lr_mode=LrMode.LR2))
        assert lr_overhead_cycles(nlr) == 0
        expected = (1242 + 64) * 4
        assert lr_overhead_cycles(lr1) == expected
        assert lr_overhead_cycles(lr2) == expected
        assert estimate(lr1).seconds > estimate(nlr).seconds
        assert estimate(lr1).cycles == estimate(nlr).cycles  # pure formula unchanged

    def test_fps_times_seconds_is_one(self):
        rng = make_rng(82)
        for _ in range(50):
            c = cfg(d_max=16, uf=int(rng.choice([1, 2, 4, 8])),
                    freq_mhz=float(rng.integers(50, 600)))
            est = estimate(c)
            assert abs(est.fps * est.seconds - 1.0) < 1e-12


class TestWidths:
    def test_cost_maxima(self):
        assert cost_max(CostKind.CENSUS, 5) == 24
        assert cost_max(CostKind.RANK, 7) == 48
        assert cost_max(CostKind.SAD, 5) == 6375
        assert cost_max(CostKind.ZSAD, 5) == 12750

    def test_census5_is_5_bits(self):
        assert cost_bit_width(CostKind.CENSUS, 5) == 5

    def test_sad5_is_13_bits(self):
        assert cost_bit_width(CostKind.SAD, 5) == 13

    def test_degenerate_window_width_one(self):
        # w=1 gives cost_max 0; width 1 by convention
        assert bit_width(cost_max(CostKind.CENSUS, 1)) == 1

    def test_path_and_sum_widths(self):
        # census 5x5 with P2=86: path <= 24+86=110 -> 7 bits; sum <= 440 -> 9
        assert path_bit_width(CostKind.CENSUS, 5, 86) == 7
        assert sum_bit_width(CostKind.CENSUS, 5, 86) == 9

    def test_transform_widths(self):
        assert transform_bit_width(CostKind.CENSUS, 5) == 24
        assert transform_bit_width(CostKind.RANK, 5) == 5
        assert transform_bit_width(CostKind.SAD, 5) == 8

    def test_default_penalties_census5(self):
        assert default_penalties(CostKind.CENSUS, 5) == (7, 86)

    def test_default_penalties_scale_and_order(self):
        for kind in CostKind:
            for win in (3, 5, 7):
                if win > 5 and kind is CostKind.ZSAD:
                    pass
                p1, p2 = default_penalties(kind, win)
                assert 0 < p1 < p2

    def test_widths_sound_on_random_data(self):
        rng = make_rng(83)
        for kind in CostKind:
            for win in (3, 5):
                fn = CostFunction(kind, win)
                p1, p2 = default_penalties(kind, win)
                pair = random_pair(rng, 10, 16)
                vol = compute_cost_volume(pair, fn, 8)
                agg = aggregate(vol, AggregationParams(p1, p2))
                assert int(vol.costs.max()) < 2 ** cost_bit_width(kind, win)
                assert int(agg.sums.max()) < 2 ** sum_bit_width(kind, win, p2)


class TestMemory:
    def test_packed_leq_partitioned(self):
        for kind in CostKind:
            c = cfg(cost_fn=CostFunction(kind, 5))
            part, packed = estimate_memory(c)
            assert packed <= part

    def test_width_halving_halves_line_buffer_terms(self):
        from sgmkit.hwmodel import _memory_terms

        c1 = cfg(d_max=64, uf=16, width=1242)
        c2 = cfg(d_max=64, uf=16, width=621)
        t1, t2 = _memory_terms(c1), _memory_terms(c2)
        for name in ("image_line_buffers", "path_row_buffers", "reorder_fifos"):
            assert t2[name][0] * 2 == t1[name][0]
            assert t2[name][1] * 2 == t1[name][1]
        # the match window buffer does not depend on image width
        assert t1["match_window_buffer"] == t2["match_window_buffer"]

    def test_lr_structures(self):
        from sgmkit.hwmodel import _memory_terms

        nlr = _memory_terms(cfg(refine=RefinementConfig(lr_mode=LrMode.NLR)))
        lr1 = _memory_terms(cfg(refine=RefinementConfig(lr_mode=LrMode.LR1)))
        lr2 = _memory_terms(cfg(refine=RefinementConfig(lr_mode=LrMode.LR2)))
        assert "lr_reuse_registers" in lr1 and "lr_reuse_registers" not in nlr
        assert lr2["path_row_buffers"][1] == 2 * nlr["path_row_buffers"][1]
        assert lr2["reorder_fifos"][1] == 2 * nlr["reorder_fifos"][1]

    def test_match_window_buffer_element_widths(self):
        from sgmkit.hwmodel import _memory_terms

        for kind, elem in ((CostKind.SAD, 8), (CostKind.ZSAD, 8),
                           (CostKind.CENSUS, 24), (CostKind.RANK, 5)):
            c = cfg(cost_fn=CostFunction(kind, 5), d_max=64, uf=16)
            term = _memory_terms(c)["match_window_buffer"][1]
            assert term == 5 * (64 + 5 - 1) * elem

    def test_published_packing_example(self):
        # path row buffer at width=1242, d_max=64, uf=16, 7-bit path costs:
        # packed = 1242*4 words of 112 bits
        c = cfg(cost_fn=CostFunction(CostKind.CENSUS, 5), d_max=64, uf=16)
        assert path_bit_width(CostKind.CENSUS, 5, c.params.p2) == 7
        part, packed = path_buffer_bram_blocks(c)
        words = 1242 * 4
        assert part == 16 * 1 * math.ceil(words / 1024)
        assert packed * 2 == part

    def test_packing_ratio_half_for_even_uf(self):
        for kind in CostKind:
            for win in (3, 5, 7):
                if win > 11 or (kind is CostKind.CENSUS and win > 7):
                    continue
                for uf in (2, 4, 8, 16, 32):
                    c = cfg(cost_fn=CostFunction(kind, win), d_max=64,
                            uf=uf, width=1242)
                    pw = path_bit_width(kind, win, c.params.p2)
                    if pw > 18:
                        continue
                    part, packed = path_buffer_bram_blocks(c)
                    assert packed * 2 == part, (kind, win, uf)


class TestConfigValidation:
    def test_dmax_geq_width_allowed_for_estimates(self):
        # the pure latency formula stays usable for degenerate geometries;
        # the geometric check happens against real image pairs instead
        c = cfg(d_max=64, uf=64, width=1, height=1)
        assert estimate_cycles(c) == c.il

    def test_bad_frequency(self):
        with pytest.raises(ConfigError, match="freq"):
            cfg(freq_mhz=0)

    def test_default_penalties_filled_in(self):
        c = cfg(cost_fn=CostFunction(CostKind.RANK, 7))
        assert c.params == AggregationParams(*default_penalties(CostKind.RANK, 7))
