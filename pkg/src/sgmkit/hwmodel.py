"""Analytical hardware cost model for the streaming pipeline.

Three analyses, mirroring what an HLS flow reports:

* cycle count of a pipelined stage, ``IL + II * (height*width*d_max/uf - 1)``,
  with an optional documented overhead term for the L-R check variants;
* minimal data widths derived from closed-form worst-case values per stage;
* on-chip memory footprint in bits under two layouts (per-lane array
  partitioning vs data packing), plus an 18 Kb block-RAM quantization of the
  path-cost row buffers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .aggregation import AggregationParams
from .costvolume import CostFunction, CostKind
from .pixelio import ConfigError
from .refine import LrMode, RefinementConfig

#: Block-RAM quantization: fixed 18-bit-wide, 1024-deep blocks.
BRAM_WIDTH = 18
BRAM_DEPTH = 1024


def bit_width(max_value: int) -> int:
    """Bits needed for unsigned values in [0, max_value]; at least 1."""
    if max_value < 0:
        raise ValueError(f"max_value must be >= 0, got {max_value}")
    return max(1, int(max_value).bit_length())


def _kind_window(kind, window) -> tuple[CostKind, int]:
    if isinstance(kind, CostFunction):
        return kind.kind, kind.window
    if window is None:
        raise TypeError("window is required unless a CostFunction is passed")
    return CostKind(kind), window


def cost_max(kind, window: int | None = None) -> int:
    """Worst-case matching cost per cost function and window side length."""
    kind, window = _kind_window(kind, window)
    ww = window * window
    if kind in (CostKind.CENSUS, CostKind.RANK):
        return ww - 1
    if kind is CostKind.SAD:
        return 255 * ww
    return 510 * ww  # ZSAD: each term spans [-510, 510] after mean removal


def cost_bit_width(kind, window: int | None = None) -> int:
    return bit_width(cost_max(kind, window))


def path_bit_width(kind, window: int | None = None, p2: int | None = None) -> int:
    """Path costs are bounded by cost_max + P2 (the min-subtraction caps growth)."""
    if p2 is None:
        raise TypeError("p2 is required")
    return bit_width(cost_max(kind, window) + p2)


def sum_bit_width(kind, window: int | None = None, p2: int | None = None) -> int:
    if p2 is None:
        raise TypeError("p2 is required")
    return bit_width(4 * (cost_max(kind, window) + p2))


def transform_bit_width(kind, window: int | None = None) -> int:
    """Width of the transformed per-pixel value streamed to the cost stage."""
    kind, window = _kind_window(kind, window)
    if kind is CostKind.CENSUS:
        return window * window - 1  # the bit string itself
    if kind is CostKind.RANK:
        return bit_width(window * window - 1)
    return 8  # SAD/ZSAD stream raw intensities


def _round_half_up_div(num: int, den: int) -> int:
    return (2 * num + den) // (2 * den)


def default_penalties(kind, window: int) -> tuple[int, int]:
    """Declared default penalties, scaled from P1=7/P2=86 at census 5x5.

    The scaling keeps the penalty-to-cost ratio constant across cost
    functions: P1 = max(1, round(7 * cost_max / 24)) and likewise for P2.
    """
    cm = cost_max(kind, window)
    p1 = max(1, _round_half_up_div(7 * cm, 24))
    p2 = max(p1 + 1, _round_half_up_div(86 * cm, 24))
    return p1, p2


@dataclass(frozen=True)
class PipelineConfig:
    """Full algorithmic + hardware configuration of one pipeline instance."""

    cost_fn: CostFunction = CostFunction(CostKind.CENSUS, 5)
    d_max: int = 64
    uf: int = 16
    width: int = 1242
    height: int = 374
    params: AggregationParams | None = None
    refine: RefinementConfig = RefinementConfig()
    freq_mhz: float = 300.0
    il: int = 100
    ii: int = 1

    def __post_init__(self):
        if self.params is None:
            p1, p2 = default_penalties(self.cost_fn.kind, self.cost_fn.window)
            object.__setattr__(self, "params", AggregationParams(p1, p2))
        violations = self._violations()
        if violations:
            raise ConfigError("; ".join(violations))

    def _violations(self) -> list[str]:
        return scalar_violations(
            d_max=self.d_max, uf=self.uf, width=self.width, height=self.height,
            freq_mhz=self.freq_mhz, il=self.il, ii=self.ii,
        )


def scalar_violations(*, d_max, uf, width, height, freq_mhz, il, ii) -> list[str]:
    """Constraint checks shared by PipelineConfig and the config file parser."""
    v = []
    if d_max < 1:
        v.append(f"d_max must be >= 1, got {d_max}")
    if uf < 1:
        v.append(f"uf must be >= 1, got {uf}")
    elif d_max >= 1 and d_max % uf != 0:
        v.append(f"uf {uf} does not divide d_max {d_max}")
    if width < 1 or height < 1:
        v.append(f"image dimensions must be positive, got {width}x{height}")
    if freq_mhz <= 0:
        v.append(f"freq_mhz must be positive, got {freq_mhz}")
    if il < 0:
        v.append(f"il must be >= 0, got {il}")
    if ii < 1:
        v.append(f"ii must be >= 1, got {ii}")
    return v


def _parse_bool(value: str) -> bool:
    words = {
        "1": True, "true": True, "on": True, "yes": True,
        "0": False, "false": False, "off": False, "no": False,
    }
    key = value.strip().lower()
    if key not in words:
        raise ValueError(f"expected a boolean, got {value!r}")
    return words[key]


def config_from_strings(pairs: dict[str, str], name: str = "config") -> PipelineConfig:
    """Build a validated PipelineConfig from raw key=value strings.

    Missing keys take the documented defaults (census 5x5, d_max 64, uf 16,
    NLR, median on). Every violation is collected into one ConfigError.
    """
    errors: list[str] = []

    def parse(key, conv, default):
        if key not in pairs:
            return default
        try:
            return conv(pairs[key])
        except ValueError as exc:
            errors.append(f"key '{key}': {exc}")
            return default

    kind = parse("cost", CostKind, CostKind.CENSUS)
    window = parse("win", int, 5)
    d_max = parse("dmax", int, 64)
    uf = parse("uf", int, 16)
    p1 = parse("p1", int, None)
    p2 = parse("p2", int, None)
    lr_mode = parse("lr_mode", LrMode, LrMode.NLR)
    lr_threshold = parse("lr_threshold", int, 1)
    median = parse("median", _parse_bool, True)
    median_win = parse("median_win", int, 3)
    freq_mhz = parse("freq_mhz", float, 300.0)
    il = parse("il", int, 100)

    fn = None
    try:
        fn = CostFunction(kind, window)
    except ValueError as exc:
        errors.append(str(exc))

    params = None
    if p1 is not None or p2 is not None:
        if fn is not None:
            dp1, dp2 = default_penalties(fn.kind, fn.window)
            try:
                params = AggregationParams(p1 if p1 is not None else dp1,
                                           p2 if p2 is not None else dp2)
            except ValueError as exc:
                errors.append(str(exc))

    refine = None
    try:
        refine = RefinementConfig(lr_mode, lr_threshold, median, median_win)
    except ValueError as exc:
        errors.append(str(exc))

    default = PipelineConfig()
    errors.extend(
        scalar_violations(
            d_max=d_max, uf=uf, width=default.width, height=default.height,
            freq_mhz=freq_mhz, il=il, ii=default.ii,
        )
    )
    if errors:
        raise ConfigError(f"{name}: " + "; ".join(errors))
    return PipelineConfig(
        cost_fn=fn, d_max=d_max, uf=uf, params=params, refine=refine,
        freq_mhz=freq_mhz, il=il,
    )


# ---------------------------------------------------------------------------
# Latency
# ---------------------------------------------------------------------------


def estimate_cycles(config: PipelineConfig) -> int:
    """Pipelined-stage cycle count: IL + II * (height*width*d_max/uf - 1)."""
    iters = config.height * config.width * (config.d_max // config.uf)
    return config.il + config.ii * (iters - 1)


def lr_overhead_cycles(config: PipelineConfig) -> int:
    """Declared model of the extra latency of the L-R variants.

    One extra row plus d_max pixels of pipeline lag between the base and
    match computations: II * (width + d_max) * d_max/uf. Zero for NLR.
    This is a documented engineering estimate, configurable through II,
    not a derived quantity.
    """
    if LrMode(config.refine.lr_mode) is LrMode.NLR:
        return 0
    return config.ii * (config.width + config.d_max) * (config.d_max // config.uf)


# ---------------------------------------------------------------------------
# Memory
# ---------------------------------------------------------------------------


def _memory_terms(config: PipelineConfig) -> dict[str, tuple[int, int]]:
    """Per-buffer (partitioned_bits, packed_bits) terms of the memory model.

    Buffers accessed by the uf parallel disparity lanes are counted once per
    lane at full depth when partitioned, and as one memory of depth/uf words
    of uf*element_width bits when packed. Image line buffers, the match
    window buffer and the L-R registers have no lane replication.
    """
    fn = config.cost_fn
    w = fn.window
    width, d_max, uf = config.width, config.d_max, config.uf
    pw = path_bit_width(fn.kind, w, config.params.p2)
    sw = sum_bit_width(fn.kind, w, config.params.p2)
    mode = LrMode(config.refine.lr_mode)

    terms: dict[str, tuple[int, int]] = {}

    lb = 2 * (w - 1) * width * 8
    terms["image_line_buffers"] = (lb, lb)

    mwin = w * (d_max + w - 1) * transform_bit_width(fn.kind, w)
    terms["match_window_buffer"] = (mwin, mwin)

    agg_copies = 2 if mode is LrMode.LR2 else 1
    path_elems = width * d_max
    terms["path_row_buffers"] = (
        agg_copies * 3 * uf * path_elems * pw,
        agg_copies * 3 * path_elems * pw,
    )

    # 4 FIFOs of width/2 elements each hold 2*width*d_max values in total
    # (computed jointly so the term stays exactly linear in width)
    fifo_elems = 2 * width * d_max
    terms["reorder_fifos"] = (
        agg_copies * uf * fifo_elems * sw,
        agg_copies * fifo_elems * sw,
    )

    if mode is LrMode.LR1:
        regs = d_max * sw
        terms["lr_reuse_registers"] = (regs, regs)
    return terms


def estimate_memory(config: PipelineConfig) -> tuple[int, int]:
    """Total on-chip bits as (partitioned, packed)."""
    terms = _memory_terms(config)
    part = sum(t[0] for t in terms.values())
    packed = sum(t[1] for t in terms.values())
    return part, packed


def path_buffer_bram_blocks(config: PipelineConfig) -> tuple[int, int]:
    """Block count of one path-cost row buffer at BRAM granularity.

    Each of the uf lanes needs its own block column when partitioned
    (ceil(element/18) columns of ceil(words/1024) blocks). Packing pairs
    lanes through the 36-bit-wide simple-dual-port block mode, so two
    18-bit columns share one block: for any even uf with elements of at
    most 18 bits the packed count is exactly half the partitioned count.
    """
    pw = path_bit_width(config.cost_fn.kind, config.cost_fn.window, config.params.p2)
    words = config.width * (config.d_max // config.uf)
    lane_cols = math.ceil(pw / BRAM_WIDTH)
    depth_blocks = math.ceil(words / BRAM_DEPTH)
    partitioned = config.uf * lane_cols * depth_blocks
    packed = math.ceil(config.uf * lane_cols / 2) * depth_blocks
    return partitioned, packed


# ---------------------------------------------------------------------------
# Bundled estimate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HwEstimate:
    """Predicted cycles/runtime plus data widths and memory footprint."""

    cycles: int  # pure pipeline formula, without L-R overhead
    lr_overhead_cycles: int
    total_cycles: int
    seconds: float
    fps: float
    cost_width: int
    path_width: int
    sum_width: int
    mem_bits_partitioned: int
    mem_bits_packed: int


def estimate(config: PipelineConfig) -> HwEstimate:
    cycles = estimate_cycles(config)
    overhead = lr_overhead_cycles(config)
    total = cycles + overhead
    seconds = total / (config.freq_mhz * 1e6)
    part, packed = estimate_memory(config)
    fn = config.cost_fn
    return HwEstimate(
        cycles=cycles,
        lr_overhead_cycles=overhead,
        total_cycles=total,
        seconds=seconds,
        fps=1.0 / seconds,
        cost_width=cost_bit_width(fn.kind, fn.window),
        path_width=path_bit_width(fn.kind, fn.window, config.params.p2),
        sum_width=sum_bit_width(fn.kind, fn.window, config.params.p2),
        mem_bits_partitioned=part,
        mem_bits_packed=packed,
    )
