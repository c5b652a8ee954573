"""Streaming semi-global stereo matching with an FPGA-style cost model.

The package provides the full matching pipeline (cost volume, four-path
aggregation, disparity selection and refinement), an analytical hardware
latency/width/memory model, and a design-space explorer. Hot kernels run on
a compiled extension when available; see :mod:`sgmkit.kernels`.
"""

from .aggregation import (
    AggregatedVolume,
    AggregationParams,
    aggregate,
    aggregate_interleaved,
    dependency_distance,
    interleave_schedule,
    path_recurrence,
)
from .costvolume import (
    CostFunction,
    CostKind,
    CostVolume,
    census_transform,
    compute_cost_volume,
    compute_cost_volume_pair,
    rank_transform,
    reference_cost_volume,
    reference_cost_volume_pair,
)
from .explorer import SweepRecord, SweepSpec, pareto_front, run_sweep
from .hwmodel import (
    HwEstimate,
    PipelineConfig,
    cost_bit_width,
    default_penalties,
    estimate,
    estimate_cycles,
    estimate_memory,
    path_bit_width,
    path_buffer_bram_blocks,
    sum_bit_width,
)
from .kernels import BACKEND
from .pixelio import (
    INVALID,
    ConfigError,
    DisparityMap,
    GrayImage,
    PgmError,
    StereoPair,
    load_config,
    load_disparity,
    load_pgm,
    save_config,
    save_disparity,
    save_pgm,
)
from .refine import (
    D1Report,
    LrMode,
    RefinementConfig,
    d1_error,
    lr_check,
    match_disparity_reuse,
    median_filter,
    run_pipeline,
    wta,
)

__version__ = "0.1.0"
