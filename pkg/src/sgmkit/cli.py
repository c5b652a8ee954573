"""Command-line interface.

Subcommands:

* ``match``     run one configuration on one stereo pair, write a disparity PGM
* ``sweep``     evaluate a configuration grid over a dataset, write CSV
* ``estimate``  print the hardware estimate for a configuration (no images)
* ``eval``      D1 error between two disparity PGMs

Exit codes: 0 success, 1 validation/usage error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from . import pixelio
from .aggregation import AggregationParams
from .costvolume import CostFunction, CostKind
from .explorer import SweepSpec, run_sweep
from .hwmodel import PipelineConfig, default_penalties, estimate
from .kernels import BACKEND
from .pixelio import ConfigError, StereoPair
from .refine import LrMode, d1_error, run_pipeline


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_config_flags(parser, with_geometry: bool) -> None:
    parser.add_argument("--config", help="key=value config file (flags override it)")
    parser.add_argument("--cost", choices=[k.value for k in CostKind])
    parser.add_argument("--win", type=int, help="cost window side length (odd)")
    parser.add_argument("--dmax", type=int, help="disparity range")
    parser.add_argument("--uf", type=int, help="disparity-dimension unroll factor")
    parser.add_argument("--p1", type=int, help="small-jump penalty")
    parser.add_argument("--p2", type=int, help="large-jump penalty")
    parser.add_argument("--lr", choices=[m.value for m in LrMode], help="L-R check mode")
    parser.add_argument("--lr-threshold", type=int)
    parser.add_argument("--median", choices=["on", "off"])
    parser.add_argument("--median-win", type=int)
    parser.add_argument("--freq", type=float, help="clock frequency in MHz")
    parser.add_argument("--il", type=int, help="iteration latency in cycles")
    parser.add_argument("--ii", type=int, help="initiation interval in cycles")
    if with_geometry:
        parser.add_argument("--width", type=int)
        parser.add_argument("--height", type=int)


def _config_from_args(args, width=None, height=None) -> PipelineConfig:
    if args.config:
        base = pixelio.load_config(args.config)
    else:
        base = PipelineConfig()

    fn = base.cost_fn
    if args.cost is not None or args.win is not None:
        fn = CostFunction(
            CostKind(args.cost) if args.cost is not None else fn.kind,
            args.win if args.win is not None else fn.window,
        )

    params = base.params
    if fn != base.cost_fn and args.config is None and args.p1 is None and args.p2 is None:
        # penalties were never pinned anywhere: rescale defaults to the cost fn
        params = None
    if args.p1 is not None or args.p2 is not None:
        dp1, dp2 = default_penalties(fn.kind, fn.window)
        params = AggregationParams(
            args.p1 if args.p1 is not None else dp1,
            args.p2 if args.p2 is not None else dp2,
        )

    refine = base.refine
    updates = {}
    if args.lr is not None:
        updates["lr_mode"] = LrMode(args.lr)
    if args.lr_threshold is not None:
        updates["lr_threshold"] = args.lr_threshold
    if args.median is not None:
        updates["median"] = args.median == "on"
    if args.median_win is not None:
        updates["median_window"] = args.median_win
    if updates:
        refine = dataclasses.replace(refine, **updates)

    return PipelineConfig(
        cost_fn=fn,
        d_max=args.dmax if args.dmax is not None else base.d_max,
        uf=args.uf if args.uf is not None else base.uf,
        width=width if width is not None else getattr(args, "width", None) or base.width,
        height=height if height is not None else getattr(args, "height", None) or base.height,
        params=params,
        refine=refine,
        freq_mhz=args.freq if args.freq is not None else base.freq_mhz,
        il=args.il if args.il is not None else base.il,
        ii=args.ii if args.ii is not None else base.ii,
    )


def _cmd_match(args) -> int:
    base = pixelio.load_pgm(args.base)
    match = pixelio.load_pgm(args.match)
    gt = pixelio.load_disparity(args.gt, scale=args.scale) if args.gt else None
    pair = StereoPair(base=base, match=match, ground_truth=gt)
    config = _config_from_args(args, width=pair.width, height=pair.height)
    disp = run_pipeline(pair, config)
    pixelio.save_disparity(disp, args.out, scale=args.scale)
    print(f"wrote {args.out} ({pair.width}x{pair.height}, backend={BACKEND})")
    if gt is not None:
        report = d1_error(disp, gt)
        print(f"d1_all: {report.d1_all:.4f} "
              f"({report.erroneous_pixels}/{report.evaluated_pixels} pixels)")
    return 0


def _parse_pair_spec(spec: str, scale: int) -> StereoPair:
    parts = spec.split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(f"--pair expects base:match[:gt], got {spec!r}")
    base = pixelio.load_pgm(parts[0])
    match = pixelio.load_pgm(parts[1])
    gt = pixelio.load_disparity(parts[2], scale=scale) if len(parts) == 3 else None
    return StereoPair(base=base, match=match, ground_truth=gt)


def _cmd_sweep(args) -> int:
    pairs: list[StereoPair] = []
    for spec in args.pair or []:
        pairs.append(_parse_pair_spec(spec, args.scale))
    if args.dataset:
        with open(args.dataset, encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    pairs.append(_parse_pair_spec(":".join(line.split()), args.scale))
    if not pairs:
        raise ConfigError("no stereo pairs given (use --pair or --dataset)")

    resolutions = []
    for token in (args.resolutions.split(",") if args.resolutions else []):
        w, _, h = token.partition("x")
        resolutions.append((int(w), int(h)))

    penalties = None
    if args.p1 is not None and args.p2 is not None:
        penalties = AggregationParams(args.p1, args.p2)

    spec = SweepSpec(
        cost_fns=tuple(args.costs.split(",")),
        windows=tuple(int(v) for v in args.wins.split(",")),
        d_maxes=tuple(int(v) for v in args.dmaxes.split(",")),
        ufs=tuple(int(v) for v in args.ufs.split(",")),
        lr_modes=tuple(args.lr_modes.split(",")),
        medians=tuple(v == "on" for v in args.medians.split(",")),
        resolutions=tuple(resolutions),
        penalties=penalties,
    )
    records = run_sweep(spec, pairs, args.out, include_wall_time=args.wall_time)
    print(f"wrote {args.out} ({len(records)} configurations, backend={BACKEND})")
    return 0


def _cmd_estimate(args) -> int:
    config = _config_from_args(args)
    est = estimate(config)
    print(f"config: cost={config.cost_fn.kind.value} win={config.cost_fn.window} "
          f"dmax={config.d_max} uf={config.uf} lr={config.refine.lr_mode.value} "
          f"{config.width}x{config.height} @ {config.freq_mhz:g} MHz")
    print(f"cycles: {est.cycles:,}")
    if est.lr_overhead_cycles:
        print(f"lr overhead: {est.lr_overhead_cycles:,} cycles "
              f"(total {est.total_cycles:,})")
    print(f"runtime: {est.seconds:.4f} s")
    print(f"fps: {int(est.fps)}")
    print(f"widths: cost={est.cost_width} path={est.path_width} sum={est.sum_width} bits")
    print(f"memory: partitioned={est.mem_bits_partitioned:,} bits, "
          f"packed={est.mem_bits_packed:,} bits")
    return 0


def _cmd_eval(args) -> int:
    est = pixelio.load_disparity(args.estimate, scale=args.scale)
    gt = pixelio.load_disparity(args.truth, scale=args.scale)
    mask = None
    if args.mask:
        mask = pixelio.load_pgm(args.mask).pixels > 0
    report = d1_error(est, gt, mask)
    print(f"d1_all: {report.d1_all:.6f}")
    print(f"evaluated: {report.evaluated_pixels}")
    print(f"erroneous: {report.erroneous_pixels}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="sgmkit", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("match", help="run one configuration on one stereo pair")
    p.add_argument("base", help="base (left) image, 8-bit PGM")
    p.add_argument("match", help="match (right) image, 8-bit PGM")
    p.add_argument("--out", required=True, help="output disparity PGM (16-bit)")
    p.add_argument("--gt", help="ground-truth disparity PGM for D1 scoring")
    p.add_argument("--scale", type=int, default=256, help="disparity PGM scale")
    _add_config_flags(p, with_geometry=False)
    p.set_defaults(func=_cmd_match)

    p = sub.add_parser("sweep", help="evaluate a configuration grid over a dataset")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--pair", action="append", help="base:match[:gt], repeatable")
    p.add_argument("--dataset", help="manifest file: one 'base match [gt]' per line")
    p.add_argument("--costs", default="census")
    p.add_argument("--wins", default="5")
    p.add_argument("--dmaxes", default="64")
    p.add_argument("--ufs", default="16")
    p.add_argument("--lr-modes", default="nlr")
    p.add_argument("--medians", default="on")
    p.add_argument("--resolutions", help="comma list of WxH downscale targets")
    p.add_argument("--p1", type=int)
    p.add_argument("--p2", type=int)
    p.add_argument("--scale", type=int, default=256)
    p.add_argument("--wall-time", action="store_true",
                   help="include (non-reproducible) wall-clock times in the CSV")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("estimate", help="print the hardware estimate for a configuration")
    _add_config_flags(p, with_geometry=True)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("eval", help="D1 error between two disparity PGMs")
    p.add_argument("estimate", help="estimated disparity PGM (16-bit)")
    p.add_argument("truth", help="ground-truth disparity PGM (16-bit)")
    p.add_argument("--mask", help="8-bit PGM; nonzero pixels are evaluated")
    p.add_argument("--scale", type=int, default=256)
    p.set_defaults(func=_cmd_eval)
    return parser


def cli_main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(parser.format_usage(), file=sys.stderr, end="")
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
