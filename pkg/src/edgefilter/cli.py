"""Command-line interface: ``edgefilter {filter,eigenmodes,experiment,figures}``.

Exit codes: 0 success, 1 usage error, 2 numerical/configuration/I-O error.
"""

import argparse
import logging
import sys
from dataclasses import replace

from . import CONFIG_SCHEMA_VERSION, __version__
from .errors import FilterError, UsageError
from .filters import METHODS, cg_guided_filter, power_filter, self_guided_bf
from .harness.config import load_config
from .harness.experiments import run_denoise_experiment, run_figures
from .laplacian import build_laplacian
from .signal import read_signal_csv, write_signal_csv
from .spectral import eig_generalized, eig_smallest
from .weights import NegativeOverride, WeightParams, apply_overrides, bilateral_weights

log = logging.getLogger("edgefilter")

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _override(text):
    try:
        return NegativeOverride.parse(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_overrides(items):
    """Reject repeated edge indices at parse time."""
    seen = set()
    for ov in items:
        if ov.edge_index in seen:
            raise UsageError(f"--override given twice for edge {ov.edge_index}")
        seen.add(ov.edge_index)
    return tuple(items)


def _add_weight_args(p):
    p.add_argument("--sigma-d", type=float, default=0.5, help="spatial falloff (default 0.5)")
    p.add_argument("--sigma-r", type=float, default=0.1, help="intensity falloff (default 0.1)")
    p.add_argument("--radius", type=int, default=1, help="neighbour radius (default 1, tridiagonal)")
    p.add_argument("--no-spatial", action="store_true", help="drop the spatial factor of the kernel")
    p.add_argument(
        "--override",
        action="append",
        type=_override,
        default=[],
        metavar="INDEX:VALUE",
        help="set w[i,i+1] = w[i+1,i] = VALUE (0-based edge index); repeatable",
    )


def _weight_params(args):
    return WeightParams(
        sigma_d=args.sigma_d,
        sigma_r=args.sigma_r,
        radius=args.radius,
        spatial_term_enabled=not args.no_spatial,
    )


def build_parser():
    parser = _Parser(prog="edgefilter", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--version",
        action="version",
        version=f"edgefilter {__version__} (config schema {CONFIG_SCHEMA_VERSION})",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("filter", help="denoise a signal CSV")
    p.add_argument("input", help="input signal CSV (index,value)")
    p.add_argument("--guide", help="guide signal CSV; defaults to the input itself")
    p.add_argument("--method", choices=METHODS, default="cg_guided")
    p.add_argument("-m", "--iterations", type=int, default=15)
    _add_weight_args(p)
    p.add_argument("-o", "--output", required=True, help="output signal CSV")

    p = sub.add_parser("eigenmodes", help="lowest eigenmodes of a guide's Laplacian")
    p.add_argument("guide", help="guide signal CSV")
    p.add_argument("-k", type=int, default=5)
    p.add_argument("--problem", choices=("standard", "generalized"), default="standard")
    _add_weight_args(p)
    p.add_argument("-o", "--output", required=True, help="output CSV")

    p = sub.add_parser("experiment", help="run a denoising experiment from a JSON config")
    p.add_argument("config", help="experiment config JSON")
    p.add_argument("--output-dir", help="overrides output_dir from the config")
    p.add_argument("--jobs", type=int, default=1, help="seeds processed concurrently (default 1)")

    p = sub.add_parser("figures", help="reproduce the shipped figure jobs")
    p.add_argument("which", choices=("1", "2", "3", "4", "5", "6", "all"))
    p.add_argument("-o", "--output-dir", default="figures")
    p.add_argument("--jobs", type=int, default=1)
    return parser


def cmd_filter(args):
    x0 = read_signal_csv(args.input)
    guide = read_signal_csv(args.guide) if args.guide else x0
    if guide.size != x0.size:
        raise UsageError(f"guide has {guide.size} samples, input has {x0.size}")
    if args.iterations < 1:
        raise UsageError(f"--iterations must be >= 1, got {args.iterations}")
    params = _weight_params(args)
    overrides = parse_overrides(args.override)
    if args.method == "self_guided_bf":
        out = self_guided_bf(x0, params, args.iterations, overrides)
    else:
        gl = build_laplacian(apply_overrides(bilateral_weights(guide, params), overrides))
        if args.method == "power":
            out = power_filter(gl, x0, args.iterations)
        else:
            out, info = cg_guided_filter(gl, x0, args.iterations, return_info=True)
            if info.breakdown:
                log.info("CG stopped after %d of %d iterations (breakdown)", info.iterations, args.iterations)
    write_signal_csv(args.output, out)
    return EXIT_OK


def cmd_eigenmodes(args):
    guide = read_signal_csv(args.guide)
    if not 1 <= args.k <= guide.size:
        raise UsageError(f"-k must be in [1, {guide.size}], got {args.k}")
    overrides = parse_overrides(args.override)
    gl = build_laplacian(apply_overrides(bilateral_weights(guide, _weight_params(args)), overrides))
    solve = eig_smallest if args.problem == "standard" else eig_generalized
    solve(gl, args.k).to_csv(args.output)
    return EXIT_OK


def cmd_experiment(args):
    cfg = load_config(args.config)
    if args.output_dir:
        cfg = replace(cfg, output_dir=args.output_dir)
    if cfg.output_dir is None:
        raise UsageError("no output directory: set output_dir in the config or pass --output-dir")
    res = run_denoise_experiment(cfg, jobs=args.jobs)
    for name, st in res.psnr_stats.items():
        print(f"{name}\tmean PSNR {st['mean']}\tstd {st['std']}\tn={st['count']}")
    return EXIT_OK


def cmd_figures(args):
    run_figures(args.which, args.output_dir, jobs=args.jobs)
    return EXIT_OK


COMMANDS = {
    "filter": cmd_filter,
    "eigenmodes": cmd_eigenmodes,
    "experiment": cmd_experiment,
    "figures": cmd_figures,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be >= 1")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"edgefilter: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FilterError, OSError) as exc:
        print(f"edgefilter: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
