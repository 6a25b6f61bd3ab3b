"""Figure jobs (eigenmode spectra) and denoising experiments with PSNR statistics."""

import json
import logging
import math
import os
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import CONFIG_SCHEMA_VERSION, __version__
from ..errors import FilterError, UsageError
from ..filters import FilterConfig, cg_guided_filter, power_filter, self_guided_bf
from ..laplacian import build_laplacian
from ..signal import (
    GENERATOR_NAME,
    NoiseSpec,
    PiecewiseConstantSpec,
    add_noise,
    format_float,
    generate_piecewise,
    psnr,
    write_signal_csv,
)
from ..spectral import edge_jump, eig_smallest, flatness_profile, is_constant, localization_width
from ..weights import NegativeOverride, WeightParams, apply_overrides, bilateral_weights
from . import plotting
from .config import ExperimentConfig, config_hash, config_to_dict

log = logging.getLogger(__name__)

FIGURE_JOBS = ("fig1", "fig2", "fig3", "fig4")
DENOISE_JOBS = ("fig5", "fig6")

# Eigenmode figures: unit spatial factor, one jump of 4 sigma_r between samples 50 and 51.
EIG_N = 100
EIG_EDGE = 50
EIG_JUMP = 0.4
EIG_PARAMS = WeightParams(sigma_d=0.5, sigma_r=0.1, radius=1, spatial_term_enabled=False)
EIG_MODES = 5
FLATNESS_MARGIN = 5
FLATNESS_RATIO = 0.1
FIG_OVERRIDES = {"fig3": -0.05, "fig4": -0.2}

# Denoising figures. Edge indices are 0-based (edge i joins samples i and i+1),
# so the tuned edges sit on the breakpoints at 99/249/349.
DENOISE_SIGNAL = PiecewiseConstantSpec(n=400, breakpoints=(100, 250, 350), levels=(0.0, 0.2, 0.0, 0.8))
DENOISE_NOISE = NoiseSpec(sigma=0.1, seed=0)
DENOISE_PARAMS = WeightParams(sigma_d=0.5, sigma_r=0.1, radius=1, spatial_term_enabled=True)
EDGE_OVERRIDES = (
    NegativeOverride(99, -2e-3),
    NegativeOverride(249, -1e-3),
    NegativeOverride(349, -1e-8),
)
DENOISE_SEEDS = tuple(range(20))
BF_ITERATIONS = 100
CG_ITERATIONS = 15


@dataclass
class ExperimentResult:
    """Everything a job produced.

    ``signals[seed]`` maps column name (``clean``, ``noisy``, filter names,
    or ``guide`` for figure jobs) to a vector; ``psnr[filter][seed]`` is
    None when that run failed (see ``errors``).
    """

    name: str
    signals: dict = field(default_factory=dict)
    psnr: dict = field(default_factory=dict)
    psnr_stats: dict = field(default_factory=dict)
    eigen: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    config: ExperimentConfig = None


def _provenance(cfg=None):
    meta = {
        "library_version": __version__,
        "config_schema_version": CONFIG_SCHEMA_VERSION,
        "generator": GENERATOR_NAME,
        "numpy_version": np.__version__,
    }
    if cfg is not None:
        meta["config_hash"] = config_hash(cfg)
    return meta


def _json_float(x):
    if x is None:
        return None
    if math.isinf(x) or math.isnan(x):
        return str(x)
    return x


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _write_columns(path, columns):
    names = list(columns)
    n = len(next(iter(columns.values())))
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(",".join(["index", *names]) + "\n")
        for i in range(n):
            f.write(",".join([str(i), *(format_float(columns[c][i]) for c in names)]) + "\n")


def _ensure_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Figures 1-4: eigenmodes of guiding Laplacians
# ---------------------------------------------------------------------------


def figure_guide(which):
    if which == "fig1":
        return generate_piecewise(PiecewiseConstantSpec.constant(EIG_N, 0.0))
    return generate_piecewise(PiecewiseConstantSpec(EIG_N, (EIG_EDGE + 1,), (0.0, EIG_JUMP)))


def figure_overrides(which):
    if which in FIG_OVERRIDES:
        return (NegativeOverride(EIG_EDGE, FIG_OVERRIDES[which]),)
    return ()


def figure_laplacian(which):
    guide = figure_guide(which)
    w = apply_overrides(bilateral_weights(guide, EIG_PARAMS), figure_overrides(which))
    return guide, build_laplacian(w)


def mode_diagnostics(eigs, edge_index, margin=FLATNESS_MARGIN):
    out = []
    for j in range(len(eigs)):
        v = eigs.mode(j)
        left, right = flatness_profile(v, edge_index, margin)
        out.append(
            {
                "mode_index": j,
                "eigenvalue": float(eigs.values[j]),
                "constant": is_constant(v),
                "left_slope_max": left,
                "right_slope_max": right,
                "edge_jump": edge_jump(v, edge_index),
                "sign_change": bool(np.sign(v[edge_index]) != np.sign(v[edge_index + 1])),
                "participation_ratio": localization_width(v),
            }
        )
    return out


_TITLES = {
    "fig1": "Constant guide: DCT low-frequency modes",
    "fig2": "Piecewise-constant guide: edge-preserving modes",
    "fig3": "Edge weight -0.05: edge-enhancing modes",
    "fig4": "Edge weight -0.2: edge-enhancing modes",
}


def run_figure_job(which, output_dir=None):
    """Compute the five lowest Laplacian eigenmodes for one of the fig1..fig4 systems.

    Writes ``eigenmodes.csv``, ``guide.csv``, ``plot.svg`` and ``manifest.json``
    into `output_dir` when given.
    """
    if which not in FIGURE_JOBS:
        raise UsageError(f"unknown figure job {which!r}; expected one of {FIGURE_JOBS}")
    guide, gl = figure_laplacian(which)
    eigs = eig_smallest(gl, EIG_MODES)
    edge = None if which == "fig1" else EIG_EDGE
    res = ExperimentResult(name=which, signals={None: {"guide": guide}}, eigen={"L": eigs})
    res.metadata = _provenance()
    if edge is not None:
        res.diagnostics["modes"] = mode_diagnostics(eigs, edge)
        res.diagnostics["edge_weight"] = float(gl.w[edge, edge + 1])
    if output_dir is not None:
        _ensure_dir(output_dir)
        eigs.to_csv(os.path.join(output_dir, "eigenmodes.csv"))
        write_signal_csv(os.path.join(output_dir, "guide.csv"), guide)
        plotting.plot_eigenmodes(eigs, os.path.join(output_dir, "plot.svg"), _TITLES[which], edge)
        manifest = {
            "name": which,
            "kind": "eigenmodes",
            "system": {
                "n": EIG_N,
                "guide_levels": [float(guide[0]), float(guide[-1])],
                "edge_index": edge,
                "weight_params": config_to_dict_params(EIG_PARAMS),
                "overrides": [{"edge_index": o.edge_index, "value": o.value} for o in figure_overrides(which)],
                "problem": eigs.problem,
            },
            "eigenvalues": [float(x) for x in eigs.values],
            "diagnostics": res.diagnostics,
            "provenance": res.metadata,
        }
        _write_json(os.path.join(output_dir, "manifest.json"), manifest)
    return res


def config_to_dict_params(p):
    return {
        "sigma_d": p.sigma_d,
        "sigma_r": p.sigma_r,
        "radius": p.radius,
        "spatial_term_enabled": p.spatial_term_enabled,
    }


# ---------------------------------------------------------------------------
# Figures 5-6: denoising
# ---------------------------------------------------------------------------


def denoise_config(which, output_dir=None, seeds=DENOISE_SEEDS):
    """Shipped configuration for ``fig5`` (nonnegative weights) or ``fig6`` (negative overrides)."""
    if which not in DENOISE_JOBS:
        raise UsageError(f"unknown denoising job {which!r}; expected one of {DENOISE_JOBS}")
    filters = [
        FilterConfig("self_guided_bf", BF_ITERATIONS, name="bf"),
        FilterConfig("cg_guided", CG_ITERATIONS, name="cg_bf"),
    ]
    overrides = ()
    if which == "fig6":
        overrides = EDGE_OVERRIDES
        filters.append(FilterConfig("self_guided_bf", BF_ITERATIONS, overrides=EDGE_OVERRIDES, name="bf_neg"))
    return ExperimentConfig(
        name=which,
        signal_spec=DENOISE_SIGNAL,
        noise=DENOISE_NOISE,
        weight_params=DENOISE_PARAMS,
        overrides=overrides,
        filter_configs=tuple(filters),
        eigenmode_count=EIG_MODES,
        output_dir=output_dir,
        seeds=tuple(seeds),
    )


def _guided_laplacian(cfg, fc, guide):
    w = bilateral_weights(guide, cfg.filter_weight_params(fc))
    return build_laplacian(apply_overrides(w, cfg.filter_overrides(fc)))


def run_filter(cfg, fc, noisy, guide_laplacians):
    if fc.method == "self_guided_bf":
        return self_guided_bf(noisy, cfg.filter_weight_params(fc), fc.iterations, cfg.filter_overrides(fc))
    gl = guide_laplacians[fc.name]
    if isinstance(gl, Exception):
        raise gl
    if fc.method == "power":
        return power_filter(gl, noisy, fc.iterations)
    return cg_guided_filter(gl, noisy, fc.iterations)


def _run_seed(cfg, clean, guide_laplacians, seed):
    noisy = add_noise(clean, NoiseSpec(cfg.noise.sigma, seed))
    columns = {"clean": clean, "noisy": noisy}
    scores, errors = {}, []
    for fc in cfg.filter_configs:
        try:
            out = run_filter(cfg, fc, noisy, guide_laplacians)
        except FilterError as exc:
            log.warning("seed %d, filter %s failed: %s", seed, fc.name, exc)
            errors.append({"seed": seed, "filter": fc.name, "error": f"{type(exc).__name__}: {exc}"})
            scores[fc.name] = None
            continue
        columns[fc.name] = out
        scores[fc.name] = psnr(clean, out)
    return seed, columns, scores, errors


def _stats(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return {"mean": None, "std": None, "count": 0}
    if any(math.isinf(v) for v in vals):
        mean = math.inf if all(math.isinf(v) for v in vals) else statistics.fmean(vals)
        return {"mean": mean, "std": None, "count": len(vals)}
    std = statistics.stdev(vals) if len(vals) > 1 else 0.0
    return {"mean": statistics.fmean(vals), "std": std, "count": len(vals)}


def run_denoise_experiment(cfg, jobs=1, write=True):
    """Run every filter of `cfg` on every seed and score it against the clean signal.

    Failures of one (seed, filter) pair are recorded in ``result.errors`` and
    do not stop the others. With ``jobs > 1`` seeds run on a thread pool;
    results are merged in seed order, so output does not depend on `jobs`.
    """
    clean = generate_piecewise(cfg.signal_spec)
    guide_laplacians = {}
    for fc in cfg.filter_configs:
        if fc.guided:
            try:
                guide_laplacians[fc.name] = _guided_laplacian(cfg, fc, clean)
            except FilterError as exc:
                guide_laplacians[fc.name] = exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(lambda s: _run_seed(cfg, clean, guide_laplacians, s), cfg.seeds))
    else:
        runs = [_run_seed(cfg, clean, guide_laplacians, s) for s in cfg.seeds]

    res = ExperimentResult(name=cfg.name, config=cfg, metadata=_provenance(cfg))
    res.psnr = {fc.name: {} for fc in cfg.filter_configs}
    for seed, columns, scores, errors in runs:
        res.signals[seed] = columns
        for name, value in scores.items():
            res.psnr[name][seed] = value
        res.errors.extend(errors)
    for seed in cfg.seeds:
        res.psnr.setdefault("noisy", {})[seed] = psnr(clean, res.signals[seed]["noisy"])
    res.psnr_stats = {name: _stats(per_seed.values()) for name, per_seed in res.psnr.items()}

    if cfg.eigenmode_count:
        try:
            w = apply_overrides(bilateral_weights(clean, cfg.weight_params), cfg.overrides)
            res.eigen["L"] = eig_smallest(build_laplacian(w), cfg.eigenmode_count)
        except FilterError as exc:
            res.errors.append({"seed": None, "filter": "eigenmodes", "error": f"{type(exc).__name__}: {exc}"})

    if write and cfg.output_dir is not None:
        write_denoise_outputs(res, cfg.output_dir)
    return res


def _column_set(cfg, columns):
    out = {"clean": columns["clean"], "noisy": columns["noisy"]}
    n = len(columns["clean"])
    for fc in cfg.filter_configs:
        out[fc.name] = columns.get(fc.name, np.full(n, np.nan))
    return out


def write_denoise_outputs(res, output_dir):
    cfg = res.config
    _ensure_dir(output_dir)
    seed_dir = os.path.join(output_dir, "seeds")
    _ensure_dir(seed_dir)
    display_seed = cfg.seeds[0]
    _write_columns(os.path.join(output_dir, "signals.csv"), _column_set(cfg, res.signals[display_seed]))
    for seed in cfg.seeds:
        _write_columns(os.path.join(seed_dir, f"seed_{seed}.csv"), _column_set(cfg, res.signals[seed]))
    if "L" in res.eigen:
        res.eigen["L"].to_csv(os.path.join(output_dir, "eigenmodes.csv"))
    shown = res.signals[display_seed]
    plotting.plot_denoising(
        shown["clean"],
        shown["noisy"],
        {fc.name: shown[fc.name] for fc in cfg.filter_configs if fc.name in shown},
        {name: res.psnr[name][display_seed] for name in res.psnr},
        os.path.join(output_dir, "plot.svg"),
        f"{cfg.name}: seed {display_seed}",
    )
    manifest = {
        "name": cfg.name,
        "kind": "denoise",
        "config": config_to_dict(cfg, include_output_dir=False),
        "display_seed": display_seed,
        "psnr": {
            name: {
                "mean": _json_float(res.psnr_stats[name]["mean"]),
                "std": _json_float(res.psnr_stats[name]["std"]),
                "count": res.psnr_stats[name]["count"],
                "per_seed": {str(s): _json_float(v) for s, v in per_seed.items()},
            }
            for name, per_seed in res.psnr.items()
        },
        "errors": res.errors,
        "provenance": res.metadata,
    }
    _write_json(os.path.join(output_dir, "manifest.json"), manifest)


def compare_psnr(result_a, result_b):
    """Per-filter PSNR of `result_a` minus `result_b`, with per-seed win counts.

    Only filters present in both results are compared; seeds where either
    run failed are skipped.
    """
    ca, cb = result_a.config, result_b.config
    if ca is None or cb is None:
        raise UsageError("compare_psnr needs denoising results")
    if ca.seeds != cb.seeds or ca.signal_spec != cb.signal_spec or ca.noise.sigma != cb.noise.sigma:
        raise UsageError("results differ in seeds, signal or noise level; PSNRs are not comparable")
    report = {"a": result_a.name, "b": result_b.name, "filters": {}}
    for name in result_a.psnr:
        if name not in result_b.psnr:
            continue
        pairs = [
            (result_a.psnr[name][s], result_b.psnr[name][s])
            for s in ca.seeds
            if result_a.psnr[name].get(s) is not None and result_b.psnr[name].get(s) is not None
        ]
        diffs = [a - b for a, b in pairs if not (math.isinf(a) and math.isinf(b))]
        report["filters"][name] = {
            "mean_a": statistics.fmean(a for a, _ in pairs) if pairs else None,
            "mean_b": statistics.fmean(b for _, b in pairs) if pairs else None,
            "mean_difference": statistics.fmean(diffs) if diffs else 0.0,
            "wins": sum(a > b for a, b in pairs),
            "losses": sum(a < b for a, b in pairs),
            "ties": sum(a == b for a, b in pairs),
            "seeds": len(pairs),
        }
    return report


def run_figures(which, output_dir, jobs=1):
    """Run one figure job (``"1"``..``"6"``) or all of them into `output_dir`/figN."""
    names = [f"fig{k}" for k in range(1, 7)] if which == "all" else [f"fig{which}"]
    results = {}
    for name in names:
        sub = os.path.join(output_dir, name)
        if name in FIGURE_JOBS:
            results[name] = run_figure_job(name, sub)
        elif name in DENOISE_JOBS:
            results[name] = run_denoise_experiment(denoise_config(name, sub), jobs=jobs)
        else:
            raise UsageError(f"unknown figure {which!r}")
    if "fig5" in results and "fig6" in results:
        report = compare_psnr(results["fig6"], results["fig5"])
        _write_json(os.path.join(output_dir, "psnr_comparison.json"), _jsonable(report))
    return results


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, float):
        return _json_float(obj)
    return obj
