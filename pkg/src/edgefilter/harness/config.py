"""Experiment configuration and its strict JSON form."""

import hashlib
import json
import re
from dataclasses import dataclass, field

from ..errors import ConfigurationError
from ..filters import FilterConfig
from ..signal import NoiseSpec, PiecewiseConstantSpec
from ..weights import NegativeOverride, WeightParams

_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    signal_spec: PiecewiseConstantSpec
    noise: NoiseSpec
    weight_params: WeightParams
    overrides: tuple = ()
    filter_configs: tuple = ()
    eigenmode_count: int = 5
    output_dir: str = None
    seeds: tuple = ()

    def __post_init__(self):
        if not _NAME_RE.match(self.name or ""):
            raise ConfigurationError(f"experiment name {self.name!r} is empty or not filesystem-safe")
        object.__setattr__(self, "overrides", tuple(self.overrides))
        object.__setattr__(self, "filter_configs", tuple(self.filter_configs))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds) or (self.noise.seed,))
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigurationError("seeds must be distinct")
        names = [fc.name for fc in self.filter_configs]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"filter names must be distinct, got {names}")
        reserved = {"index", "clean", "noisy"} & set(names)
        if reserved:
            raise ConfigurationError(f"filter names {sorted(reserved)} clash with signal columns")
        if not 0 <= self.eigenmode_count <= self.signal_spec.n:
            raise ConfigurationError(f"eigenmode_count must be in [0, {self.signal_spec.n}]")

    def filter_weight_params(self, fc):
        return fc.weight_params if fc.weight_params is not None else self.weight_params

    def filter_overrides(self, fc):
        if fc.overrides is not None:
            return fc.overrides
        return self.overrides if fc.guided else ()


FIELDS = (
    "name",
    "signal_spec",
    "noise",
    "weight_params",
    "overrides",
    "filter_configs",
    "eigenmode_count",
    "output_dir",
    "seeds",
)


def _take(d, allowed, where, required=()):
    if not isinstance(d, dict):
        raise ConfigurationError(f"{where}: expected an object, got {type(d).__name__}")
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigurationError(f"{where}: unknown keys {sorted(unknown)}")
    missing = set(required) - set(d)
    if missing:
        raise ConfigurationError(f"{where}: missing keys {sorted(missing)}")
    return d


def _weight_params(d, where):
    _take(d, ("sigma_d", "sigma_r", "radius", "spatial_term_enabled"), where)
    return WeightParams(**d)


def _overrides(items, where):
    if not isinstance(items, list):
        raise ConfigurationError(f"{where}: expected a list")
    out = []
    for k, item in enumerate(items):
        _take(item, ("edge_index", "value"), f"{where}[{k}]", required=("edge_index", "value"))
        out.append(NegativeOverride(int(item["edge_index"]), float(item["value"])))
    return tuple(out)


def config_from_dict(d):
    _take(d, FIELDS, "config", required=("name", "signal_spec", "noise", "weight_params", "filter_configs"))
    try:
        sig = _take(d["signal_spec"], ("n", "breakpoints", "levels"), "signal_spec", required=("n", "levels"))
        noise = _take(d["noise"], ("sigma", "seed"), "noise", required=("sigma",))
        filters = []
        for k, fd in enumerate(d["filter_configs"]):
            where = f"filter_configs[{k}]"
            _take(fd, ("name", "method", "iterations", "weight_params", "overrides"), where,
                  required=("method", "iterations"))
            filters.append(
                FilterConfig(
                    method=fd["method"],
                    iterations=fd["iterations"],
                    weight_params=_weight_params(fd["weight_params"], where + ".weight_params")
                    if fd.get("weight_params") is not None
                    else None,
                    overrides=_overrides(fd["overrides"], where + ".overrides")
                    if fd.get("overrides") is not None
                    else None,
                    name=fd.get("name"),
                )
            )
        return ExperimentConfig(
            name=d["name"],
            signal_spec=PiecewiseConstantSpec(
                n=sig["n"], breakpoints=tuple(sig.get("breakpoints", ())), levels=tuple(sig["levels"])
            ),
            noise=NoiseSpec(sigma=float(noise["sigma"]), seed=int(noise.get("seed", 0))),
            weight_params=_weight_params(d["weight_params"], "weight_params"),
            overrides=_overrides(d.get("overrides", []), "overrides"),
            filter_configs=tuple(filters),
            eigenmode_count=int(d.get("eigenmode_count", 5)),
            output_dir=d.get("output_dir"),
            seeds=tuple(d.get("seeds", ())),
        )
    except ConfigurationError:
        raise
    except (TypeError, KeyError, ValueError) as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc


def load_config(path):
    try:
        with open(path, encoding="utf-8") as f:
            d = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return config_from_dict(d)


def _weight_params_dict(p):
    return {
        "sigma_d": p.sigma_d,
        "sigma_r": p.sigma_r,
        "radius": p.radius,
        "spatial_term_enabled": p.spatial_term_enabled,
    }


def _overrides_list(ovs):
    return [{"edge_index": o.edge_index, "value": o.value} for o in ovs]


def config_to_dict(cfg, include_output_dir=True):
    d = {
        "name": cfg.name,
        "signal_spec": {
            "n": cfg.signal_spec.n,
            "breakpoints": list(cfg.signal_spec.breakpoints),
            "levels": list(cfg.signal_spec.levels),
        },
        "noise": {"sigma": cfg.noise.sigma, "seed": cfg.noise.seed},
        "weight_params": _weight_params_dict(cfg.weight_params),
        "overrides": _overrides_list(cfg.overrides),
        "filter_configs": [
            {
                "name": fc.name,
                "method": fc.method,
                "iterations": fc.iterations,
                "weight_params": None if fc.weight_params is None else _weight_params_dict(fc.weight_params),
                "overrides": None if fc.overrides is None else _overrides_list(fc.overrides),
            }
            for fc in cfg.filter_configs
        ],
        "eigenmode_count": cfg.eigenmode_count,
        "seeds": list(cfg.seeds),
    }
    if include_output_dir:
        d["output_dir"] = cfg.output_dir
    return d


def config_hash(cfg):
    """SHA-256 of the canonical JSON of `cfg` without its output directory."""
    blob = json.dumps(config_to_dict(cfg, include_output_dir=False), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
