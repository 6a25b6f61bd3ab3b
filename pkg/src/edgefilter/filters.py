"""Power-method, self-guided bilateral, and conjugate-gradient guided filters."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DegenerateGraphError, NumericalError, UsageError
from .laplacian import apply_filter_operator, apply_L, build_laplacian
from .signal import as_signal
from .weights import WeightParams, apply_overrides, bilateral_weights

METHODS = ("power", "self_guided_bf", "cg_guided")
GUIDED_METHODS = ("power", "cg_guided")

#: |(s, r)| or |(p, q)| at or below this stops CG with a breakdown flag.
CG_BREAKDOWN_TOL = 1e-300
#: Also stop when |(p, q)| <= this * ||p|| ||q||; only reachable when L is indefinite.
CG_BREAKDOWN_RELATIVE = 1e-12


@dataclass(frozen=True)
class FilterConfig:
    """One filter run.

    ``weight_params=None`` inherits the experiment's parameters.
    ``overrides=None`` lets the harness decide: guided methods inherit the
    experiment's overrides, ``self_guided_bf`` gets none. An explicit tuple
    (possibly empty) is used as given.
    """

    method: str
    iterations: int
    weight_params: WeightParams = None
    overrides: tuple = None
    name: str = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(f"unknown filter method {self.method!r}; expected one of {METHODS}")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ConfigurationError(f"iterations must be an integer >= 1, got {self.iterations}")
        if self.overrides is not None:
            object.__setattr__(self, "overrides", tuple(self.overrides))
        if self.name is None:
            object.__setattr__(self, "name", self.method)

    @property
    def guided(self):
        return self.method in GUIDED_METHODS


@dataclass
class CGInfo:
    """Diagnostics from :func:`cg_guided_filter`."""

    iterations: int
    breakdown: bool = False
    residual_norms: list = field(default_factory=list)
    iterates: list = None


def _dot(a, b):
    # Correctly rounded sum of the products: independent of BLAS and platform.
    return math.fsum(np.multiply(a, b).tolist())


def _check_x0(gl, x0):
    x = as_signal(x0, "x0")
    if x.size != gl.n:
        raise UsageError(f"signal length {x.size} does not match Laplacian size {gl.n}")
    return x


def _check_m(m):
    if int(m) != m or m < 1:
        raise UsageError(f"iteration count must be an integer >= 1, got {m}")


def power_filter(gl, x0, m):
    """x_m = (D^-1 W)^m x0 by `m` successive operator applications."""
    x = _check_x0(gl, x0)
    _check_m(m)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(m):
            x = apply_filter_operator(gl, x)
            if not np.all(np.isfinite(x)):
                raise NumericalError(f"non-finite values after power iteration {k + 1}")
    return x


def self_guided_bf(x0, params, m, overrides=None):
    """Iterated bilateral filter whose weights are rebuilt from each iterate.

    `overrides` is either a sequence of :class:`NegativeOverride` reapplied at
    every rebuild, or a callable ``(k, x_k) -> sequence`` giving the overrides
    for iteration ``k``.
    """
    x = as_signal(x0, "x0")
    _check_m(m)
    for k in range(m):
        w = bilateral_weights(x, params)
        ov = overrides(k, x) if callable(overrides) else overrides
        if ov:
            w = apply_overrides(w, ov)
        try:
            gl = build_laplacian(w)
        except DegenerateGraphError as exc:
            raise NumericalError(f"self-guided iteration {k}: {exc}") from exc
        x = apply_filter_operator(gl, x)
        if not np.all(np.isfinite(x)):
            raise NumericalError(f"non-finite values after self-guided iteration {k + 1}")
    return x


def cg_guided_filter(gl, x0, m, return_info=False, keep_iterates=False):
    """Conjugate-gradient guided filter with diagonal preconditioner D.

    Runs exactly `m` steps of::

        r0 = -L x0
        s_k = D^-1 r_k
        p_0 = s_0,  p_k = s_k + beta_k p_{k-1},  beta_k = (s_k, r_k) / (s_{k-1}, r_{k-1})
        q_k = L p_k,  alpha_k = (s_k, r_k) / (p_k, q_k)
        x_{k+1} = x_k + alpha_k p_k,  r_{k+1} = r_k - alpha_k q_k

    No convergence test is applied. If (s_k, r_k) or (p_k, q_k) vanishes
    (the latter relative to ||p_k|| ||q_k||) the current iterate is returned and ``info.breakdown`` is set; this happens
    for constant inputs (r0 = 0) and can happen when negative weights make
    L indefinite.

    Returns the filtered signal, or ``(signal, CGInfo)`` if `return_info`.
    ``keep_iterates`` stores x_0..x_k in ``info.iterates``.
    """
    x = np.array(_check_x0(gl, x0))
    _check_m(m)
    d = gl.d
    r = -apply_L(gl, x)
    info = CGInfo(iterations=0, residual_norms=[math.sqrt(_dot(r, r))])
    if keep_iterates:
        info.iterates = [x.copy()]
    p = None
    sr_prev = None
    for k in range(m):
        s = r / d
        sr = _dot(s, r)
        if abs(sr) <= CG_BREAKDOWN_TOL:
            info.breakdown = True
            break
        p = s if k == 0 else s + (sr / sr_prev) * p
        q = apply_L(gl, p)
        pq = _dot(p, q)
        if abs(pq) <= max(CG_BREAKDOWN_TOL, CG_BREAKDOWN_RELATIVE * math.sqrt(_dot(p, p) * _dot(q, q))):
            info.breakdown = True
            break
        alpha = sr / pq
        x = x + alpha * p
        r = r - alpha * q
        sr_prev = sr
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(r))):
            raise NumericalError(f"non-finite values in CG step {k} (alpha={alpha!r})")
        info.iterations = k + 1
        info.residual_norms.append(math.sqrt(_dot(r, r)))
        if keep_iterates:
            info.iterates.append(x.copy())
    x.flags.writeable = False
    return (x, info) if return_info else x
