"""Degree vector, graph Laplacian L = D - W, and the filter operator D^-1 W."""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGraphError, UsageError
from .signal import format_float
from .weights import WeightMatrix

#: Absolute floor of the degenerate-row-sum tolerance.
D_MIN_FLOOR = 1e-300
#: Relative part of the degenerate-row-sum tolerance, times max |d|.
D_MIN_RELATIVE = 1e-12


@dataclass(frozen=True)
class GraphLaplacian:
    w: WeightMatrix
    d: np.ndarray

    @property
    def n(self):
        return self.w.n

    def to_dense(self):
        """Dense L = D - W."""
        return np.diag(self.d) - self.w.to_dense()

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as f:
            f.write("i,j,w,d\n")
            for i, j, wij in self.w.triplets():
                f.write(f"{i},{j},{format_float(wij)},{format_float(self.d[i])}\n")


def build_laplacian(w):
    """Assemble the Laplacian of `w`.

    Negative row sums are allowed; only |d[i]| at or below
    ``max(1e-12 * max|d|, 1e-300)`` is rejected.
    """
    d = w.row_sums()
    tol = max(D_MIN_RELATIVE * float(np.max(np.abs(d))), D_MIN_FLOOR)
    bad = np.flatnonzero(np.abs(d) <= tol)
    if bad.size:
        i = int(bad[0])
        raise DegenerateGraphError(f"row sum d[{i}] = {d[i]!r} is numerically zero (tolerance {tol:.3g})", index=i)
    d.flags.writeable = False
    return GraphLaplacian(w=w, d=d)


def _check_length(gl, v):
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (gl.n,):
        raise UsageError(f"vector of shape {v.shape} does not match Laplacian of size {gl.n}")
    return v


def apply_L(gl, v):
    """(D - W) v, evaluated as sum_{j != i} w_ij (v_i - v_j).

    Written in difference form so constant vectors map to exactly zero.
    """
    v = _check_length(gl, v)
    n = gl.n
    out = np.zeros(n)
    for k in range(1, gl.w.radius + 1):
        w = gl.w.offdiagonal(k)
        diff = w * (v[: n - k] - v[k:])
        out[: n - k] += diff
        out[k:] -= diff
    return out


def apply_filter_operator(gl, v):
    """D^-1 W v, evaluated as v - D^-1 L v (constants are fixed points exactly)."""
    v = _check_length(gl, v)
    return v - apply_L(gl, v) / gl.d
