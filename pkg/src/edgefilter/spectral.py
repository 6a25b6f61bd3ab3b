"""Eigenmodes of guiding Laplacians and diagnostics for their shape near edges.

Both eigenproblems are solved densely in banded form (LAPACK ``?sbev`` via
:func:`scipy.linalg.eig_banded`); Laplacians here are small and banded. Every
solve is followed by residual and orthonormality checks.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError, UnsupportedConfigurationError, UsageError
from .signal import format_float

RESIDUAL_TOL = 1e-10
ORTHO_TOL = 1e-10

STANDARD = "standard-L"
GENERALIZED = "generalized-WD"
EUCLIDEAN = "euclidean-orthonormal"
D_ORTHONORMAL = "D-orthonormal"


@dataclass(frozen=True)
class EigenSystem:
    """Eigenpairs stored column-wise: ``vectors[:, j]`` belongs to ``values[j]``."""

    values: np.ndarray
    vectors: np.ndarray
    scaling: str
    problem: str

    def __len__(self):
        return self.values.size

    def mode(self, j):
        return self.vectors[:, j]

    def to_csv(self, path):
        n = self.vectors.shape[0]
        with open(path, "w", newline="", encoding="utf-8") as f:
            header = ["mode_index", "eigenvalue"] + [f"component_{i}" for i in range(n)]
            f.write(",".join(header) + "\n")
            for j, lam in enumerate(self.values):
                row = [str(j), format_float(lam)] + [format_float(c) for c in self.vectors[:, j]]
                f.write(",".join(row) + "\n")


def _fix_signs(vectors):
    """Flip columns so the first non-negligible component is positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        v = out[:, j]
        big = np.flatnonzero(np.abs(v) > 1e-10 * np.abs(v).max())
        if v[big[0]] < 0:
            out[:, j] = -v
    return out


def _laplacian_band(gl):
    """Upper band storage of L in the layout expected by eig_banded."""
    w = gl.w
    r, n = w.radius, w.n
    a = np.zeros((r + 1, n))
    # eig_banded upper form: a[r + i - j, j] = A[i, j] for i <= j.
    a[r] = gl.d - w.diagonal
    for k in range(1, r + 1):
        a[r - k, k:] = -w.offdiagonal(k)
    return a


def _solve_banded(a, what):
    try:
        return scipy.linalg.eig_banded(a, lower=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"{what}: banded eigensolver failed ({exc})") from exc


def _check_k(gl, k):
    if int(k) != k or not 1 <= k <= gl.n:
        raise UsageError(f"k must be an integer in [1, {gl.n}], got {k}")


def eig_smallest(gl, k):
    """The `k` smallest eigenpairs of L, Euclidean-orthonormal, ascending.

    With negative overrides L can be indefinite; its negative eigenvalues
    then come first.
    """
    _check_k(gl, k)
    lam, vecs = _solve_banded(_laplacian_band(gl), "standard eigenproblem")
    lam, vecs = lam[:k], _fix_signs(vecs[:, :k])
    L = gl.to_dense()
    scale = np.abs(L).sum(axis=1).max()
    resid = np.linalg.norm(L @ vecs - vecs * lam, axis=0)
    if np.any(resid > RESIDUAL_TOL * scale):
        raise NumericalError(f"eigen residuals {resid.max():.3g} exceed {RESIDUAL_TOL:g} * ||L||")
    gram = vecs.T @ vecs
    if np.abs(gram - np.eye(k)).max() > ORTHO_TOL:
        raise NumericalError("computed eigenvectors are not orthonormal")
    return EigenSystem(values=lam, vectors=vecs, scaling=EUCLIDEAN, problem=STANDARD)


def eig_generalized(gl, k):
    """The `k` pairs of W v = mu D v with largest |mu|, scaled so V^T D V = I.

    Solved through the symmetric matrix D^-1/2 W D^-1/2, which requires
    every row sum to be positive.
    """
    _check_k(gl, k)
    d = gl.d
    if np.any(d <= 0):
        i = int(np.flatnonzero(d <= 0)[0])
        raise UnsupportedConfigurationError(
            f"generalized eigenproblem needs positive row sums; d[{i}] = {d[i]!r}"
        )
    w = gl.w
    r, n = w.radius, w.n
    s = 1.0 / np.sqrt(d)
    a = np.zeros((r + 1, n))
    a[r] = w.diagonal * s * s
    for k_ in range(1, r + 1):
        a[r - k_, k_:] = w.offdiagonal(k_) * s[: n - k_] * s[k_:]
    mu, u = _solve_banded(a, "generalized eigenproblem")
    # Descending |mu|; ties broken by descending mu.
    order = np.lexsort((-mu, -np.abs(mu)))[:k]
    mu = mu[order]
    vecs = _fix_signs(u[:, order] * s[:, None])
    W = w.to_dense()
    scale = np.abs(W).sum(axis=1).max()
    resid = np.linalg.norm(W @ vecs - (d[:, None] * vecs) * mu, axis=0)
    if np.any(resid > RESIDUAL_TOL * scale):
        raise NumericalError(f"generalized residuals {resid.max():.3g} exceed {RESIDUAL_TOL:g} * ||W||")
    gram = vecs.T @ (d[:, None] * vecs)
    if np.abs(gram - np.eye(k)).max() > ORTHO_TOL:
        raise NumericalError("computed eigenvectors are not D-orthonormal")
    return EigenSystem(values=mu, vectors=vecs, scaling=D_ORTHONORMAL, problem=GENERALIZED)


def dct_reference_modes(n, k):
    """Unit-norm DCT-II basis vectors cos(pi m (i + 1/2) / n), m = 0..k-1, as columns."""
    if not 1 <= k <= n:
        raise UsageError(f"k must be in [1, {n}], got {k}")
    i = np.arange(n) + 0.5
    modes = np.cos(np.pi * np.outer(i, np.arange(k)) / n)
    return modes / np.linalg.norm(modes, axis=0)


def dct_reference_eigenvalues(n, k):
    """Eigenvalues 2 - 2 cos(pi m / n) of the unit-weight path Laplacian."""
    return 2.0 - 2.0 * np.cos(np.pi * np.arange(k) / n)


def flatness_profile(v, edge_index, margin):
    """Largest |v[i+1] - v[i]| over the `margin` differences on each side of an edge.

    The edge difference ``v[edge_index+1] - v[edge_index]`` itself is excluded.
    Returns ``(left_slope_max, right_slope_max)``.
    """
    v = np.asarray(v, dtype=np.float64)
    if margin < 1:
        raise UsageError(f"margin must be >= 1, got {margin}")
    if edge_index - margin < 0 or edge_index + margin + 1 > v.size - 1:
        raise UsageError(f"window of {margin} around edge {edge_index} leaves [0, {v.size})")
    dv = np.abs(np.diff(v))
    left = dv[edge_index - margin : edge_index].max()
    right = dv[edge_index + 1 : edge_index + 1 + margin].max()
    return float(left), float(right)


def edge_jump(v, edge_index):
    return float(abs(v[edge_index + 1] - v[edge_index]))


def localization_width(v):
    """Participation ratio (sum v^2)^2 / (n sum v^4): 1 when spread out, 1/n for a spike."""
    v = np.asarray(v, dtype=np.float64)
    v4 = np.sum(v**4)
    if v4 == 0:
        raise UsageError("participation ratio of the zero vector is undefined")
    return float(np.sum(v**2) ** 2 / (v.size * v4))


def is_constant(v, tol=1e-8):
    v = np.asarray(v)
    return float(np.ptp(v)) <= tol * max(float(np.abs(v).max()), 1e-300)
