"""Bilateral weight matrices on a 1D grid, with signed per-edge overrides."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, UsageError
from .signal import as_signal, format_float


@dataclass(frozen=True)
class WeightParams:
    """Parameters of the bilateral kernel.

    Grid positions are the integer sample indices. With
    ``spatial_term_enabled=False`` the spatial factor is fixed at 1.
    """

    sigma_d: float = 0.5
    sigma_r: float = 0.1
    radius: int = 1
    spatial_term_enabled: bool = True

    def __post_init__(self):
        if not (self.sigma_d > 0 and math.isfinite(self.sigma_d)):
            raise ConfigurationError(f"sigma_d must be positive, got {self.sigma_d}")
        if not (self.sigma_r > 0 and math.isfinite(self.sigma_r)):
            raise ConfigurationError(f"sigma_r must be positive, got {self.sigma_r}")
        if int(self.radius) != self.radius or self.radius < 1:
            raise ConfigurationError(f"radius must be an integer >= 1, got {self.radius}")


@dataclass(frozen=True)
class NegativeOverride:
    """Replacement value for the symmetric pair w[i, i+1] = w[i+1, i]."""

    edge_index: int
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ConfigurationError(f"override value must be finite, got {self.value}")

    @classmethod
    def parse(cls, text):
        """Parse the ``index:value`` grammar, e.g. ``"100:-2e-3"``."""
        head, sep, tail = text.partition(":")
        if not sep:
            raise UsageError(f"override {text!r} is not of the form index:value")
        try:
            return cls(int(head), float(tail))
        except ValueError:
            raise UsageError(f"override {text!r} is not of the form index:value") from None


class WeightMatrix:
    """Symmetric banded weight matrix.

    Only the upper band is stored: ``bands[k, i] = w[i, i+k]`` for
    ``0 <= k <= radius``; entries with ``i + k >= n`` are zero padding.
    Symmetry is structural, hence exact.
    """

    def __init__(self, bands):
        bands = np.array(bands, dtype=np.float64)
        if bands.ndim != 2 or bands.shape[0] < 2:
            raise UsageError(f"bands must have shape (radius+1, n) with radius >= 1, got {bands.shape}")
        for k in range(1, bands.shape[0]):
            bands[k, bands.shape[1] - k :] = 0.0
        if not np.all(np.isfinite(bands)):
            raise UsageError("weights must be finite")
        bands.flags.writeable = False
        self.bands = bands

    @property
    def n(self):
        return self.bands.shape[1]

    @property
    def radius(self):
        return self.bands.shape[0] - 1

    @property
    def diagonal(self):
        return self.bands[0]

    def offdiagonal(self, k=1):
        """The ``n - k`` entries ``w[i, i+k]``."""
        return self.bands[k, : self.n - k]

    def __getitem__(self, ij):
        i, j = ij
        k = abs(j - i)
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(ij)
        return 0.0 if k > self.radius else float(self.bands[k, min(i, j)])

    def __eq__(self, other):
        return isinstance(other, WeightMatrix) and np.array_equal(self.bands, other.bands)

    def __repr__(self):
        return f"WeightMatrix(n={self.n}, radius={self.radius})"

    def row_sums(self):
        """Row sums accumulated left to right (column order)."""
        n, r = self.n, self.radius
        # Column j of row i for j = i-r .. i+r; lower entries come from bands[k, i-k].
        d = np.zeros(n)
        for k in range(r, 0, -1):
            d[k:] += self.bands[k, : n - k]
        d += self.bands[0]
        for k in range(1, r + 1):
            d[: n - k] += self.bands[k, : n - k]
        return d

    def matvec(self, v):
        v = np.asarray(v, dtype=np.float64)
        out = self.bands[0] * v
        for k in range(1, self.radius + 1):
            w = self.offdiagonal(k)
            out[: self.n - k] += w * v[k:]
            out[k:] += w * v[: self.n - k]
        return out

    def to_dense(self):
        n = self.n
        a = np.diag(self.bands[0].copy())
        for k in range(1, self.radius + 1):
            w = self.offdiagonal(k)
            a[np.arange(n - k), np.arange(k, n)] = w
            a[np.arange(k, n), np.arange(n - k)] = w
        return a

    def triplets(self):
        """``(i, j, w)`` for the diagonal and upper triangle, row-major."""
        for i in range(self.n):
            for k in range(min(self.radius, self.n - 1 - i) + 1):
                yield i, i + k, float(self.bands[k, i])

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as f:
            f.write("i,j,w\n")
            for i, j, w in self.triplets():
                f.write(f"{i},{j},{format_float(w)}\n")


def bilateral_weights(guide, params):
    """Bilateral weights between samples at most ``params.radius`` apart.

    ``w[i, j] = exp(-(i-j)^2 / (2 sigma_d^2)) * exp(-(y[i]-y[j])^2 / (2 sigma_r^2))``,
    the spatial factor dropped when ``params.spatial_term_enabled`` is false.
    """
    y = as_signal(guide, "guide")
    n = y.size
    bands = np.zeros((params.radius + 1, n))
    bands[0] = 1.0
    for k in range(1, min(params.radius, n - 1) + 1):
        diff = y[k:] - y[:-k]
        w = np.exp(-(diff**2) / (2.0 * params.sigma_r**2))
        if params.spatial_term_enabled:
            w = w * math.exp(-(k**2) / (2.0 * params.sigma_d**2))
        bands[k, : n - k] = w
    return WeightMatrix(bands)


def apply_overrides(w, overrides):
    """Return a copy of `w` with each listed edge pair set to its override value."""
    overrides = list(overrides)
    if not overrides:
        return w
    seen = set()
    for ov in overrides:
        if ov.edge_index in seen:
            raise ConfigurationError(f"duplicate override for edge {ov.edge_index}")
        if not 0 <= ov.edge_index < w.n - 1:
            raise ConfigurationError(f"override edge index {ov.edge_index} outside [0, {w.n - 1})")
        seen.add(ov.edge_index)
    bands = w.bands.copy()
    for ov in overrides:
        bands[1, ov.edge_index] = ov.value
    return WeightMatrix(bands)
