"""Signal containers, synthetic piecewise-constant signals, noise and PSNR.

Signals are plain 1D ``float64`` numpy arrays. :func:`as_signal` is the single
validation point; every public routine that accepts a signal runs it.
"""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, UsageError

#: Name of the bit generator behind :func:`add_noise`, recorded in manifests.
GENERATOR_NAME = "numpy.random.PCG64"


def as_signal(values, name="signal"):
    """Return `values` as a read-only float64 vector, checking signal invariants."""
    x = np.array(values, dtype=np.float64)
    if x.ndim != 1:
        raise UsageError(f"{name} must be one-dimensional, got shape {x.shape}")
    if x.size < 2:
        raise UsageError(f"{name} must have at least 2 samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise UsageError(f"{name} contains NaN or Inf")
    x.flags.writeable = False
    return x


@dataclass(frozen=True)
class PiecewiseConstantSpec:
    """Length, interior breakpoints and one level per segment.

    A breakpoint ``b`` starts a new segment at sample ``b``, so the jump sits
    between samples ``b - 1`` and ``b`` (graph edge index ``b - 1``).
    """

    n: int
    breakpoints: tuple = ()
    levels: tuple = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(int(b) for b in self.breakpoints))
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        if self.n < 2:
            raise ConfigurationError(f"signal length must be >= 2, got {self.n}")
        if len(self.levels) != len(self.breakpoints) + 1:
            raise ConfigurationError(
                f"need {len(self.breakpoints) + 1} levels for {len(self.breakpoints)} breakpoints, "
                f"got {len(self.levels)}"
            )
        prev = 0
        for b in self.breakpoints:
            if not prev < b < self.n:
                raise ConfigurationError(
                    f"breakpoints must be strictly increasing within (0, {self.n}), got {list(self.breakpoints)}"
                )
            prev = b
        if not all(math.isfinite(v) for v in self.levels):
            raise ConfigurationError("levels must be finite")

    @classmethod
    def constant(cls, n, value=0.0):
        return cls(n=n, breakpoints=(), levels=(value,))

    @property
    def edge_indices(self):
        """Graph edge indices ``i`` (edge between ``i`` and ``i+1``) at each jump."""
        return tuple(b - 1 for b in self.breakpoints)


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ConfigurationError(f"noise sigma must be finite and >= 0, got {self.sigma}")


def generate_piecewise(spec):
    values = np.empty(spec.n)
    edges = (0, *spec.breakpoints, spec.n)
    for level, lo, hi in zip(spec.levels, edges[:-1], edges[1:]):
        values[lo:hi] = level
    return as_signal(values)


def add_noise(clean, noise):
    """Add i.i.d. Gaussian noise of standard deviation ``noise.sigma``.

    The draw comes from ``numpy.random.Generator(PCG64(noise.seed))`` so the
    same (signal, sigma, seed) always gives the same output.
    """
    clean = as_signal(clean, "clean")
    if noise.sigma == 0:
        return clean
    rng = np.random.Generator(np.random.PCG64(noise.seed))
    return as_signal(clean + noise.sigma * rng.standard_normal(clean.size))


def psnr(reference, test):
    """Peak signal-to-noise ratio in dB, peak = dynamic range of `reference`.

    Returns ``math.inf`` when the signals coincide.
    """
    reference = as_signal(reference, "reference")
    test = as_signal(test, "test")
    if reference.size != test.size:
        raise UsageError(f"length mismatch: {reference.size} vs {test.size}")
    peak = float(reference.max() - reference.min())
    if peak == 0:
        raise ConfigurationError("PSNR undefined: reference signal has zero dynamic range")
    mse = float(np.mean((reference - test) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak**2 / mse)


def format_float(value):
    return format(float(value), ".17g")


def write_signal_csv(path, values):
    """Write ``index,value`` rows with 17 significant digits (exact round trip)."""
    values = np.asarray(values, dtype=np.float64)
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write("index,value\n")
        for i, v in enumerate(values):
            f.write(f"{i},{format_float(v)}\n")


def read_signal_csv(path):
    """Read a CSV written by :func:`write_signal_csv`.

    Only the ``value`` column is used; rows must appear in index order.
    Raises :class:`UsageError` naming the offending line on malformed input.
    """
    with open(path, newline="", encoding="utf-8") as f:
        text = f.read()
    return parse_signal_csv(text, source=str(path))


def parse_signal_csv(text, source="<csv>"):
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise UsageError(f"{source}: empty file") from None
    if [h.strip() for h in header] != ["index", "value"]:
        raise UsageError(f"{source}:1: expected header 'index,value', got {','.join(header)!r}")
    values = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise UsageError(f"{source}:{lineno}: expected 2 fields, got {len(row)}")
        try:
            index = int(row[0])
            value = float(row[1])
        except ValueError:
            raise UsageError(f"{source}:{lineno}: cannot parse {','.join(row)!r}") from None
        if index != len(values):
            raise UsageError(f"{source}:{lineno}: expected index {len(values)}, got {index}")
        if not math.isfinite(value):
            raise UsageError(f"{source}:{lineno}: non-finite value {row[1]!r}")
        values.append(value)
    if len(values) < 2:
        raise UsageError(f"{source}: need at least 2 samples, got {len(values)}")
    return as_signal(values)
