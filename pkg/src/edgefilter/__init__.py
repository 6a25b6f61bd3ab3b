"""Graph-spectral filtering of 1D signals with signed bilateral weights."""

__version__ = "0.1.0"
CONFIG_SCHEMA_VERSION = "1"

from .errors import (
    ConfigurationError,
    DegenerateGraphError,
    FilterError,
    NumericalError,
    UnsupportedConfigurationError,
    UsageError,
)
from .signal import NoiseSpec, PiecewiseConstantSpec, add_noise, as_signal, generate_piecewise, psnr
from .weights import NegativeOverride, WeightMatrix, WeightParams, apply_overrides, bilateral_weights
from .laplacian import GraphLaplacian, apply_filter_operator, apply_L, build_laplacian
from .spectral import (
    EigenSystem,
    dct_reference_modes,
    eig_generalized,
    eig_smallest,
    flatness_profile,
    localization_width,
)
from .filters import CGInfo, FilterConfig, cg_guided_filter, power_filter, self_guided_bf

__all__ = [
    "CGInfo",
    "ConfigurationError",
    "DegenerateGraphError",
    "EigenSystem",
    "FilterConfig",
    "FilterError",
    "GraphLaplacian",
    "NegativeOverride",
    "NoiseSpec",
    "NumericalError",
    "PiecewiseConstantSpec",
    "UnsupportedConfigurationError",
    "UsageError",
    "WeightMatrix",
    "WeightParams",
    "add_noise",
    "apply_L",
    "apply_filter_operator",
    "apply_overrides",
    "as_signal",
    "bilateral_weights",
    "build_laplacian",
    "cg_guided_filter",
    "dct_reference_modes",
    "eig_generalized",
    "eig_smallest",
    "flatness_profile",
    "generate_piecewise",
    "localization_width",
    "power_filter",
    "psnr",
    "self_guided_bf",
]
