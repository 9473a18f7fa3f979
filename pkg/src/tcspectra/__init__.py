"""Exact spectral invariants of toric test configurations.

The exact layer (polytopes, configurations, spectra) works in
``fractions.Fraction``; the geodesic and Kahler-Einstein layers are float64
grids and quadratures checked against the exact values.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .configurations import (
    ConfigurationError,
    DivisibilityError,
    FiltrationTable,
    FlagIdealConfig,
    MonomialIdeal,
    NormalConeConfig,
    ToricConfig,
    dims_by_weight,
    lambda_bounds,
    seshadri_fixed_point,
    weight,
)
from .documents import ConfigDocument, DocumentError, emit, load_config, load_corpus, parse_config
from .geometry import Affine, EhrhartData, Halfspace, PLConcave, Polytope, enumerate_lattice_points, volume
from .spectra import (
    DHMeasure,
    InvariantSet,
    QuasiPolynomialError,
    SpectralMeasure,
    cdf_distance,
    dh_measure,
    fit_invariants,
    norms,
    spectral_measure,
)

__all__ = [
    "Affine",
    "ConfigDocument",
    "ConfigurationError",
    "DHMeasure",
    "DivisibilityError",
    "DocumentError",
    "EhrhartData",
    "FiltrationTable",
    "FlagIdealConfig",
    "Halfspace",
    "InvariantSet",
    "MonomialIdeal",
    "NormalConeConfig",
    "PLConcave",
    "Polytope",
    "QuasiPolynomialError",
    "SpectralMeasure",
    "ToricConfig",
    "cdf_distance",
    "dh_measure",
    "dims_by_weight",
    "emit",
    "enumerate_lattice_points",
    "fit_invariants",
    "lambda_bounds",
    "load_config",
    "load_corpus",
    "norms",
    "parse_config",
    "seshadri_fixed_point",
    "spectral_measure",
    "volume",
    "weight",
]
