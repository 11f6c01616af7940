"""Explicit linear isoperimetric fillings in M = R^m × (N ⋊ A)."""

__version__ = "0.1.0"

from .algebra import ManifoldSpec, MetricLieAlgebra, validate  # noqa: E402
from .currents import Chain, MassResult, QuadratureOptions, boundary, cone, cylinder, mass  # noqa: E402
from .errors import IsofillError  # noqa: E402
from .filling import FillingConfig, fill, verify_theorem  # noqa: E402
from .models import builtin  # noqa: E402
from .structure import decompose  # noqa: E402

__all__ = [
    "Chain",
    "FillingConfig",
    "IsofillError",
    "ManifoldSpec",
    "MassResult",
    "MetricLieAlgebra",
    "QuadratureOptions",
    "boundary",
    "builtin",
    "cone",
    "cylinder",
    "decompose",
    "fill",
    "mass",
    "validate",
    "verify_theorem",
]
