"""
cavtool common module.

Shared domain models, the uncertainty carrier, typed errors, versioned
constants and the result-store interface used across the cavtool packages
(optics, cavity, emitter, coupling, fitting, persistence, cli).

The common module depends on no other cav_* package, so any component can
import it.
"""

from .errors import (
    CavToolError,
    ConfigError,
    DegenerateRatesError,
    DesignInfeasibleError,
    InvalidArgumentError,
    InvalidProfileError,
    NonConvergenceError,
    RootNotFoundError,
    StabilityError,
)
from .models import (
    CavityGeometry,
    CavitySpectralParams,
    CouplingReport,
    FieldProfile,
    G2Model,
    GaussianMode,
    IndexTable,
    InterfaceMark,
    Layer,
    LayerStack,
    ModeIndex,
    PopulationState,
    SaturationParams,
    StackResponse,
    ThreeLevelRates,
)
from .quantity import Quantity, propagate, propagate_monte_carlo
from .store import ResultStore

__all__ = [
    "CavToolError",
    "CavityGeometry",
    "CavitySpectralParams",
    "ConfigError",
    "CouplingReport",
    "DegenerateRatesError",
    "DesignInfeasibleError",
    "FieldProfile",
    "G2Model",
    "GaussianMode",
    "IndexTable",
    "InterfaceMark",
    "InvalidArgumentError",
    "InvalidProfileError",
    "Layer",
    "LayerStack",
    "ModeIndex",
    "NonConvergenceError",
    "PopulationState",
    "Quantity",
    "ResultStore",
    "RootNotFoundError",
    "SaturationParams",
    "StabilityError",
    "StackResponse",
    "ThreeLevelRates",
    "propagate",
    "propagate_monte_carlo",
]
