"""Analysis and simulation of zero-energy RIS links with thermal noise modulation."""

from .sysmodel import ConfigError, Geometry, NoiseSource, RisConfig, SystemConfig, validate
from .energy import GammaShapeRate, LinearEh, NonLinearEh
from .detection import NumericalConvergenceError
from .pipeline import PerformanceReport, evaluate

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "GammaShapeRate",
    "Geometry",
    "LinearEh",
    "NoiseSource",
    "NonLinearEh",
    "NumericalConvergenceError",
    "PerformanceReport",
    "RisConfig",
    "SystemConfig",
    "evaluate",
    "validate",
    "__version__",
]
