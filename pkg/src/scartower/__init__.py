"""Measurement-based preparation of structured excited states at desk scale."""

__version__ = "0.1.0"

from .statevector import (
    LocalOperator,
    MeasurementOutcome,
    StateVector,
    apply_local,
    born_measure,
    controlled_apply,
    inner,
    make_rng,
    qfi,
    schmidt_entropy,
)
from .models import ModelSpec, TowerState, get_model, model_names

__all__ = [
    "LocalOperator",
    "MeasurementOutcome",
    "StateVector",
    "ModelSpec",
    "TowerState",
    "apply_local",
    "born_measure",
    "controlled_apply",
    "inner",
    "make_rng",
    "qfi",
    "schmidt_entropy",
    "get_model",
    "model_names",
    "__version__",
]
