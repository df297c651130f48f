"""Surfer/breaker platoon matching: weight model, QUBO and Ising forms, and a solver zoo."""

from .errors import PlatoonError
from .matching import WeightMatrix, weight_matrix
from .model import Breaker, Instance, Surfer, generate_instance, load_instance_ref
from .qubo import Qubo, build_qubo, calibrate_penalty

__version__ = "0.1.0"

__all__ = [
    "Breaker",
    "Instance",
    "PlatoonError",
    "Qubo",
    "Surfer",
    "WeightMatrix",
    "build_qubo",
    "calibrate_penalty",
    "generate_instance",
    "load_instance_ref",
    "weight_matrix",
]
