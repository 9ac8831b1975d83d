"""Thermal lattice Boltzmann models built on mu-generalized Hermite polynomials."""
from .lattice_model import LatticeSet, ModelParams, WeightVector, theta_validity_range, weights, weights_oracle
from .equilibrium import FlowState, edf, max_speed
from .moments import coefficient_report, reference_theta

__all__ = [
    "LatticeSet", "ModelParams", "WeightVector", "FlowState",
    "weights", "weights_oracle", "theta_validity_range", "edf", "max_speed",
    "coefficient_report", "reference_theta",
]
__version__ = "0.1.0"
