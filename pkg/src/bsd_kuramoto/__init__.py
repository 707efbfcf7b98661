"""Generalized Kuramoto models on bounded symmetric domains of types I, II and III."""
from .domains import DomainKind, DomainSpec
from .dynamics import IntegrationConfig, Trajectory, integrate_ensemble, integrate_lift, retract_state
from .flows import EnsembleState, ModelSpec, coupled_rhs, frequency_drift, mean_field
from .groups import GeneratorSpec, GroupElement, GroupSpec, make_generator

__all__ = [
    "DomainKind",
    "DomainSpec",
    "EnsembleState",
    "GeneratorSpec",
    "GroupElement",
    "GroupSpec",
    "IntegrationConfig",
    "ModelSpec",
    "Trajectory",
    "coupled_rhs",
    "frequency_drift",
    "integrate_ensemble",
    "integrate_lift",
    "make_generator",
    "mean_field",
    "retract_state",
]
