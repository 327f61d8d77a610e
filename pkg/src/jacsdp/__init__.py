"""Largest U-eigenvalues of complex tensors via Jacobian moment relaxations.

The entanglement eigenvalue of a pure multipartite state is the largest
U-eigenvalue ``lambda`` of its amplitude tensor, and its geometric measure of
entanglement is ``sqrt(2 - 2 lambda)``. :func:`run_pipeline` computes and
certifies ``lambda``; :func:`geometric_measure` wraps it for states.
"""

from .pipeline import PipelineConfig, PipelineReport, run_pipeline
from .quantum import PureState, geometric_measure, separability_check, state_to_tensor
from .tensor_core import ComplexTensor, EigenpairResult, RankOneTuple, SymmetryClass

__all__ = [
    "ComplexTensor",
    "EigenpairResult",
    "PipelineConfig",
    "PipelineReport",
    "PureState",
    "RankOneTuple",
    "SymmetryClass",
    "geometric_measure",
    "run_pipeline",
    "separability_check",
    "state_to_tensor",
]

__version__ = "0.1.0"
