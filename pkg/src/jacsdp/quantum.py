"""Pure states, the geometric measure of entanglement and eigen-system checks.

A pure state ``|psi> = sum x_{i1..im} |i1 .. im>`` (zero-based kets) is
identified with its amplitude tensor. Its entanglement eigenvalue
``G = max |<psi|phi>|`` over product states equals the largest U-eigenvalue
of that tensor, and ``E_G = sqrt(2 - 2 G)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .tensor_core import ComplexTensor, EigenpairResult, RankOneTuple, SymmetryClass, contract_all_but

if TYPE_CHECKING:
    from .pipeline import PipelineConfig, PipelineReport

NORM_TOL = 1e-10
SEPARABLE_LAMBDA = 1 - 1e-6
SEPARABLE_DISTANCE = 1e-5


@dataclass(frozen=True)
class PureState:
    dims: tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __init__(self, amplitudes, dims=None, normalize: bool = False):
        amp = np.array(amplitudes, dtype=complex)
        if dims is not None:
            dims = tuple(int(d) for d in dims)
            amp = amp.reshape(dims)
        nrm = float(np.linalg.norm(amp))
        if nrm == 0.0:
            raise ValueError("the zero vector is not a state")
        if normalize:
            amp = amp / nrm
        elif abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"state has norm {nrm!r}; pass normalize=True to rescale")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "dims", amp.shape)

    @classmethod
    def product(cls, factors) -> "PureState":
        return cls(RankOneTuple(tuple(factors)).outer(), normalize=True)

    def amplitude(self, *kets: int) -> complex:
        """Amplitude of ``|k1 k2 ... km>`` (zero-based)."""
        return complex(self.amplitudes[tuple(kets)])

    def overlap(self, other: "PureState") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def state_to_tensor(s: PureState, symmetry: SymmetryClass | None = None) -> ComplexTensor:
    """Amplitude tensor; symmetry is detected unless given."""
    return ComplexTensor(s.amplitudes, symmetry) if symmetry is not None else ComplexTensor.auto(s.amplitudes)


def entanglement_from_lambda(lam: float) -> tuple[float, float]:
    """``(G, E_G)`` for the largest U-eigenvalue ``lam`` of a unit state."""
    g = float(lam)
    return g, math.sqrt(max(2.0 - 2.0 * g, 0.0))


@dataclass
class GeometricMeasure:
    G: float
    E_G: float
    nearest: PureState | None  # closest product state (None if unavailable)
    result: EigenpairResult | None
    separable: bool
    report: "PipelineReport | None" = field(default=None, repr=False)


def geometric_measure(s: PureState, cfg: "PipelineConfig | None" = None) -> GeometricMeasure:
    """Run the eigenvalue pipeline on ``s`` and translate the result."""
    from .pipeline import PipelineConfig, run_pipeline

    cfg = cfg or PipelineConfig()
    a = state_to_tensor(s)
    rep = run_pipeline(a, cfg)
    res = rep.result
    if res is None:
        lam = rep.oracle.lam if rep.oracle is not None else float("nan")
        g, e = entanglement_from_lambda(lam)
        return GeometricMeasure(g, e, None, None, False, rep)
    g, e = entanglement_from_lambda(res.lam)
    nearest = PureState.product(res.vectors.vectors)
    return GeometricMeasure(g, e, nearest, res, separability_check(res, a), rep)


def separability_check(result: EigenpairResult, a: ComplexTensor | None = None,
                       lam_tol: float = SEPARABLE_LAMBDA, dist_tol: float = SEPARABLE_DISTANCE) -> bool:
    """A unit state is separable iff its largest U-eigenvalue is 1; this also
    checks that the tensor coincides with the rank-one reconstruction."""
    if not result.lam >= lam_tol:
        return False
    if a is None:
        return True
    return product_distance(a, result.vectors) <= dist_tol


def product_distance(a: ComplexTensor, t) -> float:
    """``|| A - z^(1) (x) ... (x) z^(m) ||_F``."""
    outer = (t if isinstance(t, RankOneTuple) else RankOneTuple(tuple(t))).outer()
    return float(np.linalg.norm(a.entries - outer))


# -- residual checkers for the related eigen-systems ------------------------

def us_residual(a: ComplexTensor, lam: float, x) -> float:
    """US-eigenpair residual ``|| <A, x^(m-1)> - lam conj(x) ||`` for a
    symmetric tensor; ``x`` should have unit norm."""
    if a.symmetry.kind != "full":
        raise ValueError("US-eigenpairs are defined for symmetric tensors")
    x = np.asarray(x, dtype=complex)
    v = contract_all_but(a, [x] * a.order, 0)
    return float(np.linalg.norm(v - lam * x.conj()))


def z_residual(a, lam: float, x) -> float:
    """Z-eigenpair residual ``|| A x^(m-1) - lam x ||`` for a real symmetric
    tensor and a real unit vector ``x``."""
    e = a.entries if isinstance(a, ComplexTensor) else np.asarray(a)
    if np.iscomplexobj(e) and np.abs(e.imag).max(initial=0.0) > 0:
        raise ValueError("Z-eigenpairs are defined for real tensors")
    e = np.real(e)
    if np.iscomplexobj(np.asarray(x)):
        raise ValueError("Z-eigenvectors are real")
    x = np.asarray(x, dtype=float)
    v = e
    for _ in range(e.ndim - 1):
        v = v @ x
    return float(np.linalg.norm(v - lam * x))
