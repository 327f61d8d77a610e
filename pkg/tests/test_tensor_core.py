import numpy as np
import pytest
from hypothesis import given, strategies as st

from jacsdp.tensor_core import (ComplexTensor, RankOneTuple, SymmetryClass, canonical_gauge,
                                companion_eigenpair, contract_all_but, detect_symmetry, full_contraction,
                                inner_product, random_tensor, random_unit_vector, residual)

from oracles import objective_loops


def test_symmetry_detection_on_worked_states(ex41, ex42, ex43, ex44):
    assert ex41.symmetry == SymmetryClass.partial((0, 1))
    assert ex41.symmetry.describe() == "partial:[1,2]"
    assert ex42.symmetry.kind == "none"
    assert ex43.symmetry.kind == "none"
    assert ex44.symmetry == SymmetryClass.full(3)


def test_declared_symmetry_is_verified(ex42):
    with pytest.raises(ValueError):
        ComplexTensor(ex42.entries, SymmetryClass.full(3))
    with pytest.raises(ValueError):
        SymmetryClass.partial((0, 1), (1, 2))


def test_symmetry_of_random_and_symmetrized(rng):
    a = random_tensor((3, 3, 3), rng)
    assert detect_symmetry(a).kind == "none"
    s = sum(np.transpose(a, p) for p in [(0, 1, 2), (1, 0, 2), (2, 1, 0), (0, 2, 1), (1, 2, 0), (2, 0, 1)])
    assert detect_symmetry(s).kind == "full"
    p = a + np.transpose(a, (0, 2, 1))
    assert detect_symmetry(p) == SymmetryClass.partial((1, 2))


def test_contractions_agree_with_loops(rng):
    a = random_tensor((2, 3, 2), rng)
    zs = [random_unit_vector(n, rng) for n in (2, 3, 2)]
    assert full_contraction(a, zs) == pytest.approx(objective_loops(a, zs), abs=1e-13)
    v = contract_all_but(a, zs, 1)
    assert v @ zs[1] == pytest.approx(objective_loops(a, zs), abs=1e-13)
    assert inner_product(a, a) == pytest.approx(np.linalg.norm(a) ** 2)
    with pytest.raises(ValueError):
        inner_product(a, np.zeros((2, 2, 2)))
    with pytest.raises(IndexError):
        contract_all_but(a, zs, 3)


def test_rank_one_tensor_is_its_own_eigenpair(rng):
    zs = [random_unit_vector(n, rng) for n in (2, 3, 4)]
    t = RankOneTuple(zs)
    a = t.outer()
    # <A, (x) z> = ||A||^2 = 1 and every partial contraction returns conj(z^(k))
    assert residual(a, 1.0, t) < 1e-13
    assert t.is_normalized()


@given(st.integers(0, 2 ** 32 - 1), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_phase_invariance(seed, t1, t2):
    """Phases multiplying to one leave the rank-one tensor and residual unchanged."""
    rng = np.random.default_rng(seed)
    a = random_tensor((2, 2, 2), rng)
    zs = RankOneTuple([random_unit_vector(2, rng) for _ in range(3)])
    lam = float(abs(full_contraction(a, zs)))
    ph = [np.exp(1j * t1), np.exp(1j * t2), np.exp(-1j * (t1 + t2))]
    moved = zs.scaled(ph)
    assert np.allclose(moved.outer(), zs.outer(), atol=1e-14)
    assert residual(a, lam, moved) == pytest.approx(residual(a, lam, zs), abs=1e-13)
    g = canonical_gauge(moved)
    assert np.allclose(g.outer(), zs.outer(), atol=1e-14)
    for v in g.vectors[:-1]:
        first = v[np.flatnonzero(np.abs(v) > 1e-12)[0]]
        assert abs(first.imag) < 1e-14 and first.real > 0


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([2, 3, 4]))
def test_companion_eigenpair(seed, m):
    """If (lam, z) is a U-eigenpair then (-lam, e^{i pi/m} z) is one too."""
    rng = np.random.default_rng(seed)
    zs = RankOneTuple([random_unit_vector(2, rng) for _ in range(m)])
    a = 0.7 * zs.outer()
    lam = 0.7
    assert residual(a, lam, zs) < 1e-12
    mlam, eta_z = companion_eigenpair(lam, zs)
    assert mlam == -lam
    assert residual(a, mlam, eta_z) < 1e-12


def test_tensor_validation():
    with pytest.raises(ValueError):
        ComplexTensor.from_flat((2, 2), [1, 2, 3])
    t = ComplexTensor.from_flat((2, 2), [1, 2, 3, 4])
    assert t.dims == (2, 2) and t.order == 2
    assert t.transpose((1, 0)).entries[0, 1] == 3
    with pytest.raises(ValueError):
        t.entries[0, 0] = 5
