import numpy as np
import pytest

from jacsdp.extraction import (ExtractionError, certify, column_echelon, extract_atoms, flatness_rank,
                               numerical_rank, polish, recover_last_block, second_moment_directions,
                               symmetric_representative)
from jacsdp.poly import monomials_upto
from jacsdp.tensor_core import ComplexTensor, RankOneTuple, random_tensor, random_unit_vector, residual

from oracles import atomic_moment_matrix

# printed eigenvectors of the second worked state (four decimals)
EX42_VECTORS = [np.array([-0.0287, -0.9996]), np.array([-0.7404, -0.3361 - 0.5821j]),
                np.array([0.2248, 0.8439 + 0.4872j])]


def _match_atoms(got, want, tol):
    for w in want:
        assert min(np.linalg.norm(g - w) for g in got) < tol


def test_dirac_is_rank_one_and_flat():
    basis = monomials_upto(3, 2)
    u = np.array([0.3, -0.5, 0.8])
    M = atomic_moment_matrix([u], [1.0], basis)
    assert flatness_rank(M, 4) == (1, True)
    assert np.allclose(extract_atoms(M, basis), [u])


@pytest.mark.parametrize("seed", range(5))
def test_two_and_three_atoms_recovered(seed):
    rng = np.random.default_rng(seed)
    basis = monomials_upto(3, 3)
    k = 2 + seed % 2
    atoms = [rng.normal(size=3) for _ in range(k)]
    weights = rng.dirichlet(np.ones(k))
    M = atomic_moment_matrix(atoms, weights, basis)
    rank, flat = flatness_rank(M, len(monomials_upto(3, 2)))
    assert (rank, flat) == (k, True)
    _match_atoms(extract_atoms(M, basis, rank), atoms, 1e-6)


def test_random_psd_is_not_flat(rng):
    basis = monomials_upto(2, 3)
    B = rng.normal(size=(len(basis), len(basis)))
    rank, flat = flatness_rank(B @ B.T, len(monomials_upto(2, 2)))
    assert rank == len(basis) and not flat
    with pytest.raises(ExtractionError):
        extract_atoms(B @ B.T, basis, rank)


def test_zero_matrix_has_no_atoms():
    basis = monomials_upto(2, 1)
    assert numerical_rank(np.zeros((3, 3))) == 0
    with pytest.raises(ExtractionError):
        extract_atoms(np.zeros((3, 3)), basis)


def test_column_echelon_pivots(rng):
    V = rng.normal(size=(6, 3))
    U, piv = column_echelon(V)
    assert len(piv) == 3
    assert np.allclose(U[piv], np.eye(3))
    # same column space
    assert np.linalg.matrix_rank(np.hstack([U, V]), tol=1e-9) == 3


def test_second_moment_fallback():
    basis = monomials_upto(4, 2)
    u = np.array([0.6, 0.8, -1.0, 0.0])
    M = atomic_moment_matrix([u, -u], [0.5, 0.5], basis)
    got = second_moment_directions(M, basis, [[0, 1], [2, 3]])
    assert abs(abs(got[:2] @ u[:2])) == pytest.approx(1.0)
    assert abs(got[2]) == pytest.approx(1.0)


def test_polish_printed_vectors(ex42):
    p = polish(ex42, EX42_VECTORS)
    assert p.residual < 1e-10
    assert p.lam == pytest.approx(0.9661, abs=5e-5)
    assert p.lam >= p.start_value - 1e-4


def test_polish_keeps_best_iterate(rng):
    a = ComplexTensor.auto(random_tensor((2, 2, 2), rng))
    p = polish(a, [random_unit_vector(2, rng) for _ in range(3)], max_sweeps=3)
    assert p.sweeps <= 3
    assert residual(a, p.lam, p.vectors) == pytest.approx(p.residual)


def test_certify_thresholds(ex42):
    p = polish(ex42, EX42_VECTORS)
    ok = certify(ex42, p.lam, p.vectors, p.lam + 5e-6, p.lam)
    assert ok.certified and ok.certificate["status"] == "certified-global"
    assert ok.bound_gap == pytest.approx(5e-6)
    assert not certify(ex42, p.lam, p.vectors, p.lam + 2e-5).certified
    assert not certify(ex42, p.lam, p.vectors, p.lam - 2e-5).certified
    assert not certify(ex42, p.lam, p.vectors, float("nan")).certified
    rough = [v + 1e-3 for v in EX42_VECTORS]
    rough = [v / np.linalg.norm(v) for v in rough]
    res = certify(ex42, p.lam, rough, p.lam)
    assert not res.certified and res.residual > 1e-8
    assert certify(ex42, p.lam, p.vectors, p.lam, extra={"source": "sdp"}).certificate["source"] == "sdp"


def test_symmetric_representative(ex44, ex42):
    x = np.array([0.382051 + 0.59501j, -0.29426 + 0.64297j])
    x = x / np.linalg.norm(x)
    phases = [np.exp(0.4j), np.exp(-1.1j), np.exp(0.7j)]
    rep = symmetric_representative(ex44, [ph * x for ph in phases])
    val = np.einsum("ijk,i,j,k->", ex44.entries.conj(), rep, rep, rep)
    assert abs(val.imag) < 1e-12 and val.real > 0
    assert 0 <= np.angle(rep[0]) % (2 * np.pi) < 2 * np.pi / 3
    assert symmetric_representative(ex42, EX42_VECTORS) is None


def test_recover_last_block_threshold():
    from jacsdp.realify import realify

    a = ComplexTensor.auto(np.full((2, 2), 1e-9 + 0j))
    b = realify(a)
    us = [np.array([1.0, 0, 0, 0]), None]
    assert recover_last_block(b, us, 1) is None
    a = ComplexTensor.auto(np.array([[1.0, 0], [0, 0]], complex))
    v = recover_last_block(realify(a), us, 1)
    assert np.allclose(v, [1, 0, 0, 0])
