import numpy as np
import pytest
from hypothesis import given, strategies as st

from jacsdp.oracle import HopmConfig, _sphere_grid, grid_certify_small, hopm, run_batch
from jacsdp.tensor_core import ComplexTensor, RankOneTuple, random_tensor, random_unit_vector, residual

from oracles import sigma_max


def test_rank_one_tensor_gives_one(rng):
    t = RankOneTuple([random_unit_vector(n, rng) for n in (2, 3, 2)])
    res = hopm(ComplexTensor.auto(t.outer()), restarts=4)
    assert res.lam == pytest.approx(1.0, abs=1e-12)
    assert residual(ComplexTensor.auto(t.outer()), res.lam, res.vectors) < 1e-10


def test_third_example_with_64_restarts(ex43):
    res = hopm(ex43, restarts=64)
    assert res.lam == pytest.approx(0.8895, abs=5e-5)
    assert res.residual < 1e-10


@given(st.integers(0, 2 ** 32 - 1))
def test_matrix_gives_largest_singular_value(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    res = hopm(ComplexTensor.auto(A), restarts=8)
    assert res.lam == pytest.approx(sigma_max(A), abs=1e-9)


def test_sweeps_never_decrease_the_value(rng):
    a = ComplexTensor.auto(random_tensor((3, 2, 2), rng))
    starts = [np.array([random_unit_vector(n, rng)]) for n in a.dims]
    prev = -np.inf
    for k in range(1, 30):
        lam, _, _, _ = run_batch(a, starts, k, lam_tol=0.0, residual_tol=0.0)
        assert lam[0] >= prev - 1e-14
        prev = lam[0]


def test_deterministic_and_batch_independent(ex42):
    a, b = hopm(ex42, seed=11), hopm(ex42, seed=11)
    assert a.lam == b.lam and np.array_equal(a.values, b.values)
    # restart j draws from its own child seed, so a larger batch extends the smaller one
    small, big = hopm(ex42, restarts=8, seed=11), hopm(ex42, restarts=16, seed=11)
    assert np.allclose(small.values, big.values[:8], atol=1e-12)
    assert hopm(ex42, seed=12).lam == pytest.approx(a.lam, abs=1e-10)


def test_zero_tensor_and_bad_config():
    z = ComplexTensor.auto(np.zeros((2, 2, 2), complex))
    assert hopm(z).lam == 0.0
    with pytest.raises(ValueError):
        hopm(z, cfg=HopmConfig(restarts=0))


@pytest.mark.parametrize("n,res", [(2, 7), (3, 5)])
def test_sphere_grid_points_are_unit_and_gauged(n, res):
    pts, radius = _sphere_grid(n, res)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)
    assert np.all(np.abs(pts[:, 0].imag) == 0) and np.all(pts[:, 0].real >= -1e-15)
    # the covering radius is honest on random unit vectors
    rng = np.random.default_rng(0)
    for _ in range(50):
        z = random_unit_vector(n, rng)
        z = z * np.exp(-1j * np.angle(z[0]))
        assert np.linalg.norm(pts - z, axis=1).min() <= radius + 1e-12


def test_grid_band_contains_the_eigenvalue(ex41):
    band = grid_certify_small(ex41, resolution=7)
    lam = hopm(ex41).lam
    assert band.lower == pytest.approx(lam, abs=1e-9)
    assert band.lower <= lam + 1e-12 <= band.upper + 1e-12


def test_grid_band_on_matrices(rng):
    A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    band = grid_certify_small(ComplexTensor.auto(A), resolution=15)
    s = sigma_max(A)
    assert band.lower == pytest.approx(s, abs=1e-9)
    assert band.upper >= s
    ident = grid_certify_small(ComplexTensor.auto(np.eye(2, dtype=complex) / np.sqrt(2)))
    assert ident.lower == pytest.approx(1 / np.sqrt(2), abs=1e-12)


def test_grid_limits():
    with pytest.raises(ValueError, match="real dimension"):
        grid_certify_small(ComplexTensor.auto(np.ones((3, 3, 2), complex)))
    z = grid_certify_small(ComplexTensor.auto(np.zeros((2, 2, 2), complex)))
    assert (z.lower, z.upper) == (0.0, 0.0)
    with pytest.raises(ValueError):
        grid_certify_small(ComplexTensor.auto(np.ones((2, 2), complex)), resolution=1)
