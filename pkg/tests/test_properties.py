"""Properties of whole runs on random inputs."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jacsdp import ComplexTensor, PipelineConfig, PureState, geometric_measure, run_pipeline
from jacsdp.tensor_core import companion_eigenpair, random_tensor, residual

seeds = st.integers(0, 2**32 - 1)
small_dims = st.sampled_from([(2, 2), (2, 3), (3, 3), (2, 2, 2)])


def _run(dims, seed):
    a = ComplexTensor.auto(random_tensor(dims, np.random.default_rng(seed)))
    return a, run_pipeline(a, PipelineConfig(seed=seed % 1000))


@settings(max_examples=8)
@given(small_dims, seeds)
def test_certified_pairs_have_tiny_residual_and_a_companion(dims, seed):
    a, rep = _run(dims, seed)
    r = rep.result
    assert r.lower_bound <= r.lam + 1e-10 <= r.upper_bound + 1e-7 + 1e-10
    if rep.certified:
        assert r.residual <= 1e-8
        assert abs(r.bound_gap) <= 1e-5
    neg, t = companion_eigenpair(r.lam, r.vectors)
    assert neg == -r.lam
    assert residual(a, neg, t) <= r.residual + 1e-12


@settings(max_examples=6)
@given(small_dims, seeds, st.floats(0, 2 * math.pi))
def test_global_phase_leaves_lambda_unchanged(dims, seed, theta):
    a, rep = _run(dims, seed)
    b = ComplexTensor(np.exp(1j * theta) * a.entries, a.symmetry)
    other = run_pipeline(b, PipelineConfig(seed=seed % 1000))
    assert other.result.lam == pytest.approx(rep.result.lam, abs=1e-7)


@settings(max_examples=6)
@given(small_dims, seeds)
def test_geometric_measure_identity(dims, seed):
    psi = PureState(random_tensor(dims, np.random.default_rng(seed)))
    gm = geometric_measure(psi, PipelineConfig(seed=seed % 1000))
    assert gm.E_G ** 2 + 2 * gm.G == pytest.approx(2.0, abs=1e-12)
    assert 0 < gm.G <= 1 + 1e-9
    # the nearest product state realises the overlap G
    assert abs(psi.overlap(gm.nearest)) == pytest.approx(gm.G, abs=1e-8)
