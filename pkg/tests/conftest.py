from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from jacsdp import ComplexTensor

DATA = Path(__file__).resolve().parents[1] / "data"

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def example_entries(name: str) -> np.ndarray:
    """The four worked states, typed in from their closed forms."""
    a = np.zeros((2, 2, 2), complex)
    if name == "ex41":
        a[0, 0, 0] = 1 / 2
        a[1, 1, 0] = a[1, 0, 1] = a[0, 1, 1] = np.sqrt(3) / 6
        a[0, 0, 1] = 1 / 2 + 1j / 2
    elif name == "ex42":
        a[0, 0, 0] = 1 / 6
        a[1, 1, 1] = 2j / 3
        a[1, 0, 1] = np.sqrt(1 / 3) + 1j / 3
        a[1, 0, 0] = np.sqrt(3) / 6
    else:
        for i1, i2, i3 in np.ndindex(2, 2, 2):
            p, q, r = i1 + 1, i2 + 1, i3 + 1
            if name == "ex43":
                a[i1, i2, i3] = (np.cos(p - q + r) + 1j * np.sin(p + q - r)) / np.sqrt(8)
            else:
                a[i1, i2, i3] = (np.cos(p + q + r) + 1j * np.sin(p + q + r)) / np.sqrt(8)
    return a


@pytest.fixture(params=["ex41", "ex42", "ex43", "ex44"])
def example_name(request):
    return request.param


@pytest.fixture
def ex41():
    return ComplexTensor.auto(example_entries("ex41"))


@pytest.fixture
def ex42():
    return ComplexTensor.auto(example_entries("ex42"))


@pytest.fixture
def ex43():
    return ComplexTensor.auto(example_entries("ex43"))


@pytest.fixture
def ex44():
    return ComplexTensor.auto(example_entries("ex44"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# eigenvectors printed alongside the worked examples (four decimals, some three)
PRINTED_VECTORS = {
    "ex41": [np.array([-0.9625, -0.2242 + 0.1530j])] * 2 + [np.array([0.5054 + 0.0213j, 0.6308 + 0.5883j])],
    "ex42": [np.array([-0.0287, -0.9996]), np.array([-0.7404, -0.3361 - 0.5821j]),
             np.array([0.2248, 0.8439 + 0.4872j])],
    "ex43": [-np.array([0.6928, 0.6734 + 0.2580j]), -np.array([0.689, 0.450 - 0.5681j]),
             np.array([0.1533 + 0.7083j, -0.4375 + 0.5324j])],
    "ex44": [np.array([0.382051 + 0.59501j, -0.29426 + 0.64297j])] * 3,
}
PRINTED_LAMBDA = {"ex41": 0.9317, "ex42": 0.9661, "ex43": 0.8895, "ex44": 1.0}


def gauge_error(got, want) -> float:
    """Largest componentwise distance after rotating each computed factor by
    the phase that best aligns it with the reference."""
    worst = 0.0
    for g, w in zip(got, want):
        ph = np.vdot(g, w)
        ph = ph / abs(ph) if abs(ph) > 0 else 1.0
        worst = max(worst, float(np.max(np.abs(ph * np.asarray(g) - w))))
    return worst
