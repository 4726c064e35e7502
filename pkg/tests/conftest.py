import numpy as np
import pytest

from nhgwp import LinearVectorPotential, ModelSpec, PolynomialPotential


def make_model(coeffs=(0.0,), k=0.0, slope=0.0, mass=1.0, hbar=1.0):
    return ModelSpec(
        1,
        [mass],
        PolynomialPotential.from_coeffs_1d(coeffs),
        LinearVectorPotential([slope], [k]),
        hbar,
    )


@pytest.fixture
def free_k1():
    return make_model(k=1.0)


@pytest.fixture
def harmonic_k1():
    return make_model((0.0, 0.0, 0.5), k=1.0)


@pytest.fixture
def linear_b_harmonic():
    return make_model((0.0, 0.0, 0.5), k=1.0, slope=0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
