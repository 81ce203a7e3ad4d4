"""Shared fixtures of the test suite."""

# Importing Python libraries
import numpy as np
import pytest

# Importing project components
from stiep.components import ProductManifold, ProductPoint, Spectrum, build_D, build_mask, build_tab

SQRT3 = np.sqrt(3.0)
SQRT23 = np.sqrt(23.0)


def random_spectrum(rng: np.random.Generator, s: int, t: int) -> Spectrum:
    """Canonical spectrum with s reals in [−1, 1] and t pairs with imaginary part in [0.1, 1]."""
    return Spectrum.ordered(rng.uniform(-1.0, 1.0, s), rng.uniform(-1.0, 1.0, t) + 1j * rng.uniform(0.1, 1.0, t))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def make_spectrum(rng):
    return lambda s, t: random_spectrum(rng, s, t)


@pytest.fixture
def counterexample_matrix():
    """3x3 stochastic matrix with eigenvalues 1 and (−1 ± √23 i)/12 that has no isospectral decomposition."""
    return np.array([[0.5, 0.5, 0.0], [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], [1.0, 0.0, 0.0]])


@pytest.fixture
def counterexample_spectrum():
    return Spectrum([1.0], [complex(-1.0 / 12.0, SQRT23 / 12.0)])


@pytest.fixture
def counterexample_basis():
    return np.column_stack(
        [
            np.full(3, 1.0 / SQRT3),
            [(3.0 + SQRT3) / 6.0, -1.0 / SQRT3, -(3.0 - SQRT3) / 6.0],
            [(3.0 - SQRT3) / 6.0, 1.0 / SQRT3, -(3.0 + SQRT3) / 6.0],
        ]
    )


@pytest.fixture
def counterexample_exact_point(counterexample_matrix, counterexample_spectrum, counterexample_basis):
    """Exact zero of the SL(2)-extended objective for the counterexample matrix.

    With C = QᵀAQ, the pair block of T⁻¹CT equals the standard block exactly when a² C₃₂ = −Im λ and
    C₂₂ − ab C₃₂ = Re λ; the remaining strict upper part becomes V.
    """
    Q = counterexample_basis
    C = Q.T @ counterexample_matrix @ Q
    pair = counterexample_spectrum.pairs[0]
    a = np.sqrt(-pair.imag / C[2, 1])
    b = a * (pair.real - C[1, 1]) / pair.imag

    T, T_inv = build_tab([a], [b], 1)
    V = build_mask(3, 1, 1) * (T_inv @ C @ T - build_D(counterexample_spectrum))
    return ProductPoint(S=np.sqrt(counterexample_matrix), Q=Q, V=V, a=np.array([a]), b=np.array([b]))


@pytest.fixture(params=[(4, 2, 1), (5, 1, 2), (6, 6, 0), (8, 2, 3)], ids=lambda split: f"n{split[0]}-s{split[1]}-t{split[2]}")
def manifold(request):
    return ProductManifold(*request.param)
