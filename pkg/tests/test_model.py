# Importing Python libraries
import numpy as np
import numpy.testing
import pytest

# Importing project components
from stiep.components import (
    ModelKind,
    ProductManifold,
    ProductPoint,
    ProductTangent,
    Spectrum,
    build_D,
    build_tab,
    circulant_from_spectrum,
    circulant_isospectral_basis,
    eval_objective,
    gauss_newton_denominator,
    grad_objective,
    hess_vec_approx,
    level_bound_diagnostics,
    real_schur,
    recover_stochastic,
    residual,
    residual_map,
)
from stiep.errors import BadArguments, ZeroDirection

MODELS = (ModelKind.ISOSPECTRAL, ModelKind.SL2EXTENDED)

# (n, s, t) splits of the gradient check
SPLITS = [(4, 4, 0), (4, 2, 1), (4, 0, 2), (8, 8, 0), (8, 4, 2), (8, 2, 3), (12, 6, 3), (12, 2, 5), (12, 0, 6)]


def objective(x, spectrum, kind) -> float:
    return eval_objective(x, spectrum, kind)[0]


def gradient(x, spectrum, kind, manifold=None) -> ProductTangent:
    _, cache = eval_objective(x, spectrum, kind)
    return grad_objective(x, spectrum, kind, cache, manifold)


def v_only(tangent: ProductTangent) -> ProductTangent:
    return ProductTangent(np.zeros_like(tangent.S), np.zeros_like(tangent.Q), tangent.V, np.zeros_like(tangent.a), np.zeros_like(tangent.b))


# Model kinds and T_ab


@pytest.mark.parametrize("label, expected", [("I", ModelKind.ISOSPECTRAL), ("2", ModelKind.SL2EXTENDED), ("sl2extended", ModelKind.SL2EXTENDED)])
def test_model_kind_parse(label, expected):
    assert ModelKind.parse(label) is expected


def test_model_kind_parse_rejects_unknown_label():
    with pytest.raises(BadArguments):
        ModelKind.parse("III")


def test_build_tab_inverse_and_determinant(rng):
    a, b = np.exp(rng.standard_normal(3)), rng.standard_normal(3)
    T, T_inv = build_tab(a, b, 2)

    numpy.testing.assert_allclose(T @ T_inv, np.eye(8), atol=1e-14)
    assert np.linalg.det(T) == pytest.approx(1.0)
    numpy.testing.assert_array_equal(build_tab(np.ones(2), np.zeros(2), 1)[0], np.eye(5))


# Objective


def test_objective_matches_its_definition(rng, make_spectrum):
    spectrum = make_spectrum(2, 2)
    manifold = ProductManifold.for_spectrum(spectrum)
    x = manifold.random_point(rng)

    T, T_inv = build_tab(x.a, x.b, spectrum.s)
    difference = x.S * x.S - x.Q @ T @ (build_D(spectrum) + x.V) @ T_inv @ x.Q.T
    value, cache = eval_objective(x, spectrum, ModelKind.SL2EXTENDED)

    assert value == pytest.approx(0.5 * np.sum(difference**2), rel=1e-12)
    assert residual(value) == pytest.approx(np.linalg.norm(difference), rel=1e-12)
    numpy.testing.assert_allclose(residual_map(x, spectrum, ModelKind.SL2EXTENDED), cache.H)


def test_isospectral_model_ignores_pair_scalings(rng, make_spectrum):
    spectrum = make_spectrum(1, 2)
    manifold = ProductManifold.for_spectrum(spectrum)
    x = manifold.random_point(rng)
    reset = ProductPoint(S=x.S, Q=x.Q, V=x.V, a=np.ones(2), b=np.zeros(2))

    assert objective(x, spectrum, ModelKind.ISOSPECTRAL) == objective(reset, spectrum, ModelKind.SL2EXTENDED)


def test_recover_stochastic_has_unit_row_sums(rng, manifold):
    matrix = recover_stochastic(manifold.random_point(rng))
    assert np.all(matrix >= 0.0)
    numpy.testing.assert_allclose(matrix.sum(axis=1), 1.0, atol=1e-12)


def test_level_bound_diagnostics():
    x = ProductPoint(S=np.eye(4), Q=np.eye(4), V=np.triu(np.full((4, 4), 2.0), k=1), a=np.array([0.5, 4.0]), b=np.array([-3.0, 1.0]))
    bounds = level_bound_diagnostics(x)

    assert bounds == pytest.approx({"max_a": 4.0, "max_abs_b": 3.0, "inverse_min_a": 2.0, "v_norm": np.sqrt(6.0 * 4.0)})


# Gradient


@pytest.mark.parametrize("kind", MODELS, ids=lambda kind: kind.value)
def test_gradient_matches_central_differences(rng, make_spectrum, kind):
    h = 1e-6
    errors = []
    for case in range(200):
        n, s, t = SPLITS[case % len(SPLITS)]
        spectrum = make_spectrum(s, t)
        manifold = ProductManifold.for_spectrum(spectrum)
        x = manifold.random_point(rng)
        xi = manifold.random_tangent(x, rng)

        g = gradient(x, spectrum, kind, manifold)
        forward = objective(manifold.retract(x, xi * h), spectrum, kind)
        backward = objective(manifold.retract(x, xi * -h), spectrum, kind)
        slope = (forward - backward) / (2.0 * h)

        assert manifold.check_tangent(x, g)
        errors.append(abs(slope - manifold.inner(x, g, xi)) / (manifold.norm(x, g) * manifold.norm(x, xi)))

    errors = np.array(errors)
    assert np.mean(errors <= 1e-5) >= 0.99
    assert errors.max() <= 1e-3


def test_isospectral_gradient_has_no_pair_components(rng, make_spectrum):
    spectrum = make_spectrum(2, 2)
    manifold = ProductManifold.for_spectrum(spectrum)
    g = gradient(manifold.random_point(rng), spectrum, ModelKind.ISOSPECTRAL, manifold)

    numpy.testing.assert_array_equal(g.a, 0.0)
    numpy.testing.assert_array_equal(g.b, 0.0)


# Exact decompositions


def test_printed_decomposition_of_counterexample(counterexample_matrix, counterexample_spectrum):
    Q = np.array([[0.57735, 0.78868, 0.21132], [0.57735, -0.57735, 0.57735], [0.57735, -0.21132, -0.78868]])
    V = np.array([[0.0, 0.42152, 0.42834], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    x = ProductPoint(S=np.sqrt(counterexample_matrix), Q=Q, V=V, a=np.array([0.81636]), b=np.array([0.0]))

    assert objective(x, counterexample_spectrum, ModelKind.SL2EXTENDED) <= 1e-6


def test_exact_decomposition_of_counterexample(counterexample_exact_point, counterexample_spectrum):
    x = counterexample_exact_point

    assert objective(x, counterexample_spectrum, ModelKind.SL2EXTENDED) <= 1e-26
    assert x.a[0] == pytest.approx(0.81636, abs=1e-4)
    assert abs(x.b[0]) <= 1e-4
    numpy.testing.assert_allclose(x.V[0], [0.0, 0.42152, 0.42834], atol=1e-4)

    g = gradient(x, counterexample_spectrum, ModelKind.SL2EXTENDED)
    assert ProductManifold.for_spectrum(counterexample_spectrum).norm(x, g) <= 1e-12

    # Freezing a = 1, b = 0 loses the decomposition
    assert objective(x, counterexample_spectrum, ModelKind.ISOSPECTRAL) > 1e-6


def test_circulant_gives_exact_isospectral_point(counterexample_spectrum):
    B, _ = circulant_from_spectrum(counterexample_spectrum)
    Q = circulant_isospectral_basis(counterexample_spectrum)
    x = ProductPoint(S=np.sqrt(B), Q=Q, V=np.zeros((3, 3)), a=np.ones(1), b=np.zeros(1))

    assert objective(x, counterexample_spectrum, ModelKind.ISOSPECTRAL) <= 1e-26


def test_real_schur_gives_exact_isospectral_point():
    shift = np.roll(np.eye(5), 1, axis=0)
    A = 0.5 * np.eye(5) + 0.25 * (shift + shift.T)
    Q, T = real_schur(A)
    spectrum = Spectrum(np.diag(T), [])
    manifold = ProductManifold.for_spectrum(spectrum)
    x = ProductPoint(S=np.sqrt(A), Q=Q, V=manifold.mask * T, a=np.zeros(0), b=np.zeros(0))

    assert objective(x, spectrum, ModelKind.ISOSPECTRAL) <= 1e-26


@pytest.mark.parametrize("flipped", [[0], [1], [3, 4]], ids=["real-0", "real-1", "pair"])
def test_objective_is_invariant_under_column_sign_flips(rng, make_spectrum, flipped):
    spectrum = make_spectrum(3, 1)
    manifold = ProductManifold.for_spectrum(spectrum)
    x = manifold.random_point(rng)

    E = np.eye(5)
    E[flipped, flipped] = -1.0
    y = ProductPoint(S=x.S, Q=x.Q @ E, V=E @ x.V @ E, a=x.a, b=x.b)

    for kind in MODELS:
        assert objective(y, spectrum, kind) == pytest.approx(objective(x, spectrum, kind), rel=1e-12)


# Second-order information


@pytest.mark.parametrize("kind", MODELS, ids=lambda kind: kind.value)
def test_hessian_vector_product_is_positively_homogeneous(rng, make_spectrum, kind):
    spectrum = make_spectrum(2, 2)
    manifold = ProductManifold.for_spectrum(spectrum)
    x = manifold.random_point(rng)
    xi = manifold.random_tangent(x, rng)

    once = hess_vec_approx(x, xi, spectrum, kind, manifold=manifold)
    twice = hess_vec_approx(x, xi * 2.0, spectrum, kind, manifold=manifold)
    for mine, theirs in zip(twice.slots(), once.slots()):
        numpy.testing.assert_allclose(mine, 2.0 * theirs, rtol=1e-8, atol=1e-10)


@pytest.mark.parametrize("transport", ["projection", "parallel"])
def test_hessian_curvature_along_v_is_exact(rng, make_spectrum, transport):
    spectrum = make_spectrum(2, 2)
    manifold = ProductManifold.for_spectrum(spectrum)
    x = manifold.random_point(rng)
    xi = v_only(manifold.random_tangent(x, rng))

    T, T_inv = build_tab(x.a, x.b, spectrum.s)
    L = x.Q @ T @ xi.V @ T_inv @ x.Q.T
    Hxi = hess_vec_approx(x, xi, spectrum, ModelKind.SL2EXTENDED, transport=transport, manifold=manifold)

    assert manifold.inner(x, xi, Hxi) == pytest.approx(np.sum(L * L), rel=1e-6)


def test_gauss_newton_denominator(rng, make_spectrum):
    spectrum = make_spectrum(2, 2)
    manifold = ProductManifold.for_spectrum(spectrum)
    x = manifold.random_point(rng)
    xi = manifold.random_tangent(x, rng)

    single = gauss_newton_denominator(x, xi, spectrum, ModelKind.SL2EXTENDED, manifold=manifold)
    assert gauss_newton_denominator(x, xi * 2.0, spectrum, ModelKind.SL2EXTENDED, manifold=manifold) == pytest.approx(4.0 * single, rel=1e-8)

    along_v = v_only(xi)
    T, T_inv = build_tab(x.a, x.b, spectrum.s)
    L = x.Q @ T @ along_v.V @ T_inv @ x.Q.T
    assert gauss_newton_denominator(x, along_v, spectrum, ModelKind.SL2EXTENDED, manifold=manifold) == pytest.approx(np.sum(L * L), rel=1e-6)


def test_gauss_newton_matches_hessian_at_a_zero(counterexample_exact_point, counterexample_spectrum, rng):
    x = counterexample_exact_point
    manifold = ProductManifold.for_spectrum(counterexample_spectrum)
    xi = manifold.random_tangent(x, rng)

    curvature = manifold.inner(x, xi, hess_vec_approx(x, xi, counterexample_spectrum, ModelKind.SL2EXTENDED, manifold=manifold))
    assert curvature == pytest.approx(gauss_newton_denominator(x, xi, counterexample_spectrum, ModelKind.SL2EXTENDED, manifold=manifold), rel=5e-2)


def test_second_order_operators_reject_zero_direction(rng, make_spectrum):
    spectrum = make_spectrum(2, 1)
    manifold = ProductManifold.for_spectrum(spectrum)
    x = manifold.random_point(rng)

    with pytest.raises(ZeroDirection):
        hess_vec_approx(x, manifold.zero_tangent(), spectrum, ModelKind.SL2EXTENDED)
    with pytest.raises(ZeroDirection):
        gauss_newton_denominator(x, manifold.zero_tangent(), spectrum, ModelKind.SL2EXTENDED)
