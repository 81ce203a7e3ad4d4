# Importing Python libraries
import numpy as np
import numpy.testing
import pytest

# Importing project components
from stiep.components import ProductManifold, ProductPoint, ProductTangent, geodesic_distance_pos
from stiep.errors import BadArguments, DegenerateStep

RETRACTIONS = ("qr", "exp")
TRANSPORTS = ("projection", "parallel")


def ambient_difference(first, second) -> float:
    return float(np.sqrt(sum(np.sum((mine - theirs) ** 2) for mine, theirs in zip(slots(first), slots(second)))))


def slots(value) -> tuple:
    return (value.S, value.Q, value.V, value.a, value.b)


def first_order_model(x: ProductPoint, xi: ProductTangent, h: float) -> ProductPoint:
    return ProductPoint(S=x.S + h * xi.S, Q=x.Q + h * xi.Q, V=x.V + h * xi.V, a=x.a + h * xi.a, b=x.b + h * xi.b)


# Points, tangent vectors and the metric


def test_random_point_and_tangent_are_valid(manifold, rng):
    x = manifold.random_point(rng)
    xi = manifold.random_tangent(x, rng)

    assert manifold.check_point(x)
    assert manifold.check_tangent(x, xi)
    assert manifold.norm(x, xi) == pytest.approx(1.0)


def test_random_tangents_from_distinct_seeds_differ(manifold, rng):
    x = manifold.random_point(rng)
    first = manifold.random_tangent(x, np.random.default_rng(0))
    second = manifold.random_tangent(x, np.random.default_rng(1))

    assert manifold.inner(x, first, second) < 1.0 - 1e-6


def test_projection_is_idempotent(manifold, rng):
    x = manifold.random_point(rng)
    raw = ProductTangent(*(rng.standard_normal(slot.shape) for slot in manifold.zero_tangent().slots()))
    projected = manifold.project_tangent(x, raw)

    assert manifold.check_tangent(x, projected)
    assert ambient_difference(manifold.project_tangent(x, projected), projected) <= 1e-12


def test_metric_is_symmetric_and_positive(manifold, rng):
    x = manifold.random_point(rng)
    xi, eta = manifold.random_tangent(x, rng), manifold.random_tangent(x, rng)

    assert manifold.inner(x, xi, eta) == pytest.approx(manifold.inner(x, eta, xi), rel=1e-14)
    assert manifold.inner(x, xi, xi) > 0.0
    assert manifold.inner(x, manifold.zero_tangent(), manifold.zero_tangent()) == 0.0


def test_metric_scales_positive_factor():
    manifold = ProductManifold(2, 0, 1)
    x = ProductPoint(S=np.eye(2), Q=np.eye(2), V=np.zeros((2, 2)), a=np.array([2.0]), b=np.zeros(1))
    xi = ProductTangent(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)), np.array([3.0]), np.zeros(1))

    assert manifold.inner(x, xi, xi) == pytest.approx(9.0 / 4.0)
    assert manifold.ambient_inner(xi, xi) == pytest.approx(9.0)


def test_tangent_arithmetic(manifold, rng):
    x = manifold.random_point(rng)
    xi, eta = manifold.random_tangent(x, rng), manifold.random_tangent(x, rng)

    assert ambient_difference((xi + eta) - eta, xi) <= 1e-14
    assert ambient_difference(2.0 * xi, xi * 2.0) == 0.0
    assert ambient_difference(-xi, xi * -1.0) == 0.0
    assert manifold.zero_tangent().is_zero()
    assert not xi.is_zero()


# Retractions


@pytest.mark.parametrize("mode", RETRACTIONS)
def test_retraction_at_zero_is_identity(manifold, rng, mode):
    x = manifold.random_point(rng)
    assert ambient_difference(manifold.retract(x, manifold.zero_tangent(), mode), x) == 0.0


@pytest.mark.parametrize("mode", RETRACTIONS)
@pytest.mark.parametrize("h", [1e-3, 0.1, 1.0])
def test_retraction_stays_on_manifold(manifold, rng, mode, h):
    x = manifold.random_point(rng)
    xi = manifold.random_tangent(x, rng)
    assert manifold.check_point(manifold.retract(x, xi * h, mode))


@pytest.mark.parametrize("mode", RETRACTIONS)
def test_retraction_is_first_order(manifold, rng, mode):
    x = manifold.random_point(rng)
    xi = manifold.random_tangent(x, rng)

    errors = [ambient_difference(manifold.retract(x, xi * h, mode), first_order_model(x, xi, h)) for h in (1e-3, 1e-4)]
    assert np.log10(errors[0] / errors[1]) >= 1.9


@pytest.mark.parametrize("mode", RETRACTIONS)
def test_retraction_velocity_at_zero_is_the_tangent(manifold, rng, mode):
    h = 1e-5
    for _ in range(20):
        x = manifold.random_point(rng)
        xi = manifold.random_tangent(x, rng)

        ahead, behind = manifold.retract(x, xi * h, mode), manifold.retract(x, xi * -h, mode)
        velocity = ProductTangent(*((ahead_slot - behind_slot) / (2.0 * h) for ahead_slot, behind_slot in zip(slots(ahead), slots(behind))))
        assert ambient_difference(velocity, xi) <= 1e-7 * ambient_difference(xi, manifold.zero_tangent())


def test_retractions_agree_to_second_order(manifold, rng):
    x = manifold.random_point(rng)
    xi = manifold.random_tangent(x, rng)
    steps = np.logspace(-1, -3, 5)

    errors = [ambient_difference(manifold.retract(x, xi * h, "qr"), manifold.retract(x, xi * h, "exp")) for h in steps]
    slope = np.polyfit(np.log10(steps), np.log10(errors), 1)[0]
    assert slope >= 1.9


def test_exponential_retraction_turns_a_row_by_a_quarter():
    manifold = ProductManifold(3, 3, 0)
    x = ProductPoint(S=np.eye(3), Q=np.eye(3), V=np.zeros((3, 3)), a=np.zeros(0), b=np.zeros(0))
    S_step = np.zeros((3, 3))
    S_step[0, 1] = np.pi / 2.0
    xi = ProductTangent(S_step, np.zeros((3, 3)), np.zeros((3, 3)), np.zeros(0), np.zeros(0))

    z = manifold.retract(x, xi, "exp")
    numpy.testing.assert_allclose(z.S, [[0.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], atol=1e-14)
    numpy.testing.assert_array_equal(z.Q, np.eye(3))

def test_retraction_rejects_vanishing_row():
    manifold = ProductManifold(2, 2, 0)
    x = ProductPoint(S=np.eye(2), Q=np.eye(2), V=np.zeros((2, 2)), a=np.zeros(0), b=np.zeros(0))
    step = ProductTangent(np.array([[-1.0, 0.0], [0.0, 0.0]]), np.zeros((2, 2)), np.zeros((2, 2)), np.zeros(0), np.zeros(0))

    with pytest.raises(DegenerateStep):
        manifold.retract(x, step, "qr")


def test_unknown_modes_are_rejected(manifold, rng):
    x = manifold.random_point(rng)
    xi = manifold.random_tangent(x, rng)
    with pytest.raises(BadArguments):
        manifold.retract(x, xi, "cayley")
    with pytest.raises(BadArguments):
        manifold.transport(x, xi, xi, mode="schild")


# Vector transports


@pytest.mark.parametrize("mode", TRANSPORTS)
def test_transport_along_zero_step_is_identity(manifold, rng, mode):
    x = manifold.random_point(rng)
    xi = manifold.random_tangent(x, rng)
    assert ambient_difference(manifold.transport(x, manifold.zero_tangent(), xi, mode), xi) <= 1e-13


@pytest.mark.parametrize("mode", TRANSPORTS)
@pytest.mark.parametrize("retraction", RETRACTIONS)
def test_transport_lands_in_target_tangent_space(manifold, rng, mode, retraction):
    x = manifold.random_point(rng)
    theta, xi = manifold.random_tangent(x, rng) * 0.3, manifold.random_tangent(x, rng)
    z = manifold.retract(x, theta, retraction)

    assert manifold.check_tangent(z, manifold.transport(x, theta, xi, mode, retraction))


@pytest.mark.parametrize("mode", TRANSPORTS)
@pytest.mark.parametrize("retraction", RETRACTIONS)
def test_transport_is_linear(manifold, rng, mode, retraction):
    x = manifold.random_point(rng)
    theta = manifold.random_tangent(x, rng) * 0.3
    xi, eta = manifold.random_tangent(x, rng), manifold.random_tangent(x, rng)

    def carry(vector):
        return manifold.transport(x, theta, vector, mode, retraction)

    combined = carry(xi * 2.0 + eta * -0.5)
    assert ambient_difference(combined, carry(xi) * 2.0 + carry(eta) * -0.5) <= 1e-12


@pytest.mark.parametrize("retraction", RETRACTIONS)
def test_projection_transport_projects_onto_the_target(manifold, rng, retraction):
    x = manifold.random_point(rng)
    theta, xi = manifold.random_tangent(x, rng) * 0.3, manifold.random_tangent(x, rng)
    z = manifold.retract(x, theta, retraction)

    moved = manifold.transport(x, theta, xi, "projection", retraction)
    for moved_slot, projected_slot in zip(slots(moved), slots(manifold.project_tangent(z, xi))):
        numpy.testing.assert_array_equal(moved_slot, projected_slot)


def test_target_argument_skips_the_retraction(manifold, rng):
    x = manifold.random_point(rng)
    theta, xi = manifold.random_tangent(x, rng) * 0.3, manifold.random_tangent(x, rng)
    z = manifold.retract(x, theta, "qr")

    assert ambient_difference(manifold.transport(x, theta, xi, target=z), manifold.transport(x, theta, xi)) == 0.0


def test_parallel_transport_along_geodesics_is_isometric(manifold, rng):
    x = manifold.random_point(rng)
    theta = manifold.random_tangent(x, rng) * 0.5
    xi, eta = manifold.random_tangent(x, rng), manifold.random_tangent(x, rng)
    z = manifold.retract(x, theta, "exp")

    moved_xi = manifold.transport(x, theta, xi, "parallel", "exp")
    moved_eta = manifold.transport(x, theta, eta, "parallel", "exp")
    assert manifold.inner(z, moved_xi, moved_eta) == pytest.approx(manifold.inner(x, xi, eta), abs=1e-12)


def test_parallel_transport_of_the_velocity_is_the_geodesic_velocity(manifold, rng):
    x = manifold.random_point(rng)
    theta = manifold.random_tangent(x, rng) * 0.4
    h = 1e-6

    moved = manifold.transport(x, theta, theta, "parallel", "exp")
    ahead = manifold.retract(x, theta * (1.0 + h), "exp")
    behind = manifold.retract(x, theta * (1.0 - h), "exp")
    velocity = ProductTangent(*((ahead_slot - behind_slot) / (2.0 * h) for ahead_slot, behind_slot in zip(slots(ahead), slots(behind))))

    assert ambient_difference(moved, velocity) <= 1e-6


def test_parallel_transport_back_undoes_transport(manifold, rng):
    x = manifold.random_point(rng)
    theta, xi = manifold.random_tangent(x, rng) * 0.3, manifold.random_tangent(x, rng)
    z = manifold.retract(x, theta, "exp")

    moved = manifold.transport(x, theta, xi, "parallel", "exp")
    assert ambient_difference(manifold.transport_back(x, theta, moved, z, "parallel"), xi) <= 1e-10


def test_projection_transport_back_is_first_order(manifold, rng):
    x = manifold.random_point(rng)
    theta, xi = manifold.random_tangent(x, rng), manifold.random_tangent(x, rng)

    def round_trip_error(h):
        z = manifold.retract(x, theta * h, "qr")
        return ambient_difference(manifold.transport_back(x, theta * h, manifold.transport(x, theta * h, xi, target=z), z), xi)

    assert round_trip_error(1e-4) <= 1e-2 * round_trip_error(1e-2) + 1e-13


# Positive factor


def test_geodesic_distance_pos_properties(rng):
    a, b, c = (np.exp(rng.standard_normal(4)) for _ in range(3))

    assert geodesic_distance_pos(a, a) == 0.0
    assert geodesic_distance_pos(a, b) == pytest.approx(geodesic_distance_pos(b, a))
    assert geodesic_distance_pos(a, c) <= geodesic_distance_pos(a, b) + geodesic_distance_pos(b, c) + 1e-14


def test_positive_factor_retraction_follows_geodesics():
    manifold = ProductManifold(2, 0, 1)
    x = ProductPoint(S=np.eye(2), Q=np.eye(2), V=np.zeros((2, 2)), a=np.array([0.7]), b=np.zeros(1))
    xi = ProductTangent(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)), np.array([-0.9]), np.zeros(1))

    z = manifold.retract(x, xi, "qr")
    assert geodesic_distance_pos(x.a, z.a) == pytest.approx(manifold.norm(x, xi))
    assert z.a[0] > 0.0
