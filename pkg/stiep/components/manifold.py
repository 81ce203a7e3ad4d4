"""This module contains the geometry of the product manifold OB(n) × O(n) × 𝒱_t × ℝ₊ᵗ × ℝᵗ.

Points and tangent vectors are five-slot values (S, Q, V, a, b). The oblique factor keeps the rows of S on
the unit sphere, the orthogonal factor keeps Q orthogonal, V lives in the masked linear space 𝒱_t, a carries
the scaled metric ⟨ξ, η⟩_a = ξη/a² and b is Euclidean.
"""

# Importing Python libraries
from dataclasses import dataclass, fields
import numpy as np

# Importing project components
from stiep.components.matrix_kernel import orthogonality_error, qf, skew_expm
from stiep.components.spectra import Spectrum, build_mask
from stiep.errors import BadArguments, DegenerateStep, SingularInput

RETRACTION_MODES = ("qr", "exp")
TRANSPORT_MODES = ("projection", "parallel")

# Normalization retraction refuses rows of S + Ξ shorter than this
DEGENERATE_ROW_NORM = 1e-14

# Tangent and point invariants are checked to TANGENT_TOLERANCE·(1+‖·‖)
TANGENT_TOLERANCE = 1e-12


def skew(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M - M.T)


# ============================================================================
# POINTS AND TANGENT VECTORS
# ============================================================================


@dataclass(frozen=True, eq=False)
class ProductPoint:
    """Point x = (S, Q, V, a, b) of the product manifold."""

    S: np.ndarray
    Q: np.ndarray
    V: np.ndarray
    a: np.ndarray
    b: np.ndarray

    @property
    def n(self) -> int:
        return self.S.shape[0]

    @property
    def t(self) -> int:
        return self.a.size

    def ambient_norm(self) -> float:
        """Frobenius norm of the point viewed as one long vector."""
        return float(np.sqrt(sum(np.sum(getattr(self, slot.name) ** 2) for slot in fields(self))))


@dataclass(frozen=True, eq=False)
class ProductTangent:
    """Tangent vector (or raw ambient perturbation) with the same five slots as a point."""

    S: np.ndarray
    Q: np.ndarray
    V: np.ndarray
    a: np.ndarray
    b: np.ndarray

    @classmethod
    def zeros(cls, n: int, t: int) -> "ProductTangent":
        return cls(np.zeros((n, n)), np.zeros((n, n)), np.zeros((n, n)), np.zeros(t), np.zeros(t))

    def slots(self) -> tuple:
        return (self.S, self.Q, self.V, self.a, self.b)

    def _combine(self, other: "ProductTangent", operation) -> "ProductTangent":
        return ProductTangent(*(operation(mine, theirs) for mine, theirs in zip(self.slots(), other.slots())))

    def __add__(self, other: "ProductTangent") -> "ProductTangent":
        return self._combine(other, np.add)

    def __sub__(self, other: "ProductTangent") -> "ProductTangent":
        return self._combine(other, np.subtract)

    def __mul__(self, factor: float) -> "ProductTangent":
        return ProductTangent(*(factor * slot for slot in self.slots()))

    __rmul__ = __mul__

    def __neg__(self) -> "ProductTangent":
        return self * -1.0

    def is_zero(self) -> bool:
        return not any(np.any(slot) for slot in self.slots())


def geodesic_distance_pos(a, a_other) -> float:
    """Geodesic distance ‖log a − log ã‖₂ on the positive orthant with metric ξη/a²."""
    return float(np.linalg.norm(np.log(np.asarray(a, dtype=float)) - np.log(np.asarray(a_other, dtype=float))))


# ============================================================================
# ROW-WISE SPHERE HELPERS
# ============================================================================


def _sphere_exp(S: np.ndarray, Xi: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(Xi, axis=1)
    moving = norms > 0.0
    result = S.copy()
    angle = norms[moving][:, np.newaxis]
    result[moving] = np.cos(angle) * S[moving] + np.sin(angle) / angle * Xi[moving]
    return result


def _sphere_parallel(S: np.ndarray, Theta: np.ndarray, Xi: np.ndarray) -> np.ndarray:
    """Row-wise (I + (cos‖θ‖−1) θθᵀ/‖θ‖² − sin‖θ‖ sθᵀ/‖θ‖) ξ; rows with θ = 0 pass through."""
    norms = np.linalg.norm(Theta, axis=1)
    moving = norms > 0.0
    result = Xi.copy()

    angle = norms[moving]
    direction = Theta[moving] / angle[:, np.newaxis]
    along = np.sum(direction * Xi[moving], axis=1)
    result[moving] = Xi[moving] + ((np.cos(angle) - 1.0) * along)[:, np.newaxis] * direction - (np.sin(angle) * along)[:, np.newaxis] * S[moving]
    return result


# ============================================================================
# MANIFOLD
# ============================================================================


class ProductManifold:
    """Geometry of OB(n) × O(n) × 𝒱_t × ℝ₊ᵗ × ℝᵗ for a fixed (s, t) split."""

    def __init__(self, n: int, s: int, t: int):
        self.n = n
        self.s = s
        self.t = t
        self.mask = build_mask(n, s, t)

    @classmethod
    def for_spectrum(cls, spectrum: Spectrum) -> "ProductManifold":
        return cls(spectrum.n, spectrum.s, spectrum.t)

    def __repr__(self) -> str:
        return f"ProductManifold(n={self.n}, s={self.s}, t={self.t})"

    def zero_tangent(self) -> ProductTangent:
        return ProductTangent.zeros(self.n, self.t)

    # Projections and metric

    def project_tangent(self, x: ProductPoint, E: ProductTangent) -> ProductTangent:
        """Orthogonal projection of a raw five-slot perturbation onto T_x."""
        radial = np.sum(x.S * E.S, axis=1)
        return ProductTangent(
            S=E.S - radial[:, np.newaxis] * x.S,
            Q=x.Q @ skew(x.Q.T @ E.Q),
            V=self.mask * E.V,
            a=np.array(E.a, dtype=float),
            b=np.array(E.b, dtype=float),
        )

    def inner(self, x: ProductPoint, xi: ProductTangent, eta: ProductTangent) -> float:
        """Riemannian metric: Euclidean traces on S, Q, V, b and ξη/a² on the positive factor."""
        return float(np.vdot(xi.S, eta.S) + np.vdot(xi.Q, eta.Q) + np.vdot(xi.V, eta.V) + np.sum(xi.a * eta.a / x.a**2) + np.vdot(xi.b, eta.b))

    def ambient_inner(self, xi: ProductTangent, eta: ProductTangent) -> float:
        """Plain Euclidean inner product of all slots (the a-slot unscaled)."""
        return float(sum(np.vdot(mine, theirs) for mine, theirs in zip(xi.slots(), eta.slots())))

    def norm(self, x: ProductPoint, xi: ProductTangent) -> float:
        return float(np.sqrt(max(self.inner(x, xi, xi), 0.0)))

    # Retractions

    def retract(self, x: ProductPoint, xi: ProductTangent, mode: str = "qr") -> ProductPoint:
        """Moves from x along the tangent vector ξ.

        Args:
            x (ProductPoint): Base point.
            xi (ProductTangent): Tangent vector at x.
            mode (str): "qr" (row normalization on OB(n), qf on O(n)) or "exp" (exponential maps).

        Returns:
            ProductPoint: The retracted point; V and b move linearly, a moves as a·e^{ξ/a} in both modes.

        Raises:
            DegenerateStep: If a row of S + Ξ vanishes or Q + Ξ is singular.
        """
        if mode not in RETRACTION_MODES:
            raise BadArguments(f"unknown retraction mode '{mode}'")

        if not np.any(xi.S):
            S = x.S
        elif mode == "qr":
            rows = x.S + xi.S
            norms = np.linalg.norm(rows, axis=1)
            if np.any(norms < DEGENERATE_ROW_NORM):
                raise DegenerateStep(f"normalization retraction hit a zero row (min norm {norms.min():.3e})")
            S = rows / norms[:, np.newaxis]
        else:
            S = _sphere_exp(x.S, xi.S)

        if not np.any(xi.Q):
            Q = x.Q
        elif mode == "qr":
            try:
                Q = qf(x.Q + xi.Q)
            except SingularInput as error:
                raise DegenerateStep(str(error)) from error
        else:
            Q = x.Q @ skew_expm(skew(x.Q.T @ xi.Q))

        return ProductPoint(S=S, Q=Q, V=x.V + xi.V, a=x.a * np.exp(xi.a / x.a), b=x.b + xi.b)

    # Vector transports

    def _parallel(self, x: ProductPoint, theta: ProductTangent, xi: ProductTangent) -> ProductTangent:
        half_step = skew_expm(0.5 * skew(x.Q.T @ theta.Q))
        return ProductTangent(
            S=_sphere_parallel(x.S, theta.S, xi.S),
            Q=x.Q @ half_step @ (x.Q.T @ xi.Q) @ half_step,
            V=np.array(xi.V, dtype=float),
            a=np.exp(theta.a / x.a) * xi.a,
            b=np.array(xi.b, dtype=float),
        )

    def transport(
        self,
        x: ProductPoint,
        theta: ProductTangent,
        xi: ProductTangent,
        mode: str = "projection",
        retraction: str = "qr",
        target: ProductPoint = None,
    ) -> ProductTangent:
        """Carries ξ ∈ T_x to T_z with z = retract(x, θ).

        Projection mode projects ξ onto T_z (identity on a and b). Parallel mode applies the geodesic formulas
        of each factor; it lands exactly in T_z for the exponential retraction and is projected onto T_z for
        the normalization retraction. Passing the already computed z as target skips the retraction.
        """
        if mode not in TRANSPORT_MODES:
            raise BadArguments(f"unknown transport mode '{mode}'")

        if mode == "parallel" and theta.is_zero():
            return xi

        z = target if target is not None else self.retract(x, theta, retraction)
        if mode == "projection":
            return self.project_tangent(z, xi)

        moved = self._parallel(x, theta, xi)
        return moved if retraction == "exp" else self.project_tangent(z, moved)

    def transport_back(
        self,
        x: ProductPoint,
        theta: ProductTangent,
        xi_far: ProductTangent,
        z: ProductPoint,
        mode: str = "projection",
    ) -> ProductTangent:
        """Carries a tangent vector at z = retract(x, θ) back to T_x."""
        if mode == "projection":
            return self.project_tangent(x, xi_far)

        # Reverse the geodesic: start at z with the negated transported velocity
        backwards = -self._parallel(x, theta, theta)
        return self.project_tangent(x, self._parallel(z, backwards, xi_far))

    # Sampling and validation

    def random_point(self, rng: np.random.Generator) -> ProductPoint:
        S = rng.standard_normal((self.n, self.n))
        return ProductPoint(
            S=S / np.linalg.norm(S, axis=1)[:, np.newaxis],
            Q=qf(rng.standard_normal((self.n, self.n))),
            V=self.mask * rng.standard_normal((self.n, self.n)),
            a=np.exp(0.3 * rng.standard_normal(self.t)),
            b=0.5 * rng.standard_normal(self.t),
        )

    def random_tangent(self, x: ProductPoint, rng: np.random.Generator) -> ProductTangent:
        """Gaussian perturbation projected onto T_x and normalized to unit length in the x-metric."""
        raw = ProductTangent(
            S=rng.standard_normal((self.n, self.n)),
            Q=rng.standard_normal((self.n, self.n)),
            V=rng.standard_normal((self.n, self.n)),
            a=rng.standard_normal(self.t),
            b=rng.standard_normal(self.t),
        )
        tangent = self.project_tangent(x, raw)
        return tangent * (1.0 / self.norm(x, tangent))

    def check_point(self, x: ProductPoint) -> bool:
        if x.S.shape != (self.n, self.n) or x.Q.shape != (self.n, self.n) or x.V.shape != (self.n, self.n):
            return False
        if x.a.shape != (self.t,) or x.b.shape != (self.t,):
            return False
        return bool(
            np.max(np.abs(np.sum(x.S**2, axis=1) - 1.0), initial=0.0) <= TANGENT_TOLERANCE
            and orthogonality_error(x.Q) <= TANGENT_TOLERANCE * self.n
            and not np.any(x.V * (1.0 - self.mask))
            and np.all(x.a > 0.0)
        )

    def check_tangent(self, x: ProductPoint, xi: ProductTangent) -> bool:
        radial = np.abs(np.sum(x.S * xi.S, axis=1))
        asymmetry = np.linalg.norm(x.Q.T @ xi.Q + xi.Q.T @ x.Q)
        return bool(
            np.max(radial, initial=0.0) <= TANGENT_TOLERANCE * (1.0 + np.linalg.norm(xi.S))
            and asymmetry <= TANGENT_TOLERANCE * (1.0 + np.linalg.norm(xi.Q))
            and not np.any(xi.V * (1.0 - self.mask))
        )
