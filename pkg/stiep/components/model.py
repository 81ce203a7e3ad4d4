"""This module contains the objective functionals and their first- and second-order information.

F(S, Q, V, a, b) = ½‖S∘S − Q T_ab (D(Λ) + V) T_ab⁻¹ Qᵀ‖²_F. The isospectral model keeps T_ab = I (a and b frozen
at 1 and 0), the SL(2)-extended model lets every conjugate-pair block be conjugated by [[α, β], [0, 1/α]].
"""

# Importing Python libraries
from dataclasses import dataclass
from enum import Enum
import numpy as np

# Importing project components
from stiep.components.manifold import ProductManifold, ProductPoint, ProductTangent
from stiep.components.spectra import Spectrum, build_D
from stiep.errors import BadArguments, ZeroDirection

# Directions shorter than this (x-metric) are rejected by the finite-difference operators
ZERO_DIRECTION_NORM = 1e-12

# Relative step of the Hessian-vector finite difference
HESSIAN_STEP = 1e-4

# Relative step of the Gauss-Newton central difference
GAUSS_NEWTON_STEP = 1e-6


class ModelKind(Enum):
    ISOSPECTRAL = "I"
    SL2EXTENDED = "II"

    @classmethod
    def parse(cls, label) -> "ModelKind":
        """Accepts a ModelKind, "I"/"II", "1"/"2" or the member name."""
        if isinstance(label, cls):
            return label
        text = str(label).strip().upper()
        aliases = {"I": cls.ISOSPECTRAL, "1": cls.ISOSPECTRAL, "II": cls.SL2EXTENDED, "2": cls.SL2EXTENDED}
        if text in aliases:
            return aliases[text]
        if text in cls.__members__:
            return cls[text]
        raise BadArguments(f"unknown model '{label}' (expected I or II)")


@dataclass(frozen=True, eq=False)
class EvalCache:
    """Intermediate matrices of one evaluation; valid for that point only."""

    G: np.ndarray
    H: np.ndarray
    T: np.ndarray
    T_inv: np.ndarray


def build_tab(a, b, s: int) -> tuple:
    """Builds T_ab = blockdiag(I_s, T_{a₁b₁}, …) and its inverse blockdiag(I_s, T_{1/a₁,−b₁}, …).

    Args:
        a (array_like): t positive block scalings.
        b (array_like): t block shears.
        s (int): Size of the leading identity block.

    Returns:
        tuple: (T, T_inv).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = s + 2 * a.size
    first = s + 2 * np.arange(a.size)
    second = first + 1

    T = np.eye(n)
    T[first, first] = a
    T[first, second] = b
    T[second, second] = 1.0 / a

    T_inv = np.eye(n)
    T_inv[first, first] = 1.0 / a
    T_inv[first, second] = -b
    T_inv[second, second] = a
    return T, T_inv


def _model_tab(x: ProductPoint, spectrum: Spectrum, kind: ModelKind) -> tuple:
    if kind is ModelKind.ISOSPECTRAL:
        return build_tab(np.ones(spectrum.t), np.zeros(spectrum.t), spectrum.s)
    return build_tab(x.a, x.b, spectrum.s)


def eval_objective(x: ProductPoint, spectrum: Spectrum, kind: ModelKind = ModelKind.SL2EXTENDED, D: np.ndarray = None) -> tuple:
    """Evaluates F at x.

    Args:
        x (ProductPoint): Point whose V is masked for the spectrum's (s, t).
        spectrum (Spectrum): Prescribed spectrum.
        kind (ModelKind): Objective variant.
        D (np.ndarray): Precomputed D(Λ), built on demand when omitted.

    Returns:
        tuple: (value, EvalCache).
    """
    if D is None:
        D = build_D(spectrum)
    T, T_inv = _model_tab(x, spectrum, kind)
    G = x.Q @ (T @ (D + x.V) @ T_inv) @ x.Q.T
    H = x.S * x.S - G
    return 0.5 * float(np.sum(H * H)), EvalCache(G=G, H=H, T=T, T_inv=T_inv)


def residual(value: float) -> float:
    """Frobenius residual ‖S∘S − G‖_F = sqrt(2F)."""
    return float(np.sqrt(2.0 * max(value, 0.0)))


def residual_map(x: ProductPoint, spectrum: Spectrum, kind: ModelKind = ModelKind.SL2EXTENDED, D: np.ndarray = None) -> np.ndarray:
    """Returns f(x) = S∘S − G, so that F = ½‖f‖²_F."""
    return eval_objective(x, spectrum, kind, D)[1].H


def grad_objective(
    x: ProductPoint,
    spectrum: Spectrum,
    kind: ModelKind,
    cache: EvalCache,
    manifold: ProductManifold = None,
) -> ProductTangent:
    """Riemannian gradient of F at x from the cache of eval_objective at the same point.

    The S and Q slots project the Euclidean gradients 2S∘H and −(HᵀG + HGᵀ)Q, the V slot masks −Tᵀ Qᵀ H Q T⁻ᵀ.
    With A = Qᵀ(GᵀH − HGᵀ)Q T⁻ᵀ and p = s + 2k the pair slots read a_k² A_pp − A_{p+1,p+1} and A_{p,p+1};
    the a-slot already carries the a² factor of the scaled metric. The isospectral model zeroes both.
    """
    if manifold is None:
        manifold = ProductManifold.for_spectrum(spectrum)

    H, G, T, T_inv = cache.H, cache.G, cache.T, cache.T_inv
    Q = x.Q
    projected_H = Q.T @ H @ Q

    euclidean = ProductTangent(
        S=2.0 * x.S * H,
        Q=-(H.T @ G + H @ G.T) @ Q,
        V=-(T.T @ projected_H @ T_inv.T),
        a=np.zeros(spectrum.t),
        b=np.zeros(spectrum.t),
    )

    if kind is ModelKind.SL2EXTENDED and spectrum.t > 0:
        A = Q.T @ (G.T @ H - H @ G.T) @ Q @ T_inv.T
        first = spectrum.s + 2 * np.arange(spectrum.t)
        euclidean = ProductTangent(
            S=euclidean.S,
            Q=euclidean.Q,
            V=euclidean.V,
            a=x.a**2 * A[first, first] - A[first + 1, first + 1],
            b=A[first, first + 1],
        )

    return manifold.project_tangent(x, euclidean)


def hess_vec_approx(
    x: ProductPoint,
    xi: ProductTangent,
    spectrum: Spectrum,
    kind: ModelKind,
    h: float = None,
    retraction: str = "qr",
    transport: str = "projection",
    manifold: ProductManifold = None,
    D: np.ndarray = None,
    gradient: ProductTangent = None,
) -> ProductTangent:
    """Finite-difference Hessian-vector product ‖ξ‖·(𝒯⁻¹∇F(R_x(hξ/‖ξ‖)) − ∇F(x))/h.

    The far gradient is carried back to T_x with the configured transport before the difference.
    The default h is 1e-4·(1 + ambient norm of x).

    Raises:
        ZeroDirection: If ‖ξ‖_x ≤ 1e-12.
    """
    if manifold is None:
        manifold = ProductManifold.for_spectrum(spectrum)
    if D is None:
        D = build_D(spectrum)

    length = manifold.norm(x, xi)
    if length <= ZERO_DIRECTION_NORM:
        raise ZeroDirection(f"Hessian-vector product along a vanishing direction (‖ξ‖ = {length:.3e})")
    if h is None:
        h = HESSIAN_STEP * (1.0 + x.ambient_norm())
    if h <= 0.0:
        raise BadArguments(f"finite-difference step must be positive, got {h}")

    if gradient is None:
        _, cache = eval_objective(x, spectrum, kind, D)
        gradient = grad_objective(x, spectrum, kind, cache, manifold)

    theta = xi * (h / length)
    z = manifold.retract(x, theta, retraction)
    _, far_cache = eval_objective(z, spectrum, kind, D)
    far_gradient = grad_objective(z, spectrum, kind, far_cache, manifold)

    carried = manifold.transport_back(x, theta, far_gradient, z, mode=transport)
    return (carried - gradient) * (length / h)


def gauss_newton_denominator(
    x: ProductPoint,
    xi: ProductTangent,
    spectrum: Spectrum,
    kind: ModelKind,
    retraction: str = "qr",
    manifold: ProductManifold = None,
    D: np.ndarray = None,
) -> float:
    """‖Df(x)[ξ]‖²_F by a central difference of the residual map along the retraction curve.

    Raises:
        ZeroDirection: If ‖ξ‖_x ≤ 1e-12.
    """
    if manifold is None:
        manifold = ProductManifold.for_spectrum(spectrum)
    if D is None:
        D = build_D(spectrum)

    length = manifold.norm(x, xi)
    if length <= ZERO_DIRECTION_NORM:
        raise ZeroDirection(f"Gauss-Newton denominator along a vanishing direction (‖ξ‖ = {length:.3e})")

    step = GAUSS_NEWTON_STEP * (1.0 + x.ambient_norm()) / length
    forward = residual_map(manifold.retract(x, xi * step, retraction), spectrum, kind, D)
    backward = residual_map(manifold.retract(x, xi * -step, retraction), spectrum, kind, D)
    derivative = (forward - backward) / (2.0 * step)
    return float(np.sum(derivative * derivative))


def recover_stochastic(x: ProductPoint) -> np.ndarray:
    """Returns the row-stochastic matrix S∘S."""
    return x.S * x.S


def level_bound_diagnostics(x: ProductPoint) -> dict:
    """Quantities that stay bounded on the sublevel sets of F: max a, max |b|, 1/min a and ‖V‖_F."""
    return {
        "max_a": float(np.max(x.a, initial=0.0)),
        "max_abs_b": float(np.max(np.abs(x.b), initial=0.0)),
        "inverse_min_a": float(1.0 / np.min(x.a, initial=np.inf)),
        "v_norm": float(np.linalg.norm(x.V)),
    }
