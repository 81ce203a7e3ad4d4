"""This module contains the construction, sampling and comparison of self-conjugate spectra."""

# Importing Python libraries
from dataclasses import dataclass
import numpy as np
from scipy import linalg

# Importing project components
from stiep.components.matrix_kernel import PAIRING_TOLERANCE, as_square, eigenvalues, snap_real
from stiep.errors import BadArguments, DimensionMismatch, EvenDimension, InvalidSpectrum, LengthMismatch

# Conjugate partners found in a matrix spectrum must agree to this relative tolerance
CONJUGATE_MATCH_TOLERANCE = 1e-8

# Rows of the uniform draw whose sum falls below this are re-drawn
ROW_SUM_FLOOR = 1e-12


# ============================================================================
# SPECTRUM TYPE
# ============================================================================


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Self-conjugate spectrum stored as s real values and t pair representatives with positive imaginary part.

    The full list is (λ₁, …, λ_s, μ₁, conj μ₁, …, μ_t, conj μ_t), which fixes the block order of D(Λ).
    """

    reals: np.ndarray
    pairs: np.ndarray

    def __post_init__(self):
        reals = np.asarray(self.reals, dtype=float).reshape(-1).copy()
        pairs = np.asarray(self.pairs, dtype=complex).reshape(-1).copy()

        if not (np.all(np.isfinite(reals)) and np.all(np.isfinite(pairs))):
            raise InvalidSpectrum("spectrum values must be finite")
        if np.any(pairs.imag <= 0.0):
            raise InvalidSpectrum("every pair representative needs a strictly positive imaginary part")

        reals.setflags(write=False)
        pairs.setflags(write=False)
        object.__setattr__(self, "reals", reals)
        object.__setattr__(self, "pairs", pairs)

    @property
    def s(self) -> int:
        return self.reals.size

    @property
    def t(self) -> int:
        return self.pairs.size

    @property
    def n(self) -> int:
        return self.s + 2 * self.t

    def full(self) -> np.ndarray:
        """Expands the spectrum into its n complex values."""
        conjugated = np.column_stack([self.pairs, np.conj(self.pairs)]).reshape(-1)
        return np.concatenate([self.reals.astype(complex), conjugated])

    @classmethod
    def ordered(cls, reals, pairs) -> "Spectrum":
        """Builds a spectrum in canonical order: reals descending, pairs by descending real then imaginary part."""
        reals = np.sort(np.asarray(reals, dtype=float).reshape(-1))[::-1]
        pairs = np.asarray(pairs, dtype=complex).reshape(-1)
        order = np.lexsort((-pairs.imag, -pairs.real))
        return cls(reals, pairs[order])

    @classmethod
    def from_values(cls, values) -> "Spectrum":
        """Splits a self-conjugate list of complex values into a canonical spectrum.

        Raises:
            InvalidSpectrum: If the non-real values do not come in conjugate pairs.
        """
        values = snap_real(np.asarray(values, dtype=complex).reshape(-1))
        upper = values[values.imag > 0.0]
        lower = values[values.imag < 0.0]

        if upper.size != lower.size:
            raise InvalidSpectrum(f"values are not self-conjugate ({upper.size} with Im > 0, {lower.size} with Im < 0)")
        if upper.size and greedy_distance(upper, np.conj(lower)) > CONJUGATE_MATCH_TOLERANCE * (1.0 + np.abs(upper).max()):
            raise InvalidSpectrum("values are not self-conjugate: conjugate partners do not match")

        return cls.ordered(values[values.imag == 0.0].real, upper)

    def to_dict(self) -> dict:
        return {
            "real": [float(value) for value in self.reals],
            "pairs": [[float(value.real), float(value.imag)] for value in self.pairs],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Spectrum":
        """Reads the spectrum file layout {"real": [...], "pairs": [[re, im], ...]}.

        Raises:
            InvalidSpectrum: If keys are missing, entries are malformed or a pair has Im ≤ 0.
        """
        if not isinstance(data, dict) or "real" not in data or "pairs" not in data:
            raise InvalidSpectrum('spectrum data needs the keys "real" and "pairs"')
        try:
            reals = np.array([float(value) for value in data["real"]], dtype=float)
            pairs = np.array([complex(float(re), float(im)) for re, im in data["pairs"]], dtype=complex)
        except (TypeError, ValueError) as error:
            raise InvalidSpectrum(f"malformed spectrum entries: {error}") from error
        if reals.size + 2 * pairs.size == 0:
            raise InvalidSpectrum("spectrum is empty")
        return cls(reals, pairs)

    def __repr__(self) -> str:
        return f"Spectrum(n={self.n}, s={self.s}, t={self.t})"


# ============================================================================
# BLOCK FORM AND MASK
# ============================================================================


def pair_block(value: complex) -> np.ndarray:
    """Returns the real 2x2 block [[Re λ, Im λ], [−Im λ, Re λ]]."""
    return np.array([[value.real, value.imag], [-value.imag, value.real]])


def build_D(spectrum: Spectrum) -> np.ndarray:
    """Builds D(Λ) = blockdiag(λ₁, …, λ_s, λ₁^[2], …, λ_t^[2])."""
    s = spectrum.s
    D = np.zeros((spectrum.n, spectrum.n))
    D[np.arange(s), np.arange(s)] = spectrum.reals
    for k, value in enumerate(spectrum.pairs):
        i = s + 2 * k
        D[i : i + 2, i : i + 2] = pair_block(value)
    return D


def build_mask(n: int, s: int, t: int) -> np.ndarray:
    """Builds the sparsity pattern W of 𝒱_t.

    Args:
        n (int): Matrix size.
        s (int): Number of real eigenvalues.
        t (int): Number of conjugate pairs.

    Returns:
        np.ndarray: 0/1 matrix, ones on the strict upper triangle except at the (s+2k, s+2k+1) positions of each pair block.

    Raises:
        DimensionMismatch: If n ≠ s + 2t or a count is negative.
    """
    if min(n, s, t) < 0 or n != s + 2 * t:
        raise DimensionMismatch(f"mask needs n = s + 2t, got n={n}, s={s}, t={t}")

    W = np.triu(np.ones((n, n)), k=1)
    for k in range(t):
        W[s + 2 * k, s + 2 * k + 1] = 0.0
    return W


# ============================================================================
# 3x3 THEORY AND CIRCULANT CONSTRUCTION
# ============================================================================


def theta3_contains(value: complex) -> bool:
    """Tells whether λ is an eigenvalue of some 3x3 stochastic matrix (triangle conv{1, θ, θ²} or the real segment [−1, 1])."""
    value = complex(value)
    re, im = value.real, value.imag
    if im == 0.0 and -1.0 <= re <= 1.0:
        return True
    return -0.5 <= re <= 1.0 and (re - 1.0) ** 2 >= 3.0 * im**2


def _split_perron_root(spectrum: Spectrum) -> np.ndarray:
    """Returns the reals other than one copy of the Perron root 1, or raises if 1 is missing."""
    if spectrum.s == 0:
        raise InvalidSpectrum("spectrum has no real eigenvalue, the Perron root 1 is missing")
    index = int(np.argmin(np.abs(spectrum.reals - 1.0)))
    if abs(spectrum.reals[index] - 1.0) > PAIRING_TOLERANCE:
        raise InvalidSpectrum("spectrum does not contain the Perron root 1")
    return np.delete(spectrum.reals, index)


def stochastic_spectrum_3x3(spectrum: Spectrum) -> bool:
    """Decides whether a 3-element spectrum is realized by some 3x3 stochastic matrix."""
    if spectrum.n != 3:
        raise BadArguments(f"the 3x3 characterization needs n = 3, got n = {spectrum.n}")
    if spectrum.s == 0 or np.min(np.abs(spectrum.reals - 1.0)) > PAIRING_TOLERANCE:
        return False

    if spectrum.t == 1:
        return theta3_contains(spectrum.pairs[0])

    second, third = _split_perron_root(spectrum)
    return bool(-1.0 <= second <= 1.0 and -1.0 <= third <= 1.0 and second + third >= -1.0)


def shift_matrix(n: int) -> np.ndarray:
    """Returns the cyclic shift P_n = [[0, 1], [I_{n−1}, 0]], so (P_n v)_i = v_{i−1}."""
    return np.roll(np.eye(n), 1, axis=0)


def fourier_matrix(n: int) -> np.ndarray:
    """Returns F_n = (e^{−2πi jk/n})_{j,k}."""
    return linalg.dft(n)


def fourier_apply(v, inverse: bool = False) -> np.ndarray:
    """Applies F_n (or F_n⁻¹ = conj(F_n)/n) to a vector."""
    v = np.asarray(v, dtype=complex)
    return np.fft.ifft(v) if inverse else np.fft.fft(v)


def circulant_from_spectrum(spectrum: Spectrum) -> tuple:
    """Builds a real circulant matrix with unit row sums and prescribed spectrum.

    The spectrum vector is arranged as (1, λ₁, …, λ_m, conj λ_m, …, conj λ₁) and b = F_n⁻¹Λ becomes the
    first row of the circulant. Real eigenvalues other than the Perron root must occur twice.

    Args:
        spectrum (Spectrum): Spectrum of odd size containing 1.

    Returns:
        tuple: (B, is_nonnegative) where is_nonnegative tells whether B is entrywise ≥ −1e-12, i.e. stochastic.

    Raises:
        EvenDimension: If n is even.
        InvalidSpectrum: If 1 is missing or the remaining reals cannot be paired.
    """
    if spectrum.n % 2 == 0:
        raise EvenDimension(f"circulant construction needs odd n, got n = {spectrum.n}")

    others = np.sort(_split_perron_root(spectrum))
    if not np.allclose(others[0::2], others[1::2], rtol=0.0, atol=PAIRING_TOLERANCE):
        raise InvalidSpectrum("real eigenvalues other than 1 must come in equal pairs for a real circulant")

    halves = np.concatenate([others[0::2].astype(complex), spectrum.pairs])
    vector = np.concatenate([[1.0 + 0.0j], halves, np.conj(halves[::-1])])
    coefficients = fourier_apply(vector, inverse=True)

    B = linalg.circulant(coefficients.real).T
    return B, bool(B.min() >= -1e-12)


def circulant_isospectral_basis(spectrum: Spectrum) -> np.ndarray:
    """Orthogonal Q with Qᵀ B Q = D(Λ) for the 3x3 circulant B of a spectrum (1, λ, conj λ).

    The first column is 1/√3·(1, 1, 1); the other two span the plane where the cyclic shift acts as a rotation.
    """
    if spectrum.n != 3 or spectrum.t != 1:
        raise BadArguments("the circulant basis is defined for n = 3 with one conjugate pair")

    B, _ = circulant_from_spectrum(spectrum)
    q = np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0)
    Q = np.column_stack(
        [
            np.full(3, 1.0 / np.sqrt(3.0)),
            q,
            np.array([q[2] - q[1], q[0] - q[2], q[1] - q[0]]) / np.sqrt(3.0),
        ]
    )

    # Orientation of the plane decides the sign of the off-diagonal pair entries
    if (Q.T @ B @ Q)[1, 2] * spectrum.pairs[0].imag < 0.0:
        Q[:, 2] = -Q[:, 2]
    return Q


def trace_zero_bistochastic(a: float) -> np.ndarray:
    """Returns the trace-zero bistochastic 3x3 matrix [[0, a, 1−a], [1−a, 0, a], [a, 1−a, 0]]; det = 1 − 3a + 3a²."""
    if not 0.0 <= a <= 1.0:
        raise BadArguments(f"family parameter must lie in [0, 1], got {a}")
    return np.array([[0.0, a, 1.0 - a], [1.0 - a, 0.0, a], [a, 1.0 - a, 0.0]])


# ============================================================================
# SAMPLING
# ============================================================================


def sample_stochastic(n: int, rng: np.random.Generator) -> np.ndarray:
    """Draws uniform(0,1) entries and normalizes every row to sum one."""
    if n < 1:
        raise BadArguments(f"matrix size must be positive, got {n}")

    raw = rng.random((n, n))
    sums = raw.sum(axis=1)
    while np.any(sums < ROW_SUM_FLOOR):
        degenerate = sums < ROW_SUM_FLOOR
        raw[degenerate] = rng.random((int(degenerate.sum()), n))
        sums = raw.sum(axis=1)
    return raw / sums[:, np.newaxis]


def spectrum_of_matrix(A) -> Spectrum:
    """Computes the canonical spectrum of a real square matrix."""
    return Spectrum.from_values(eigenvalues(as_square(A)))


def sample_disk_spectrum(n: int, t: int, rng: np.random.Generator) -> Spectrum:
    """Samples a spectrum (1, …) whose other values lie in the closed disk of radius 1/(2n).

    The s−1 further reals are uniform on [−1/(2n), 1/(2n)]; the t pair representatives are uniform on the
    upper half of the disk via a normalized Gaussian direction and a √u radius.

    Raises:
        BadArguments: Unless n ≥ 3 and 1 ≤ t ≤ ⌊(n−1)/2⌋.
    """
    if n < 3 or t < 1 or t > (n - 1) // 2:
        raise BadArguments(f"disk sampling needs n ≥ 3 and 1 ≤ t ≤ {(n - 1) // 2}, got n={n}, t={t}")

    radius = 1.0 / (2.0 * n)
    reals = np.concatenate([[1.0], rng.uniform(-radius, radius, size=n - 2 * t - 1)])

    directions = rng.standard_normal((t, 2))
    uniforms = rng.random(t)
    redraw = (directions[:, 1] == 0.0) | (uniforms == 0.0)
    while np.any(redraw):
        count = int(redraw.sum())
        directions[redraw] = rng.standard_normal((count, 2))
        uniforms[redraw] = rng.random(count)
        redraw = (directions[:, 1] == 0.0) | (uniforms == 0.0)

    scale = np.sqrt(uniforms) / np.hypot(directions[:, 0], directions[:, 1]) * radius
    pairs = (directions[:, 0] + 1j * np.abs(directions[:, 1])) * scale
    return Spectrum.ordered(reals, pairs)


# ============================================================================
# DISTANCE
# ============================================================================


def greedy_distance(first, second) -> float:
    """Greedy distance of two eigenvalue multisets.

    Repeatedly removes the globally closest cross pair and returns the largest removed distance.

    Raises:
        LengthMismatch: If the two lists differ in length.
    """
    first = np.asarray(first, dtype=complex).reshape(-1)
    second = np.asarray(second, dtype=complex).reshape(-1)
    if first.size != second.size:
        raise LengthMismatch(f"cannot compare {first.size} with {second.size} eigenvalues")

    n = first.size
    if n == 0:
        return 0.0

    distances = np.abs(first[:, np.newaxis] - second[np.newaxis, :])
    first_used = np.zeros(n, dtype=bool)
    second_used = np.zeros(n, dtype=bool)
    largest = 0.0
    matched = 0

    for flat_index in np.argsort(distances, axis=None, kind="stable"):
        i, j = divmod(int(flat_index), n)
        if first_used[i] or second_used[j]:
            continue
        first_used[i] = second_used[j] = True
        largest = max(largest, float(distances[i, j]))
        matched += 1
        if matched == n:
            break

    return largest


def spectrum_distance(spectrum: Spectrum, A) -> float:
    """Greedy distance between a prescribed spectrum and the eigenvalues of A."""
    return greedy_distance(spectrum.full(), eigenvalues(as_square(A)))
