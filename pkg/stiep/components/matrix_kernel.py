"""This module contains the dense real linear-algebra primitives every other component builds on.

QR, real Schur and the matrix exponential are delegated to LAPACK through scipy.linalg. What stays
here is the part LAPACK leaves open: the sign convention that makes the QR factor unique, reading
eigenvalues off quasi-triangular Schur blocks, and mapping LAPACK failures onto our error types.
"""

# Importing Python libraries
import logging
import numpy as np
from scipy import linalg

# Importing project components
from stiep.errors import DimensionMismatch, NoConvergence, NonFiniteEntries, NotSkew, SingularInput

logger = logging.getLogger(__name__)

# |Im λ| ≤ PAIRING_TOLERANCE·(1+|λ|) is treated as real
PAIRING_TOLERANCE = 1e-10

# |R_ii| below this fraction of ‖A‖_F flags a singular QR input
QR_PIVOT_TOLERANCE = 1e-14

# ‖K + Kᵀ‖_F ≤ SKEW_TOLERANCE·(1+‖K‖_F)
SKEW_TOLERANCE = 1e-12


def as_dense(A, name: str = "A") -> np.ndarray:
    """Converts the input into a finite two-dimensional float array.

    Args:
        A (array_like): Matrix candidate.
        name (str): Name used in error messages.

    Returns:
        np.ndarray: The validated matrix.

    Raises:
        DimensionMismatch: If the input is not two-dimensional.
        NonFiniteEntries: If any entry is NaN or infinite.
    """
    matrix = np.asarray(A, dtype=float)
    if matrix.ndim != 2:
        raise DimensionMismatch(f"{name} must be a matrix, got an array with {matrix.ndim} dimension(s)")
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteEntries(f"{name} has NaN or infinite entries")
    return matrix


def as_square(A, name: str = "A") -> np.ndarray:
    matrix = as_dense(A, name)
    if matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {matrix.shape}")
    return matrix


def qf(A) -> np.ndarray:
    """Returns the orthogonal factor Q of A = QR with R upper triangular and diag(R) > 0.

    Args:
        A (array_like): Square, numerically invertible matrix.

    Returns:
        np.ndarray: The unique orthogonal QR factor.

    Raises:
        SingularInput: If a diagonal entry of R falls below 1e-14·‖A‖_F.
    """
    matrix = as_square(A)
    q, r = linalg.qr(matrix)
    diagonal = np.diag(r)

    if np.any(np.abs(diagonal) <= QR_PIVOT_TOLERANCE * np.linalg.norm(matrix)):
        raise SingularInput(f"QR of a numerically singular {matrix.shape[0]}x{matrix.shape[0]} matrix (min |R_ii| = {np.abs(diagonal).min():.3e})")

    # Column sign fix so that diag(R) > 0
    return q * np.sign(diagonal)


def real_schur(A) -> tuple:
    """Computes the real Schur decomposition A = Q T Qᵀ.

    Args:
        A (array_like): Square matrix.

    Returns:
        tuple: (Q, T) with Q orthogonal and T quasi-upper-triangular (1x1 and 2x2 diagonal blocks).

    Raises:
        NoConvergence: If the LAPACK QR iteration fails to converge.
    """
    matrix = as_square(A)
    try:
        T, Q = linalg.schur(matrix, output="real")
    except np.linalg.LinAlgError as error:
        raise NoConvergence(f"real Schur iteration did not converge for a {matrix.shape[0]}x{matrix.shape[0]} input") from error
    return Q, T


def schur_block_eigenvalues(T: np.ndarray) -> np.ndarray:
    """Reads the eigenvalues off the 1x1 and 2x2 diagonal blocks of a quasi-triangular matrix."""
    n = T.shape[0]
    values = np.empty(n, dtype=complex)
    i = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            a, b, c, d = T[i, i], T[i, i + 1], T[i + 1, i], T[i + 1, i + 1]
            center = 0.5 * (a + d)
            discriminant = (0.5 * (a - d)) ** 2 + b * c
            if discriminant < 0.0:
                root = np.sqrt(-discriminant)
                values[i] = complex(center, root)
                values[i + 1] = complex(center, -root)
            else:
                root = np.sqrt(discriminant)
                values[i] = center + root
                values[i + 1] = center - root
            i += 2
        else:
            values[i] = T[i, i]
            i += 1
    return snap_real(values)


def snap_real(values: np.ndarray) -> np.ndarray:
    """Zeroes imaginary parts that fall inside the pairing tolerance."""
    values = np.asarray(values, dtype=complex).copy()
    nearly_real = np.abs(values.imag) <= PAIRING_TOLERANCE * (1.0 + np.abs(values))
    values[nearly_real] = values[nearly_real].real
    return values


def eigenvalues(A) -> np.ndarray:
    """Returns the n eigenvalues of a real square matrix as a self-conjugate complex array.

    Args:
        A (array_like): Square real matrix.

    Returns:
        np.ndarray: Complex eigenvalues, conjugate pairs adjacent (positive imaginary part first).
    """
    _, T = real_schur(A)
    return schur_block_eigenvalues(T)


def skew_expm(K) -> np.ndarray:
    """Matrix exponential of a skew-symmetric matrix (an orthogonal matrix with determinant 1).

    Raises:
        NotSkew: If ‖K + Kᵀ‖_F exceeds 1e-12·(1+‖K‖_F).
    """
    matrix = as_square(K, "K")
    asymmetry = np.linalg.norm(matrix + matrix.T)
    if asymmetry > SKEW_TOLERANCE * (1.0 + np.linalg.norm(matrix)):
        raise NotSkew(f"input is not skew-symmetric (‖K + Kᵀ‖_F = {asymmetry:.3e})")
    return linalg.expm(matrix)


def orthogonality_error(Q: np.ndarray) -> float:
    """Returns ‖QᵀQ − I‖_F."""
    return float(np.linalg.norm(Q.T @ Q - np.eye(Q.shape[1])))
