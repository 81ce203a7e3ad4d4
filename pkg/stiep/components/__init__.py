"""Automatic Python configuration file."""

__version__ = "1.0.0"

# Importing solver components
from .matrix_kernel import qf, real_schur, eigenvalues, skew_expm, orthogonality_error, schur_block_eigenvalues
from .spectra import (
    Spectrum,
    build_D,
    build_mask,
    theta3_contains,
    stochastic_spectrum_3x3,
    circulant_from_spectrum,
    circulant_isospectral_basis,
    trace_zero_bistochastic,
    shift_matrix,
    fourier_matrix,
    fourier_apply,
    sample_stochastic,
    spectrum_of_matrix,
    sample_disk_spectrum,
    greedy_distance,
    spectrum_distance,
)
from .manifold import ProductManifold, ProductPoint, ProductTangent, geodesic_distance_pos
from .model import (
    ModelKind,
    EvalCache,
    build_tab,
    eval_objective,
    residual,
    residual_map,
    grad_objective,
    hess_vec_approx,
    gauss_newton_denominator,
    recover_stochastic,
    level_bound_diagnostics,
)


__all__ = [
    "qf",
    "real_schur",
    "eigenvalues",
    "skew_expm",
    "orthogonality_error",
    "schur_block_eigenvalues",
    "Spectrum",
    "build_D",
    "build_mask",
    "theta3_contains",
    "stochastic_spectrum_3x3",
    "circulant_from_spectrum",
    "circulant_isospectral_basis",
    "trace_zero_bistochastic",
    "shift_matrix",
    "fourier_matrix",
    "fourier_apply",
    "sample_stochastic",
    "spectrum_of_matrix",
    "sample_disk_spectrum",
    "greedy_distance",
    "spectrum_distance",
    "ProductManifold",
    "ProductPoint",
    "ProductTangent",
    "geodesic_distance_pos",
    "ModelKind",
    "EvalCache",
    "build_tab",
    "eval_objective",
    "residual",
    "residual_map",
    "grad_objective",
    "hess_vec_approx",
    "gauss_newton_denominator",
    "recover_stochastic",
    "level_bound_diagnostics",
]
