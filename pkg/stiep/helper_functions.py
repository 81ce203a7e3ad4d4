"""This file contains a set of helper functions for file formats, console display and experiment statistics."""

# Importing Python libraries
from collections import defaultdict
import csv
import json
import math
import numpy as np
from scipy import stats
from tabulate import tabulate

# Importing project components
from stiep.algorithms.experiments import RESULT_COLUMNS
from stiep.algorithms.gmprp import TRACE_COLUMNS, SolverStatus
from stiep.components.matrix_kernel import as_square
from stiep.components.spectra import Spectrum
from stiep.errors import BadArguments, InvalidSpectrum, NonFiniteEntries

# Tolerances of the stochasticity validation
NONNEGATIVITY_TOLERANCE = 1e-12
ROW_SUM_TOLERANCE = 1e-10


# ============================================================================
# FILE FORMATS
# ============================================================================


def read_spectrum(path: str) -> Spectrum:
    """Reads a spectrum file {"real": [...], "pairs": [[re, im], ...]}.

    Args:
        path (str): JSON file.

    Returns:
        Spectrum: The validated spectrum.

    Raises:
        InvalidSpectrum: If the file is not valid JSON or violates the spectrum invariants.
    """
    with open(path, "r", encoding="utf-8") as spectrum_file:
        try:
            data = json.load(spectrum_file)
        except json.JSONDecodeError as error:
            raise InvalidSpectrum(f"{path} is not valid JSON: {error}") from error
    return Spectrum.from_dict(data)


def write_spectrum(path: str, spectrum: Spectrum):
    write_json(path, spectrum.to_dict())


def read_matrix(path: str) -> np.ndarray:
    """Reads a square matrix stored as whitespace-separated rows, one per line."""
    try:
        matrix = np.loadtxt(path, dtype=float, ndmin=2)
    except ValueError as error:
        raise BadArguments(f"{path} does not hold a numeric matrix: {error}") from error
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteEntries(f"{path} has NaN or infinite entries")
    return as_square(matrix, name=path)


def write_matrix(path: str, matrix: np.ndarray):
    np.savetxt(path, np.asarray(matrix, dtype=float), fmt="%.17g")


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def write_json(path: str, data):
    with open(path, "w", encoding="utf-8") as json_file:
        json.dump(data, json_file, indent=4, default=_json_default)
        json_file.write("\n")


def write_trace_csv(path: str, trace):
    """Writes one CSV row per iteration record of a solver trace."""
    with open(path, "w", newline="", encoding="utf-8") as csv_file:
        writer = csv.DictWriter(csv_file, fieldnames=TRACE_COLUMNS)
        writer.writeheader()
        writer.writerows(trace.to_rows())


def write_rows_csv(path: str, rows: list):
    with open(path, "w", newline="", encoding="utf-8") as csv_file:
        writer = csv.DictWriter(csv_file, fieldnames=RESULT_COLUMNS)
        writer.writeheader()
        writer.writerows(_as_dict(row) for row in rows)


# ============================================================================
# VALIDATION
# ============================================================================


def validate_stochastic(matrix: np.ndarray) -> dict:
    """Checks entrywise nonnegativity and unit row sums.

    Returns:
        dict: min_entry, max_row_sum_error, nonnegative, row_sums_ok and stochastic (both checks pass).
    """
    matrix = as_square(matrix)
    min_entry = float(matrix.min())
    row_sum_error = float(np.max(np.abs(matrix.sum(axis=1) - 1.0)))
    nonnegative = min_entry >= -NONNEGATIVITY_TOLERANCE
    row_sums_ok = row_sum_error <= ROW_SUM_TOLERANCE
    return {
        "min_entry": min_entry,
        "max_row_sum_error": row_sum_error,
        "nonnegative": nonnegative,
        "row_sums_ok": row_sums_ok,
        "stochastic": nonnegative and row_sums_ok,
    }


# ============================================================================
# EXPERIMENT STATISTICS
# ============================================================================


def _as_dict(row) -> dict:
    return row if isinstance(row, dict) else row.to_dict()


def _finite(values: list) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return values[np.isfinite(values)]


def _mean(values: list) -> float:
    finite = _finite(values)
    return float(finite.mean()) if finite.size else math.nan


def _median(values: list) -> float:
    finite = _finite(values)
    return float(np.median(finite)) if finite.size else math.nan


def _sem(values: list) -> float:
    finite = _finite(values)
    return float(stats.sem(finite)) if finite.size > 1 else math.nan


def summarize_rows(rows: list) -> list:
    """Aggregates result rows into one summary line per (family, model, n), plus t for the fixed-n family.

    Means come with their standard error; distances also get medians, which are robust against the
    occasional stalled run.
    """
    groups = defaultdict(list)
    for row in map(_as_dict, rows):
        t_key = row["t"] if row["family"] == "fixed-n" else None
        groups[(row["family"], row["model"], row["n"], t_key)].append(row)

    summary = []
    for (family, model, n, t_key), members in groups.items():

        def column(name):
            return [member[name] for member in members]

        summary.append(
            {
                "family": family,
                "model": model,
                "n": n,
                "t": t_key if t_key is not None else _mean(column("t")),
                "samples": len(members),
                "residual_met": sum(member["status"] == SolverStatus.RESIDUAL_MET.value for member in members),
                "iterations_mean": _mean(column("iterations")),
                "iterations_sem": _sem(column("iterations")),
                "wall_time_mean": _mean(column("wall_time_s")),
                "wall_time_sem": _sem(column("wall_time_s")),
                "final_residual_mean": _mean(column("final_residual")),
                "eig_distance_mean": _mean(column("eig_distance")),
                "eig_distance_median": _median(column("eig_distance")),
                "min_eig_distance_mean": _mean(column("min_eig_distance")),
                "min_eig_distance_median": _median(column("min_eig_distance")),
                "function_evaluations_mean": _mean(column("function_evaluations")),
            }
        )
    return summary


def t_histogram(rows: list) -> dict:
    """Counts how often each number of conjugate pairs occurs, per n.

    Returns:
        dict: n -> list where entry t is the number of samples with t pairs (length ⌊n/2⌋ + 1).
    """
    counts = defaultdict(list)
    for row in map(_as_dict, rows):
        counts[row["n"]].append(row["t"])
    return {n: np.bincount(np.asarray(values, dtype=int), minlength=n // 2 + 1).tolist() for n, values in sorted(counts.items())}


def linear_convergence_fit(residuals) -> dict:
    """Least-squares line through log10(residual) against the iteration index on the final two-thirds of a run.

    Args:
        residuals (array_like): Residual per iteration, starting at k = 0.

    Returns:
        dict: slope (decades per iteration), intercept, r_squared and the number of fitted points.

    Raises:
        BadArguments: If fewer than three positive residuals remain in the fitted window.
    """
    residuals = np.asarray(residuals, dtype=float)
    iterations = np.arange(residuals.size)
    start = residuals.size // 3

    window = residuals[start:] > 0.0
    x = iterations[start:][window]
    y = np.log10(residuals[start:][window])
    if x.size < 3:
        raise BadArguments(f"linear convergence fit needs at least 3 positive residuals, got {x.size}")

    fit = stats.linregress(x, y)
    return {"slope": float(fit.slope), "intercept": float(fit.intercept), "r_squared": float(fit.rvalue**2), "points": int(x.size)}


# ============================================================================
# CONSOLE OUTPUT
# ============================================================================


def display_parameters(title: str, parameters: dict):
    """Prints a parameter banner."""
    print(f"\n{'='*70}")
    print(title)
    print(f"{'='*70}")
    for key, value in parameters.items():
        print(f"  {key}: {value}")
    print(f"{'='*70}\n")


def display_table(rows: list, floatfmt: str = ".3e"):
    if not rows:
        print("(no rows)")
        return
    rows = [_as_dict(row) for row in rows]
    print(tabulate([list(row.values()) for row in rows], headers=list(rows[0].keys()), floatfmt=floatfmt))
