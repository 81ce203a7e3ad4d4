"""This file contains the main executable file within the project."""

# Importing Python libraries
import argparse
import logging
import os
import sys
import numpy as np

# Importing helper functions
from stiep.helper_functions import (
    display_parameters,
    display_table,
    read_matrix,
    read_spectrum,
    summarize_rows,
    t_histogram,
    validate_stochastic,
    write_json,
    write_matrix,
    write_rows_csv,
    write_spectrum,
    write_trace_csv,
)

# Importing solver components and drivers
from stiep.algorithms import ExperimentSpec, SolverConfig, gmprp_solve, init_point, run_experiment
from stiep.components import sample_disk_spectrum, sample_stochastic, spectrum_distance, spectrum_of_matrix
from stiep.errors import BadArguments, StiepError

logger = logging.getLogger("stiep")

TRANSPORT_CHOICES = {"proj": "projection", "parallel": "parallel"}
INIT_STEP_CHOICES = {"newton": "newton", "gn": "gauss-newton"}
BENCH_FAMILIES = {"scaling": "scaling", "fixed-n": "fixed-n", "t-stats": "t-statistics"}

# Desk-scale defaults per experiment family
BENCH_DEFAULTS = {
    "scaling": {"sizes": (50, 100, 200), "t_values": (), "samples": 10},
    "fixed-n": {"sizes": (20,), "t_values": (3, 6, 9), "samples": 20},
    "t-statistics": {"sizes": (100,), "t_values": (), "samples": 2000},
}


def configure_logging(verbose: int = 0):
    """Sets the package log level from --verbose, falling back to the STIEP_LOG_LEVEL environment variable."""
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, os.environ.get("STIEP_LOG_LEVEL", "WARNING").upper(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s %(message)s")
    logger.setLevel(level)


def solver_overrides(parameters: dict) -> dict:
    """Maps CLI solver options onto SolverConfig fields; options left unset keep the config defaults."""
    overrides = {
        "retraction_mode": parameters["retraction"],
        "transport_mode": TRANSPORT_CHOICES[parameters["transport"]],
        "init_step_mode": INIT_STEP_CHOICES[parameters["init_step"]],
        "additional_step_enabled": not parameters["no_additional_step"],
        "line_search_mode": parameters["line_search"],
        "floor_metric": parameters["floor_metric"],
    }
    if parameters.get("max_iter") is not None:
        overrides["max_iter"] = parameters["max_iter"]
    return overrides


# ============================================================================
# SUBCOMMANDS
# ============================================================================


def cmd_solve(parameters: dict) -> int:
    spectrum = read_spectrum(parameters["spectrum"])
    config = SolverConfig.for_model(parameters["model"], residual_tol=parameters["tol"], seed=parameters["seed"], **solver_overrides(parameters))

    rng = np.random.default_rng(parameters["seed"])
    result = gmprp_solve(spectrum, init_point(spectrum, rng), config)
    summary = {**result.summary(spectrum), "config": config.to_dict()}

    if parameters.get("trace"):
        write_trace_csv(parameters["trace"], result.trace)
    if parameters.get("summary"):
        write_json(parameters["summary"], summary)
    if parameters.get("matrix_out"):
        write_matrix(parameters["matrix_out"], result.matrix)

    display_table([{key: value for key, value in summary.items() if key not in ("config", "level_bounds")}])
    return 0 if result.status.converged else 3


def cmd_gen(parameters: dict) -> int:
    rng = np.random.default_rng(parameters["seed"])
    if parameters["mode"] == "disk":
        if parameters.get("t") is None:
            raise BadArguments("gen --mode disk needs --t")
        spectrum = sample_disk_spectrum(parameters["n"], parameters["t"], rng)
    else:
        if parameters.get("t") is not None:
            raise BadArguments("--t applies to gen --mode disk only")
        matrix = sample_stochastic(parameters["n"], rng)
        spectrum = spectrum_of_matrix(matrix)
        if parameters.get("matrix_out"):
            write_matrix(parameters["matrix_out"], matrix)

    write_spectrum(parameters["output"], spectrum)
    print(f"Wrote {spectrum!r} to {parameters['output']}")
    return 0


def cmd_bench(parameters: dict) -> int:
    family = BENCH_FAMILIES[parameters["family"]]
    defaults = BENCH_DEFAULTS[family]
    spec = ExperimentSpec(
        family=family,
        sizes=parameters.get("sizes") or defaults["sizes"],
        t_values=parameters.get("t_values") or defaults["t_values"],
        samples=parameters.get("samples") or defaults["samples"],
        seed=parameters["seed"],
        models=parameters["models"],
        overrides=solver_overrides(parameters),
        workers=parameters["workers"],
    )

    rows = run_experiment(spec)
    summary = summarize_rows(rows)

    os.makedirs(parameters["output"], exist_ok=True)
    write_rows_csv(os.path.join(parameters["output"], "results.csv"), rows)
    report = {"family": family, "seed": spec.seed, "samples": spec.samples, "summary": summary}
    if family == "t-statistics":
        report["t_histogram"] = {str(n): counts for n, counts in t_histogram(rows).items()}
    write_json(os.path.join(parameters["output"], "summary.json"), report)

    display_table(summary)
    return 0


def cmd_check(parameters: dict) -> int:
    matrix = read_matrix(parameters["matrix"])
    spectrum = read_spectrum(parameters["spectrum"])
    distance = spectrum_distance(spectrum, matrix)
    validation = validate_stochastic(matrix)

    display_table([{"eig_distance": distance, **validation}])
    print(f"stochastic: {'yes' if validation['stochastic'] else 'no'}")
    return 0 if validation["stochastic"] and distance <= parameters["tol"] else 3


COMMANDS = {"solve": cmd_solve, "gen": cmd_gen, "bench": cmd_bench, "check": cmd_check}


def main(parameters: dict) -> int:
    """Runs one subcommand and returns the process exit status."""
    configure_logging(parameters.get("verbose", 0))
    display_parameters(f"STIEP {parameters['command'].upper()}", {key: value for key, value in parameters.items() if key != "command"})

    try:
        return COMMANDS[parameters["command"]](parameters)
    except StiepError as error:
        print(f"error: {type(error).__name__}: {error}", file=sys.stderr)
        return error.exit_code
    except OSError as error:
        print(f"error: {error}", file=sys.stderr)
        return 2


# ============================================================================
# ARGUMENT PARSING
# ============================================================================


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(item) for item in text.split(",") if item.strip())
    except ValueError as error:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from error


def _model_list(text: str) -> tuple:
    models = tuple(item.strip() for item in text.split(",") if item.strip())
    if not models or any(model.upper() not in ("I", "II") for model in models):
        raise argparse.ArgumentTypeError(f"expected a comma-separated subset of I,II, got '{text}'")
    return tuple(model.upper() for model in models)


def _solver_options() -> argparse.ArgumentParser:
    options = argparse.ArgumentParser(add_help=False)
    options.add_argument("--retraction", choices=("qr", "exp"), default="qr", help="Retraction on the oblique and orthogonal factors")
    options.add_argument("--transport", choices=tuple(TRANSPORT_CHOICES), default="proj", help="Vector transport")
    options.add_argument("--init-step", choices=tuple(INIT_STEP_CHOICES), default="newton", help="Initial step-size estimate")
    options.add_argument("--no-additional-step", action="store_true", help="Disable the Additional Step of the line search")
    options.add_argument("--line-search", choices=("quadratic", "armijo", "exact"), default="quadratic", help="Sufficient decrease test")
    options.add_argument("--floor-metric", choices=("metric", "euclidean"), default="metric", help="Norm used by the initial-step floors")
    options.add_argument("--max-iter", type=int, default=None, help="Iteration cap")
    options.add_argument("--seed", "-s", type=int, default=0, help="Seed value")
    options.add_argument("--verbose", "-v", action="count", default=0, help="Increase log verbosity (-v info, -vv debug)")
    return options


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m stiep",
        description="Stochastic inverse eigenvalue solver (Riemannian GMPRP conjugate gradient)",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Random spectrum of a 20x20 stochastic matrix
  python -m stiep gen --n 20 --mode stochastic --seed 7 -o spectrum.json

  # Model II solve with trace, summary and recovered matrix
  python -m stiep solve --spectrum spectrum.json --model II --trace trace.csv \\
    --summary summary.json --matrix-out matrix.txt

  # Validate a matrix against a spectrum
  python -m stiep check --matrix matrix.txt --spectrum spectrum.json

  # Fixed-n experiment with the exponential retraction
  python -m stiep bench fixed-n --sizes 20 --t-values 3,6,9 --samples 20 --retraction exp -o results
        """,
    )
    commands = parser.add_subparsers(dest="command", required=True)
    solver_options = _solver_options()

    solve = commands.add_parser("solve", parents=[solver_options], help="Solve for a stochastic matrix with a prescribed spectrum")
    solve.add_argument("--spectrum", required=True, help="Spectrum file (JSON)")
    solve.add_argument("--model", choices=("I", "II"), default="II", help="Objective model")
    solve.add_argument("--tol", type=float, default=1e-12, help="Residual tolerance")
    solve.add_argument("--trace", default=None, help="Per-iteration trace output (CSV)")
    solve.add_argument("--summary", default=None, help="Summary output (JSON)")
    solve.add_argument("--matrix-out", default=None, help="Recovered matrix output (text)")

    gen = commands.add_parser("gen", help="Generate a prescribed spectrum")
    gen.add_argument("--n", type=int, required=True, help="Matrix size")
    gen.add_argument("--t", type=int, default=None, help="Number of conjugate pairs (disk mode only)")
    gen.add_argument("--mode", choices=("disk", "stochastic"), default="stochastic", help="Sampling scheme")
    gen.add_argument("--seed", "-s", type=int, default=0, help="Seed value")
    gen.add_argument("--matrix-out", default=None, help="Also write the sampled stochastic matrix (stochastic mode)")
    gen.add_argument("--output", "-o", required=True, help="Spectrum output file (JSON)")
    gen.add_argument("--verbose", "-v", action="count", default=0, help="Increase log verbosity")

    bench = commands.add_parser("bench", parents=[solver_options], help="Run an experiment family")
    bench.add_argument("family", choices=tuple(BENCH_FAMILIES), help="Experiment family")
    bench.add_argument("--sizes", type=_int_list, default=None, help="Comma-separated matrix sizes")
    bench.add_argument("--t-values", type=_int_list, default=None, help="Comma-separated pair counts (fixed-n)")
    bench.add_argument("--samples", type=int, default=None, help="Samples per size (and per t)")
    bench.add_argument("--models", type=_model_list, default=("I", "II"), help="Comma-separated models")
    bench.add_argument("--workers", type=int, default=1, help="Worker processes")
    bench.add_argument("--output", "-o", default="results", help="Output directory")

    check = commands.add_parser("check", help="Compare a matrix with a spectrum and validate stochasticity")
    check.add_argument("--matrix", required=True, help="Matrix file (text)")
    check.add_argument("--spectrum", required=True, help="Spectrum file (JSON)")
    check.add_argument("--tol", type=float, default=1e-8, help="Largest accepted eigenvalue distance")
    check.add_argument("--verbose", "-v", action="count", default=0, help="Increase log verbosity")
    return parser


def parse_arguments(argv: list = None) -> dict:
    """Parses the command line into the parameters dictionary consumed by main()."""
    return vars(build_parser().parse_args(argv))


def run() -> int:
    """Console-script entry point."""
    return main(parameters=parse_arguments())


if __name__ == "__main__":
    sys.exit(run())
