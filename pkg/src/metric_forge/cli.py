"""Command-line front end.

Usage:
    metric-forge validate data.csv --mode b --S 2
    metric-forge validate data.csv --mode theta --theta squared-sum
    metric-forge modulus --mode b --S 2 --eps 1 --eps 0.5
    metric-forge metrize data.csv --mode b --S 2 --out result.json
    metric-forge baction-check --theta max --grid-n 32
    metric-forge gen --kind random --n 50 --seed 7 --q 2 --out sample.csv

Exit codes: 0 pass, 1 mathematical failure (with witnesses),
2 malformed input or invalid parameters.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click
import numpy as np

from .baction import DEFAULT_GRID_N, check_baction_axioms
from .chittenden import b_metric_modulus, theta_modulus
from .distances import TOL_ABS, DistanceMatrix, minimal_relaxation_constant, verify_b_metric, verify_theta_metric
from .errors import (
    ContinuityError,
    EvaluationError,
    InvalidParameterError,
    MalformedInputError,
    MetrizationError,
    SolvabilityError,
)
from .generators import DEFAULT_M, REGISTRY, gen_baction, gen_power_line, gen_random_b_metric
from .metrization import (
    DISTORTION_CAP,
    RETRY_CAP,
    chain_metric,
    equivalence_check,
    metrize_b,
    metrize_theta,
    simple_path_minimum,
)
from .serialization import SCHEMA_VERSION, dumps, read_matrix_csv, write_matrix_csv

ORACLE_MAX_N = 8
ORACLE_TOL = 1e-12

EXIT_OK, EXIT_FAIL, EXIT_BAD_INPUT = 0, 1, 2


class Exit(Exception):
    def __init__(self, code: int):
        self.code = code


def _emit(payload: dict, out: str | None) -> None:
    text = dumps(payload) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _fail(code: int, message: str, **extra) -> None:
    click.echo(dumps({"schema": SCHEMA_VERSION, "error": message, **extra}), err=True)
    raise Exit(code)


def guarded(func):
    """Map library exceptions onto the exit-code contract."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (MalformedInputError, InvalidParameterError) as exc:
            _fail(EXIT_BAD_INPUT, str(exc), kind=type(exc).__name__)
        except (ContinuityError, SolvabilityError, EvaluationError) as exc:
            _fail(EXIT_FAIL, str(exc), kind=type(exc).__name__)

    return wrapper


def _params(pairs: tuple[str, ...]) -> dict[str, float]:
    out = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise InvalidParameterError(f"--param expects k=v, got {pair!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise InvalidParameterError(f"--param {key}: {value!r} is not a number") from None
    return out


def _theta_for(name: str | None, params, M: float | None, D: DistanceMatrix | None = None):
    if not name:
        raise InvalidParameterError("--mode theta requires --theta NAME")
    if M is None:
        M = max(DEFAULT_M, D.max_entry()) if D is not None else DEFAULT_M
    return gen_baction(name, M=M, **_params(params))


def _require_S(S: float | None) -> float:
    if S is None:
        raise InvalidParameterError("--mode b requires --S")
    if not S > 0:
        raise InvalidParameterError(f"--S must be positive, got {S!r}")
    return S


mode_option = click.option("--mode", type=click.Choice(["b", "theta"]), default="b", show_default=True)
S_option = click.option("--S", "S", type=float, help="Relaxation constant of the b-metric.")
theta_option = click.option("--theta", "theta_name", type=click.Choice(sorted(REGISTRY)), help="B-action family.")
param_option = click.option("--param", "params", multiple=True, metavar="K=V", help="B-action parameter.")
M_option = click.option("--M", "M", type=float, help="Evaluation range bound of the B-action.")
out_option = click.option("--out", type=click.Path(dir_okay=False), help="Write JSON here instead of stdout.")
tol_abs_option = click.option("--tol-abs", type=float, default=TOL_ABS, show_default=True)
witness_option = click.option("--max-witnesses", type=int, default=100, show_default=True,
                              help="Witnesses kept per report; counts stay exact.")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="artifact")
def cli():
    """Finite checks and explicit metrization for b- and theta-metric samples."""


@cli.command()
@click.argument("matrix", type=click.Path(dir_okay=False))
@mode_option
@S_option
@theta_option
@param_option
@M_option
@tol_abs_option
@witness_option
@out_option
@guarded
def validate(matrix, mode, S, theta_name, params, M, tol_abs, max_witnesses, out):
    """Check point axioms and the (relaxed or theta) triangle inequality."""
    D = read_matrix_csv(matrix, tol_abs)
    payload = {"schema": SCHEMA_VERSION, "command": "validate", "mode": mode, "n": D.n,
               "tol_abs": tol_abs, "scope": "sample-scale"}
    if mode == "b":
        S = _require_S(S)
        report = verify_b_metric(D, S, tol_abs, max_witnesses)
        payload["S"] = S
    else:
        theta = _theta_for(theta_name, params, M, D)
        report = verify_theta_metric(D, theta, tol_abs, max_witnesses)
        payload["theta"] = theta.describe()
    payload["report"] = report.to_dict()
    payload["passed"] = report.passed
    _emit(payload, out)
    raise Exit(EXIT_OK if report.passed else EXIT_FAIL)


@cli.command()
@mode_option
@S_option
@theta_option
@param_option
@M_option
@click.option("--eps", "epsilons", type=float, multiple=True, required=True, help="Epsilon (repeatable).")
@click.option("--tol-rel", type=float, default=1e-4, show_default=True)
@out_option
@guarded
def modulus(mode, S, theta_name, params, M, epsilons, tol_rel, out):
    """Tabulate the uniform-regularity modulus phi(eps)."""
    for e in epsilons:
        if not e > 0:
            raise InvalidParameterError(f"--eps must be positive, got {e!r}")
    if mode == "b":
        table = b_metric_modulus(_require_S(S), epsilons)
    else:
        table = theta_modulus(_theta_for(theta_name, params, M), epsilons, tol_rel=tol_rel)
    _emit({"schema": SCHEMA_VERSION, "command": "modulus", "modulus": table.to_dict()}, out)
    raise Exit(EXIT_OK)


@cli.command()
@click.argument("matrix", type=click.Path(dir_okay=False))
@mode_option
@S_option
@theta_option
@param_option
@M_option
@click.option("--chains", is_flag=True, help="Include lexicographically least shortest chains.")
@click.option("--metric-out", type=click.Path(dir_okay=False), help="Metric CSV path.")
@click.option("--distortion-cap", type=float, default=DISTORTION_CAP, show_default=True)
@click.option("--retry-cap", type=int, default=RETRY_CAP, show_default=True)
@tol_abs_option
@witness_option
@out_option
@guarded
def metrize(matrix, mode, S, theta_name, params, M, chains, metric_out, distortion_cap, retry_cap,
            tol_abs, max_witnesses, out):
    """Snowflake plus chain metric, with an automatic equivalence check.

    Without --S in b mode the sample's minimal relaxation constant is used.
    """
    D = read_matrix_csv(matrix, tol_abs)
    kwargs = {"distortion_cap": distortion_cap, "retry_cap": retry_cap, "chains": chains}
    payload = {"schema": SCHEMA_VERSION, "command": "metrize", "mode": mode, "n": D.n}
    if mode == "b":
        S = _require_S(S) if S is not None else max(minimal_relaxation_constant(D), 1.0)
        pre = verify_b_metric(D, S, tol_abs, max_witnesses)
        payload["S"] = S
    else:
        theta = _theta_for(theta_name, params, M, D)
        pre = verify_theta_metric(D, theta, tol_abs, max_witnesses)
        payload["theta"] = theta.describe()
    payload["validation"] = pre.to_dict()
    if not pre.passed:
        payload["passed"] = False
        _emit(payload, out)
        raise Exit(EXIT_FAIL)

    try:
        result = metrize_b(D, S, **kwargs) if mode == "b" else metrize_theta(D, theta, **kwargs)
    except MetrizationError as exc:
        payload["passed"] = False
        payload["error"] = str(exc)
        payload["best_attempt"] = exc.best.to_dict()
        _emit(payload, out)
        raise Exit(EXIT_FAIL)

    if metric_out is None:
        base = Path(out) if out else Path(matrix)
        metric_out = str(base.with_name(base.stem + ".metric.csv"))
    write_matrix_csv(result.metric, metric_out)

    check = equivalence_check(D, result, tol_abs, max_witnesses)
    passed = check.passed
    payload["result"] = result.to_dict(metric_csv_path=metric_out)
    payload["equivalence"] = check.to_dict()
    if D.n <= ORACLE_MAX_N:
        snow = result.snowflaked
        diff = np.abs(chain_metric(snow).d - simple_path_minimum(snow)) if D.n else np.zeros(0)
        worst = float(diff.max()) if diff.size else 0.0
        payload["oracle"] = {"ran": True, "max_abs_diff": worst, "passed": worst <= ORACLE_TOL}
        passed = passed and worst <= ORACLE_TOL
    else:
        payload["oracle"] = {"ran": False}
    payload["passed"] = passed
    _emit(payload, out)
    raise Exit(EXIT_OK if passed else EXIT_FAIL)


@cli.command("baction-check")
@click.option("--theta", "theta_name", type=click.Choice(sorted(REGISTRY)), required=True)
@param_option
@M_option
@click.option("--grid-n", type=int, default=DEFAULT_GRID_N, show_default=True)
@click.option("--budget", type=int, help="Maximum evaluations.")
@tol_abs_option
@click.option("--tol-root", type=float, help="Root tolerance (default 1e-10 max(1, m)).")
@witness_option
@out_option
@guarded
def baction_check(theta_name, params, M, grid_n, budget, tol_abs, tol_root, max_witnesses, out):
    """Check the four B-action axioms on a grid."""
    theta = gen_baction(theta_name, M=M if M is not None else DEFAULT_M, budget=budget, **_params(params))
    report = check_baction_axioms(theta, grid_n, tol_abs, max_witnesses=max_witnesses, tol_root=tol_root)
    family = REGISTRY[theta_name]
    _emit({
        "schema": SCHEMA_VERSION,
        "command": "baction-check",
        "theta": theta.describe(),
        "grid_n": grid_n,
        "expected_failures": sorted(family.failing_axioms),
        "failed_axioms": sorted(report.axioms_failed()),
        "passed": report.passed,
        "report": report.to_dict(),
    }, out)
    raise Exit(EXIT_OK if report.passed else EXIT_FAIL)


@cli.command()
@click.option("--kind", type=click.Choice(["power-line", "random"]), required=True)
@click.option("--points", help="Comma-separated reals (power-line).")
@click.option("--n", type=int, help="Number of points (random).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--q", type=float, default=2.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="CSV path; provenance goes to <out>.json.")
@guarded
def gen(kind, points, n, seed, q, out):
    """Generate a sample as CSV with JSON provenance."""
    provenance = {"schema": SCHEMA_VERSION, "command": "gen", "kind": kind, "q": q}
    if kind == "power-line":
        if not points:
            raise InvalidParameterError("--kind power-line requires --points")
        try:
            xs = [float(p) for p in points.split(",")]
        except ValueError as exc:
            raise InvalidParameterError(f"--points: {exc}") from None
        D, S_claim = gen_power_line(xs, q)
        provenance.update(points=xs, S_claim=S_claim)
    else:
        if n is None:
            raise InvalidParameterError("--kind random requires --n")
        D = gen_random_b_metric(n, seed, q)
        provenance.update(n=n, seed=seed, generator="numpy.random.default_rng (PCG64)", S_claim=2.0 ** (q - 1))
    if out:
        write_matrix_csv(D, out)
        provenance["csv_path"] = out
        Path(out + ".json").write_text(dumps(provenance) + "\n")
        click.echo(dumps(provenance))
    else:
        click.echo(write_matrix_csv(D), nl=False)
        click.echo(dumps(provenance), err=True)
    raise Exit(EXIT_OK)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except Exit as done:
        return done.code
    except click.UsageError as exc:
        exc.show()
        return EXIT_BAD_INPUT
    except click.Abort:
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
