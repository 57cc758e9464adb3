"""Seqspace - Command-line interface"""

import functools
import logging
import sys
from pathlib import Path
from typing import Any, Callable, List, Optional

import click
import numpy as np
from dotenv import load_dotenv
from pydantic import BaseModel, ValidationError

from . import __version__
from .acceptance import CASES, CaseContext, run_suite
from .config import (
    OutputFormat,
    RunConfig,
    Settings,
    load_model,
    load_space,
    parse_vector,
    read_json,
)
from .duality import norming_set
from .errors import ConfigError, SeqspaceError
from .operators import OperatorSpec, ProjectionSpec, minimal_projection_search, operator_norm
from .phi import OrliczFunction, young_conjugate
from .positivity import Verdict, positivity_scan, prop_A_check
from .report import Report, emit
from .spaces import LorentzSpec, OrliczSpec, as_vector
from .theorems import (
    HyperplaneStatus,
    SubspaceStatus,
    basis_vectors_in_kernel,
    classify_orlicz_phi,
    has_property_P,
    has_property_Q,
    lorentz_hyperplane_verdict,
    refute_lorentz_hyperplane,
    orlicz_subspace_verdict,
    within_basis_vector_bound,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERDICT = 2


class FunctionalFamily(BaseModel):
    fs: List[List[float]]


def common_options(command: Callable) -> Callable:
    """Run flags shared by every subcommand"""
    options = [
        click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Seed for all sampling."),
        click.option("--budget", type=click.IntRange(0), default=None, help="Multistart restarts."),
        click.option("--tol", type=click.FloatRange(0.0, min_open=True), default=None, help="Absolute tolerance."),
        click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Write the report here."),
        click.option("--format", "fmt", type=click.Choice([f.value for f in OutputFormat]), default=None),
        click.option("--expect-compatible", is_flag=True, help="Exit 2 on Refuted/Impossible/Incompatible verdicts."),
        click.option("--verbose", "-v", is_flag=True, help="Debug logging."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


class Run:
    """Resolved configuration plus report output for one subcommand"""

    def __init__(self, command: str, space: Optional[Any], params: dict):
        logging.getLogger().setLevel(logging.DEBUG if params.pop("verbose") else logging.WARNING)
        self.command = command
        self.expect_compatible = params.pop("expect_compatible")
        self.config = RunConfig.from_settings(
            Settings(),
            space=space,
            seed=params.pop("seed"),
            budget=params.pop("budget"),
            tol=params.pop("tol"),
            out=params.pop("out"),
            format=params.pop("fmt"),
        )

    @property
    def space(self):
        if self.config.space is None:
            raise click.UsageError("--space is required")
        return self.config.space

    @property
    def budget(self):
        return self.config.budget.search_budget()

    def finish(self, result: Any, refuted: bool = False) -> int:
        report = Report.build(self.command, self.config, result)
        text = emit(report, self.config.output.format, self.config.output.path)
        if self.config.output.path is None:
            click.echo(text)
        if refuted and self.expect_compatible:
            logger.warning(f"{self.command}: verdict is not compatible")
            return EXIT_VERDICT
        return EXIT_OK


def space_option(required: bool = True) -> Callable:
    return click.option(
        "--space", "space_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
        required=required, help="Space JSON (lorentz or orlicz).",
    )


def vector_option(name: str, required: bool = True, help: str = "") -> Callable:
    return click.option(name, type=str, required=required, help=help or "Comma-separated coordinates.")


def with_run(command: str) -> Callable:
    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(space_path: Optional[Path] = None, **params):
            space = load_space(space_path) if space_path is not None else None
            run = Run(command, space, params)
            return func(run, **params)
        return wrapper
    return decorator


@click.group()
@click.version_option(__version__, prog_name="seqspace")
def cli():
    """Norms, duality and contractive projections in finite-dimensional Lorentz and Orlicz sequence spaces."""


@cli.command()
@space_option()
@vector_option("--x")
@common_options
@with_run("norm")
def norm(run: Run, x: str) -> int:
    """Norm of a vector."""
    from .spaces import norm as space_norm

    vector = as_vector(run.space, parse_vector(x))
    return run.finish({"x": vector.tolist(), "norm": space_norm(run.space, vector)})


@cli.command()
@space_option(required=False)
@click.option("--phi", "phi_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
              help="Orlicz function JSON (pieces or preset).")
@click.option("--points", type=click.IntRange(2), default=11, help="Table rows on [0, 2].")
@common_options
@with_run("conjugate")
def conjugate(run: Run, phi_path: Optional[Path], points: int) -> int:
    """Young conjugate of phi with a value table."""
    if phi_path is not None:
        phi = load_model(phi_path, OrliczFunction)
    elif isinstance(run.config.space, OrliczSpec):
        phi = run.config.space.phi
    else:
        raise click.UsageError("give --phi or an Orlicz --space")
    conj = young_conjugate(phi)
    grid = np.linspace(0.0, 2.0, points)
    values = np.asarray(conj(grid), dtype=float)
    table = [{"t": float(t), "phi": float(phi(t)), "conjugate": (float(v) if np.isfinite(v) else "inf")}
             for t, v in zip(grid, values)]
    return run.finish({
        "pieces": [piece.model_dump() for piece in conj.pieces],
        "domain_end": conj.domain_end,
        "table": table,
    })


@cli.command()
@space_option()
@vector_option("--x")
@click.option("--cap", type=click.IntRange(1), default=64, help="Largest number of extremes enumerated.")
@common_options
@with_run("norming")
def norming(run: Run, x: str, cap: int) -> int:
    """Norming functional and extreme norming functionals."""
    vector = as_vector(run.space, parse_vector(x))
    found = norming_set(run.space, vector, cap, run.config.seed)
    return run.finish({
        "x": vector.tolist(),
        "functional": found.functionals[0].tolist(),
        "extremes": [g.tolist() for g in found.functionals],
        "complete": found.complete,
    })


def _operator(path: Path, run: Run) -> np.ndarray:
    T = load_model(path, OperatorSpec).array
    if T.shape[0] != run.space.dim:
        raise ConfigError(f"operator is {T.shape[0]}x{T.shape[0]}, space has dimension {run.space.dim}", source=str(path))
    return T


@cli.command()
@space_option()
@click.option("--matrix", "matrix_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True,
              help='Operator JSON {"matrix": [[...], ...]}.')
@common_options
@with_run("opnorm")
def opnorm(run: Run, matrix_path: Path) -> int:
    """Lower-bound estimate of an operator norm."""
    estimate = operator_norm(run.space, _operator(matrix_path, run), run.budget, run.config.seed)
    return run.finish({"norm": estimate.value, "maximizer": estimate.maximizer.tolist()})


@cli.command()
@space_option()
@click.option("--matrix", "matrix_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--projection", "projection_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help='Projection JSON {"fs": [...], "us": [...]}; checks ||P|| = 1 against positivity of Id - P.')
@common_options
@with_run("positivity")
def positivity(run: Run, matrix_path: Optional[Path], projection_path: Optional[Path]) -> int:
    """Numerical positivity scan of an operator (or of Id - P)."""
    tol = run.config.tolerances.absolute
    if projection_path is not None:
        check = prop_A_check(run.space, load_model(projection_path, ProjectionSpec), run.budget, run.config.seed)
        return run.finish(check, refuted=check.positivity.verdict is Verdict.REFUTED)
    if matrix_path is None:
        raise click.UsageError("give --matrix or --projection")
    report = positivity_scan(run.space, _operator(matrix_path, run), run.budget, run.config.seed, tol)
    return run.finish(report, refuted=report.verdict is Verdict.REFUTED)


def _functionals(path: Path) -> np.ndarray:
    data = read_json(path)
    if isinstance(data, list):
        data = {"fs": data}
    try:
        return np.asarray(FunctionalFamily.model_validate(data).fs, dtype=float)
    except ValidationError as e:
        raise ConfigError(str(e.errors()[0]["msg"]), source=str(path)) from e


@cli.command()
@space_option()
@click.option("--fs", "fs_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True,
              help="Kernel functionals JSON (list of rows).")
@common_options
@with_run("minproj")
def minproj(run: Run, fs_path: Path) -> int:
    """Search for a minimal-norm projection onto the kernel intersection."""
    found = minimal_projection_search(run.space, _functionals(fs_path), run.budget, run.config.seed)
    return run.finish({
        "norm": found.norm,
        "maximizer": found.maximizer.tolist(),
        "projection": found.projection.model_dump(),
    })


@cli.group()
def classify():
    """Theorem-based verdicts and classifiers."""


@classify.command("lorentz-hyperplane")
@space_option()
@vector_option("--f", help="Functional coefficients.")
@vector_option("--u", required=False, help="Vector with f(u) = 1; searches for a refuting witness.")
@common_options
@with_run("classify lorentz-hyperplane")
def lorentz_hyperplane(run: Run, f: str, u: Optional[str]) -> int:
    """Whether ker f can be 1-complemented in a Lorentz space."""
    if not isinstance(run.space, LorentzSpec):
        raise click.UsageError("lorentz-hyperplane needs a lorentz space")
    coefficients = parse_vector(f)
    verdict = lorentz_hyperplane_verdict(run.space, coefficients)
    result: dict = verdict.model_dump(mode="json")
    if u is not None:
        witness = refute_lorentz_hyperplane(run.space, coefficients, parse_vector(u), run.budget, run.config.seed)
        result["witness"] = witness.model_dump() if witness is not None else None
    return run.finish(result, refuted=verdict.status is HyperplaneStatus.IMPOSSIBLE)


@classify.command("orlicz-subspace")
@space_option()
@click.option("--fs", "fs_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--contains-basis-vector/--no-basis-vector", default=None,
              help="Override detection of a basis vector in the subspace.")
@common_options
@with_run("classify orlicz-subspace")
def orlicz_subspace(run: Run, fs_path: Path, contains_basis_vector: Optional[bool]) -> int:
    """Necessary conditions for a 1-complemented kernel intersection in an Orlicz space."""
    if not isinstance(run.space, OrliczSpec):
        raise click.UsageError("orlicz-subspace needs an orlicz space")
    fs = _functionals(fs_path)
    verdict = orlicz_subspace_verdict(run.space, fs, contains_basis_vector)
    result: dict = verdict.model_dump(mode="json")
    result["basis_vectors"] = basis_vectors_in_kernel(fs)
    result["within_basis_vector_bound"] = within_basis_vector_bound(fs)
    result["property_P"] = has_property_P(run.space)
    result["property_Q"] = has_property_Q(run.space)
    return run.finish(result, refuted=verdict.status is SubspaceStatus.INCOMPATIBLE)


@classify.command("phi")
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True,
              help="Orlicz function JSON, or an orlicz space JSON.")
@common_options
@with_run("classify phi")
def classify_phi(run: Run, spec_path: Path) -> int:
    """Compare phi with powers t^p near 0."""
    data = read_json(spec_path)
    if isinstance(data, dict) and isinstance(data.get("phi"), dict):
        data = data["phi"]
    try:
        phi = OrliczFunction.model_validate(data)
    except ValidationError as e:
        raise ConfigError(str(e.errors()[0]["msg"]), source=str(spec_path)) from e
    found = classify_orlicz_phi(phi)
    return run.finish({"class": found.label(), **found.model_dump(mode="json")})


@cli.command()
@click.option("--case", "cases", multiple=True,
              help=f"Case id or name ({', '.join(c.name for c in CASES)}); all when omitted.")
@click.option("--quick", is_flag=True, help="Smaller sample counts.")
@common_options
@with_run("verify")
def verify(run: Run, cases: tuple, quick: bool) -> int:
    """Run the acceptance suite and print a pass/fail table."""
    try:
        results = run_suite(list(cases) or None, CaseContext(seed=run.config.seed, scale=0.1 if quick else 1.0))
    except KeyError as e:
        raise click.BadParameter(str(e.args[0]), param_hint="--case")
    code = run.finish({"cases": [r.model_dump() for r in results], "passed": all(r.passed for r in results)})
    if code == EXIT_OK and not all(r.passed for r in results):
        return EXIT_VERDICT
    return code


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    logging.basicConfig(level=logging.WARNING, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    try:
        code = cli.main(args=argv, prog_name="seqspace", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_USAGE
    except SeqspaceError as e:
        click.echo(f"Error: {e}", err=True)
        logger.debug("Run failed", exc_info=True)
        return EXIT_USAGE
    except ValueError as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_USAGE
    return code if isinstance(code, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
