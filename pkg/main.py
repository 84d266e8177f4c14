#!/usr/bin/env python3
"""
frustration-lab - command-line entry point

Subcommands:
    lattice        build (and optionally dilute) a lattice file
    solve          exact ground-state energy and degeneracy
    verify-module  check the module property on random hosts
    density        Monte Carlo module density at a given p
    bound          degeneracy exponent and entropy-density report

Exit codes: 0 success, 2 input error, 3 resource cap, 4 self-check failure.
"""

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import List, Optional

# Add the project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

import numpy as np
from rich.panel import Panel
from rich.table import Table

from bounds.estimators import empirical_module_density
from bounds.report import report_to_json, reports_to_csv, bound_report
from core.config import get_settings, validate_settings
from core.ising import CouplingConfig
from core.lattice import BoundaryCondition, DilutionParams, Lattice, LatticeKind, build_lattice, dilute
from core.logging_setup import console, err_console, setup_logging
from core.models import RunConfig
from registry.specs import builtin_specs, get_spec
from registry.verification import verify_module
from solvers.base import BackendDisagreementError, CapacityExceededError, UnsupportedTopologyError
from solvers.solver_manager import AUTO, SolverManager

logger = logging.getLogger("frustration_lab")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CAPACITY = 3
EXIT_SELF_CHECK = 4

# Block count used by `bound` when no lattice size is given
DEFAULT_BLOCKS = 1_000_000


def _count(text: str) -> int:
    """Sample counts, accepting scientific notation such as 1e7."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text}")
    if value != int(value) or value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return int(value)


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text}")
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"probability must lie in [0, 1], got {text}")
    return value


def write_atomic(path: Path, text: str) -> Path:
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
            if not text.endswith("\n"):
                handle.write("\n")
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def emit(text: str, output: Optional[str]) -> None:
    """Artifact to the output file, or to stdout when none was given."""
    if output:
        path = write_atomic(Path(output), text)
        console.print(f"[bold green]✓[/bold green] Wrote [cyan]{path}[/cyan]")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def dump_json(data) -> str:
    return json.dumps(data, indent=2)


def run_config(args: argparse.Namespace) -> RunConfig:
    """Collect everything that determines a run's output."""
    fields = RunConfig.model_fields
    values = {name: getattr(args, name) for name in fields if getattr(args, name, None) is not None}
    values["subcommand"] = args.command
    return RunConfig(**values)


# ----------------------------------------------------------------------
# Lattice and couplings
# ----------------------------------------------------------------------

def load_lattice(args: argparse.Namespace) -> Lattice:
    if getattr(args, "input_path", None):
        path = Path(args.input_path)
        if not path.exists():
            raise FileNotFoundError(f"Lattice file not found: {path}")
        return Lattice.from_json(path.read_text())
    if args.kind is None or args.rows is None or args.cols is None:
        raise ValueError("Give --lattice FILE or all of --kind, --rows and --cols")
    return build_lattice(LatticeKind(args.kind), args.rows, args.cols, BoundaryCondition(args.boundary))


def load_couplings(args: argparse.Namespace, lattice: Lattice) -> CouplingConfig:
    if args.couplings_path:
        path = Path(args.couplings_path)
        if not path.exists():
            raise FileNotFoundError(f"Coupling file not found: {path}")
        return CouplingConfig.from_dict(lattice, json.loads(path.read_text()))
    if args.p is None:
        raise ValueError("Give --couplings FILE or --p for random couplings")
    return CouplingConfig.random(lattice, args.p, np.random.default_rng(args.seed))


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------

def cmd_lattice(args: argparse.Namespace) -> int:
    lattice = load_lattice(args)
    if args.dilute:
        p_s, p_b = args.dilute
        lattice = dilute(lattice, DilutionParams(p_s=p_s, p_b=p_b, seed=args.seed))
    emit(lattice.to_json(), args.output_path)
    if args.output_path:
        console.print(
            f"[dim]{lattice.describe()}: {lattice.n_sites} sites, {lattice.n_bonds} bonds, "
            f"{len(lattice.plaquettes)} plaquettes[/dim]"
        )
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    lattice = load_lattice(args)
    couplings = load_couplings(args, lattice)

    manager = SolverManager(self_check=args.self_check, workers=args.threads)
    logger.info(f"Solving {lattice.describe()} with backend={args.backend}")
    result = manager.solve(lattice, couplings, backend=args.backend)
    if args.save_couplings:
        write_atomic(Path(args.save_couplings), couplings.to_json())

    exclude = {"elapsed_ms"} if args.deterministic else None
    emit(dump_json(result.model_dump(mode="json", exclude=exclude)), args.output_path)
    if args.output_path:
        console.print(Panel.fit(
            f"E0 = [bold]{result.energy}[/bold]\n"
            f"|D0| = [bold]{result.degeneracy}[/bold]\n"
            f"[dim]backend: {result.backend}[/dim]",
            title=lattice.describe(),
            border_style="cyan",
        ))
    return EXIT_OK


def cmd_verify_module(args: argparse.Namespace) -> int:
    spec = get_spec(args.spec_path)
    report = verify_module(spec, collar=args.collar, n_samples=args.samples, seed=args.seed, threads=args.threads)
    emit(dump_json(report.model_dump(mode="json")), args.output_path)

    verdict = "[bold green]PASS[/bold green]" if report.passed else "[bold red]FAIL[/bold red]"
    out = console if args.output_path else err_console
    out.print(
        f"{verdict} '{report.spec_id}' on {report.host}: "
        f"{report.n_samples - len(report.failures)}/{report.n_samples} samples passed "
        f"[dim](backend {report.backend})[/dim]"
    )
    # A failing module is a verdict, not an error
    return EXIT_OK


def cmd_density(args: argparse.Namespace) -> int:
    spec = get_spec(args.spec_path)
    estimate = empirical_module_density(spec, args.p, args.samples, seed=args.seed, threads=args.threads)
    emit(dump_json(estimate.model_dump(mode="json")), args.output_path)
    out = console if args.output_path else err_console
    out.print(
        f"'{spec.id}' at p={args.p}: {estimate.estimate:.6e} ± {estimate.stderr:.2e} "
        f"({estimate.matches}/{estimate.samples})"
    )
    return EXIT_OK


def cmd_bound(args: argparse.Namespace) -> int:
    specs = builtin_specs() if args.spec_path == "all" else [get_spec(args.spec_path)]
    reports = []
    for spec in specs:
        lattice_size = args.lattice_size or spec.n_sites * DEFAULT_BLOCKS
        reports.append(bound_report(
            spec,
            lattice_size,
            p=args.p,
            p_s=args.p_s,
            p_b=args.p_b,
            epsilon=args.epsilon,
            delta=args.delta,
            n_samples=args.samples,
            seed=args.seed,
            threads=args.threads,
        ))

    as_csv = args.output_path is not None and Path(args.output_path).suffix == ".csv"
    text = reports_to_csv(reports) if as_csv else report_to_json(reports if len(reports) > 1 else reports[0])
    emit(text, args.output_path)

    digits = get_settings().float_precision_digits
    table = Table(title="Entropy-density lower bounds", show_lines=False)
    for column in ("spec", "p", "k", "q", "exponent", "density", "limit", "k0", "method"):
        table.add_column(column)
    for r in reports:
        table.add_row(
            r.spec_id,
            f"{r.p:g}",
            str(r.k),
            f"{r.q:.{digits}g}",
            f"{r.exponent_lower:.{digits}g}",
            f"{r.entropy_density_lower:.{digits}e}",
            r.density_limit or "-",
            str(r.k0) if r.k0 is not None else "-",
            r.method,
        )
    (console if args.output_path else err_console).print(table)
    return EXIT_OK


COMMANDS = {
    "lattice": cmd_lattice,
    "solve": cmd_solve,
    "verify-module": cmd_verify_module,
    "density": cmd_density,
    "bound": cmd_bound,
}


# ----------------------------------------------------------------------
# Argument parsing
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Master seed (default: FRUSTRATION_LAB_SEED)")
    common.add_argument("--threads", type=int, default=None, help="Worker processes (default: FRUSTRATION_LAB_THREADS)")
    common.add_argument("--output", "-o", dest="output_path", default=None, help="Output file (default: stdout)")
    common.add_argument("--log-level", default=None, help="Log level (default: FRUSTRATION_LAB_LOG_LEVEL)")
    common.add_argument("--log-file", default=None, help="Also log to this file")

    geometry = argparse.ArgumentParser(add_help=False)
    geometry.add_argument("--kind", choices=[k.value for k in LatticeKind if k != LatticeKind.GENERAL])
    geometry.add_argument("--rows", type=int)
    geometry.add_argument("--cols", type=int)
    geometry.add_argument("--boundary", default="free", choices=[b.value for b in BoundaryCondition])

    parser = argparse.ArgumentParser(
        prog="frustration-lab",
        description="Exact ground states and entropy lower bounds for +-J Ising models",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {get_settings().app_version}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lattice", parents=[common, geometry], help="Build a lattice file")
    p.add_argument("--dilute", nargs=2, type=_probability, metavar=("P_S", "P_B"),
                   help="Keep each site with P_S and each bond with P_B")

    p = sub.add_parser("solve", parents=[common, geometry], help="Exact ground-state energy and degeneracy")
    p.add_argument("--lattice", dest="input_path", help="Lattice JSON file")
    p.add_argument("--couplings", dest="couplings_path", help="Coupling JSON file")
    p.add_argument("--p", type=_probability, help="Random couplings, each negative with probability p")
    p.add_argument("--save-couplings", help="Write the couplings used to this file")
    p.add_argument("--backend", default=AUTO,
                   choices=[AUTO, "exhaustive", "transfer_matrix", "branch_and_bound"])
    p.add_argument("--self-check", action="store_true", help="Run every applicable backend and compare")
    p.add_argument("--deterministic", action="store_true", help="Leave run timings out of the output")

    p = sub.add_parser("verify-module", parents=[common], help="Check the module property on random hosts")
    p.add_argument("--spec", dest="spec_path", required=True, help="Built-in spec id or spec JSON file")
    p.add_argument("--collar", type=int, default=4, help="Exterior host sites around the block")
    p.add_argument("--samples", type=_count, default=100)

    p = sub.add_parser("density", parents=[common], help="Monte Carlo module density")
    p.add_argument("--spec", dest="spec_path", required=True)
    p.add_argument("--p", type=_probability, default=0.5)
    p.add_argument("--samples", type=_count, default=1_000_000)

    p = sub.add_parser("bound", parents=[common], help="Degeneracy exponent and entropy-density report")
    p.add_argument("--spec", dest="spec_path", default="all", help="Spec id, spec file or 'all'")
    p.add_argument("--p", type=_probability, default=0.5)
    p.add_argument("--p-s", dest="p_s", type=_probability, default=1.0)
    p.add_argument("--p-b", dest="p_b", type=_probability, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--lattice-size", type=_count, default=None, help="|Lambda| (default: a million blocks)")
    p.add_argument("--samples", type=_count, default=None, help="Monte Carlo samples (forces sampling at p=1/2)")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    settings = get_settings()
    if args.threads is not None:
        settings = settings.model_copy(update={"threads": args.threads})
    if args.seed is None:
        args.seed = settings.seed
    args.threads = settings.threads

    setup_logging(args.log_level or settings.log_level, args.log_file or settings.log_file)

    try:
        validate_settings(settings)
        config = run_config(args)
        logger.debug(f"Run configuration: {config.model_dump_json()}")
        return COMMANDS[args.command](args)
    except CapacityExceededError as e:
        err_console.print(f"[bold red]Resource cap exceeded:[/bold red] {e}")
        err_console.print("[dim]Raise the FRUSTRATION_LAB_*_MAX_* caps or pick another backend.[/dim]")
        return EXIT_CAPACITY
    except BackendDisagreementError as e:
        err_console.print(f"[bold red]Self-check failed:[/bold red] {e}")
        return EXIT_SELF_CHECK
    except (ValueError, FileNotFoundError, UnsupportedTopologyError) as e:
        err_console.print(f"[bold red]Error:[/bold red] {e}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
