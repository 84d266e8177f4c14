"""
Probabilistic degeneracy bound and entropy-density report.

With k disjoint blocks each realizing the module independently with
probability q = orientations * f(p) * p_s^|M| * p_b^|B(M)|, the number of
modules exceeds k q (1 - epsilon) with probability at least 1 - delta once k
is past the Hoeffding threshold k0, giving degeneracy > 2^(k q (1 - epsilon)).
"""

import json
import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Union

import pandas as pd

from bounds.estimators import empirical_module_density, f_of_half
from bounds.lemma import BoundParameterError
from core.models import BoundReport
from registry.specs import ModuleSpec

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "spec", "p", "p_s", "p_b", "k", "q", "epsilon", "delta",
    "exponent", "density", "method", "samples", "stderr",
]

DEFAULT_MC_SAMPLES = 10_000_000


def hoeffding_k0(q: float, epsilon: float, delta: float) -> Optional[int]:
    """
    Smallest k with exp(-2 k (q epsilon)^2) <= delta.

    Then P[modules <= k q (1 - epsilon)] <= delta. None when q = 0.
    """
    if q <= 0.0:
        return None
    return math.ceil(math.log(1.0 / delta) / (2.0 * q * q * epsilon * epsilon))


def _check_probability(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise BoundParameterError(f"{name} must lie in [0, 1] (got {value})")


def bound_report(
    spec: ModuleSpec,
    lattice_size: int,
    p: float = 0.5,
    p_s: float = 1.0,
    p_b: float = 1.0,
    epsilon: float = 0.01,
    delta: float = 0.01,
    n_samples: Optional[int] = None,
    seed: int = 0,
    threads: Optional[int] = None,
) -> BoundReport:
    """
    Degeneracy exponent and entropy-density lower bound for a lattice size.

    f(p) is exact at p = 1/2 and estimated by Monte Carlo otherwise (or when
    ``n_samples`` is given explicitly at p = 1/2).

    Raises:
        BoundParameterError: For epsilon or delta outside (0, 1), probabilities
            outside [0, 1] or a lattice smaller than one site
    """
    for name, value in (("epsilon", epsilon), ("delta", delta)):
        if not 0.0 < value < 1.0:
            raise BoundParameterError(f"{name} must lie in (0, 1) (got {value})")
    for name, value in (("p", p), ("p_s", p_s), ("p_b", p_b)):
        _check_probability(name, value)
    if lattice_size < 1:
        raise BoundParameterError(f"lattice_size must be >= 1 (got {lattice_size})")

    module_sites = spec.n_sites
    module_bonds = spec.block_lattice.n_bonds
    orientations = len(spec.orientations)
    dilution = p_s ** module_sites * p_b ** module_bonds

    q_exact: Optional[Fraction] = None
    samples = stderr = None
    if p == 0.5 and n_samples is None:
        method = "closed_form"
        f_exact = f_of_half(spec)
        f_p = float(f_exact)
        if p_s == 1.0 and p_b == 1.0:
            q_exact = orientations * f_exact
        q = orientations * f_p * dilution
    else:
        method = "monte_carlo"
        samples = n_samples or DEFAULT_MC_SAMPLES
        estimate = empirical_module_density(spec, p, samples, seed=seed, threads=threads)
        # the estimator counts a match in any orientation
        f_p = estimate.estimate / orientations
        stderr = estimate.stderr
        q = estimate.estimate * dilution

    k = lattice_size // module_sites
    exponent = k * q * (1.0 - epsilon)
    report = BoundReport(
        spec_id=spec.id,
        lattice_size=lattice_size,
        module_sites=module_sites,
        module_bonds=module_bonds,
        orientations=orientations,
        k=k,
        p=p,
        p_s=p_s,
        p_b=p_b,
        f_p=f_p,
        q=q,
        q_exact=str(q_exact) if q_exact is not None else None,
        epsilon=epsilon,
        delta=delta,
        exponent_lower=exponent,
        entropy_density_lower=exponent / lattice_size,
        density_limit=str(q_exact / module_sites) if q_exact is not None else None,
        k0=hoeffding_k0(q, epsilon, delta),
        method=method,
        samples=samples,
        stderr=stderr,
    )
    logger.info(
        f"Bound for '{spec.id}' (|L|={lattice_size}, p={p}): k={k}, q={q:.6g}, "
        f"exponent={exponent:.6g}, density={report.entropy_density_lower:.6g}"
    )
    return report


def density_constant(spec: ModuleSpec) -> Fraction:
    """The epsilon -> 0 entropy-density constant q / |M| at p = 1/2 without dilution."""
    return len(spec.orientations) * f_of_half(spec) / spec.n_sites


def report_to_row(report: BoundReport) -> dict:
    return {
        "spec": report.spec_id,
        "p": report.p,
        "p_s": report.p_s,
        "p_b": report.p_b,
        "k": report.k,
        "q": report.q,
        "epsilon": report.epsilon,
        "delta": report.delta,
        "exponent": report.exponent_lower,
        "density": report.entropy_density_lower,
        "method": report.method,
        "samples": report.samples,
        "stderr": report.stderr,
    }


def reports_to_frame(reports: Iterable[BoundReport]) -> pd.DataFrame:
    return pd.DataFrame([report_to_row(r) for r in reports], columns=CSV_COLUMNS)


def reports_to_csv(reports: Iterable[BoundReport]) -> str:
    return reports_to_frame(reports).to_csv(index=False)


def report_to_json(report: Union[BoundReport, list]) -> str:
    if isinstance(report, list):
        return json.dumps([r.model_dump(mode="json") for r in report], indent=2)
    return json.dumps(report.model_dump(mode="json"), indent=2)


def write_reports(reports: Iterable[BoundReport], path: Union[str, Path]) -> Path:
    """Write JSON or CSV depending on the file suffix."""
    path = Path(path)
    reports = list(reports)
    text = reports_to_csv(reports) if path.suffix == ".csv" else report_to_json(reports)
    path.write_text(text)
    return path
