"""Counting lemma, module probabilities, degeneracy and entropy-density bounds."""

from bounds.degeneracy import degeneracy_lower_bound, entropy_density
from bounds.estimators import empirical_module_density, exact_match_probability, f_of_half
from bounds.lemma import lemma_counts
from bounds.report import (
    BoundParameterError,
    density_constant,
    hoeffding_k0,
    report_to_json,
    reports_to_csv,
    bound_report,
    write_reports,
)

__all__ = [
    "degeneracy_lower_bound",
    "entropy_density",
    "empirical_module_density",
    "exact_match_probability",
    "f_of_half",
    "lemma_counts",
    "BoundParameterError",
    "density_constant",
    "hoeffding_k0",
    "report_to_json",
    "reports_to_csv",
    "bound_report",
    "write_reports",
]
