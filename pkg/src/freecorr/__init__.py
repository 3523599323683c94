"""Moment expansions of empirical spectral measures.

Computes law-of-large-numbers moments and arbitrary-order 1/N-type
corrections from the log-asymptotics of two matrix transforms (a
multiplicative one for Hermitian ensembles, a discrete one for
signature/representation ensembles), reconstructs the limiting and
correction measures including outlier atoms, and cross-checks every
formula against independent oracles (non-crossing-partition sums, exact
small-N operator identities, quadrature, Monte Carlo).
"""

from .engine import (
    AsymptoticInput,
    ExpansionResult,
    correction1_hc,
    correction2_hc,
    expand,
    finite_rank_phi,
    hc_cumulants,
    higher_corrections_hc,
    lln_moments_hc,
    quantized_cumulants,
    schur_correction1,
    schur_lln_moments,
)
from .measures import (
    KFunction,
    RationalFunction,
    SpectralMeasure,
    catalog,
    detect_outliers,
    eval_correction_functional,
    quadrature_moments,
    reconstruct_density,
    stieltjes_values,
)
from .models import get_model, list_models
from .montecarlo import EnsembleSpec, MCReport, fit_expansion, genus_check, sample_matrix
from .ncpart import (
    CumulantTable,
    cumulants_to_moments,
    infinitesimal_moments,
    moments_to_cumulants,
)
from .series import TruncatedSeries
from .verify import (
    check_dk_eigenrelation,
    check_dk_expansion_equivalence,
    check_dk_schur_eigenrelation,
    hc_eval,
    schur_eval,
    verification_report,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticInput",
    "CumulantTable",
    "EnsembleSpec",
    "ExpansionResult",
    "KFunction",
    "MCReport",
    "RationalFunction",
    "SpectralMeasure",
    "TruncatedSeries",
    "__version__",
    "catalog",
    "check_dk_eigenrelation",
    "check_dk_expansion_equivalence",
    "check_dk_schur_eigenrelation",
    "correction1_hc",
    "correction2_hc",
    "cumulants_to_moments",
    "detect_outliers",
    "eval_correction_functional",
    "expand",
    "finite_rank_phi",
    "fit_expansion",
    "genus_check",
    "get_model",
    "hc_cumulants",
    "hc_eval",
    "higher_corrections_hc",
    "infinitesimal_moments",
    "list_models",
    "lln_moments_hc",
    "moments_to_cumulants",
    "quadrature_moments",
    "quantized_cumulants",
    "reconstruct_density",
    "sample_matrix",
    "schur_correction1",
    "schur_eval",
    "schur_lln_moments",
    "stieltjes_values",
    "verification_report",
]
