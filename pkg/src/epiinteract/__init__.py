"""Odds ratios, confidence intervals and interaction measures for two binary exposures."""

from .additive import (
    AdditiveMeasures,
    InteractionReport,
    ReportConfig,
    additive_measures,
    build_report,
)
from .bootstrap import BootstrapConfig, BootstrapResult, bootstrap_measures
from .closed_form import (
    Coefficients,
    CombinedSummaryInput,
    EffectEstimates,
    StandardErrors,
    coefficients_from_table,
    combined_se_from_summary,
    effect_estimates,
    reconstruct_d_cells,
    standard_errors_from_table,
)
from .errors import (
    ConvergenceError,
    EstimationError,
    InteractionError,
    ParseError,
    SeparationError,
)
from .glm import FitResult, fit_combined_model, fit_interaction_model, irls_solve
from .scan import ExposureMatrix, ScanRow, scan_pairs
from .sim import SimConfig, simulate_cohort
from .tables import (
    ContingencyTable,
    Record,
    RecordSet,
    continuity_correct,
    expand_table,
    table_from_records,
    validate_for_estimation,
)

__version__ = "0.1.0"
