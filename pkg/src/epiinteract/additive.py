"""Additive interaction measures and the per-pair interaction report."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .closed_form import (
    DEFAULT_Z,
    Coefficients,
    EffectEstimates,
    StandardErrors,
    coefficients_from_table,
    effect_estimates,
    standard_errors_from_table,
)
from .glm import fit_interaction_model
from .tables import ContingencyTable, continuity_correct, validate_for_estimation

LARGE_COEFFICIENT = 15.0

SI_NULL_REASON = "denominator (OR10 - 1) + (OR01 - 1) is zero"

ESTIMATORS = ("closed-form", "glm")


@dataclass(frozen=True)
class AdditiveMeasures:
    """RERI, AP and SI.  ``si`` is ``None`` when its denominator vanishes."""

    reri: float
    ap: float
    si: Optional[float]
    si_reason: Optional[str] = None

    @property
    def si_defined(self) -> bool:
        return self.si is not None


def additive_measures(e: EffectEstimates) -> AdditiveMeasures:
    reri = e.or11 - e.or10 - e.or01 + 1
    ap = reri / e.or11
    denom = (e.or10 - 1) + (e.or01 - 1)
    if denom == 0:
        return AdditiveMeasures(reri, ap, None, SI_NULL_REASON)
    return AdditiveMeasures(reri, ap, (e.or11 - 1) / denom)


@dataclass(frozen=True)
class ReportConfig:
    z: float = DEFAULT_Z
    correction: Optional[float] = None  # None disables continuity correction
    estimator: str = "closed-form"

    def __post_init__(self):
        if not self.z > 0:
            raise ValueError(f"z multiplier must be positive, got {self.z}")
        if self.correction is not None and self.correction < 0:
            raise ValueError(f"correction must be >= 0, got {self.correction}")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}")


@dataclass(frozen=True)
class ReportFlags:
    zero_cells: tuple[str, ...] = ()
    correction_applied: bool = False
    correction_amount: float = 0.0
    source: str = "closed-form"
    large_coefficient: bool = False
    # SI denominator < 0: at least one exposure protective on its own
    qualitative_interpretation: bool = False


@dataclass(frozen=True)
class FitDiagnostics:
    deviance: float
    null_deviance: float
    aic: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class InteractionReport:
    table: ContingencyTable
    coefficients: Coefficients
    ses: StandardErrors
    effects: EffectEstimates
    additive: AdditiveMeasures
    n: float
    n11: float
    dropped: int
    z: float
    flags: ReportFlags = field(default_factory=ReportFlags)
    fit: Optional[FitDiagnostics] = None


def _flags_for(coefs, effects, zero_cells, correction, source) -> ReportFlags:
    betas = (coefs.beta0, coefs.betaX, coefs.betaY, coefs.betaXY, coefs.betaXplusY)
    return ReportFlags(
        zero_cells=zero_cells,
        correction_applied=correction is not None,
        correction_amount=correction or 0.0,
        source=source,
        large_coefficient=any(abs(b) > LARGE_COEFFICIENT for b in betas),
        qualitative_interpretation=(effects.or10 - 1) + (effects.or01 - 1) < 0,
    )


def _glm_estimates(t: ContingencyTable):
    fit = fit_interaction_model(t)
    b0, bx, by, bxy = (float(v) for v in fit.coefficients)
    se0, sex, sey, sexy = (float(v) for v in fit.standard_errors)
    b_sum, se_sum = fit.contrast([0.0, 1.0, 1.0, 1.0])
    coefs = Coefficients(b0, bx, by, bxy, b_sum)
    ses = StandardErrors(se0, sex, sey, sexy, se_sum)
    diag = FitDiagnostics(fit.deviance, fit.null_deviance, fit.aic, fit.iterations, fit.converged)
    return coefs, ses, diag


def build_report(
    t: ContingencyTable, config: ReportConfig = ReportConfig(), dropped: int = 0
) -> InteractionReport:
    """Estimate everything for one exposure pair.

    Zero cells raise :class:`~epiinteract.errors.EstimationError` unless
    ``config.correction`` is set, in which case the correction is added to all
    eight cells before estimation.  ``n`` and ``n11`` describe the observed
    (uncorrected) table.
    """
    zero_cells = validate_for_estimation(t).zero_cells
    work = t if config.correction is None else continuity_correct(t, config.correction)

    diag = None
    if config.estimator == "glm":
        coefs, ses, diag = _glm_estimates(work)
    else:
        coefs = coefficients_from_table(work)
        ses = standard_errors_from_table(work)
    effects = effect_estimates(coefs, ses, config.z)
    additive = additive_measures(effects)
    return InteractionReport(
        table=t,
        coefficients=coefs,
        ses=ses,
        effects=effects,
        additive=additive,
        n=t.n,
        n11=t.n11,
        dropped=dropped,
        z=config.z,
        flags=_flags_for(coefs, effects, zero_cells, config.correction, config.estimator),
        fit=diag,
    )
