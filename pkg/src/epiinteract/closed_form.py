"""Coefficients, standard errors and odds ratios computed directly from counts.

The four-parameter logistic model ``Z ~ X + Y + X:Y`` is saturated for two
binary exposures, so its maximum likelihood estimates are the empirical
log-odds contrasts and its Fisher standard errors are Woolf-type sums of
reciprocal counts.  No iteration is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import EstimationError
from .tables import ContingencyTable, validate_for_estimation

DEFAULT_Z = 1.96


@dataclass(frozen=True)
class Coefficients:
    """Log-odds scale estimates. ``betaXplusY`` is the doubly exposed log OR."""

    beta0: float
    betaX: float
    betaY: float
    betaXY: float
    betaXplusY: float


@dataclass(frozen=True)
class StandardErrors:
    se0: float
    seX: float
    seY: float
    seXY: float
    seXplusY: float


@dataclass(frozen=True)
class EffectEstimates:
    or10: float
    or01: float
    or11: float
    mi: float
    ci10: tuple[float, float]
    ci01: tuple[float, float]
    ci11: tuple[float, float]
    ciMI: tuple[float, float]


@dataclass(frozen=True)
class CombinedSummaryInput:
    """Published summary quantities sufficient to recover SE of the combined log OR.

    Give either ``betaXplusY`` or all of ``betaX``, ``betaY`` and ``betaXY``.
    """

    beta0: float
    se0: float
    n11: float
    betaXplusY: Optional[float] = None
    betaX: Optional[float] = None
    betaY: Optional[float] = None
    betaXY: Optional[float] = None

    def __post_init__(self):
        parts = (self.betaX, self.betaY, self.betaXY)
        if self.betaXplusY is None:
            if any(p is None for p in parts):
                raise ValueError("need betaXplusY or all of betaX, betaY, betaXY")
            object.__setattr__(self, "betaXplusY", self.betaX + self.betaY + self.betaXY)
        if self.n11 <= 0:
            raise ValueError(f"n11 must be positive, got {self.n11}")
        if self.se0 < 0:
            raise ValueError(f"se0 must be nonnegative, got {self.se0}")

    @property
    def j(self) -> float:
        return math.exp(self.betaXplusY + self.beta0)


def _require_positive(t: ContingencyTable) -> None:
    diag = validate_for_estimation(t)
    if not diag.estimable:
        names = ", ".join(diag.zero_cells)
        raise EstimationError(f"zero count in cell(s) {names}; estimates undefined", diag.zero_cells)


def coefficients_from_table(t: ContingencyTable) -> Coefficients:
    _require_positive(t)
    log_odds_a = math.log(t.a1 / t.a0)
    beta_x = math.log(t.c1 / t.c0) - log_odds_a
    beta_y = math.log(t.b1 / t.b0) - log_odds_a
    beta_xy_sum = math.log(t.d1 / t.d0) - log_odds_a
    return Coefficients(
        beta0=log_odds_a,
        betaX=beta_x,
        betaY=beta_y,
        betaXY=beta_xy_sum - beta_x - beta_y,
        betaXplusY=beta_xy_sum,
    )


def standard_errors_from_table(t: ContingencyTable) -> StandardErrors:
    """Fisher standard errors of the saturated model.

    The interaction term's variance is the sum of all eight reciprocal counts.
    """
    _require_positive(t)
    inv_a = 1 / t.a1 + 1 / t.a0
    inv_b = 1 / t.b1 + 1 / t.b0
    inv_c = 1 / t.c1 + 1 / t.c0
    inv_d = 1 / t.d1 + 1 / t.d0
    return StandardErrors(
        se0=math.sqrt(inv_a),
        seX=math.sqrt(inv_c + inv_a),
        seY=math.sqrt(inv_b + inv_a),
        seXY=math.sqrt(inv_a + inv_b + inv_c + inv_d),
        seXplusY=math.sqrt(inv_d + inv_a),
    )


def wald_ci(beta: float, se: float, z: float = DEFAULT_Z) -> tuple[float, float]:
    return (math.exp(beta - z * se), math.exp(beta + z * se))


def effect_estimates(c: Coefficients, s: StandardErrors, z: float = DEFAULT_Z) -> EffectEstimates:
    if not z > 0:
        raise ValueError(f"z multiplier must be positive, got {z}")
    return EffectEstimates(
        or10=math.exp(c.betaX),
        or01=math.exp(c.betaY),
        or11=math.exp(c.betaXplusY),
        mi=math.exp(c.betaXY),
        ci10=wald_ci(c.betaX, s.seX, z),
        ci01=wald_ci(c.betaY, s.seY, z),
        ci11=wald_ci(c.betaXplusY, s.seXplusY, z),
        ciMI=wald_ci(c.betaXY, s.seXY, z),
    )


def combined_se_from_summary(inp: CombinedSummaryInput) -> float:
    """SE of the combined-exposure log OR from ``beta0``, ``se0`` and ``n11`` alone.

    With ``J = exp(betaXplusY + beta0)`` (the odds in the doubly exposed
    stratum), ``SE = sqrt((J + 1/J + 2) / n11 + se0**2)``.
    """
    j = inp.j
    return math.sqrt((j + 1 / j + 2) / inp.n11 + inp.se0**2)


def reconstruct_d_cells(betaXplusY: float, beta0: float, n11: float) -> tuple[float, float]:
    """Recover ``(d0, d1)`` from the combined log OR, intercept and ``n11``."""
    if n11 <= 0:
        raise ValueError(f"n11 must be positive, got {n11}")
    j = math.exp(betaXplusY + beta0)
    d1 = n11 / (1 / j + 1)
    # same as n11 - d1, without the cancellation when J is large
    d0 = n11 / (j + 1)
    return d0, d1
