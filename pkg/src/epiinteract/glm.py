"""Logistic regression by iteratively reweighted least squares.

All predictors here are binary, so data are collapsed to one row per exposure
stratum with a trial weight and the observed proportion of positives.  The
grouped likelihood has the same maximiser and curvature as the record-level
Bernoulli likelihood; deviance and AIC are reported on the Bernoulli scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConvergenceError, EstimationError, SeparationError
from .tables import ContingencyTable, RecordSet, STRATA, table_from_records

MAX_ITERATIONS = 50
COEF_TOL = 1e-10
DEVIANCE_TOL = 1e-12

INTERACTION_TERMS = ("(Intercept)", "X", "Y", "X:Y")
COMBINED_TERMS = ("(Intercept)", "T")


@dataclass(frozen=True)
class IRLSResult:
    coefficients: np.ndarray
    covariance: np.ndarray
    deviance: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class FitResult:
    terms: tuple[str, ...]
    coefficients: np.ndarray
    covariance: np.ndarray
    deviance: float
    null_deviance: float
    aic: float
    iterations: int
    converged: bool
    n_used: float
    n_dropped: int

    @property
    def standard_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))

    @property
    def df_residual(self) -> float:
        return self.n_used - len(self.terms)

    def coef(self, term: str) -> float:
        return float(self.coefficients[self.terms.index(term)])

    def se(self, term: str) -> float:
        return float(self.standard_errors[self.terms.index(term)])

    def contrast(self, weights) -> tuple[float, float]:
        """Estimate and SE of a linear combination of coefficients."""
        w = np.asarray(weights, dtype=float)
        return float(w @ self.coefficients), float(np.sqrt(w @ self.covariance @ w))


def _log1pexp(eta: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, eta)


def _expit(eta: np.ndarray) -> np.ndarray:
    return np.exp(-_log1pexp(-eta))


def log_likelihood(design, response, weights, beta) -> float:
    """Bernoulli log-likelihood of grouped rows (``response`` = proportion positive)."""
    X = np.asarray(design, dtype=float)
    w = np.asarray(weights, dtype=float)
    s = w * np.asarray(response, dtype=float)
    eta = X @ np.asarray(beta, dtype=float)
    return float(np.sum(s * eta - w * _log1pexp(eta)))


def score(design, response, weights, beta) -> np.ndarray:
    """Gradient of :func:`log_likelihood` with respect to ``beta``."""
    X = np.asarray(design, dtype=float)
    w = np.asarray(weights, dtype=float)
    s = w * np.asarray(response, dtype=float)
    p = _expit(X @ np.asarray(beta, dtype=float))
    return X.T @ (s - w * p)


def _information(X, w, beta):
    p = _expit(X @ beta)
    return (X * (w * p * (1 - p))[:, None]).T @ X


def irls_solve(
    design,
    response,
    weights=None,
    *,
    max_iterations: int = MAX_ITERATIONS,
    coef_tol: float = COEF_TOL,
    deviance_tol: float = DEVIANCE_TOL,
) -> IRLSResult:
    """Maximise the logistic likelihood by Fisher scoring from ``beta = 0``.

    Stops when the largest coefficient update falls below ``coef_tol`` or the
    deviance changes by less than ``deviance_tol``.
    """
    X = np.atleast_2d(np.asarray(design, dtype=float))
    r = np.asarray(response, dtype=float)
    w = np.ones(len(r)) if weights is None else np.asarray(weights, dtype=float)
    if X.shape[0] != len(r) or len(r) != len(w):
        raise ValueError("design, response and weights disagree in length")
    if np.any(w < 0) or np.any((r < 0) | (r > 1)):
        raise ValueError("weights must be >= 0 and responses in [0, 1]")

    used = w > 0
    if np.linalg.matrix_rank(X[used]) < X.shape[1]:
        raise EstimationError("design matrix is rank deficient on the used rows")

    beta = np.zeros(X.shape[1])
    deviance = -2 * log_likelihood(X, r, w, beta)
    converged = False
    iterations = 0
    while iterations < max_iterations:
        iterations += 1
        step = np.linalg.solve(_information(X, w, beta), score(X, r, w, beta))
        beta = beta + step
        new_deviance = -2 * log_likelihood(X, r, w, beta)
        if not np.isfinite(new_deviance) or not np.all(np.isfinite(beta)):
            raise ConvergenceError(f"IRLS diverged at iteration {iterations}")
        small_step = np.max(np.abs(step)) < coef_tol
        small_change = abs(new_deviance - deviance) < deviance_tol
        deviance = new_deviance
        if small_step or small_change:
            converged = True
            break
    if not converged:
        raise ConvergenceError(f"IRLS did not converge in {max_iterations} iterations")

    covariance = np.linalg.inv(_information(X, w, beta))
    covariance = (covariance + covariance.T) / 2
    return IRLSResult(beta, covariance, deviance, iterations, converged)


def _tabulate(data: Union[RecordSet, ContingencyTable]) -> tuple[ContingencyTable, int]:
    if isinstance(data, RecordSet):
        return table_from_records(data)
    return data, 0


def _grouped(t: ContingencyTable, letters: str):
    """Return (successes, trials) per stratum for the given cell letters."""
    s = np.array([t.cell(f"{k}1") for k in letters])
    m = np.array([t.cell(f"{k}0") + t.cell(f"{k}1") for k in letters])
    return s, m


def _check_separation(t: ContingencyTable, letters: str) -> None:
    zero = [f"{k}{z}" for k in letters for z in (0, 1) if t.cell(f"{k}{z}") <= 0]
    if zero:
        raise SeparationError(
            f"separation: zero count in cell(s) {', '.join(zero)}; MLE does not exist", zero
        )


def _fit_grouped(design, s, m, terms, n_dropped) -> FitResult:
    r = s / m
    fit = irls_solve(design, r, m)
    null = irls_solve(np.ones((len(m), 1)), r, m)
    return FitResult(
        terms=terms,
        coefficients=fit.coefficients,
        covariance=fit.covariance,
        deviance=fit.deviance,
        null_deviance=null.deviance,
        aic=fit.deviance + 2 * len(terms),
        iterations=fit.iterations,
        converged=fit.converged,
        n_used=float(m.sum()),
        n_dropped=n_dropped,
    )


def fit_interaction_model(data: Union[RecordSet, ContingencyTable]) -> FitResult:
    """Fit ``Z ~ X + Y + X:Y``."""
    t, dropped = _tabulate(data)
    if t.n == 0:
        raise EstimationError("no complete cases")
    _check_separation(t, "abcd")
    design = np.array([[1.0, x, y, x * y] for x, y in (STRATA[k] for k in "abcd")])
    s, m = _grouped(t, "abcd")
    return _fit_grouped(design, s, m, INTERACTION_TERMS, dropped)


def fit_combined_model(data: Union[RecordSet, ContingencyTable]) -> FitResult:
    """Fit ``Z ~ T`` where T is 1 for doubly exposed, 0 for doubly unexposed.

    Subjects with exactly one exposure are excluded and counted as dropped.
    """
    t, dropped = _tabulate(data)
    single = t.b0 + t.b1 + t.c0 + t.c1
    if t.a0 + t.a1 + t.d0 + t.d1 == 0:
        raise EstimationError("no subjects in the doubly exposed or unexposed strata")
    _check_separation(t, "ad")
    design = np.array([[1.0, 0.0], [1.0, 1.0]])
    s, m = _grouped(t, "ad")
    return _fit_grouped(design, s, m, COMBINED_TERMS, dropped + int(round(single)))
