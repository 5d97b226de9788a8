import math

import mpmath
import numpy as np
import pytest

from epiinteract import (
    ContingencyTable,
    ConvergenceError,
    EstimationError,
    SeparationError,
    coefficients_from_table,
    expand_table,
    fit_combined_model,
    fit_interaction_model,
    irls_solve,
    standard_errors_from_table,
)
from epiinteract.glm import score
from epiinteract.tables import RecordSet

from conftest import D1, EXAMPLE1_COEF, EXAMPLE1_SE, TABLE_P, UNIFORM, random_tables

DESIGN = np.array([[1.0, 0, 0, 0], [1, 0, 1, 0], [1, 1, 0, 0], [1, 1, 1, 1]])


def grouped(t):
    s = np.array([t.a1, t.b1, t.c1, t.d1])
    m = np.array([t.a0 + t.a1, t.b0 + t.b1, t.c0 + t.c1, t.d0 + t.d1])
    return s, m


def mp_loglik(s, m, beta):
    """Grouped Bernoulli log-likelihood in 40-digit arithmetic."""
    with mpmath.workdps(40):
        total = mpmath.mpf(0)
        for row, sk, mk in zip(DESIGN, s, m):
            eta = sum(mpmath.mpf(float(v)) * mpmath.mpf(float(b)) for v, b in zip(row, beta))
            total += mpmath.mpf(float(sk)) * eta - mpmath.mpf(float(mk)) * mpmath.log1p(mpmath.exp(eta))
        return total


def fd_gradient(s, m, beta, h=1e-6):
    grad = []
    for i in range(len(beta)):
        up, down = list(beta), list(beta)
        up[i] += h
        down[i] -= h
        with mpmath.workdps(40):
            grad.append(float((mp_loglik(s, m, up) - mp_loglik(s, m, down)) / (2 * mpmath.mpf(h))))
    return np.array(grad)


def test_example1_fit():
    fit = fit_interaction_model(expand_table(TABLE_P))
    assert np.max(np.abs(fit.coefficients - EXAMPLE1_COEF)) <= 5e-7
    assert np.max(np.abs(fit.standard_errors - EXAMPLE1_SE)) <= 5e-7
    assert fit.null_deviance == pytest.approx(1385.3, abs=0.05)
    assert fit.deviance == pytest.approx(1384.4, abs=0.05)
    assert fit.aic == pytest.approx(1392.4, abs=0.05)
    assert fit.n_used == 1000 and fit.n_dropped == 0
    assert fit.converged and fit.iterations <= 50


def test_uniform_fit_zero():
    fit = fit_interaction_model(UNIFORM)
    assert np.max(np.abs(fit.coefficients)) < 1e-8


def test_d1_fit():
    fit = fit_interaction_model(D1)
    ln2 = math.log(2)
    assert fit.coefficients == pytest.approx([0, ln2, -ln2, ln2], abs=1e-8)


def test_combined_example2():
    fit = fit_combined_model(expand_table(TABLE_P))
    assert fit.terms == ("(Intercept)", "T")
    assert fit.coef("(Intercept)") == pytest.approx(0.09309, abs=5e-5)
    assert fit.se("(Intercept)") == pytest.approx(0.12465, abs=5e-5)
    assert fit.coef("T") == pytest.approx(0.01313, abs=5e-5)
    assert fit.se("T") == pytest.approx(0.17863, abs=5e-5)
    assert (fit.n_used, fit.n_dropped) == (503, 497)
    assert fit.null_deviance == pytest.approx(696.06, abs=0.05)
    assert fit.deviance == pytest.approx(696.06, abs=0.05)
    assert fit.aic == pytest.approx(700.06, abs=0.05)


def test_combined_uniform_and_d1():
    u = fit_combined_model(UNIFORM)
    assert u.coef("T") == pytest.approx(0, abs=1e-12)
    assert u.se("T") == pytest.approx(math.sqrt(4 / 50), rel=1e-12)
    d = fit_combined_model(D1)
    assert d.coef("T") == pytest.approx(math.log(2), abs=1e-10)
    assert d.se("T") == pytest.approx(0.1870829, abs=1e-7)


def test_combined_counts_missing_as_dropped():
    rs = RecordSet.from_records([(1, 0, 0), (0, 0, 0), (1, 1, 1), (0, 1, 1), (1, 1, 0), (1, None, 0)])
    fit = fit_combined_model(rs)
    assert (fit.n_used, fit.n_dropped) == (4, 2)


def test_intercept_only_null_model():
    y = np.r_[np.ones(264), np.zeros(239)]
    res = irls_solve(np.ones((503, 1)), y)
    assert res.coefficients[0] == pytest.approx(math.log(264 / 239), abs=1e-12)
    assert res.deviance == pytest.approx(696.06, abs=0.05)


def test_opposite_outcomes_intercept_zero():
    res = irls_solve(np.ones((2, 1)), [0.0, 1.0])
    assert res.coefficients[0] == pytest.approx(0, abs=1e-15)


@pytest.mark.parametrize("t", random_tables(10, seed=3, high=40))
def test_weighted_equals_record_level(t):
    rs = expand_table(t)
    X = np.column_stack([np.ones(rs.n_total), rs.x, rs.y, rs.x * rs.y]).astype(float)
    literal = irls_solve(X, rs.z.astype(float))
    grouped_fit = fit_interaction_model(t)
    assert np.max(np.abs(literal.coefficients - grouped_fit.coefficients)) < 1e-12
    assert np.max(np.abs(literal.covariance - grouped_fit.covariance)) < 1e-12
    assert literal.deviance == pytest.approx(grouped_fit.deviance, abs=1e-9)


def test_separation_names_cell():
    t = ContingencyTable(50, 50, 50, 50, 50, 50, 0, 50)
    with pytest.raises(SeparationError) as info:
        fit_interaction_model(t)
    assert info.value.cells == ("d0",)
    with pytest.raises(SeparationError):
        fit_combined_model(ContingencyTable(0, 5, 1, 1, 1, 1, 5, 5))


def test_empty_input():
    with pytest.raises(EstimationError, match="no complete cases"):
        fit_interaction_model(RecordSet.from_records([(None, 0, 0)]))


def test_rank_deficient():
    with pytest.raises(EstimationError, match="rank"):
        irls_solve(np.array([[1.0, 1.0], [1.0, 1.0]]), [0.0, 1.0])


def test_non_convergence_reported():
    with pytest.raises(ConvergenceError):
        irls_solve(np.ones((2, 1)), [0.2, 0.9], [10, 10], max_iterations=1)


def test_fit_invariants():
    fit = fit_interaction_model(TABLE_P)
    assert np.allclose(fit.standard_errors**2, np.diag(fit.covariance), rtol=1e-15)
    assert fit.aic - fit.deviance == 2 * len(fit.terms)
    assert np.array_equal(fit.covariance, fit.covariance.T)
    assert np.all(np.linalg.eigvalsh(fit.covariance) > 0)


@pytest.mark.parametrize("t", random_tables(25, seed=11))
def test_score_zero_and_fd_agreement(t):
    s, m = grouped(t)
    fit = fit_interaction_model(t)
    g = score(DESIGN, s / m, m, fit.coefficients)
    assert np.max(np.abs(g)) < 1e-8
    assert np.max(np.abs(fd_gradient(s, m, fit.coefficients) - g)) < 1e-4


@pytest.mark.parametrize("t", random_tables(50, seed=5))
def test_saturated_equivalence(t):
    fit = fit_interaction_model(t)
    c, s = coefficients_from_table(t), standard_errors_from_table(t)
    assert fit.coefficients == pytest.approx([c.beta0, c.betaX, c.betaY, c.betaXY], abs=1e-8)
    assert fit.standard_errors == pytest.approx([s.se0, s.seX, s.seY, s.seXY], abs=1e-8)
    combined = fit_combined_model(t)
    assert combined.coef("T") == pytest.approx(float(fit.coefficients[1:].sum()), abs=1e-8)
    assert combined.se("T") == pytest.approx(s.seXplusY, abs=1e-8)
    assert fit.contrast([0, 1, 1, 1])[1] == pytest.approx(s.seXplusY, abs=1e-8)
