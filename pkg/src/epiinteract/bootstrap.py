"""Nonparametric bootstrap for the interaction measures.

Each replicate ``r`` draws from its own Philox stream keyed by the seed with
counter offset ``r``, so results do not depend on how replicates are split
across worker threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .additive import build_report
from .errors import EstimationError
from .sim import philox
from .tables import ContingencyTable, validate_for_estimation

SCHEMES = ("stratified", "whole-sample")

MEASURES = ("reri", "ap", "si", "mi")
NULL_VALUES = {"reri": 0.0, "ap": 0.0, "si": 1.0, "mi": 1.0}

_CASE_IDX = [1, 3, 5, 7]
_CONTROL_IDX = [0, 2, 4, 6]


def default_workers() -> int:
    return max(1, int(os.environ.get("EPIINTERACT_THREADS", "1")))


@dataclass(frozen=True)
class BootstrapConfig:
    replicates: int = 2000
    seed: int = 0
    scheme: str = "stratified"
    alpha: float = 0.05
    ci_method: str = "percentile"

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.ci_method != "percentile":
            raise ValueError("only percentile intervals are supported")


@dataclass(frozen=True)
class MeasureInterval:
    point: Optional[float]
    ci_lower: Optional[float]
    ci_upper: Optional[float]
    p_null: Optional[float]
    null_value: float
    n_defined: int


@dataclass(frozen=True)
class BootstrapResult:
    config: BootstrapConfig
    measures: dict[str, MeasureInterval] = field(default_factory=dict)
    n_failed_replicates: int = 0

    def __getitem__(self, name: str) -> MeasureInterval:
        return self.measures[name]


def _integral_counts(t: ContingencyTable) -> np.ndarray:
    cells = t.as_array()
    if not np.all(cells == np.round(cells)):
        raise ValueError("bootstrap resampling needs integer cell counts")
    return cells.astype(np.int64)


def _draw(counts: np.ndarray, cfg: BootstrapConfig, start: int, stop: int) -> np.ndarray:
    out = np.empty((stop - start, 8), dtype=np.int64)
    n = counts.sum()
    cases, controls = counts[_CASE_IDX], counts[_CONTROL_IDX]
    for i, r in enumerate(range(start, stop)):
        rng = philox(cfg.seed, r)
        if cfg.scheme == "whole-sample":
            out[i] = rng.multinomial(n, counts / n)
        else:
            out[i, _CONTROL_IDX] = rng.multinomial(controls.sum(), controls / controls.sum())
            out[i, _CASE_IDX] = rng.multinomial(cases.sum(), cases / cases.sum())
    return out


def resample_tables(t: ContingencyTable, cfg: BootstrapConfig, workers: int = 1) -> np.ndarray:
    """Replicate cell counts, shape ``(replicates, 8)`` in table cell order."""
    counts = _integral_counts(t)
    bounds = np.linspace(0, cfg.replicates, max(1, workers) + 1).astype(int)
    chunks = list(zip(bounds[:-1], bounds[1:]))
    if workers <= 1:
        parts = [_draw(counts, cfg, a, b) for a, b in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: _draw(counts, cfg, *ab), chunks))
    return np.concatenate(parts)


def replicate_measures(cells: np.ndarray) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """RERI, AP, SI and MI for each row of ``cells``; rows with a zero cell are invalid.

    SI is NaN where its denominator is exactly zero.
    """
    cells = np.asarray(cells, dtype=float)
    ok = np.all(cells > 0, axis=1)
    c = np.where(ok[:, None], cells, 1.0)
    a0, a1, b0, b1, c0, c1, d0, d1 = c.T
    log_odds_a = np.log(a1 / a0)
    beta_x = np.log(c1 / c0) - log_odds_a
    beta_y = np.log(b1 / b0) - log_odds_a
    beta_sum = np.log(d1 / d0) - log_odds_a
    or10, or01, or11 = np.exp(beta_x), np.exp(beta_y), np.exp(beta_sum)
    mi = np.exp(beta_sum - beta_x - beta_y)
    reri = or11 - or10 - or01 + 1
    denom = (or10 - 1) + (or01 - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        si = np.where(denom != 0, (or11 - 1) / np.where(denom != 0, denom, 1.0), np.nan)
    values = {"reri": reri[ok], "ap": (reri / or11)[ok], "si": si[ok], "mi": mi[ok]}
    return values, ok


def _tail_fraction(reps: np.ndarray, point: float, null: float) -> float:
    if point > null:
        return float(np.mean(reps <= null))
    if point < null:
        return float(np.mean(reps >= null))
    return 1.0


def bootstrap_measures(
    t: ContingencyTable, cfg: BootstrapConfig = BootstrapConfig(), workers: Optional[int] = None
) -> BootstrapResult:
    """Percentile intervals and null tail fractions for RERI, AP, SI and MI.

    Point estimates are the closed-form values on ``t``.  Replicates with any
    empty cell are discarded and counted in ``n_failed_replicates``.
    """
    diag = validate_for_estimation(t)
    if not diag.estimable:
        raise EstimationError(
            f"zero count in cell(s) {', '.join(diag.zero_cells)}; cannot bootstrap", diag.zero_cells
        )
    report = build_report(t)
    points = {
        "reri": report.additive.reri,
        "ap": report.additive.ap,
        "si": report.additive.si,
        "mi": report.effects.mi,
    }

    cells = resample_tables(t, cfg, default_workers() if workers is None else workers)
    values, ok = replicate_measures(cells)
    n_failed = int(np.count_nonzero(~ok))
    if n_failed == cfg.replicates:
        raise EstimationError("every bootstrap replicate had an empty cell")

    q = [cfg.alpha / 2, 1 - cfg.alpha / 2]
    measures = {}
    for name in MEASURES:
        reps = values[name]
        reps = reps[~np.isnan(reps)]
        null = NULL_VALUES[name]
        point = points[name]
        if len(reps) == 0:
            measures[name] = MeasureInterval(point, None, None, None, null, 0)
            continue
        lo, hi = np.quantile(reps, q)
        p_null = None if point is None else _tail_fraction(reps, point, null)
        measures[name] = MeasureInterval(point, float(lo), float(hi), p_null, null, len(reps))
    return BootstrapResult(cfg, measures, n_failed)
