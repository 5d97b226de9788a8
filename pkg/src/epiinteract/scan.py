"""Pairwise interaction scan over many binary exposures.

Columns are bit-packed once; each pair's eight cell counts are then
population counts over ANDed words, followed by the closed-form report.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .additive import InteractionReport, ReportConfig, build_report
from .errors import EstimationError
from .tables import CELL_NAMES, MISSING, STRATA, ContingencyTable, validate_for_estimation

OK, ZERO_CELL, SKIPPED = "ok", "zero-cell", "skipped"


class ExposureMatrix:
    """Binary outcome plus named binary exposure columns; ``-1`` marks missing."""

    def __init__(self, outcome, exposures, names: Sequence[str]):
        outcome = np.asarray(outcome, dtype=np.int8).reshape(-1)
        exposures = np.asarray(exposures, dtype=np.int8)
        if exposures.ndim == 1:
            exposures = exposures[None, :]
        names = tuple(str(n) for n in names)
        if exposures.shape != (len(names), len(outcome)):
            raise ValueError(
                f"exposures must have shape (m, n) = ({len(names)}, {len(outcome)}), "
                f"got {exposures.shape}"
            )
        if len(set(names)) != len(names):
            raise ValueError("exposure names must be unique")
        for arr in (outcome, exposures):
            if np.any((arr != 0) & (arr != 1) & (arr != MISSING)):
                raise ValueError("values must be 0, 1 or -1 (missing)")
        self.outcome = outcome
        self.exposures = exposures
        self.names = names

    @property
    def n(self) -> int:
        return len(self.outcome)

    @property
    def m(self) -> int:
        return len(self.names)

    def column(self, name: str) -> np.ndarray:
        return self.exposures[self.names.index(name)]


@dataclass(frozen=True)
class ScanRow:
    exposure_1: str
    exposure_2: str
    status: str
    table: ContingencyTable
    report: Optional[InteractionReport] = None

    @property
    def pair(self) -> tuple[str, str]:
        return (self.exposure_1, self.exposure_2)


def _pack(mask: np.ndarray) -> np.ndarray:
    packed = np.packbits(mask)
    pad = (-len(packed)) % 8
    if pad:
        packed = np.concatenate([packed, np.zeros(pad, dtype=np.uint8)])
    return packed.view(np.uint64)


class _PackedColumns:
    def __init__(self, mat: ExposureMatrix):
        z = mat.outcome
        # outcome level masks carry the outcome-present condition
        self.z = (_pack(z == 0), _pack(z == 1))
        self.levels = [(_pack(col == 0), _pack(col == 1)) for col in mat.exposures]

    def table(self, i: int, j: int) -> ContingencyTable:
        xi, yj = self.levels[i], self.levels[j]
        counts = []
        for name in CELL_NAMES:
            x, y = STRATA[name[0]]
            z = int(name[1])
            counts.append(int(np.bitwise_count(xi[x] & yj[y] & self.z[z]).sum()))
        return ContingencyTable.from_array(counts)


def tabulate_pair(mat: ExposureMatrix, i: int, j: int) -> ContingencyTable:
    return _PackedColumns(mat).table(i, j)


def _row(packed: _PackedColumns, names, i: int, j: int, config: ReportConfig) -> ScanRow:
    t = packed.table(i, j)
    if t.n == 0:
        return ScanRow(names[i], names[j], SKIPPED, t)
    if config.correction is None and not validate_for_estimation(t).estimable:
        return ScanRow(names[i], names[j], ZERO_CELL, t)
    return ScanRow(names[i], names[j], OK, t, build_report(t, config))


def _ordered_pairs(mat: ExposureMatrix):
    # each pair is oriented by name so column order cannot change a row
    for i, j in itertools.combinations(range(mat.m), 2):
        yield (i, j) if mat.names[i] <= mat.names[j] else (j, i)


def scan_pairs(
    mat: ExposureMatrix,
    config: ReportConfig = ReportConfig(),
    workers: int = 1,
    chunk_size: int = 256,
) -> Iterator[ScanRow]:
    """Yield one :class:`ScanRow` per unordered exposure pair.

    Emission order follows column order for ``workers=1`` and is otherwise
    unspecified; the set of rows does not depend on ``workers``.
    """
    if mat.m < 2:
        raise ValueError("a scan needs at least two exposures")
    observed = mat.outcome[mat.outcome != MISSING]
    if len(observed) == 0 or np.all(observed == observed[0]):
        raise EstimationError("outcome is constant; no pair is estimable")
    if config.estimator != "closed-form":
        config = ReportConfig(z=config.z, correction=config.correction)

    packed = _PackedColumns(mat)
    pairs = _ordered_pairs(mat)
    if workers <= 1:
        for i, j in pairs:
            yield _row(packed, mat.names, i, j, config)
        return

    with ThreadPoolExecutor(max_workers=workers) as pool:
        while True:
            batch = list(itertools.islice(pairs, chunk_size * workers))
            if not batch:
                break
            yield from pool.map(lambda ij: _row(packed, mat.names, *ij, config), batch)


def sort_rows(rows) -> list[ScanRow]:
    return sorted(rows, key=lambda r: r.pair)
