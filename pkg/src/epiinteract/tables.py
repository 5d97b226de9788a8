"""Two-exposure case-control contingency tables.

Cell naming follows the usual layout for two dichotomous exposures::

    X  Y   Z=0  Z=1
    1  1   d0   d1
    1  0   c0   c1
    0  1   b0   b1
    0  0   a0   a1

``a`` is the doubly unexposed reference stratum and ``d`` the doubly exposed
stratum.  Counts are floats so that continuity-corrected tables share the
same type as raw tallies.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Iterable, Iterator, NamedTuple, Optional

import numpy as np

CELL_NAMES = ("a0", "a1", "b0", "b1", "c0", "c1", "d0", "d1")

# (x, y) exposure stratum for each cell letter
STRATA = {"a": (0, 0), "b": (0, 1), "c": (1, 0), "d": (1, 1)}

MISSING = -1


@dataclass(frozen=True)
class Record:
    """One subject. ``None`` marks a missing value."""

    z: Optional[int]
    x: Optional[int]
    y: Optional[int]

    def __post_init__(self):
        for name in ("z", "x", "y"):
            value = getattr(self, name)
            if value is not None and value not in (0, 1):
                raise ValueError(f"{name} must be 0, 1 or None, got {value!r}")

    @property
    def complete(self) -> bool:
        return self.z is not None and self.x is not None and self.y is not None


def _as_code_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int8).reshape(-1)
    bad = (arr != 0) & (arr != 1) & (arr != MISSING)
    if bad.any():
        raise ValueError("codes must be 0, 1 or -1 (missing)")
    return arr


class RecordSet:
    """Individual-level rows (Z, X, Y) stored column-wise.

    Columns are ``int8`` arrays where ``-1`` marks a missing value.
    """

    __slots__ = ("z", "x", "y")

    def __init__(self, z, x, y):
        z, x, y = _as_code_array(z), _as_code_array(x), _as_code_array(y)
        if not (len(z) == len(x) == len(y)):
            raise ValueError("z, x and y must have the same length")
        for arr in (z, x, y):
            arr.setflags(write=False)
        self.z, self.x, self.y = z, x, y

    @classmethod
    def from_records(cls, records: Iterable[Record | tuple]) -> "RecordSet":
        zs, xs, ys = [], [], []
        for rec in records:
            if not isinstance(rec, Record):
                rec = Record(*rec)
            zs.append(MISSING if rec.z is None else rec.z)
            xs.append(MISSING if rec.x is None else rec.x)
            ys.append(MISSING if rec.y is None else rec.y)
        return cls(zs, xs, ys)

    @property
    def n_total(self) -> int:
        return len(self.z)

    @property
    def complete_mask(self) -> np.ndarray:
        return (self.z != MISSING) & (self.x != MISSING) & (self.y != MISSING)

    @property
    def n_missing(self) -> int:
        return int(self.n_total - np.count_nonzero(self.complete_mask))

    def __len__(self) -> int:
        return self.n_total

    def __iter__(self) -> Iterator[Record]:
        def opt(v):
            return None if v == MISSING else int(v)

        for z, x, y in zip(self.z, self.x, self.y):
            yield Record(opt(z), opt(x), opt(y))

    def __eq__(self, other):
        if not isinstance(other, RecordSet):
            return NotImplemented
        return (
            np.array_equal(self.z, other.z)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
        )

    def __repr__(self):
        return f"RecordSet(n_total={self.n_total}, n_missing={self.n_missing})"


@dataclass(frozen=True)
class ContingencyTable:
    a0: float = 0.0
    a1: float = 0.0
    b0: float = 0.0
    b1: float = 0.0
    c0: float = 0.0
    c1: float = 0.0
    d0: float = 0.0
    d1: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = float(getattr(self, f.name))
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"cell {f.name} must be a finite count >= 0, got {value!r}")
            object.__setattr__(self, f.name, value)

    @classmethod
    def from_strata(cls, a, b, c, d) -> "ContingencyTable":
        """Build from ``(negatives, positives)`` pairs per stratum."""
        return cls(a[0], a[1], b[0], b[1], c[0], c[1], d[0], d[1])

    @classmethod
    def from_array(cls, values) -> "ContingencyTable":
        values = list(values)
        if len(values) != 8:
            raise ValueError("expected eight cell counts")
        return cls(*values)

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in CELL_NAMES}

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in CELL_NAMES], dtype=float)

    def cell(self, name: str) -> float:
        return getattr(self, name)

    @property
    def n(self) -> float:
        return float(sum(getattr(self, name) for name in CELL_NAMES))

    @property
    def n11(self) -> float:
        return self.d0 + self.d1

    def swap_exposures(self) -> "ContingencyTable":
        """Exchange the roles of X and Y (b <-> c)."""
        return replace(self, b0=self.c0, b1=self.c1, c0=self.b0, c1=self.b1)


class TableDiagnostics(NamedTuple):
    estimable: bool
    zero_cells: tuple[str, ...]


def table_from_records(rs: RecordSet) -> tuple[ContingencyTable, int]:
    """Tally complete records into a table; returns ``(table, dropped)``."""
    mask = rs.complete_mask
    z = rs.z[mask].astype(np.intp)
    x = rs.x[mask].astype(np.intp)
    y = rs.y[mask].astype(np.intp)
    # index = 4*x + 2*y + z matches CELL_NAMES ordering
    counts = np.bincount(4 * x + 2 * y + z, minlength=8)
    dropped = rs.n_total - int(mask.sum())
    return ContingencyTable.from_array(counts.astype(float)), dropped


def validate_for_estimation(t: ContingencyTable) -> TableDiagnostics:
    zero = tuple(name for name in CELL_NAMES if t.cell(name) <= 0)
    return TableDiagnostics(estimable=not zero, zero_cells=zero)


def continuity_correct(t: ContingencyTable, amount: float = 0.5) -> ContingencyTable:
    """Add ``amount`` to every cell (Haldane-Anscombe when 0.5)."""
    if amount < 0:
        raise ValueError(f"continuity correction must be >= 0, got {amount}")
    return ContingencyTable.from_array(t.as_array() + amount)


def expand_table(t: ContingencyTable) -> RecordSet:
    """One record per counted subject, in cell order. Counts must be integers."""
    counts = t.as_array()
    if not np.all(counts == np.round(counts)):
        raise ValueError("only integer-count tables can be expanded to records")
    reps = counts.astype(np.int64)
    zs, xs, ys = [], [], []
    for name, k in zip(CELL_NAMES, reps):
        x, y = STRATA[name[0]]
        zs.append(np.full(k, int(name[1]), dtype=np.int8))
        xs.append(np.full(k, x, dtype=np.int8))
        ys.append(np.full(k, y, dtype=np.int8))
    return RecordSet(np.concatenate(zs), np.concatenate(xs), np.concatenate(ys))
