"""Reading delimited input files and serializing reports (JSON, TSV, pretty text)."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from .additive import AdditiveMeasures, FitDiagnostics, InteractionReport, ReportFlags
from .bootstrap import MEASURES, BootstrapConfig, BootstrapResult, MeasureInterval
from .closed_form import Coefficients, EffectEstimates, StandardErrors
from .errors import ParseError
from .glm import FitResult
from .scan import ExposureMatrix, ScanRow
from .tables import MISSING, ContingencyTable, RecordSet

SCHEMA_VERSION = 1

COEFFICIENT_FIELDS = ("beta0", "betaX", "betaY", "betaXY", "betaXplusY")
SE_FIELDS = ("se0", "seX", "seY", "seXY", "seXplusY")
# (odds ratio attribute, CI attribute)
OR_FIELDS = (("or10", "ci10"), ("or01", "ci01"), ("or11", "ci11"), ("mi", "ciMI"))

REPORT_COLUMNS = (
    COEFFICIENT_FIELDS
    + SE_FIELDS
    + tuple(c for name, _ in OR_FIELDS for c in (name, f"{name}_lower", f"{name}_upper"))
    + ("reri", "ap", "si", "n", "n11")
)
SCAN_COLUMNS = ("exposure_1", "exposure_2") + REPORT_COLUMNS + ("status",)
RECORD_TSV_COLUMNS = REPORT_COLUMNS + ("dropped",)

NA = "NA"


# ---------------------------------------------------------------- input files


def guess_delimiter(path: str) -> str:
    ext = os.path.splitext(path)[1].lower()
    return "\t" if ext in (".tsv", ".tab", ".txt") else ","


def _read_rows(path: str, sep: Optional[str]):
    sep = sep or guess_delimiter(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh, delimiter=sep))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: empty file, expected a header row")
    header = [h.strip() for h in rows[0]]
    return header, rows[1:]


def _parse_binary(token: str, na: str, where: str) -> int:
    token = token.strip()
    if token == "" or token == na:
        return MISSING
    if token in ("0", "1"):
        return int(token)
    raise ParseError(f"{where}: expected 0, 1 or {na!r}, got {token!r}")


def _column_index(header, name: str, path: str) -> int:
    try:
        return header.index(name)
    except ValueError:
        raise ParseError(f"{path}: no column named {name!r} (have {', '.join(header)})") from None


def _parse_columns(path, header, rows, names, na) -> np.ndarray:
    idx = [_column_index(header, name, path) for name in names]
    out = np.empty((len(names), len(rows)), dtype=np.int8)
    for r, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise ParseError(f"{path}:{r}: expected {len(header)} fields, got {len(row)}")
        for k, (i, name) in enumerate(zip(idx, names)):
            out[k, r - 2] = _parse_binary(row[i], na, f"{path}:{r} column {name}")
    return out


def read_records(
    path: str,
    outcome: str = "Z",
    exposure1: str = "X",
    exposure2: str = "Y",
    sep: Optional[str] = None,
    na: str = NA,
) -> RecordSet:
    header, rows = _read_rows(path, sep)
    z, x, y = _parse_columns(path, header, rows, (outcome, exposure1, exposure2), na)
    return RecordSet(z, x, y)


def write_records(
    rs: RecordSet, fh: TextIO, names: Sequence[str] = ("Z", "X", "Y"), sep: str = ",", na: str = NA
) -> None:
    writer = csv.writer(fh, delimiter=sep, lineterminator="\n")
    writer.writerow(names)
    cols = np.stack([rs.z, rs.x, rs.y], axis=1)
    for row in cols:
        writer.writerow([na if v == MISSING else str(int(v)) for v in row])


def read_exposure_matrix(
    path: str,
    outcome: str,
    exposures: Optional[Sequence[str]] = None,
    sep: Optional[str] = None,
    na: str = NA,
) -> ExposureMatrix:
    header, rows = _read_rows(path, sep)
    if exposures is None:
        exposures = [h for h in header if h != outcome]
    cols = _parse_columns(path, header, rows, [outcome, *exposures], na)
    return ExposureMatrix(cols[0], cols[1:], exposures)


def parse_count(name: str, token: str) -> float:
    try:
        value = float(token)
    except (TypeError, ValueError):
        raise ParseError(f"cell {name}: {token!r} is not a number") from None
    if not math.isfinite(value) or value < 0:
        raise ParseError(f"cell {name}: counts must be finite and nonnegative, got {token!r}")
    return value


# ---------------------------------------------------------------------- JSON


def _ci_dict(point, ci):
    return {"estimate": point, "ci_lower": ci[0], "ci_upper": ci[1]}


def bootstrap_to_dict(res: BootstrapResult) -> dict:
    cfg = res.config
    return {
        "replicates": cfg.replicates,
        "seed": cfg.seed,
        "scheme": cfg.scheme,
        "alpha": cfg.alpha,
        "ci_method": cfg.ci_method,
        "n_failed_replicates": res.n_failed_replicates,
        "measures": {
            name: {
                "point": mi.point,
                "ci_lower": mi.ci_lower,
                "ci_upper": mi.ci_upper,
                "p_null": mi.p_null,
                "null_value": mi.null_value,
                "n_defined": mi.n_defined,
            }
            for name, mi in res.measures.items()
        },
    }


def bootstrap_from_dict(d: dict) -> BootstrapResult:
    cfg = BootstrapConfig(
        replicates=d["replicates"],
        seed=d["seed"],
        scheme=d["scheme"],
        alpha=d["alpha"],
        ci_method=d["ci_method"],
    )
    measures = {name: MeasureInterval(**m) for name, m in d["measures"].items()}
    return BootstrapResult(cfg, measures, d["n_failed_replicates"])


def fit_to_dict(fit: FitResult) -> dict:
    return {
        "terms": list(fit.terms),
        "coefficients": [float(v) for v in fit.coefficients],
        "standard_errors": [float(v) for v in fit.standard_errors],
        "covariance": [[float(v) for v in row] for row in fit.covariance],
        "deviance": fit.deviance,
        "null_deviance": fit.null_deviance,
        "aic": fit.aic,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "n_used": fit.n_used,
        "n_dropped": fit.n_dropped,
    }


def report_to_dict(
    report: InteractionReport,
    bootstrap: Optional[BootstrapResult] = None,
    combined_fit: Optional[FitResult] = None,
) -> dict:
    c, s, e, add, flags = report.coefficients, report.ses, report.effects, report.additive, report.flags
    out = {
        "schema_version": SCHEMA_VERSION,
        "table": report.table.as_dict(),
        "n": report.n,
        "n11": report.n11,
        "dropped": report.dropped,
        "z": report.z,
        "coefficients": {k: getattr(c, k) for k in COEFFICIENT_FIELDS},
        "standard_errors": {k: getattr(s, k) for k in SE_FIELDS},
        "odds_ratios": {name: _ci_dict(getattr(e, name), getattr(e, ci)) for name, ci in OR_FIELDS},
        "additive": {"reri": add.reri, "ap": add.ap, "si": add.si, "si_reason": add.si_reason},
        "flags": {
            "zero_cells": list(flags.zero_cells),
            "correction_applied": flags.correction_applied,
            "correction_amount": flags.correction_amount,
            "source": flags.source,
            "large_coefficient": flags.large_coefficient,
            "qualitative_interpretation": flags.qualitative_interpretation,
        },
    }
    if report.fit is not None:
        out["fit"] = {
            "deviance": report.fit.deviance,
            "null_deviance": report.fit.null_deviance,
            "aic": report.fit.aic,
            "iterations": report.fit.iterations,
            "converged": report.fit.converged,
        }
    if combined_fit is not None:
        out["combined_fit"] = fit_to_dict(combined_fit)
    if bootstrap is not None:
        out["bootstrap"] = bootstrap_to_dict(bootstrap)
    return out


def report_from_dict(d: dict) -> InteractionReport:
    version = d.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported report schema_version {version!r}")
    ors = d["odds_ratios"]
    effects = {}
    for name, ci in OR_FIELDS:
        effects[name] = ors[name]["estimate"]
        effects[ci] = (ors[name]["ci_lower"], ors[name]["ci_upper"])
    flags = dict(d["flags"])
    flags["zero_cells"] = tuple(flags["zero_cells"])
    fit = d.get("fit")
    return InteractionReport(
        table=ContingencyTable(**d["table"]),
        coefficients=Coefficients(**d["coefficients"]),
        ses=StandardErrors(**d["standard_errors"]),
        effects=EffectEstimates(**effects),
        additive=AdditiveMeasures(**d["additive"]),
        n=d["n"],
        n11=d["n11"],
        dropped=d["dropped"],
        z=d["z"],
        flags=ReportFlags(**flags),
        fit=FitDiagnostics(**fit) if fit is not None else None,
    )


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2) + "\n"


# ----------------------------------------------------------------------- TSV


def _fmt(value) -> str:
    if value is None:
        return NA
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_values(report: InteractionReport) -> dict:
    """Flat ``{column: value}`` mapping in :data:`REPORT_COLUMNS` order."""
    vals = {k: getattr(report.coefficients, k) for k in COEFFICIENT_FIELDS}
    vals.update({k: getattr(report.ses, k) for k in SE_FIELDS})
    for name, ci in OR_FIELDS:
        lo, hi = getattr(report.effects, ci)
        vals[name] = getattr(report.effects, name)
        vals[f"{name}_lower"] = lo
        vals[f"{name}_upper"] = hi
    vals.update(reri=report.additive.reri, ap=report.additive.ap, si=report.additive.si)
    vals.update(n=report.n, n11=report.n11)
    return vals


def report_tsv(report: InteractionReport) -> str:
    vals = report_values(report)
    vals["dropped"] = report.dropped
    lines = ["\t".join(RECORD_TSV_COLUMNS), "\t".join(_fmt(vals[k]) for k in RECORD_TSV_COLUMNS)]
    return "\n".join(lines) + "\n"


def scan_row_values(row: ScanRow) -> dict:
    if row.report is not None:
        vals = report_values(row.report)
    else:
        vals = {k: None for k in REPORT_COLUMNS}
        vals.update(n=row.table.n, n11=row.table.n11)
    vals.update(exposure_1=row.exposure_1, exposure_2=row.exposure_2, status=row.status)
    return vals


def write_scan_tsv(rows: Iterable[ScanRow], fh: TextIO) -> int:
    fh.write("\t".join(SCAN_COLUMNS) + "\n")
    count = 0
    for row in rows:
        vals = scan_row_values(row)
        fh.write("\t".join(_fmt(vals[k]) for k in SCAN_COLUMNS) + "\n")
        count += 1
    return count


def read_tsv(text: str) -> list[dict]:
    """Parse TSV produced by this module back into dicts of strings."""
    reader = csv.DictReader(io.StringIO(text), delimiter="\t")
    return list(reader)


# -------------------------------------------------------------------- pretty


def _p_value(z: float) -> float:
    return math.erfc(abs(z) / math.sqrt(2))


def _coef_table(names, estimates, ses) -> list[str]:
    width = max(len(n) for n in names) + 2
    lines = [f"{'':<{width}}{'Estimate':>12}{'Std. Error':>12}{'z value':>9}{'Pr(>|z|)':>10}"]
    for name, est, se in zip(names, estimates, ses):
        z = est / se
        lines.append(f"{name:<{width}}{est:>12.7g}{se:>12.7g}{z:>9.3f}{_p_value(z):>10.3g}")
    return lines


def format_fit(fit: FitResult, formula: str) -> str:
    lines = [f"Logistic fit: {formula}", "", "Coefficients:"]
    lines += _coef_table(fit.terms, fit.coefficients, fit.standard_errors)
    lines += [
        "",
        f"    Null deviance: {fit.null_deviance:.2f} on {fit.n_used - 1:g} degrees of freedom",
        f"Residual deviance: {fit.deviance:.2f} on {fit.df_residual:g} degrees of freedom",
    ]
    if fit.n_dropped:
        lines.append(f"  ({fit.n_dropped} observations deleted due to missingness)")
    lines += [f"AIC: {fit.aic:.2f}", "", f"Number of Fisher Scoring iterations: {fit.iterations}"]
    return "\n".join(lines) + "\n"


def format_report(
    report: InteractionReport,
    bootstrap: Optional[BootstrapResult] = None,
    combined_fit: Optional[FitResult] = None,
) -> str:
    c, s, e, add = report.coefficients, report.ses, report.effects, report.additive
    level = 100 * (1 - _p_value(report.z))
    lines = [
        f"Model: Z ~ X + Y + X:Y   (estimator: {report.flags.source})",
        f"n = {report.n:g}   doubly exposed n11 = {report.n11:g}   dropped = {report.dropped}",
    ]
    if report.flags.correction_applied:
        lines.append(f"continuity correction +{report.flags.correction_amount:g} applied to all cells")
    lines += ["", "Coefficients:"]
    lines += _coef_table(
        ["(Intercept)", "X", "Y", "X:Y", "X+Y (combined)"],
        [c.beta0, c.betaX, c.betaY, c.betaXY, c.betaXplusY],
        [s.se0, s.seX, s.seY, s.seXY, s.seXplusY],
    )
    if report.fit is not None:
        f = report.fit
        lines += [
            "",
            f"Null deviance: {f.null_deviance:.2f}   Residual deviance: {f.deviance:.2f}   "
            f"AIC: {f.aic:.2f}   iterations: {f.iterations}",
        ]
    lines += ["", f"Odds ratios ({level:.1f}% CI, z = {report.z:g}):"]
    labels = {"or10": "OR10 (X only)", "or01": "OR01 (Y only)", "or11": "OR11 (X and Y)", "mi": "MI"}
    for name, ci in OR_FIELDS:
        lo, hi = getattr(e, ci)
        lines.append(f"  {labels[name]:<16}{getattr(e, name):>12.7g}   ({lo:.7g}, {hi:.7g})")
    si = f"{add.si:.7g}" if add.si is not None else f"undefined ({add.si_reason})"
    lines += [
        "",
        "Additive interaction:",
        f"  RERI  {add.reri:.7g}",
        f"  AP    {add.ap:.7g}",
        f"  SI    {si}",
    ]
    notes = []
    if report.flags.large_coefficient:
        notes.append("a coefficient exceeds 15 in absolute value (near separation)")
    if report.flags.qualitative_interpretation:
        notes.append("SI denominator is negative; interpret SI qualitatively")
    if notes:
        lines += ["", "Notes:"] + [f"  - {n}" for n in notes]
    if bootstrap is not None:
        cfg = bootstrap.config
        lines += [
            "",
            f"Bootstrap ({cfg.replicates} replicates, {cfg.scheme}, seed {cfg.seed}, "
            f"{100 * (1 - cfg.alpha):g}% percentile CI; {bootstrap.n_failed_replicates} failed):",
        ]
        for name in MEASURES:
            m = bootstrap.measures[name]
            fmt = lambda v: "NA" if v is None else f"{v:.7g}"  # noqa: E731
            lines.append(
                f"  {name.upper():<5}{fmt(m.point):>12}   ({fmt(m.ci_lower)}, {fmt(m.ci_upper)})"
                f"   tail beyond {m.null_value:g}: {fmt(m.p_null)}"
            )
    text = "\n".join(lines) + "\n"
    if combined_fit is not None:
        text += "\n" + format_fit(combined_fit, "Z ~ T  (T = 1 both exposed, 0 neither)")
    return text
