import json

import pytest

from epiinteract import expand_table
from epiinteract.cli import main
from epiinteract.formats import read_tsv, write_records

from conftest import EXAMPLE1_COEF, EXAMPLE1_SE, TABLE_P, synthetic_matrix

P_ARGS = [f"--{k}={int(v)}" for k, v in TABLE_P.as_dict().items()]
UNIFORM_ARGS = [f"--{k}=50" for k in TABLE_P.as_dict()]


@pytest.fixture
def records_p(tmp_path):
    path = tmp_path / "p.csv"
    with open(path, "w") as fh:
        write_records(expand_table(TABLE_P), fh)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def coefs_of(d):
    c = d["coefficients"]
    return [c["beta0"], c["betaX"], c["betaY"], c["betaXY"]]


def ses_of(d):
    s = d["standard_errors"]
    return [s["se0"], s["seX"], s["seY"], s["seXY"]]


def test_table_pretty(capsys):
    code, out, _ = run(capsys, "table", *P_ARGS)
    assert code == 0
    assert "-0.1345902" in out and "0.2533262" in out


def test_table_json_uniform(capsys):
    code, out, _ = run(capsys, "table", *UNIFORM_ARGS, "--format", "json")
    d = json.loads(out)
    assert code == 0
    assert d["odds_ratios"]["or11"]["estimate"] == 1
    assert d["additive"]["si"] is None and d["additive"]["si_reason"]


def test_table_zero_cell_exit(capsys):
    args = [a if not a.startswith("--d1") else "--d1=0" for a in UNIFORM_ARGS]
    code, _, err = run(capsys, "table", *args)
    assert code == 4
    assert "d1" in err
    code, out, _ = run(capsys, "table", *args, "--correction", "--format", "json")
    assert code == 0 and json.loads(out)["flags"]["correction_amount"] == 0.5


def test_table_parse_error(capsys):
    args = [a if not a.startswith("--a0") else "--a0=lots" for a in P_ARGS]
    assert run(capsys, "table", *args)[0] == 3


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["table", "--a0=1"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["table", *P_ARGS, "--z=-1"])
    assert info.value.code == 2


@pytest.mark.parametrize("estimator", ["glm", "closed-form"])
def test_fit_reproduces_example1(capsys, records_p, estimator):
    code, out, _ = run(capsys, "fit", records_p, "--estimator", estimator, "--format", "json")
    d = json.loads(out)
    assert code == 0
    assert max(abs(a - b) for a, b in zip(coefs_of(d), EXAMPLE1_COEF)) <= 5e-7
    assert max(abs(a - b) for a, b in zip(ses_of(d), EXAMPLE1_SE)) <= 5e-7
    assert d["dropped"] == 0


def test_fit_combined(capsys, records_p):
    code, out, _ = run(capsys, "fit", records_p, "--combined", "--format", "json")
    fit = json.loads(out)["combined_fit"]
    assert fit["n_dropped"] == 497
    assert fit["coefficients"][1] == pytest.approx(0.01313, abs=5e-5)


def test_fit_small_and_empty_files(capsys, tmp_path):
    two = tmp_path / "two.csv"
    two.write_text("Z,X,Y\n1,1,1\n0,0,0\n")
    assert run(capsys, "fit", str(two))[0] == 4
    na = tmp_path / "na.csv"
    na.write_text("Z,X,Y\n1,NA,NA\n0,NA,0\n")
    code, _, err = run(capsys, "fit", str(na))
    assert code == 4 and "no complete cases" in err


def test_fit_tsv_matches_json(capsys, records_p):
    _, js, _ = run(capsys, "fit", records_p, "--format", "json")
    _, tsv, _ = run(capsys, "fit", records_p, "--format", "tsv")
    d, row = json.loads(js), read_tsv(tsv)[0]
    assert float(row["betaXplusY"]) == d["coefficients"]["betaXplusY"]
    assert float(row["ap"]) == d["additive"]["ap"]


def test_summary(capsys):
    code, out, _ = run(
        capsys, "summary", "--beta-xplusy=0.0131317", "--beta0=0.0930904", "--se0=0.1246494", "--n11=245",
        "--format", "json",
    )
    d = json.loads(out)
    assert code == 0
    assert abs(d["j"] - 1.112069) < 1e-6
    assert abs(d["seXplusY"] - 0.178634) < 1e-6


def test_scan_three_rows(capsys, tmp_path):
    mat = synthetic_matrix(n=300, m=3)
    path = tmp_path / "m.csv"
    lines = [",".join(["Z", *mat.names])]
    for k in range(mat.n):
        vals = [mat.outcome[k], *mat.exposures[:, k]]
        lines.append(",".join("NA" if v < 0 else str(v) for v in vals))
    path.write_text("\n".join(lines) + "\n")
    out = tmp_path / "scan.tsv"
    assert main(["scan", str(path), "-o", str(out)]) == 0
    rows = read_tsv(out.read_text())
    assert len(rows) == 3
    assert [(r["exposure_1"], r["exposure_2"]) for r in rows] == sorted(
        (r["exposure_1"], r["exposure_2"]) for r in rows
    )
    out4 = tmp_path / "scan4.tsv"
    assert main(["scan", str(path), "-o", str(out4), "--workers", "4"]) == 0
    assert out4.read_bytes() == out.read_bytes()


def test_bootstrap_byte_identical(tmp_path):
    outs = []
    for k, workers in enumerate(["1", "3"]):
        out = tmp_path / f"b{k}.json"
        assert main(["bootstrap", *P_ARGS, "--seed=11", "--replicates=300", "--workers", workers, "-o", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    d = json.loads(outs[0])
    assert d["bootstrap"]["replicates"] == 300 and d["bootstrap"]["seed"] == 11


def test_bootstrap_from_records_and_env_seed(capsys, records_p, monkeypatch):
    monkeypatch.setenv("EPIINTERACT_SEED", "5")
    code, out, _ = run(capsys, "bootstrap", records_p, "--replicates=100")
    assert code == 0 and json.loads(out)["bootstrap"]["seed"] == 5
    code, out, _ = run(capsys, "bootstrap", records_p, "--replicates=100", "--format", "pretty")
    assert "RERI" in out


def test_simulate_then_fit_pinned(capsys, tmp_path):
    path = tmp_path / "sim.csv"
    assert main([
        "simulate", "--n=5000", "--p-x=0.4", "--p-y=0.3", "--beta0=-0.5", "--beta-x=0.4",
        "--beta-y=0.2", "--beta-xy=0.3", "--seed=2024", "-o", str(path),
    ]) == 0
    code, out, _ = run(capsys, "fit", str(path), "--estimator", "glm", "--format", "json")
    assert coefs_of(json.loads(out)) == pytest.approx(
        [-0.5567040126082279, 0.5177467693550347, 0.3261070106394374, 0.03872790280357271], abs=1e-12
    )
