import csv
import io
import json
import math

import pytest

from qndsim.cli import main

S3_2 = math.sqrt(3) / 2


def qnd(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def write_plan(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_table_plan(workdir):
    plan = write_plan(workdir / "d.qnd", "signal D+\nmeter dprime\neta 1/3\nrun\noutput json out.json\noutput csv out.csv\n")
    code, text = qnd("run", plan)
    assert code == 0
    assert "P_HH" in text
    data = json.loads((workdir / "out.json").read_text())
    block = data["inputs"][0]
    assert block["input"] == "D+"
    assert block["P_sm"] == {"HH": 0.5, "HV": 0.0, "VH": 0.0, "VV": 0.5}
    for key in ("p_in", "p_m", "p_out", "F_M", "F_QND", "F_QSP", "K"):
        assert key in block
    (row,) = read_rows(workdir / "out.csv")
    assert float(row["P_HH"]) == pytest.approx(0.5, abs=1e-12)
    assert float(row["P_VV"]) == pytest.approx(0.5, abs=1e-12)


def test_run_malformed_plan(workdir, capsys):
    plan = write_plan(workdir / "bad.qnd", "signal Q\nrun\n")
    code, _ = qnd("run", plan)
    assert code == 1
    err = capsys.readouterr().err
    assert "1:8" in err and "D+" in err


def test_run_missing_file(workdir):
    assert qnd("run", "nope.qnd")[0] == 1


def test_run_eta_one_strong_meter(workdir):
    # eta = 1 reflects everything; the heralded probability comes from the simulator
    plan = write_plan(workdir / "e.qnd", "signal H\nmeter dprime\neta 1\nrun\noutput csv e.csv\n")
    code, text = qnd("run", plan)
    assert code == 0
    (row,) = read_rows(workdir / "e.csv")
    # amplitudes (1-2eta)a and -eta*b with a = sqrt3/2, b = 1/2 at eta = 1
    assert float(row["p_success"]) == pytest.approx(0.75 + 0.25, abs=1e-12)
    assert "p_success" in text


def test_run_zero_success_exit_code(workdir):
    plan = write_plan(workdir / "z.qnd", "signal H\nmeter state(0,1)\neta 0\nrun\n")
    assert qnd("run", plan)[0] == 2


def test_run_sweep_plan(workdir):
    plan = write_plan(workdir / "s.qnd", "balanced_loss on\nsweep alpha 0 .. 0.866025 steps 5\noutput csv s.csv\noutput json s.json\n")
    assert qnd("run", plan)[0] == 0
    rows = read_rows(workdir / "s.csv")
    assert len(rows) == 5
    assert len(json.loads((workdir / "s.json").read_text())["rows"]) == 5


def test_run_densmat_plan(workdir):
    plan = write_plan(workdir / "m.qnd", "meter state(0,1)\nbalanced_loss on\ndensmat\noutput json m.json\noutput csv m.csv\n")
    assert qnd("run", plan)[0] == 0
    data = json.loads((workdir / "m.json").read_text())
    assert data["purity"] == pytest.approx(1.0)
    assert len(read_rows(workdir / "m.csv")) == 4


def test_table(workdir):
    code, text = qnd("table", "--json", "t.json")
    assert code == 0
    assert "reported (experimental)" in text
    assert "0.97" in text and "0.81" in text
    assert "F_QSP average 1" in text
    data = json.loads((workdir / "t.json").read_text())
    cols = {b["input"]: b["P_sm"] for b in data["inputs"]}
    assert cols["H"] == {"HH": 1.0, "HV": 0.0, "VH": 0.0, "VV": 0.0}
    assert cols["V"] == {"HH": 0.0, "HV": 0.0, "VH": 0.0, "VV": 1.0}
    for name in ("D+", "D-", "R+", "R-"):
        assert cols[name] == {"HH": 0.5, "HV": 0.0, "VH": 0.0, "VV": 0.5}
    assert data["F_QSP_average"] == 1.0


def test_table_raw_input_dist(workdir):
    qnd("table", "--raw-input-dist", "--json", "raw.json")
    data = json.loads((workdir / "raw.json").read_text())
    f_m = {b["input"]: b["F_M"] for b in data["inputs"]}
    assert f_m["H"] == 1.0
    assert f_m["D+"] == pytest.approx((math.sqrt(0.375) + math.sqrt(0.125)) ** 2, abs=1e-11)


def test_sweep(workdir):
    code, text = qnd("sweep", "--steps", "50", "--out", "sw.csv")
    assert code == 0
    raw = (workdir / "sw.csv").read_bytes()
    assert raw.startswith(b"alpha,K,V,K2plusV2,purity,p_success\n")
    assert b"\r" not in raw
    rows = read_rows(workdir / "sw.csv")
    assert len(rows) == 50
    ks = [float(r["K"]) for r in rows]
    assert all(b >= a for a, b in zip(ks, ks[1:]))
    for r in rows:
        assert abs(float(r["K2plusV2"]) - 1) < 1e-9
    assert (float(rows[0]["K"]), float(rows[0]["V"])) == (0.0, 1.0)
    assert float(rows[-1]["K"]) == pytest.approx(1, abs=1e-11)
    assert float(rows[-1]["V"]) == pytest.approx(0, abs=1e-11)
    assert float(rows[-1]["alpha"]) == pytest.approx(S3_2, abs=1e-11)


def test_sweep_byte_identical(workdir, monkeypatch):
    qnd("sweep", "--steps", "40", "--out", "a.csv")
    qnd("sweep", "--steps", "40", "--out", "b.csv")
    monkeypatch.setenv("QND_THREADS", "4")
    qnd("sweep", "--steps", "40", "--out", "c.csv")
    a = (workdir / "a.csv").read_bytes()
    assert a == (workdir / "b.csv").read_bytes() == (workdir / "c.csv").read_bytes()


def test_sweep_needs_two_steps(workdir):
    assert qnd("sweep", "--steps", "1", "--out", "x.csv")[0] == 1
    assert not (workdir / "x.csv").exists()


def test_usage_errors_exit_one(capsys):
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--steps", "many", "--out", "x"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 1


def test_densmat_endpoints(workdir):
    code, text = qnd("densmat", "--alpha", "0", "--json", "a0.json")
    assert code == 0
    assert "purity 1" in text and "0.89" in text
    data = json.loads((workdir / "a0.json").read_text())
    assert data["purity"] == 1.0
    assert all(abs(c["im"]) < 1e-12 for row in data["rho"] for c in row)

    code, text = qnd("densmat", "--alpha", repr(S3_2), "--json", "a1.json")
    assert code == 0
    assert "purity 0.5" in text and "0.51" in text
    data = json.loads((workdir / "a1.json").read_text())
    assert data["purity"] == pytest.approx(0.5, abs=1e-12)
    assert all(abs(c["im"]) < 1e-12 for row in data["rho"] for c in row)


def test_densmat_rejects_alpha_out_of_range():
    assert qnd("densmat", "--alpha", "1.5")[0] == 1
