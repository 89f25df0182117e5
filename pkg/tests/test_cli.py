import csv
import io
import json

import numpy as np
import pytest

from catport.cli import main, parse_grid, UsageError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_run_ghz_class_sample(capsys, tmp_path):
    report = tmp_path / "r.json"
    code, out, _ = run(capsys, "run", "--protocol", "ghz-class", "--r", "0.5", "--alpha2", "0.3",
                       "--seed", "7", "--report", str(report))
    assert code == 0
    assert "fidelity to target: 1.000000000000" in out
    assert "RESULT: PASS" in out
    doc = json.loads(report.read_text())
    assert list(doc)[:4] == ["command", "protocol", "mode", "seed"]
    (branch,) = doc["branches"]
    assert branch["fidelity"] == pytest.approx(1.0, abs=1e-10)
    assert set(branch["outcomes"]) == {"alice", "claire1"}


def test_run_is_byte_identical(capsys, tmp_path):
    args = ["run", "--protocol", "cat", "--r", "0.2,0.7", "--alpha2", "0.4", "--seed", "11"]
    run(capsys, *args, "--report", str(tmp_path / "a.json"))
    run(capsys, *args, "--report", str(tmp_path / "b.json"))
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_run_default_report_location(capsys, tmp_path):
    code, out, _ = run(capsys, "run", "--protocol", "ghz", "--alpha2", "1.0")
    assert code == 0
    path = tmp_path / "reports" / "run-ghz-seed20011.json"
    assert path.exists()
    doc = json.loads(path.read_text())
    amps = np.array([complex(*z) for z in doc["branches"][0]["final_state"]["amplitudes"]])
    np.testing.assert_allclose(abs(amps), [1, 0, 0, 0], atol=1e-12)
    assert "1|00>" in out


def test_run_enumerate_weighted(capsys, tmp_path):
    code, out, _ = run(capsys, "run", "--protocol", "ghz-class", "--a2", "0.8", "--enumerate",
                       "--report", str(tmp_path / "w.json"))
    assert code == 0
    doc = json.loads((tmp_path / "w.json").read_text())
    success = sum(b["probability"] for b in doc["branches"] if b["success"])
    assert success == pytest.approx(0.4, abs=1e-12)
    assert "filter failed" in out


def test_run_from_scenario_file(capsys, tmp_path):
    scen = tmp_path / "s.json"
    scen.write_text(json.dumps({"protocol": "cat", "N": 3, "r": [0.1, 0.9], "alpha2": 0.2, "seed": 3}))
    code, out, _ = run(capsys, "run", "--scenario", str(scen), "--seed", "5",
                       "--report", str(tmp_path / "o.json"))
    assert code == 0
    doc = json.loads((tmp_path / "o.json").read_text())
    assert doc["seed"] == 5 and doc["scenario"]["N"] == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--protocol", "bogus"],
        ["run", "--protocol", "cat", "--N", "9"],
        ["run", "--alpha2", "1.5"],
        ["run", "--protocol", "ghz", "--N", "3"],
        ["run", "--protocol", "cat", "--N", "4", "--r", "0.1,0.2"],
        ["analyze", "--curve", "negativity", "--r-grid", "0:1:-1"],
        ["analyze", "--curve", "negativity", "--r-grid", "a:b"],
        ["sweep", "--alpha2-grid", "0:2:0.5"],
        ["run", "--scenario", "/nonexistent.json"],
        [],
    ],
)
def test_usage_errors_exit_two(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_verify_protocol_ghz(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--protocol", "ghz", "--trials", "20",
                       "--report", str(tmp_path / "v.json"))
    assert code == 0
    assert out.splitlines()[-1].startswith("SUMMARY: PASS")
    assert json.loads((tmp_path / "v.json").read_text())["passed"] is True


def test_verify_cat_six_parties(capsys):
    code, out, _ = run(capsys, "verify", "--protocol", "cat", "--N", "6", "--cat-trials", "3")
    assert code == 0
    assert "branches per run: 128" in out


def test_injected_fault_exits_one(capsys):
    code, out, _ = run(capsys, "verify", "--inject-fault", "psi+,a", "--trials", "10")
    assert code == 1
    assert "(psi+, a)" in out
    assert "SUMMARY: FAIL" in out


def test_bad_fault_spec(capsys):
    code, _, _ = run(capsys, "verify", "--inject-fault", "nope")
    assert code == 2


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_analyze_negativity(capsys, tmp_path):
    code, out, _ = run(capsys, "analyze", "--curve", "negativity", "--r-grid", "0:1:0.1",
                       "--out-dir", str(tmp_path))
    assert code == 0
    assert out.splitlines()[0] == "r,negativity_AB2,negativity_AB1"
    rows = read_csv(out)
    assert len(rows) == 11
    for row in rows:
        assert float(row["negativity_AB2"]) == pytest.approx(float(row["r"]) / 2, abs=1e-10)
        assert float(row["negativity_AB1"]) == pytest.approx(0.0, abs=1e-10)
    assert (tmp_path / "negativity.csv").read_text() == out
    assert (tmp_path / "negativity.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_analyze_emax_at_zero(capsys):
    code, out, _ = run(capsys, "analyze", "--curve", "e-max", "--r", "0")
    assert code == 0
    assert read_csv(out) == [{"r": "0", "entropy": "1"}]


def test_analyze_entropy_curve(capsys, tmp_path):
    code, out, _ = run(capsys, "analyze", "--curve", "entropy", "--r", "0.5", "--alpha2-grid", "0:1:0.25",
                       "--no-plot", "--out-dir", str(tmp_path))
    assert code == 0
    assert out.splitlines()[0] == "r,alpha2,entropy"
    assert not (tmp_path / "entropy.png").exists()


def test_sweep_peak(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "--protocol", "ghz-class", "--r", "0.5",
                       "--alpha2-grid", "0:1:0.01", "--out-dir", str(tmp_path))
    assert code == 0
    rows = read_csv(out)
    ent = np.array([float(r["entropy"]) for r in rows])
    assert len(ent) == 101
    assert ent.max() == pytest.approx(0.811278124459, abs=1e-9)
    assert float(rows[int(ent.argmax())]["alpha2"]) == pytest.approx(0.5)
    # rises to the middle, then mirrors
    assert np.all(np.diff(ent[:51]) > 0)
    np.testing.assert_allclose(ent, ent[::-1], atol=1e-9)
    assert (tmp_path / "sweep-ghz-class.png").exists()


def test_sweep_outputs_are_deterministic(capsys, tmp_path):
    args = ["sweep", "--protocol", "cat", "--N", "3", "--r", "0.3", "--alpha2-grid", "0:1:0.5"]
    run(capsys, *args, "--out-dir", str(tmp_path / "a"))
    run(capsys, *args, "--out-dir", str(tmp_path / "b"), "--workers", "2")
    for name in ("sweep-cat.csv", "sweep-cat.png"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.parametrize(
    "text, expected",
    [("0:1:0.5", [0.0, 0.5, 1.0]), ("0.3", [0.3]), ("0:1:0.1", [round(k / 10, 12) for k in range(11)])],
)
def test_parse_grid(text, expected):
    assert parse_grid(text) == expected


def test_parse_grid_rejects():
    with pytest.raises(UsageError):
        parse_grid("1:0:0.1")
