import json

import numpy as np
import pytest

from catport import report as rpt
from catport.locc import run_protocol
from catport.protocols import ChannelSpec, TeleportInput, build_script
from catport.qstate import KET0, KET1, StateVector


@pytest.mark.parametrize(
    "x, want",
    [(1 / 3, 0.333333333333), (-0.0, 0.0), (1 - 1e-15, 1.0), (123456789.123456789, 123456789.123)],
)
def test_num_rounds_to_twelve_digits(x, want):
    assert rpt.num(x) == want
    assert str(rpt.num(-0.0)) == "0.0"


def test_ket_string():
    s = StateVector([0.6, 0, 0, 0.8j], ("a", "b"))
    assert rpt.ket_string(s) == "0.6|00> + 0.8i|11>"


def test_csv_omits_absent_columns():
    text = rpt.csv_text([{"r": 0.1, "entropy": 0.5}, {"r": 0.2, "entropy": 0.25}])
    assert text.splitlines() == ["r,entropy", "0.1,0.5", "0.2,0.25"]


def test_branch_json_round_trip():
    inp = TeleportInput(0.6, 0.8, (KET0,), (np.array([0.6, 0.8]),))
    script = build_script(inp, ChannelSpec.ghz_class(KET0, np.array([0.6, 0.8])))
    br = run_protocol(script)[3]
    doc = json.loads(rpt.dumps(rpt.branch_json(br)))
    assert list(doc) == ["outcomes", "probability", "success", "fidelity", "final_state", "events"]
    amps = rpt.amplitudes_from_json(doc["final_state"]["amplitudes"])
    np.testing.assert_allclose(amps, br.final_state.amplitudes, atol=1e-11)
    kinds = [e["type"] for e in doc["events"]]
    assert kinds.count("message") == 2 and kinds.count("measurement") == 2
    text = rpt.transcript_text(br.transcript)
    assert "Claire1 -> Bob1,Bob2: claire1=" in text and "(1 bit)" in text


def test_report_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv(rpt.REPORT_DIR_ENV, str(tmp_path))
    assert rpt.report_dir() == tmp_path
    monkeypatch.delenv(rpt.REPORT_DIR_ENV)
    assert str(rpt.report_dir()) == "reports"


def test_state_json_none():
    assert rpt.state_json(None) is None
    assert rpt.state_json(StateVector(KET1, ("x",)))["amplitudes"] == [[0.0, 0.0], [1.0, 0.0]]
