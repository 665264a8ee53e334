"""Round trips and formatting contracts of the CSV/report writers."""

import json

import numpy as np
import pytest

from hbtsim import CoherenceFunction, CorrelationEstimate, FringeFit, FringeScan, ParamError
from hbtsim.dataio import (
    load_clicks,
    load_coherence,
    load_correlation,
    load_fringe,
    read_table,
    save_clicks,
    save_coherence,
    save_correlation,
    save_fringe,
    save_report_json,
    save_report_text,
    write_table,
)
from hbtsim.detection import ClickRecord


def test_write_read_table_round_trip(tmp_path):
    path = tmp_path / "sub" / "t.csv"  # directory is created on demand
    header = {"kind": "time", "n": 3, "flag": True, "x": 0.1}
    cols = {"a": np.array([1.0, 0.25, -3e-7]), "b": np.array([1, 2, 3])}
    write_table(path, header, cols)
    hdr, data = read_table(path)
    assert hdr == {"kind": "time", "n": "3", "flag": "1", "x": "0.1"}
    assert np.array_equal(data["a"], cols["a"])
    assert np.array_equal(data["b"], [1.0, 2.0, 3.0])
    # Shortest-repr float columns survive a second round trip byte for
    # byte (integer columns come back as floats by contract).
    fpath = tmp_path / "floats.csv"
    write_table(fpath, {}, {"a": cols["a"], "c": np.array([0.3, 2e17, np.pi])})
    _, floats = read_table(fpath)
    write_table(tmp_path / "floats2.csv", {}, floats)
    assert (tmp_path / "floats2.csv").read_bytes() == fpath.read_bytes()


def test_write_table_rejects_ragged_columns(tmp_path):
    with pytest.raises(ParamError):
        write_table(tmp_path / "bad.csv", {}, {"a": [1.0, 2.0], "b": [1.0]})


def test_read_table_requires_a_table(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("# only = comments\n\n")
    with pytest.raises(ParamError):
        read_table(empty)


def test_correlation_round_trip(tmp_path):
    est = CorrelationEstimate(
        tau=np.array([-2.0, -1.0, 0.0, 1.0, 2.0]),
        g2=np.array([1.0, 1.01, 1.94, 0.99, 1.0]),
        stderr=np.full(5, 0.01),
        averaging_window=250.0,
        kind="pulse_offset",
        n_windows=17,
    )
    path = tmp_path / "corr.csv"
    save_correlation(path, est, extra={"stage": "baseline"})
    back = load_correlation(path)
    assert np.array_equal(back.tau, est.tau)
    assert np.array_equal(back.g2, est.g2)
    assert np.array_equal(back.stderr, est.stderr)
    assert back.kind == "pulse_offset"
    assert back.averaging_window == 250.0
    assert back.n_windows == 17
    hdr, _ = read_table(path)
    assert hdr["stage"] == "baseline"


def test_fringe_round_trip_with_fit_header(tmp_path):
    scan = FringeScan(
        phase=np.linspace(0, 2 * np.pi, 9),
        value=1.0 + 0.3 * np.cos(np.linspace(0, 2 * np.pi, 9)),
        stderr=np.full(9, 0.02),
        tau=2e-6,
    )
    fit = FringeFit(mean_level=1.0, visibility=0.3, phase_offset=0.0,
                    residual_rms=1e-4, visibility_err=0.01, phase_err=0.02, n_points=9)
    path = tmp_path / "fringe.csv"
    save_fringe(path, scan, fit)
    back, hdr = load_fringe(path)
    assert back.tau == 2e-6
    assert np.array_equal(back.phase, scan.phase)
    assert np.array_equal(back.value, scan.value)
    assert np.array_equal(back.stderr, scan.stderr)
    assert float(hdr["visibility"]) == 0.3
    assert float(hdr["visibility_err"]) == 0.01
    # Without errors the stderr column is simply absent.
    bare = FringeScan(phase=scan.phase, value=scan.value)
    save_fringe(tmp_path / "bare.csv", bare)
    back2, _ = load_fringe(tmp_path / "bare.csv")
    assert back2.stderr is None


def test_coherence_round_trip(tmp_path):
    tau = np.array([-2e-6, 0.0, 2e-6, 4e-6])
    cf = CoherenceFunction(
        tau=tau,
        gamma_abs=np.array([0.9, 1.0, 0.9, 0.7]),
        gamma_phase=np.array([0.5, 0.0, -0.5, -1.0]),
        xi=0.875,
        gamma_abs_err=np.full(4, 0.01),
        gamma_phase_err=np.full(4, 0.02),
        clamped=np.array([False, True, False, False]),
    )
    path = tmp_path / "coh.csv"
    save_coherence(path, cf)
    back = load_coherence(path)
    assert back.xi == 0.875
    assert np.array_equal(back.tau, cf.tau)
    assert np.array_equal(back.gamma_abs, cf.gamma_abs)
    assert np.array_equal(back.gamma_phase, cf.gamma_phase)
    assert np.array_equal(back.clamped, cf.clamped)
    assert back.clamped.dtype == bool


def test_clicks_round_trip(tmp_path):
    rec = ClickRecord(np.array([0, 1, 2, 5, 9]), np.array([1, 0, 1, 1, 0], dtype=bool))
    path = tmp_path / "clicks.csv"
    save_clicks(path, rec, extra={"detector": 1})
    back = load_clicks(path)
    assert np.array_equal(back.gate_index, rec.gate_index)
    assert np.array_equal(back.clicked, rec.clicked)
    assert back.gate_index.dtype == np.int64


def test_report_json_handles_numpy_and_sorts(tmp_path):
    path = tmp_path / "report.json"
    save_report_json(path, {
        "b": np.float64(0.4),
        "a": np.int64(3),
        "arr": np.array([1.0, 2.0]),
        "ok": np.bool_(True),
    })
    text = path.read_text()
    data = json.loads(text)
    assert data == {"a": 3, "arr": [1.0, 2.0], "b": 0.4, "ok": True}
    assert text.index('"a"') < text.index('"arr"') < text.index('"b"')
    with pytest.raises(TypeError):
        save_report_json(tmp_path / "bad.json", {"x": object()})


def test_report_text_newlines(tmp_path):
    path = tmp_path / "report.txt"
    save_report_text(path, ["line one", "line two"])
    assert path.read_bytes() == b"line one\nline two\n"
