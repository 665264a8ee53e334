"""CSV and report serialization for run artifacts.

All files are plain text: comment header lines of the form
``# key = value`` followed by one CSV header row and data rows. Floats are
written with shortest exact repr, so a load -> save round trip is
bit-identical and outputs are reproducible byte for byte when the inputs
are. Nothing time- or host-dependent is ever written by these helpers.
"""

from __future__ import annotations

import json
import os
from typing import Mapping, Sequence

import numpy as np

from .analysis import CoherenceFunction, FringeFit, FringeScan
from .detection import ClickRecord, CorrelationEstimate
from .errors import ParamError


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_table(path, header: Mapping[str, object], columns: Mapping[str, Sequence]) -> None:
    """Write named columns with a key = value comment header."""
    cols = {k: np.asarray(v) for k, v in columns.items()}
    lengths = {v.size for v in cols.values()}
    if len(lengths) != 1:
        raise ParamError(f"columns have unequal lengths: {sorted(lengths)}")
    (n,) = lengths
    lines = [f"# {k} = {_fmt(v)}" for k, v in header.items()]
    lines.append(",".join(cols.keys()))
    arrays = list(cols.values())
    for i in range(n):
        lines.append(",".join(_fmt(a[i]) for a in arrays))
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_table(path) -> tuple[dict[str, str], dict[str, np.ndarray]]:
    """Inverse of write_table; header values come back as strings,
    columns as float arrays."""
    header: dict[str, str] = {}
    names: list[str] | None = None
    rows: list[list[float]] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = body.split("=", 1)
                    header[k.strip()] = v.strip()
                continue
            if names is None:
                names = [c.strip() for c in line.split(",")]
                continue
            rows.append([float(c) for c in line.split(",")])
    if names is None:
        raise ParamError(f"{path} holds no table")
    data = np.asarray(rows, dtype=float) if rows else np.empty((0, len(names)))
    return header, {name: data[:, i] for i, name in enumerate(names)}


def save_correlation(path, est: CorrelationEstimate, extra: Mapping[str, object] | None = None) -> None:
    header = {
        "kind": est.kind,
        "averaging_window": est.averaging_window,
        "n_windows": est.n_windows,
    }
    if extra:
        header.update(extra)
    write_table(path, header, {"tau": est.tau, "g2": est.g2, "stderr": est.stderr})


def load_correlation(path) -> CorrelationEstimate:
    header, cols = read_table(path)
    return CorrelationEstimate(
        tau=cols["tau"],
        g2=cols["g2"],
        stderr=cols["stderr"],
        averaging_window=float(header.get("averaging_window", 2e-3)),
        kind=header.get("kind", "time"),
        n_windows=int(header.get("n_windows", 0)),
    )


def save_fringe(path, scan: FringeScan, fit: FringeFit | None = None,
                extra: Mapping[str, object] | None = None) -> None:
    header: dict[str, object] = {"tau": scan.tau}
    if fit is not None:
        header.update(
            mean_level=fit.mean_level,
            visibility=fit.visibility,
            visibility_err=fit.visibility_err,
            phase_offset=fit.phase_offset,
            phase_err=fit.phase_err,
            residual_rms=fit.residual_rms,
        )
    if extra:
        header.update(extra)
    cols = {"phase": scan.phase, "value": scan.value}
    if scan.stderr is not None:
        cols["stderr"] = scan.stderr
    write_table(path, header, cols)


def load_fringe(path) -> tuple[FringeScan, dict[str, str]]:
    header, cols = read_table(path)
    scan = FringeScan(
        phase=cols["phase"],
        value=cols["value"],
        stderr=cols.get("stderr"),
        tau=float(header.get("tau", 0.0)),
    )
    return scan, header


def save_coherence(path, cf: CoherenceFunction, extra: Mapping[str, object] | None = None) -> None:
    header: dict[str, object] = {"xi": cf.xi}
    if extra:
        header.update(extra)
    n = cf.tau.size
    cols = {
        "tau": cf.tau,
        "gamma_abs": cf.gamma_abs,
        "gamma_abs_err": cf.gamma_abs_err if cf.gamma_abs_err is not None else np.zeros(n),
        "gamma_phase": cf.gamma_phase,
        "gamma_phase_err": cf.gamma_phase_err if cf.gamma_phase_err is not None else np.zeros(n),
        "clamped": (cf.clamped if cf.clamped is not None else np.zeros(n, bool)).astype(int),
    }
    write_table(path, header, cols)


def load_coherence(path) -> CoherenceFunction:
    header, cols = read_table(path)
    return CoherenceFunction(
        tau=cols["tau"],
        gamma_abs=cols["gamma_abs"],
        gamma_phase=cols["gamma_phase"],
        xi=float(header.get("xi", 1.0)),
        gamma_abs_err=cols.get("gamma_abs_err"),
        gamma_phase_err=cols.get("gamma_phase_err"),
        clamped=cols["clamped"].astype(bool) if "clamped" in cols else None,
    )


def save_clicks(path, rec: ClickRecord, extra: Mapping[str, object] | None = None) -> None:
    write_table(
        path,
        dict(extra or {}),
        {"gate_index": rec.gate_index, "clicked": rec.clicked.astype(int)},
    )


def load_clicks(path) -> ClickRecord:
    _, cols = read_table(path)
    return ClickRecord(
        gate_index=cols["gate_index"].astype(np.int64),
        clicked=cols["clicked"].astype(bool),
    )


def save_report_json(path, payload: dict) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def save_report_text(path, lines: Sequence[str]) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
