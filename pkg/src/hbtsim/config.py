"""Scenario configuration: structured text files -> validated dataclasses.

Config files are TOML. The schema is versioned; schema_version = 1 is the
only version understood. Unknown tables or keys are hard errors so typos
cannot silently fall back to defaults. All validation problems in a file
are collected and reported together.
"""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass, field, fields, is_dataclass
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .errors import ConfigError

SCHEMA_VERSION = 1
MODES = ("cw", "pulsed", "oracle")

# Per-mode defaults for keys whose natural value depends on the detection
# chain: analog photodiodes are treated as unit-efficiency (the scale
# cancels in normalized correlations), gated single photon detectors are
# not.
_MODE_DEFAULTS = {
    "cw": {("detector", "efficiency"): 1.0},
    "pulsed": {("detector", "efficiency"): 0.2},
    "oracle": {},
}


@dataclass
class SourceConfig:
    mean_intensity: float = 1.0
    coherence_time: float = 7e-6
    lineshape: str = "gaussian"
    doppler_shift: float = 0.0
    mode_count: float = 1.0
    statistics: str = "thermal"  # thermal | phase_diffused


@dataclass
class LOConfig:
    amplitude: float = 1.0
    static_phase: float = 0.0
    blocked: bool = False
    mode_overlap: list[float] = field(default_factory=lambda: [1.0, 1.0])
    jitter_rms: float = 0.0


@dataclass
class DetectorConfig:
    bandwidth: float = 2e6
    electronic_noise_rms: float = 0.01
    efficiency: float | None = None  # filled per mode
    dark_prob_per_gate: float = 1e-4
    gate_width: float = 2.5e-9
    dead_time: float = 0.0


@dataclass
class DelaysConfig:
    optical_pulses: int = 1
    electronic_pulses: int = 1


@dataclass
class ScanConfig:
    fringe_delays: list[float] = field(default_factory=lambda: [0.0])
    phase_points: int = 16
    max_offset: int = 5


@dataclass
class RunConfig:
    seed: int = 12345
    trials: int = 1
    dt: float = 5e-8
    duration_per_point: float = 0.02
    window: float = 2e-3
    include_baseline: bool = True
    baseline_duration: float = 0.1
    baseline_max_tau: float = 4.2e-5
    n_pulses: int = 10_000_000
    baseline_pulses: int = 20_000_000
    pulse_period: float = 2e-8


@dataclass
class AnalysisConfig:
    xi_mode: str = "calibrate"  # calibrate | fixed
    xi_value: float = 1.0
    clamp_policy: str = "clamp"  # clamp | raise
    min_gamma_doppler: float = 0.1


@dataclass
class ReportConfig:
    visibility_tol: float = 0.02
    gamma_tol: float = 0.05
    gamma_rms_tol: float = 0.05
    doppler_rel_tol: float = 0.01
    g2_zero_tol: float = 0.05
    g2_far_tol: float = 0.02


@dataclass
class OracleSection:
    kind: str = "cw"  # cw | pulsed | antibunched | zeta
    weight: str = "consistent"
    params: dict = field(default_factory=dict)


@dataclass
class ScenarioConfig:
    mode: str = "cw"
    schema_version: int = SCHEMA_VERSION
    source: SourceConfig = field(default_factory=SourceConfig)
    lo: LOConfig = field(default_factory=LOConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    delays: DelaysConfig = field(default_factory=DelaysConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    run: RunConfig = field(default_factory=RunConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    report: ReportConfig = field(default_factory=ReportConfig)
    oracle: OracleSection = field(default_factory=OracleSection)
    output_dir: str | None = None
    source_path: str | None = None

    def copy(self) -> "ScenarioConfig":
        return copy.deepcopy(self)


_SECTIONS = {
    "source": SourceConfig,
    "lo": LOConfig,
    "detector": DetectorConfig,
    "delays": DelaysConfig,
    "scan": ScanConfig,
    "run": RunConfig,
    "analysis": AnalysisConfig,
    "report": ReportConfig,
    "oracle": OracleSection,
}

_TOP_KEYS = {"schema_version", "mode", "output_dir"} | set(_SECTIONS)


def _coerce(section: str, key: str, value, annotation, problems: list[str]):
    # TOML distinguishes ints and floats; accept ints where floats are due.
    if annotation in ("float", "float | None") and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if annotation == "int" and isinstance(value, float) and value.is_integer():
        return int(value)
    if annotation == "list[float]" and isinstance(value, list):
        out = []
        for v in value:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                problems.append(f"[{section}] {key}: entries must be numbers")
                return value
            out.append(float(v))
        return out
    return value


def _fill_section(cls, section: str, table: dict, problems: list[str]):
    obj = cls()
    known = {f.name: f for f in fields(cls)}
    for key, value in table.items():
        if key not in known:
            problems.append(f"[{section}] unknown key {key!r}")
            continue
        if key == "params" and isinstance(value, dict):
            setattr(obj, key, dict(value))
            continue
        ann = str(known[key].type)
        n_before = len(problems)
        value = _coerce(section, key, value, ann, problems)
        if len(problems) > n_before:
            continue  # entry already reported; keep the default
        expected = {
            "float": (float,),
            "float | None": (float,),
            "int": (int,),
            "str": (str,),
            "bool": (bool,),
            "list[float]": (list,),
        }.get(ann)
        wrong_type = expected is not None and not isinstance(value, expected)
        bool_as_number = isinstance(value, bool) and ann in ("float", "int", "float | None")
        if wrong_type or bool_as_number:
            problems.append(
                f"[{section}] {key}: expected {ann}, got {type(value).__name__}"
            )
            continue
        setattr(obj, key, value)
    return obj


def config_from_dict(raw: dict, source_path: str | None = None) -> ScenarioConfig:
    """Build and validate a ScenarioConfig from a parsed mapping."""
    problems: list[str] = []
    for key in raw:
        if key not in _TOP_KEYS:
            problems.append(f"unknown top-level key {key!r}")
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        problems.append(
            f"schema_version must be {SCHEMA_VERSION}, got {version!r}"
        )
    mode = raw.get("mode", "cw")
    if mode not in MODES:
        problems.append(f"mode must be one of {MODES}, got {mode!r}")

    cfg = ScenarioConfig(mode=mode if mode in MODES else "cw", source_path=source_path)
    cfg.schema_version = SCHEMA_VERSION
    for name, cls in _SECTIONS.items():
        table = raw.get(name, {})
        if not isinstance(table, dict):
            problems.append(f"[{name}] must be a table")
            continue
        setattr(cfg, name, _fill_section(cls, name, table, problems))
    out = raw.get("output_dir")
    if out is not None and not isinstance(out, str):
        problems.append("output_dir must be a string")
    else:
        cfg.output_dir = out

    for (sec, key), default in _MODE_DEFAULTS.get(cfg.mode, {}).items():
        if getattr(getattr(cfg, sec), key) is None:
            setattr(getattr(cfg, sec), key, default)
    if cfg.detector.efficiency is None:
        cfg.detector.efficiency = 1.0
    if isinstance(cfg.scan.fringe_delays, list):
        # Probe delays are a set: order and duplicates carry no meaning.
        cfg.scan.fringe_delays = sorted({float(t) for t in cfg.scan.fringe_delays})

    problems.extend(validate_config(cfg))
    if problems:
        raise ConfigError(
            "invalid configuration:\n  - " + "\n  - ".join(problems),
            category="config-invalid",
        )
    return cfg


def validate_config(cfg: ScenarioConfig) -> list[str]:
    """Semantic checks beyond types; returns a list of problems."""
    p: list[str] = []
    s, lo, det, run, scan = cfg.source, cfg.lo, cfg.detector, cfg.run, cfg.scan
    if s.mean_intensity <= 0:
        p.append("[source] mean_intensity must be > 0")
    if s.coherence_time <= 0:
        p.append("[source] coherence_time must be > 0")
    if s.lineshape not in ("gaussian", "lorentzian"):
        p.append(f"[source] lineshape {s.lineshape!r} not recognized")
    if s.mode_count < 1:
        p.append("[source] mode_count must be >= 1")
    if s.statistics not in ("thermal", "phase_diffused"):
        p.append(f"[source] statistics {s.statistics!r} not recognized")
    if lo.amplitude < 0:
        p.append("[lo] amplitude must be >= 0")
    if len(lo.mode_overlap) != 2 or not all(0.0 <= b <= 1.0 for b in lo.mode_overlap):
        p.append("[lo] mode_overlap must be two numbers in [0, 1]")
    if lo.jitter_rms < 0:
        p.append("[lo] jitter_rms must be >= 0")
    if det.bandwidth <= 0:
        p.append("[detector] bandwidth must be > 0")
    if det.efficiency is not None and not 0 < det.efficiency <= 1:
        p.append("[detector] efficiency must lie in (0, 1]")
    if not 0 <= det.dark_prob_per_gate < 1:
        p.append("[detector] dark_prob_per_gate must lie in [0, 1)")
    if det.electronic_noise_rms < 0:
        p.append("[detector] electronic_noise_rms must be >= 0")
    if det.gate_width <= 0:
        p.append("[detector] gate_width must be > 0")
    if det.dead_time < 0:
        p.append("[detector] dead_time must be >= 0")
    if scan.phase_points < 8:
        p.append("[scan] phase_points must be >= 8 for a usable fringe fit")
    if not scan.fringe_delays:
        p.append("[scan] fringe_delays must not be empty")
    if scan.max_offset < 1:
        p.append("[scan] max_offset must be >= 1")
    if run.trials < 1:
        p.append("[run] trials must be >= 1")
    if run.dt <= 0:
        p.append("[run] dt must be > 0")
    if run.duration_per_point <= 0:
        p.append("[run] duration_per_point must be > 0")
    if run.window <= 0:
        p.append("[run] window must be > 0")
    if run.n_pulses < 2:
        p.append("[run] n_pulses must be >= 2")
    if run.pulse_period <= 0:
        p.append("[run] pulse_period must be > 0")
    if cfg.mode == "cw":
        grid = run.dt
        for tau in scan.fringe_delays:
            if abs(tau / grid - round(tau / grid)) > 1e-6:
                p.append(f"[scan] fringe delay {tau:g} s is off the dt grid")
        if run.duration_per_point < 2 * run.window:
            p.append("[run] duration_per_point must cover at least 2 averaging windows")
    if cfg.mode == "pulsed":
        if cfg.delays.optical_pulses < 0 or cfg.delays.electronic_pulses < 0:
            p.append("[delays] pulse delays must be >= 0")
        if cfg.delays.optical_pulses >= run.n_pulses:
            p.append("[delays] optical delay exceeds the train length")
    if cfg.analysis.xi_mode not in ("calibrate", "fixed"):
        p.append(f"[analysis] xi_mode {cfg.analysis.xi_mode!r} not recognized")
    if not 0 < cfg.analysis.xi_value <= 1:
        p.append("[analysis] xi_value must lie in (0, 1]")
    if cfg.analysis.clamp_policy not in ("clamp", "raise"):
        p.append(f"[analysis] clamp_policy {cfg.analysis.clamp_policy!r} not recognized")
    if cfg.mode == "oracle" and cfg.oracle.kind not in ("cw", "pulsed", "antibunched", "zeta"):
        p.append(f"[oracle] kind {cfg.oracle.kind!r} not recognized")
    if cfg.mode == "oracle" and cfg.oracle.weight not in ("consistent", "printed"):
        p.append(f"[oracle] weight {cfg.oracle.weight!r} not recognized")
    return p


def load_config(path: str) -> ScenarioConfig:
    """Parse and validate a TOML scenario file."""
    try:
        with open(path, "rb") as fh:
            raw = _toml.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", category="config-invalid")
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}", category="config-invalid")
    return config_from_dict(raw, source_path=path)


def set_by_path(cfg: ScenarioConfig, dotted: str, value: float) -> None:
    """Assign a numeric config field addressed as 'section.key'.

    Used by parameter sweeps. Unknown addresses raise ConfigError with
    category "unknown-parameter".
    """
    parts = dotted.split(".")
    if len(parts) != 2:
        raise ConfigError(
            f"parameter address must look like section.key, got {dotted!r}",
            category="unknown-parameter",
        )
    sec, key = parts
    if sec not in _SECTIONS or not hasattr(getattr(cfg, sec), key):
        raise ConfigError(
            f"no config field named {dotted!r}", category="unknown-parameter"
        )
    target = getattr(cfg, sec)
    current = getattr(target, key)
    if isinstance(current, bool):
        if value not in (0.0, 1.0):
            raise ConfigError(
                f"{dotted!r} is a flag; use 0 or 1", category="unknown-parameter"
            )
        setattr(target, key, bool(value))
        return
    if not isinstance(current, (int, float)):
        raise ConfigError(
            f"{dotted!r} is not a numeric field and cannot be swept",
            category="unknown-parameter",
        )
    setattr(target, key, int(value) if isinstance(current, int) else float(value))


def schema_text() -> str:
    """Human-readable schema reference: every section, key, type and
    default, as accepted by load_config."""
    lines = [
        f"schema_version = {SCHEMA_VERSION}  (required to be {SCHEMA_VERSION} when present)",
        f"mode = one of {', '.join(MODES)}",
        "output_dir = string path (optional)",
    ]
    defaults = ScenarioConfig()
    for name, cls in _SECTIONS.items():
        lines.append("")
        lines.append(f"[{name}]")
        obj = getattr(defaults, name)
        for f in fields(cls):
            v = getattr(obj, f.name)
            ann = str(f.type)
            note = ""
            if f.name == "efficiency" and v is None:
                note = "  (default 1.0 for cw, 0.2 for pulsed)"
            lines.append(f"{f.name}: {ann} = {v!r}{note}")
    return "\n".join(lines) + "\n"


def render_config(cfg: ScenarioConfig) -> str:
    """Render a config back to TOML text (used for snapshots of
    programmatically built configs)."""
    def fmt(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, str):
            return f'"{v}"'
        if isinstance(v, list):
            return "[" + ", ".join(fmt(x) for x in v) + "]"
        if isinstance(v, float):
            return repr(v)
        return str(v)

    lines = [f"schema_version = {cfg.schema_version}", f'mode = "{cfg.mode}"']
    if cfg.output_dir is not None:
        lines.append(f'output_dir = "{cfg.output_dir}"')
    for name in _SECTIONS:
        obj = getattr(cfg, name)
        lines.append("")
        lines.append(f"[{name}]")
        for f in fields(obj):
            v = getattr(obj, f.name)
            if v is None:
                continue
            if f.name == "params":
                if v:
                    lines.append(f"[{name}.params]")
                    for k, pv in v.items():
                        lines.append(f"{k} = {fmt(pv)}")
                continue
            lines.append(f"{f.name} = {fmt(v)}")
    return "\n".join(lines) + "\n"
