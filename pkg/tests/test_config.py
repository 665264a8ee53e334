"""Config parsing, validation, overrides, and TOML round-trips."""

import numpy as np
import pytest

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from hbtsim import ConfigError, config_from_dict, load_config, validate_config
from hbtsim.config import ScenarioConfig, render_config, schema_text, set_by_path


def test_defaults_and_mode_dependent_efficiency():
    cfg = config_from_dict({})
    assert cfg.mode == "cw"
    assert cfg.schema_version == 1
    assert cfg.detector.efficiency == 1.0
    assert cfg.scan.fringe_delays == [0.0]
    pulsed = config_from_dict({"mode": "pulsed"})
    assert pulsed.detector.efficiency == 0.2
    explicit = config_from_dict({"mode": "pulsed", "detector": {"efficiency": 0.5}})
    assert explicit.detector.efficiency == 0.5


def test_schema_version_checked_when_present():
    assert config_from_dict({"schema_version": 1}).schema_version == 1
    with pytest.raises(ConfigError) as exc:
        config_from_dict({"schema_version": 2})
    assert "schema_version" in str(exc.value)
    assert exc.value.category == "config-invalid"


def test_problems_are_aggregated():
    raw = {
        "mode": "continuous",
        "typo_section": {},
        "source": {"mean_intensity": -1.0, "linewidth": 3.0},
    }
    with pytest.raises(ConfigError) as exc:
        config_from_dict(raw)
    msg = str(exc.value)
    assert "mode" in msg
    assert "typo_section" in msg
    assert "linewidth" in msg
    assert "mean_intensity" in msg


def test_type_coercion_rules():
    cfg = config_from_dict({"source": {"mean_intensity": 2}, "run": {"n_pulses": 50000.0}})
    assert cfg.source.mean_intensity == 2.0
    assert isinstance(cfg.source.mean_intensity, float)
    assert cfg.run.n_pulses == 50_000
    assert isinstance(cfg.run.n_pulses, int)
    with pytest.raises(ConfigError):
        config_from_dict({"source": {"mean_intensity": "bright"}})
    with pytest.raises(ConfigError):
        config_from_dict({"lo": {"amplitude": True}})
    with pytest.raises(ConfigError):
        config_from_dict({"lo": {"mode_overlap": [0.9, "full"]}})


def test_fringe_delays_are_a_sorted_set_on_the_grid():
    cfg = config_from_dict({"scan": {"fringe_delays": [2e-6, 0.0, 2e-6, -2e-6]}})
    assert cfg.scan.fringe_delays == [-2e-6, 0.0, 2e-6]
    with pytest.raises(ConfigError) as exc:
        config_from_dict({"scan": {"fringe_delays": [0.0, 3.3e-8]}})
    assert "off the dt grid" in str(exc.value)


def test_cw_needs_two_averaging_windows():
    with pytest.raises(ConfigError) as exc:
        config_from_dict({"run": {"duration_per_point": 3e-3, "window": 2e-3}})
    assert "2 averaging windows" in str(exc.value)
    config_from_dict({"run": {"duration_per_point": 4e-3, "window": 2e-3}})


def test_pulsed_delay_bounds():
    with pytest.raises(ConfigError):
        config_from_dict({"mode": "pulsed", "run": {"n_pulses": 100},
                          "delays": {"optical_pulses": 100}})
    with pytest.raises(ConfigError):
        config_from_dict({"mode": "pulsed", "delays": {"electronic_pulses": -1}})


def test_validate_config_catches_semantics():
    cfg = ScenarioConfig()
    cfg.detector.efficiency = 1.0
    assert validate_config(cfg) == []
    cfg.scan.phase_points = 7
    cfg.source.statistics = "chaotic"
    cfg.analysis.xi_value = 1.5
    problems = validate_config(cfg)
    assert len(problems) == 3
    assert any("phase_points" in p for p in problems)
    assert any("statistics" in p for p in problems)
    assert any("xi_value" in p for p in problems)


def test_oracle_section_validation():
    config_from_dict({"mode": "oracle", "oracle": {"kind": "zeta"}})
    with pytest.raises(ConfigError):
        config_from_dict({"mode": "oracle", "oracle": {"kind": "psychic"}})
    with pytest.raises(ConfigError):
        config_from_dict({"mode": "oracle", "oracle": {"weight": "heavy"}})
    # Oracle params pass through untouched.
    cfg = config_from_dict({"mode": "oracle", "oracle": {"params": {"g2_in": 1.65}}})
    assert cfg.oracle.params == {"g2_in": 1.65}


def test_load_config_file_errors(tmp_path):
    with pytest.raises(ConfigError) as exc:
        load_config(str(tmp_path / "nope.toml"))
    assert "not found" in str(exc.value)
    bad = tmp_path / "bad.toml"
    bad.write_text("mode = [unclosed\n")
    with pytest.raises(ConfigError) as exc:
        load_config(str(bad))
    assert "not valid TOML" in str(exc.value)


def test_render_config_round_trips(tmp_path):
    cfg = config_from_dict({
        "mode": "pulsed",
        "output_dir": "out/run1",
        "source": {"mean_intensity": 0.15, "mode_count": 1.6},
        "lo": {"amplitude": 0.15, "mode_overlap": [0.6, 0.85]},
        "scan": {"phase_points": 12},
        "run": {"seed": 777, "n_pulses": 100_000},
        "oracle": {"params": {"nbar": 0.15}},
    })
    text = render_config(cfg)
    tomllib.loads(text)  # must be parseable TOML
    path = tmp_path / "snap.toml"
    path.write_text(text)
    back = load_config(str(path))
    for section in ("source", "lo", "detector", "delays", "scan", "run",
                    "analysis", "report", "oracle"):
        assert getattr(back, section) == getattr(cfg, section), section
    assert back.mode == cfg.mode
    assert back.output_dir == "out/run1"
    assert back.source_path == str(path)


def test_set_by_path_coercion_and_errors():
    cfg = config_from_dict({})
    set_by_path(cfg, "source.coherence_time", 5e-6)
    assert cfg.source.coherence_time == 5e-6
    set_by_path(cfg, "run.trials", 3.0)
    assert cfg.run.trials == 3 and isinstance(cfg.run.trials, int)
    set_by_path(cfg, "lo.blocked", 1.0)
    assert cfg.lo.blocked is True
    with pytest.raises(ConfigError) as exc:
        set_by_path(cfg, "lo.blocked", 0.5)
    assert exc.value.category == "unknown-parameter"
    with pytest.raises(ConfigError) as exc:
        set_by_path(cfg, "run.bogus", 1.0)
    assert exc.value.category == "unknown-parameter"
    with pytest.raises(ConfigError):
        set_by_path(cfg, "source.lineshape", 1.0)
    with pytest.raises(ConfigError):
        set_by_path(cfg, "just_a_key", 1.0)


def test_schema_text_lists_everything():
    text = schema_text()
    for section in ("[source]", "[lo]", "[detector]", "[delays]", "[scan]",
                    "[run]", "[analysis]", "[report]", "[oracle]"):
        assert section in text
    assert "default 1.0 for cw, 0.2 for pulsed" in text
    assert "schema_version = 1" in text


def test_copy_is_deep():
    cfg = config_from_dict({})
    dup = cfg.copy()
    dup.scan.fringe_delays.append(1e-6)
    dup.source.mean_intensity = 9.0
    assert cfg.scan.fringe_delays == [0.0]
    assert cfg.source.mean_intensity == 1.0
