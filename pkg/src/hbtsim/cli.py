"""Command line front end.

Subcommands:
  simulate-cw      run the continuous-wave scenario
  simulate-pulsed  run the gated pulse-train scenario
  oracle           print closed-form predictions for an [oracle] config
  sweep            repeat a scenario while stepping one numeric field
  analyze          re-fit stored fringe scans from a finished run
  validate         check a config file and exit

Exit codes map error categories so scripts can branch on failure class:
0 success, 1 internal, 2 config-invalid, 3 unknown-parameter,
4 sampling, 5 grid, 6 analysis, 7 invalid-parameter. A completed
simulation exits 0 even when report checks fail; the report records
pass/fail per check.
"""

from __future__ import annotations

import argparse
import glob
import os
import sys

from . import dataio
from .analysis import extract_phase_curve, fit_doppler, fit_fringe
from .config import (
    ScenarioConfig,
    config_from_dict,
    load_config,
    schema_text,
    set_by_path,
    validate_config,
)
from .errors import (
    AnalysisError,
    ConfigError,
    GridError,
    HbtSimError,
    ParamError,
    SamplingError,
)
from .oracle import (
    AntibunchedLOParams,
    CwScenarioParams,
    PulsedScenarioParams,
    gamma22_antibunched,
    gamma22_cw,
    rate_pulsed,
    signal_rate_zeta,
    visibility_cw,
    visibility_pulsed,
    xi_factor,
)
from .scenarios import RunReport, run_cw_scenario, run_pulsed_scenario, run_sweep

_CATEGORY_CODES = {
    "config-invalid": 2,
    "unknown-parameter": 3,
    "sampling": 4,
    "sampling-too-coarse": 4,
    "duration-too-short": 4,
    "grid-mismatch": 5,
    "shift-exceeds-record": 5,
    "window-longer-than-record": 5,
    "empty-overlap": 5,
    "analysis": 6,
    "fit-degenerate": 6,
    "missing-reference-delay": 6,
    "insufficient-bins": 6,
    "visibility-out-of-range": 6,
    "invalid-parameter": 7,
}

_CLASS_CODES = [
    (ConfigError, 2),
    (SamplingError, 4),
    (GridError, 5),
    (AnalysisError, 6),
    (ParamError, 7),
]


def _exit_code(err: HbtSimError) -> int:
    code = _CATEGORY_CODES.get(getattr(err, "category", ""))
    if code is not None:
        return code
    for cls, c in _CLASS_CODES:
        if isinstance(err, cls):
            return c
    return 1


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML scenario file (defaults per mode)")
    p.add_argument("--seed", type=int, help="override [run] seed")
    p.add_argument("--trials", type=int, help="override [run] trials")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for phase points (default 1)")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="SECTION.KEY=VALUE",
                   help="override a numeric config field (repeatable)")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hbtsim",
        description="Phase-sensitive intensity interferometry simulator",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-cw", help="continuous-wave scenario")
    _add_common(p)
    p.set_defaults(mode="cw")
    p = sub.add_parser("simulate-pulsed", help="gated pulse-train scenario")
    _add_common(p)
    p.set_defaults(mode="pulsed")

    p = sub.add_parser("oracle", help="print closed-form predictions")
    p.add_argument("--config", help="TOML file with an [oracle] section")
    p.add_argument("--kind", choices=("cw", "pulsed", "antibunched", "zeta"),
                   help="override [oracle] kind")
    p.add_argument("--weight", choices=("consistent", "printed"),
                   help="coincidence-rate weighting convention for pulsed")

    p = sub.add_parser("sweep", help="step one numeric config field")
    _add_common(p)
    p.add_argument("--param", required=True,
                   help="dotted field address, e.g. lo.amplitude; the "
                        "special address scan.fringe_delay probes one "
                        "correlator delay per value")
    p.add_argument("--values", required=True,
                   help="comma-separated numeric values")

    p = sub.add_parser("analyze", help="re-fit stored fringe scans")
    p.add_argument("--in", dest="run_dir", help="finished run directory")
    p.add_argument("--xi", type=float, help="fixed interference weight")
    p.add_argument("--schema", action="store_true",
                   help="print the config schema and exit")

    p = sub.add_parser("validate", help="check a config file")
    p.add_argument("--config", required=True)
    return ap


def _load_with_overrides(args, default_mode: str) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else config_from_dict(
        {"mode": default_mode})
    if args.seed is not None:
        cfg.run.seed = args.seed
    if args.trials is not None:
        cfg.run.trials = args.trials
    for item in args.overrides:
        key, eq, text = item.partition("=")
        if not eq:
            raise ConfigError(
                f"--set expects SECTION.KEY=VALUE, got {item!r}",
                category="unknown-parameter",
            )
        try:
            value = float(text)
        except ValueError:
            raise ConfigError(
                f"--set {key}: value {text!r} is not numeric",
                category="unknown-parameter",
            )
        set_by_path(cfg, key.strip(), value)
    if args.overrides or args.seed is not None or args.trials is not None:
        problems = validate_config(cfg)
        if problems:
            raise ConfigError(
                "invalid configuration after overrides:\n  - "
                + "\n  - ".join(problems),
                category="config-invalid",
            )
    return cfg


def _print_report(report: RunReport) -> None:
    from .scenarios import _report_lines

    for line in _report_lines(report):
        print(line)
    if report.output_dir:
        print(f"\noutputs written to {report.output_dir}")


def _cmd_simulate(args) -> int:
    cfg = _load_with_overrides(args, args.mode)
    if cfg.mode != args.mode:
        raise ConfigError(
            f"config mode {cfg.mode!r} does not match the "
            f"simulate-{args.mode} command",
            category="config-invalid",
        )
    out = args.out or cfg.output_dir
    runner = run_cw_scenario if args.mode == "cw" else run_pulsed_scenario
    report = runner(cfg, threads=args.threads, out_dir=out)
    _print_report(report)
    return 0


def _params_from(cls, raw: dict):
    try:
        return cls(**raw)
    except TypeError:
        known = set(cls.__dataclass_fields__)
        bad = sorted(set(raw) - known)
        raise ConfigError(
            f"[oracle.params] unknown key(s) {', '.join(bad)} for {cls.__name__}",
            category="unknown-parameter",
        )


def _cmd_oracle(args) -> int:
    cfg = load_config(args.config) if args.config else config_from_dict(
        {"mode": "oracle"})
    kind = args.kind or cfg.oracle.kind
    weight = args.weight or cfg.oracle.weight
    raw = dict(cfg.oracle.params)
    lines: list[str] = [f"kind = {kind}"]
    if kind == "cw":
        p = _params_from(CwScenarioParams, raw)
        lines += [
            f"xi = {xi_factor(p):.10g}",
            f"gamma22 = {gamma22_cw(p):.10g}",
            f"visibility = {visibility_cw(p):.10g}",
        ]
    elif kind == "pulsed":
        p = _params_from(PulsedScenarioParams, raw)
        lines += [
            f"weight = {weight}",
            f"coincidence_rate = {rate_pulsed(p, weight):.10g}",
            f"visibility = {visibility_pulsed(p, weight):.10g}",
        ]
    elif kind == "antibunched":
        cw_keys = set(CwScenarioParams.__dataclass_fields__)
        lo_keys = set(AntibunchedLOParams.__dataclass_fields__)
        unknown = sorted(set(raw) - cw_keys - lo_keys)
        if unknown:
            raise ConfigError(
                f"[oracle.params] unknown key(s) {', '.join(unknown)}",
                category="unknown-parameter",
            )
        p = _params_from(
            CwScenarioParams, {k: v for k, v in raw.items() if k in cw_keys})
        lo = _params_from(
            AntibunchedLOParams,
            {k: v for k, v in raw.items() if k in lo_keys - cw_keys})
        z = signal_rate_zeta(lo)
        lines += [
            f"gamma22 = {gamma22_antibunched(p, lo):.10g}",
            f"zeta = {z.zeta:.10g}",
            f"resolves_lo_coherence = {z.resolves_lo_coherence}",
            f"resolves_source_coherence = {z.resolves_source_coherence}",
            f"delays_matched = {z.delays_matched}",
        ]
    else:
        lo = _params_from(AntibunchedLOParams, raw)
        z = signal_rate_zeta(lo)
        lines += [
            f"zeta = {z.zeta:.10g}",
            f"tr_over_tlo = {z.tr_over_tlo:.10g}",
            f"resolves_lo_coherence = {z.resolves_lo_coherence}",
            f"resolves_source_coherence = {z.resolves_source_coherence}",
            f"delays_matched = {z.delays_matched}",
        ]
    print("\n".join(lines))
    return 0


def _parse_values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise ConfigError(
            f"--values must be comma-separated numbers, got {text!r}",
            category="config-invalid",
        )


def _cmd_sweep(args) -> int:
    cfg = _load_with_overrides(args, "cw")
    values = _parse_values(args.values)
    out = args.out or cfg.output_dir
    reports = run_sweep(cfg, args.param, values, threads=args.threads,
                        out_dir=out)
    print(f"sweep over {args.param}: {len(reports)} runs")
    for v, rep in zip(values, reports):
        if rep.mode == "pulsed":
            vis, err = float(rep.visibility[0]), float(rep.visibility_err[0])
        else:
            probe = v if args.param == "scan.fringe_delay" else float(rep.delays[-1])
            vis, err = rep.visibility_at(probe)
        print(f"  {args.param} = {v:g}: visibility {vis:.4f} +- {err:.4f}")
    if out:
        print(f"summary written to {os.path.join(out, 'summary.csv')}")
    return 0


def _cmd_analyze(args) -> int:
    if args.schema:
        print(schema_text(), end="")
        return 0
    if not args.run_dir:
        raise ConfigError("analyze needs --in RUN_DIR (or --schema)",
                          category="config-invalid")
    snap = os.path.join(args.run_dir, "config.toml")
    if not os.path.isfile(snap):
        raise ConfigError(f"no config.toml in {args.run_dir}",
                          category="config-invalid")
    cfg = load_config(snap)
    trial_dirs = sorted(glob.glob(os.path.join(args.run_dir, "trial_*")))
    if not trial_dirs:
        raise ConfigError(f"no trial directories in {args.run_dir}",
                          category="config-invalid")
    for tdir in trial_dirs:
        paths = sorted(glob.glob(os.path.join(tdir, "fringes", "*.csv")))
        if not paths:
            continue
        scans, fits = [], []
        for path in paths:
            scan, _ = dataio.load_fringe(path)
            fit = fit_fringe(scan)
            scans.append(scan)
            fits.append(fit)
            dataio.save_fringe(path, scan, fit)
        print(f"{tdir}: {len(fits)} fringe scans re-fitted")
        if cfg.mode != "cw":
            for fit in fits:
                print(f"  offset fringe: visibility {fit.visibility:.4f} "
                      f"+- {fit.visibility_err:.4f}")
            continue
        taus = [scan.tau for scan in scans]
        if args.xi is not None:
            xi = args.xi
        elif cfg.analysis.xi_mode == "fixed":
            xi = cfg.analysis.xi_value
        else:
            from .scenarios import _xi_calibrated

            xi = _xi_calibrated(cfg, fits, taus)
        try:
            cf = extract_phase_curve(taus, fits, xi=xi,
                                     policy=cfg.analysis.clamp_policy)
        except AnalysisError as exc:
            print(f"  phase curve not extracted: {exc}")
            continue
        dataio.save_coherence(os.path.join(tdir, "coherence.csv"), cf)
        print(f"  xi = {xi:.4f}")
        for tau, fit, g in zip(cf.tau, fits, cf.gamma_abs):
            print(f"  tau {tau: .3e}: visibility {fit.visibility:.4f}, "
                  f"|gamma| {g:.4f}")
        try:
            dop = fit_doppler(cf, cfg.analysis.min_gamma_doppler)
            print(f"  frequency offset {dop.value:.6g} +- {dop.stderr:.3g} rad/s")
        except AnalysisError:
            pass
    return 0


def _cmd_validate(args) -> int:
    load_config(args.config)
    print(f"{args.config}: ok")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "simulate-cw": _cmd_simulate,
        "simulate-pulsed": _cmd_simulate,
        "oracle": _cmd_oracle,
        "sweep": _cmd_sweep,
        "analyze": _cmd_analyze,
        "validate": _cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except HbtSimError as err:
        print(f"error [{err.category}]: {err}", file=sys.stderr)
        return _exit_code(err)


if __name__ == "__main__":
    sys.exit(main())
