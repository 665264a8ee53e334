"""Measurement scenarios: full simulated runs of the two interferometer
topologies, with every measured quantity paired against its closed-form
prediction.

The cw scenario reproduces the splitter-plus-two-mixers bench: one
quasi-thermal source split to two arms, each mixed with a weak coherent
local oscillator, analog detection, and a windowed cross-correlator whose
lag axis probes gamma(tau) directly. The pulsed scenario gates the same
idea: pulse trains, single photon detectors, and coincidence counting
versus pulse offset, with an optical delay in one arm and a compensating
electronic delay in front of the coincidence logic.

Randomness is organized so results are a pure function of (config, seed):
every generation step draws from a seed derived from the run seed plus the
(trial, stage, point) indices, never from shared mutable state. Thread
counts therefore cannot change any output byte.
"""

from __future__ import annotations

import os
import shutil
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import dataio
from .analysis import (
    CoherenceFunction,
    CrosscheckReport,
    DopplerEstimate,
    FringeFit,
    FringeScan,
    crosscheck,
    extract_phase_curve,
    fit_doppler,
    fit_fringe,
    gamma_from_g2,
    visibility_to_gamma,
)
from .bench import attenuate, delay, mix, phase_shift, split
from .config import ScenarioConfig, render_config, set_by_path
from .detection import (
    ClickRecord,
    CorrelationEstimate,
    DetectorSpec,
    coincide,
    correlate_photocurrents,
    detect_analog,
    detect_spd,
    g2_at_lag,
)
from .errors import AnalysisError, ConfigError
from .fields import (
    CoherentLOSpec,
    PulseTrain,
    ThermalFieldSpec,
    gamma_reference,
    gen_coherent_lo,
    gen_cw_phase_diffused,
    gen_cw_thermal,
    gen_pulsed_thermal,
)
from .oracle import (
    CwScenarioParams,
    PulsedScenarioParams,
    visibility_cw,
    visibility_pulsed,
)
from ._util import as_rng

# Stage indices entering the seed path, so records of different stages can
# never collide even with equal point indices.
_STAGE_BASELINE = 0
_STAGE_FRINGE = 1


@dataclass(frozen=True)
class CheckRow:
    """One measured-versus-predicted comparison."""

    name: str
    measured: float
    uncertainty: float
    predicted: float
    tolerance: float
    passed: bool


@dataclass
class RunReport:
    """Aggregated outcome of a scenario run."""

    mode: str
    seed: int
    trials: int
    checks: list[CheckRow] = field(default_factory=list)
    passed: bool = True
    # Per-delay tables (cw: seconds; pulsed: the single probed offset).
    delays: np.ndarray | None = None
    visibility: np.ndarray | None = None
    visibility_err: np.ndarray | None = None
    predicted_visibility: np.ndarray | None = None
    gamma_abs: np.ndarray | None = None
    gamma_phase: np.ndarray | None = None
    predicted_gamma_abs: np.ndarray | None = None
    predicted_gamma_phase: np.ndarray | None = None
    xi_used: float = 1.0
    doppler: DopplerEstimate | None = None
    doppler_injected: float = 0.0
    baseline: CorrelationEstimate | None = None
    cross: CrosscheckReport | None = None
    scalars: dict = field(default_factory=dict)
    runtime_s: float = 0.0
    output_dir: str | None = None

    def visibility_at(self, tau: float) -> tuple[float, float]:
        i = int(np.argmin(np.abs(self.delays - tau)))
        return float(self.visibility[i]), float(self.visibility_err[i])

    def check(self, name: str) -> CheckRow:
        for row in self.checks:
            if row.name == name:
                return row
        raise KeyError(name)


def _seeds(seed: int, *path: int, n: int) -> list[np.random.SeedSequence]:
    """Children of the run seed at a fixed index path.

    Built directly from (seed, path) so the result is independent of any
    other spawning that happened before; this is what makes thread
    scheduling irrelevant to the streams.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(x) for x in path))
    return ss.spawn(n)


def _detector_spec(cfg: ScenarioConfig) -> DetectorSpec:
    d = cfg.detector
    return DetectorSpec(
        bandwidth=d.bandwidth,
        electronic_noise_rms=d.electronic_noise_rms,
        efficiency=d.efficiency if d.efficiency is not None else 1.0,
        dark_prob_per_gate=d.dark_prob_per_gate,
        gate_width=d.gate_width,
        dead_time=d.dead_time,
    )


def _thermal_spec(cfg: ScenarioConfig) -> ThermalFieldSpec:
    s = cfg.source
    return ThermalFieldSpec(
        mean_intensity=s.mean_intensity,
        coherence_time=s.coherence_time,
        lineshape=s.lineshape,
        doppler_shift=s.doppler_shift,
        mode_count=s.mode_count,
    )


def _cw_source(cfg: ScenarioConfig, duration: float, seed):
    spec = _thermal_spec(cfg)
    if cfg.source.statistics == "phase_diffused":
        return gen_cw_phase_diffused(spec, duration, cfg.run.dt, seed)
    return gen_cw_thermal(spec, duration, cfg.run.dt, seed)


def _source_gamma(cfg: ScenarioConfig, tau: float) -> complex:
    """Analytic gamma(tau) of the configured source."""
    s = cfg.source
    shape = "lorentzian" if s.statistics == "phase_diffused" else s.lineshape
    return complex(gamma_reference(shape, tau, s.coherence_time, s.doppler_shift))


def _source_lambda(cfg: ScenarioConfig, tau: float) -> float:
    """Excess intensity correlation of the configured source at tau."""
    if cfg.source.statistics == "phase_diffused":
        return 0.0
    g = abs(_source_gamma(cfg, tau))
    return g * g / cfg.source.mode_count


def _cw_params(cfg: ScenarioConfig, tau: float) -> CwScenarioParams:
    g = _source_gamma(cfg, tau)
    half_i = cfg.source.mean_intensity / 2.0
    half_a = (0.0 if cfg.lo.blocked else cfg.lo.amplitude) / 2.0
    b1, b2 = cfg.lo.mode_overlap
    return CwScenarioParams(
        i1=half_i,
        i2=half_i,
        a1_sq=half_a,
        a2_sq=half_a,
        gamma_abs=abs(g),
        gamma_phase=float(np.angle(g)),
        dphi_alpha=0.0,
        lambda_tau=_source_lambda(cfg, tau),
        mode_overlap=b1 * b2,
    )


def _mixed_components(sig, lo_arm, overlap: float):
    """One detector's field components for a given arm/LO mode overlap.

    The matched fraction overlap^2 of the signal interferes with the LO;
    the orthogonal remainder reaches the detector through an equivalent
    passive path and only adds intensity. Both suffer the same 50:50
    mixing loss, so the singles flux is overlap-independent.
    """
    if overlap >= 1.0:
        return [mix(sig, lo_arm).out_a]
    matched = attenuate(sig, overlap * overlap)
    orth = attenuate(sig, 1.0 - overlap * overlap)
    # Mixing the orthogonal part with a blocked LO equals a bare 50:50
    # split but restricts it to the same gate overlap as the matched part.
    return [mix(matched, lo_arm).out_a, mix(orth, attenuate(lo_arm, 0.0)).out_a]


def _cw_phase_point(cfg: ScenarioConfig, trial: int, p_idx: int, phi: float):
    """Simulate one LO phase setting; return (g2, stderr) per fringe delay."""
    seeds = _seeds(cfg.run.seed, trial, _STAGE_FRINGE, p_idx, n=5)
    dur = cfg.run.duration_per_point
    dt = cfg.run.dt
    src = _cw_source(cfg, dur, seeds[0])
    lo_amp = 0.0 if cfg.lo.blocked else cfg.lo.amplitude
    lo = gen_coherent_lo(
        CoherentLOSpec(lo_amp, cfg.lo.static_phase), duration=dur, dt=dt, seed=seeds[1]
    )
    arms, los = split(src), split(lo)
    phase2 = phi
    if cfg.lo.jitter_rms > 0.0:
        phase2 = phi + cfg.lo.jitter_rms * as_rng(seeds[2]).standard_normal(los.out_b.n)
    lo2 = phase_shift(los.out_b, phase2)
    b1, b2 = cfg.lo.mode_overlap
    det = _detector_spec(cfg)
    i1 = detect_analog(_mixed_components(arms.out_a, los.out_a, b1), det, seeds[3])
    i2 = detect_analog(_mixed_components(arms.out_b, lo2, b2), det, seeds[4])
    out = []
    for tau in cfg.scan.fringe_delays:
        est = g2_at_lag(i1, i2, tau, cfg.run.window)
        out.append((est.g2[0], est.stderr[0]))
    return out


def _cw_baseline(cfg: ScenarioConfig, trial: int) -> CorrelationEstimate:
    """LO-blocked intensity correlation: the plain bunching curve."""
    seeds = _seeds(cfg.run.seed, trial, _STAGE_BASELINE, 0, n=4)
    dur = cfg.run.baseline_duration
    src = _cw_source(cfg, dur, seeds[0])
    dark = gen_coherent_lo(CoherentLOSpec(0.0), duration=dur, dt=cfg.run.dt, seed=seeds[1])
    arms, los = split(src), split(dark)
    det = _detector_spec(cfg)
    i1 = detect_analog(mix(arms.out_a, los.out_a).out_a, det, seeds[2])
    i2 = detect_analog(mix(arms.out_b, los.out_b).out_a, det, seeds[3])
    return correlate_photocurrents(i1, i2, cfg.run.baseline_max_tau, cfg.run.window)


def _phase_grid(cfg: ScenarioConfig) -> np.ndarray:
    return np.linspace(0.0, 2.0 * np.pi, cfg.scan.phase_points)


def _map_points(fn, n_points: int, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, range(n_points)))
    return [fn(i) for i in range(n_points)]


@dataclass
class _CwTrial:
    scans: list[FringeScan]
    fits: list[FringeFit]
    cf: CoherenceFunction
    xi_used: float
    doppler: DopplerEstimate | None
    baseline: CorrelationEstimate | None
    cross: CrosscheckReport | None


def _xi_calibrated(cfg: ScenarioConfig, fits: list[FringeFit], delays: list[float]) -> float:
    """xi from the zero-delay fringe against the ideal-coherence ceiling.

    This is the experimental calibration: at tau = 0 the source coherence
    is unity, so the measured visibility over the ideal value is the
    net interference weight of the apparatus.
    """
    i0 = int(np.argmin(np.abs(np.asarray(delays))))
    ceiling_params = replace(_cw_params(cfg, 0.0), mode_overlap=1.0)
    ceiling = visibility_cw(ceiling_params)
    if ceiling <= 0.0:
        return 1.0
    xi = fits[i0].visibility / ceiling
    return float(min(max(xi, 1e-6), 1.0))


def _run_cw_trial(cfg: ScenarioConfig, trial: int, threads: int) -> _CwTrial:
    phases = _phase_grid(cfg)
    delays = list(cfg.scan.fringe_delays)
    per_point = _map_points(
        lambda p: _cw_phase_point(cfg, trial, p, phases[p]), phases.size, threads
    )
    values = np.array([[v for v, _ in row] for row in per_point])  # (P, D)
    errors = np.array([[e for _, e in row] for row in per_point])
    scans, fits = [], []
    for d, tau in enumerate(delays):
        scan = FringeScan(phases, values[:, d], errors[:, d], tau=tau)
        scans.append(scan)
        fits.append(fit_fringe(scan))
    if cfg.analysis.xi_mode == "fixed":
        xi = cfg.analysis.xi_value
    else:
        xi = _xi_calibrated(cfg, fits, delays)
    cf = extract_phase_curve(delays, fits, xi=xi, policy=cfg.analysis.clamp_policy)
    try:
        doppler = fit_doppler(cf, cfg.analysis.min_gamma_doppler)
    except AnalysisError:
        doppler = None
    baseline = _cw_baseline(cfg, trial) if cfg.run.include_baseline else None
    cross = None
    if baseline is not None and cfg.source.statistics == "thermal" and cfg.source.mode_count == 1.0:
        gamma_b, _, _ = gamma_from_g2(baseline)
        cross = crosscheck(cf, baseline.tau, gamma_b, cfg.report.gamma_rms_tol)
    return _CwTrial(scans, fits, cf, xi, doppler, baseline, cross)


def _pool(values: np.ndarray, errors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Combine per-trial values: mean, and a standard error that honors
    both the per-trial uncertainties and the observed scatter."""
    t = values.shape[0]
    mean = values.mean(axis=0)
    err = np.sqrt(np.mean(errors**2, axis=0) / t)
    if t >= 2:
        scatter = values.std(axis=0, ddof=1) / np.sqrt(t)
        err = np.maximum(err, scatter)
    return mean, err


def _mean_correlation(curves: list[CorrelationEstimate]) -> CorrelationEstimate:
    g2 = np.array([c.g2 for c in curves])
    se = np.array([c.stderr for c in curves])
    mean, err = _pool(g2, se)
    ref = curves[0]
    return CorrelationEstimate(
        tau=ref.tau,
        g2=mean,
        stderr=err,
        averaging_window=ref.averaging_window,
        kind=ref.kind,
        n_windows=sum(c.n_windows for c in curves),
    )


def run_cw_scenario(cfg: ScenarioConfig, threads: int = 1, out_dir: str | None = None) -> RunReport:
    """Full cw measurement: fringes at each probe delay, coherence curve,
    frequency-offset fit, and the LO-blocked cross-check route."""
    if cfg.mode != "cw":
        raise ConfigError(f"config mode is {cfg.mode!r}, expected 'cw'")
    t_start = time.perf_counter()
    trials = [_run_cw_trial(cfg, t, threads) for t in range(cfg.run.trials)]

    delays = np.asarray(trials[0].cf.tau)
    vis, vis_err = _pool(
        np.array([[f.visibility for f in tr.fits] for tr in trials]),
        np.array([[f.visibility_err for f in tr.fits] for tr in trials]),
    )
    gam, gam_err = _pool(
        np.array([tr.cf.gamma_abs for tr in trials]),
        np.array([tr.cf.gamma_abs_err for tr in trials]),
    )
    pha, _ = _pool(
        np.array([tr.cf.gamma_phase for tr in trials]),
        np.array([tr.cf.gamma_phase_err for tr in trials]),
    )

    pred_vis = np.array([visibility_cw(_cw_params(cfg, t)) for t in delays])
    pred_gam = np.array([abs(_source_gamma(cfg, t)) for t in delays])
    pred_pha = np.array([-cfg.source.doppler_shift * t for t in delays])

    report = RunReport(mode="cw", seed=cfg.run.seed, trials=cfg.run.trials)
    report.delays = delays
    report.visibility, report.visibility_err = vis, vis_err
    report.predicted_visibility = pred_vis
    report.gamma_abs, report.gamma_phase = gam, pha
    report.predicted_gamma_abs, report.predicted_gamma_phase = pred_gam, pred_pha
    report.xi_used = float(np.mean([tr.xi_used for tr in trials]))
    report.doppler_injected = cfg.source.doppler_shift

    checks: list[CheckRow] = []
    for i, tau in enumerate(delays):
        checks.append(_row(f"visibility@{tau:g}", vis[i], vis_err[i], pred_vis[i],
                           cfg.report.visibility_tol))
        if not cfg.lo.blocked:
            checks.append(_row(f"gamma_abs@{tau:g}", gam[i], gam_err[i], pred_gam[i],
                               cfg.report.gamma_tol))

    dops = [tr.doppler for tr in trials if tr.doppler is not None]
    if dops:
        dval, derr = _pool(
            np.array([[d.value] for d in dops]), np.array([[d.stderr] for d in dops])
        )
        report.doppler = DopplerEstimate(float(dval[0]), float(derr[0]),
                                         min(d.n_points for d in dops))
        if cfg.source.doppler_shift != 0.0:
            tol = cfg.report.doppler_rel_tol * abs(cfg.source.doppler_shift)
            checks.append(_row("doppler_shift", float(dval[0]), float(derr[0]),
                               cfg.source.doppler_shift, tol))

    if trials[0].baseline is not None:
        base = _mean_correlation([tr.baseline for tr in trials])
        report.baseline = base
        g0, e0 = base.at(0.0)
        pred_g0 = 1.0 + _source_lambda(cfg, 0.0)
        checks.append(_row("baseline_g2_zero", g0, e0, pred_g0, cfg.report.g2_zero_tol))
        far = np.abs(base.tau) > 5.0 * cfg.source.coherence_time
        if np.any(far):
            gfar = float(base.g2[far].mean())
            efar = float(np.sqrt(np.mean(base.stderr[far] ** 2) / np.count_nonzero(far)))
            checks.append(_row("baseline_g2_far", gfar, efar, 1.0, cfg.report.g2_far_tol))
        report.scalars["baseline_g2_zero"] = g0
        report.scalars["baseline_g2_zero_err"] = e0

    crosses = [tr.cross for tr in trials if tr.cross is not None]
    if crosses:
        rms = float(np.mean([c.rms for c in crosses]))
        bias = float(np.mean([c.bias for c in crosses]))
        report.cross = CrosscheckReport(
            rms=rms,
            max_abs=max(c.max_abs for c in crosses),
            bias=bias,
            n_points=crosses[0].n_points,
            tolerance=cfg.report.gamma_rms_tol,
            passed=rms <= cfg.report.gamma_rms_tol,
        )
        checks.append(_row("gamma_route_rms", rms, 0.0, 0.0, cfg.report.gamma_rms_tol))

    report.checks = checks
    report.passed = all(c.passed for c in checks)
    report.runtime_s = time.perf_counter() - t_start
    _write_outputs(cfg, report, trials, out_dir)
    return report


def _row(name: str, measured: float, err: float, predicted: float, tol: float) -> CheckRow:
    return CheckRow(
        name=name,
        measured=float(measured),
        uncertainty=float(err),
        predicted=float(predicted),
        tolerance=float(tol),
        passed=bool(abs(measured - predicted) <= tol),
    )


# ---------------------------------------------------------------- pulsed


# Pulse trains are simulated in segments of this many gates so long runs
# never hold the whole record's fields in memory at once.
_CHUNK_PULSES = 2_000_000


def _pulsed_clicks(cfg: ScenarioConfig, trial: int, stage: int, p_idx: int,
                   phi: float, n_pulses: int, lo_amp: float):
    """Click records of both gated detectors for one LO phase setting.

    The source stream is drawn in seed-stable segments labeled by absolute
    gate index; the optical delay is honored across segment edges by
    carrying the last optical_pulses source amplitudes into the next
    segment. Per-gate clicks land in dense accumulators, so the combined
    records are identical for any segmentation or thread count. Dead-time
    suppression, when enabled, acts within a segment only.
    """
    period = cfg.run.pulse_period
    n_o = int(cfg.delays.optical_pulses)
    b1, b2 = cfg.lo.mode_overlap
    det = _detector_spec(cfg)
    spec = _thermal_spec(cfg)
    acc1 = np.zeros(n_pulses, dtype=bool)
    acc2 = np.zeros(n_pulses, dtype=bool)
    edges = list(range(0, n_pulses, _CHUNK_PULSES)) + [n_pulses]
    if len(edges) > 2 and edges[-1] - edges[-2] < 10_000:
        del edges[-2]  # fold a sliver tail into the previous segment
    carry = None
    for c, (start, stop) in enumerate(zip(edges[:-1], edges[1:])):
        k = stop - start
        seeds = _seeds(cfg.run.seed, trial, stage, p_idx, c, n=5)
        fresh = gen_pulsed_thermal(spec, k, seeds[0], pulse_period=period,
                                   first_gate=start)
        lo = gen_coherent_lo(
            CoherentLOSpec(lo_amp, cfg.lo.static_phase),
            n_pulses=k,
            pulse_period=period,
            seed=seeds[1],
            first_gate=start,
        )
        if carry is None:
            src = fresh
        else:
            src = PulseTrain(np.concatenate([carry, fresh.amplitudes]), period,
                             first_gate=start - carry.size)
        if n_o:
            carry = fresh.amplitudes[-n_o:].copy()
        arms, los = split(src), split(lo)
        arm1 = delay(arms.out_a, n_o) if n_o else arms.out_a
        phase2 = phi
        if cfg.lo.jitter_rms > 0.0:
            phase2 = phi + cfg.lo.jitter_rms * as_rng(seeds[2]).standard_normal(k)
        lo2 = phase_shift(los.out_b, phase2)
        r1 = detect_spd(_mixed_components(arm1, los.out_a, b1), det, seeds[3])
        r2 = detect_spd(_mixed_components(arms.out_b, lo2, b2), det, seeds[4])
        acc1[r1.gate_index] = r1.clicked
        acc2[r2.gate_index] = r2.clicked
    c1 = ClickRecord(np.arange(n_o, n_pulses), acc1[n_o:])
    c2 = ClickRecord(np.arange(n_pulses), acc2)
    return c1, c2


def _pulsed_point(cfg: ScenarioConfig, trial: int, p_idx: int, phi: float):
    """One LO phase setting of the gated scheme; returns the coincidence
    estimate over pulse offsets plus the two singles rates."""
    lo_amp = 0.0 if cfg.lo.blocked else cfg.lo.amplitude
    c1, c2 = _pulsed_clicks(cfg, trial, _STAGE_FRINGE, p_idx, phi,
                            cfg.run.n_pulses, lo_amp)
    est = coincide(c1, c2, electronic_delay=cfg.delays.electronic_pulses,
                   max_offset=cfg.scan.max_offset)
    return est, c1.click_count() / c1.n, c2.click_count() / c2.n


def _pulsed_baseline(cfg: ScenarioConfig, trial: int) -> CorrelationEstimate:
    c1, c2 = _pulsed_clicks(cfg, trial, _STAGE_BASELINE, 0, 0.0,
                            cfg.run.baseline_pulses, 0.0)
    return coincide(c1, c2, electronic_delay=cfg.delays.optical_pulses,
                    max_offset=cfg.scan.max_offset)


def _pulsed_params(cfg: ScenarioConfig) -> PulsedScenarioParams:
    b1, b2 = cfg.lo.mode_overlap
    return PulsedScenarioParams(
        nbar=cfg.source.mean_intensity,
        alpha_sq=0.0 if cfg.lo.blocked else cfg.lo.amplitude,
        g2_in=1.0 + 1.0 / cfg.source.mode_count,
        beta1=b1,
        beta2=b2,
        gamma_abs=1.0,
        gamma_phase=0.0,
        dphi_alpha=0.0,
        rep_rate=1.0 / cfg.run.pulse_period,
        dn=cfg.delays.optical_pulses - cfg.delays.electronic_pulses,
    )


@dataclass
class _PulsedTrial:
    scan: FringeScan
    fit: FringeFit
    curve_phi0: CorrelationEstimate
    baseline: CorrelationEstimate | None
    rates: np.ndarray


def _run_pulsed_trial(cfg: ScenarioConfig, trial: int, threads: int) -> _PulsedTrial:
    phases = _phase_grid(cfg)
    results = _map_points(
        lambda p: _pulsed_point(cfg, trial, p, phases[p]), phases.size, threads
    )
    vals = np.array([est.at(0.0)[0] for est, _, _ in results])
    errs = np.array([est.at(0.0)[1] for est, _, _ in results])
    rates = np.array([[r1, r2] for _, r1, r2 in results])
    scan = FringeScan(phases, vals, errs, tau=0.0)
    fit = fit_fringe(scan)
    baseline = _pulsed_baseline(cfg, trial) if cfg.run.include_baseline else None
    return _PulsedTrial(scan, fit, results[0][0], baseline, rates)


def run_pulsed_scenario(cfg: ScenarioConfig, threads: int = 1, out_dir: str | None = None) -> RunReport:
    """Gated measurement: coincidence fringe at the aligned pulse offset,
    plus the LO-blocked coincidence curve across offsets."""
    if cfg.mode != "pulsed":
        raise ConfigError(f"config mode is {cfg.mode!r}, expected 'pulsed'")
    t_start = time.perf_counter()
    trials = [_run_pulsed_trial(cfg, t, threads) for t in range(cfg.run.trials)]

    vis, vis_err = _pool(
        np.array([[tr.fit.visibility] for tr in trials]),
        np.array([[tr.fit.visibility_err] for tr in trials]),
    )
    params = _pulsed_params(cfg)
    pred_vis = visibility_pulsed(params)

    report = RunReport(mode="pulsed", seed=cfg.run.seed, trials=cfg.run.trials)
    report.delays = np.array([float(params.dn)])
    report.visibility = np.array([vis[0]])
    report.visibility_err = np.array([vis_err[0]])
    report.predicted_visibility = np.array([pred_vis])
    report.scalars["mean_click_rate_1"] = float(np.mean([tr.rates[:, 0].mean() for tr in trials]))
    report.scalars["mean_click_rate_2"] = float(np.mean([tr.rates[:, 1].mean() for tr in trials]))

    checks = [_row(f"visibility@dn{params.dn:d}", vis[0], vis_err[0], pred_vis,
                   cfg.report.visibility_tol)]
    if trials[0].baseline is not None:
        base = _mean_correlation([tr.baseline for tr in trials])
        report.baseline = base
        g0, e0 = base.at(0.0)
        checks.append(_row("baseline_g2_zero", g0, e0, params.g2_in,
                           cfg.report.g2_zero_tol))
        off = base.tau != 0.0
        goff = float(base.g2[off].mean())
        eoff = float(np.sqrt(np.mean(base.stderr[off] ** 2) / np.count_nonzero(off)))
        checks.append(_row("baseline_g2_off", goff, eoff, 1.0, cfg.report.g2_far_tol))
        report.scalars["baseline_g2_zero"] = g0
        report.scalars["baseline_g2_zero_err"] = e0

    report.checks = checks
    report.passed = all(c.passed for c in checks)
    report.runtime_s = time.perf_counter() - t_start
    _write_outputs(cfg, report, trials, out_dir)
    return report


# ----------------------------------------------------------------- sweep


def run_sweep(
    cfg: ScenarioConfig,
    param: str,
    values,
    threads: int = 1,
    out_dir: str | None = None,
) -> list[RunReport]:
    """Repeat a scenario while stepping one numeric config field.

    The special address "scan.fringe_delay" probes a single delay per
    value (keeping the zero-delay reference in the scan); any other
    "section.key" address is set verbatim. Results are summarized in
    summary.csv as (value, visibility, |gamma|, phase) rows at the probe
    delay. An empty value list is allowed and produces an empty summary.
    """
    reports: list[RunReport] = []
    rows = []
    for idx, value in enumerate(values):
        sub = cfg.copy()
        if param == "scan.fringe_delay":
            probe = float(value)
            sub.scan.fringe_delays = sorted({0.0, probe})
        else:
            set_by_path(sub, param, value)
            probe = sub.scan.fringe_delays[-1]
        sub_out = os.path.join(out_dir, f"value_{idx:03d}") if out_dir else None
        if sub.mode == "pulsed":
            rep = run_pulsed_scenario(sub, threads=threads, out_dir=sub_out)
            probe_vis, probe_err = rep.visibility[0], rep.visibility_err[0]
            gam, pha = np.nan, np.nan
        else:
            rep = run_cw_scenario(sub, threads=threads, out_dir=sub_out)
            probe_vis, probe_err = rep.visibility_at(probe)
            i = int(np.argmin(np.abs(rep.delays - probe)))
            gam, pha = float(rep.gamma_abs[i]), float(rep.gamma_phase[i])
        reports.append(rep)
        rows.append((float(value), probe_vis, probe_err, gam, pha))
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        arr = np.array(rows) if rows else np.empty((0, 5))
        dataio.write_table(
            os.path.join(out_dir, "summary.csv"),
            {"param": param, "n_values": len(rows)},
            {
                "value": arr[:, 0],
                "visibility": arr[:, 1],
                "visibility_err": arr[:, 2],
                "gamma_abs": arr[:, 3],
                "gamma_phase": arr[:, 4],
            },
        )
    return reports


# --------------------------------------------------------------- writing


def _write_outputs(cfg: ScenarioConfig, report: RunReport, trials, out_dir: str | None):
    out = out_dir or cfg.output_dir
    if out is None:
        return
    os.makedirs(out, exist_ok=True)
    report.output_dir = out

    # Config snapshot: verbatim when the config came from a file.
    snap = os.path.join(out, "config.toml")
    if cfg.source_path and os.path.isfile(cfg.source_path):
        shutil.copyfile(cfg.source_path, snap)
    else:
        with open(snap, "w", newline="\n") as fh:
            fh.write(render_config(cfg))

    for t, tr in enumerate(trials):
        tdir = os.path.join(out, f"trial_{t:02d}")
        if isinstance(tr, _CwTrial):
            for d, (scan, fit) in enumerate(zip(tr.scans, tr.fits)):
                dataio.save_fringe(
                    os.path.join(tdir, "fringes", f"delay_{d:02d}.csv"), scan, fit
                )
            dataio.save_coherence(os.path.join(tdir, "coherence.csv"), tr.cf)
            if tr.baseline is not None:
                dataio.save_correlation(
                    os.path.join(tdir, "correlation", "baseline.csv"), tr.baseline
                )
        else:
            dataio.save_fringe(os.path.join(tdir, "fringes", "offset_00.csv"),
                               tr.scan, tr.fit)
            dataio.save_correlation(
                os.path.join(tdir, "coincidence", "fringe_phi0.csv"), tr.curve_phi0
            )
            if tr.baseline is not None:
                dataio.save_correlation(
                    os.path.join(tdir, "coincidence", "baseline.csv"), tr.baseline
                )

    dataio.save_report_json(os.path.join(out, "report.json"), _report_payload(report))
    dataio.save_report_text(os.path.join(out, "report.txt"), _report_lines(report))


def _report_payload(report: RunReport) -> dict:
    payload = {
        "mode": report.mode,
        "seed": report.seed,
        "trials": report.trials,
        "passed": report.passed,
        "xi_used": report.xi_used,
        "scalars": report.scalars,
        "checks": [
            {
                "name": c.name,
                "measured": c.measured,
                "uncertainty": c.uncertainty,
                "predicted": c.predicted,
                "tolerance": c.tolerance,
                "passed": c.passed,
            }
            for c in report.checks
        ],
    }
    if report.delays is not None:
        payload["delays"] = report.delays
        payload["visibility"] = report.visibility
        payload["visibility_err"] = report.visibility_err
        payload["predicted_visibility"] = report.predicted_visibility
    if report.gamma_abs is not None:
        payload["gamma_abs"] = report.gamma_abs
        payload["gamma_phase"] = report.gamma_phase
    if report.doppler is not None:
        payload["doppler"] = {
            "value": report.doppler.value,
            "stderr": report.doppler.stderr,
            "n_points": report.doppler.n_points,
            "injected": report.doppler_injected,
        }
    if report.cross is not None:
        payload["crosscheck"] = {
            "rms": report.cross.rms,
            "max_abs": report.cross.max_abs,
            "bias": report.cross.bias,
            "n_points": report.cross.n_points,
            "tolerance": report.cross.tolerance,
            "passed": report.cross.passed,
        }
    return payload


def _report_lines(report: RunReport) -> list[str]:
    lines = [
        f"mode = {report.mode}",
        f"seed = {report.seed}",
        f"trials = {report.trials}",
        f"passed = {report.passed}",
        f"xi_used = {report.xi_used:.6g}",
        f"runtime_s = {report.runtime_s:.2f}",
        "",
        f"{'check':28s} {'measured':>12s} {'+-':>10s} {'predicted':>12s} {'tol':>8s}  result",
    ]
    for c in report.checks:
        lines.append(
            f"{c.name:28s} {c.measured:12.5g} {c.uncertainty:10.2g} "
            f"{c.predicted:12.5g} {c.tolerance:8.3g}  {'pass' if c.passed else 'FAIL'}"
        )
    if report.doppler is not None:
        lines.append("")
        lines.append(
            f"doppler: {report.doppler.value:.6g} +- {report.doppler.stderr:.3g} rad/s "
            f"(injected {report.doppler_injected:.6g}, {report.doppler.n_points} delays)"
        )
    if report.cross is not None:
        lines.append(
            f"gamma route agreement: rms {report.cross.rms:.4f}, bias "
            f"{report.cross.bias:+.4f} over {report.cross.n_points} delays"
        )
    for key, value in sorted(report.scalars.items()):
        lines.append(f"{key} = {value:.6g}")
    return lines
