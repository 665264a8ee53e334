"""Optical field synthesis.

Generates the three kinds of source used throughout the package: cw
quasi-thermal fields (circular complex Gaussian statistics with a chosen
lineshape), pulsed thermal trains with a tunable effective mode number,
and phase-scanned coherent local oscillators.

Every generator is a pure function of (spec, seed): the same inputs give a
bit-identical realization. Thermal cw records are synthesized by spectral
shaping of white complex Gaussian noise on a circulant lag grid, which
produces exactly the requested autocorrelation rather than an approximation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._util import as_rng
from .errors import ParamError, SamplingError

LINESHAPES = ("gaussian", "lorentzian")
SCAN_WAVEFORMS = ("static", "linear_ramp", "triangle")

# Sampling guards for cw generation. Records shorter than MIN_DURATIONS
# coherence times do not average over enough independent speckles; steps
# coarser than coherence_time / MIN_SAMPLES_PER_TC alias the lineshape.
MIN_DURATIONS = 10.0
MIN_SAMPLES_PER_TC = 10.0


@dataclass(frozen=True)
class ThermalFieldSpec:
    """Statistical description of a quasi-thermal source.

    mean_intensity is in photon-rate units for cw generation and photons
    per pulse for pulsed generation. coherence_time is the delay at which
    |gamma| falls to exp(-1/2) for the gaussian lineshape and exp(-1) for
    the lorentzian one. doppler_shift (rad/s) rotates the field phase so
    the autocorrelation picks up a linear phase -doppler_shift * tau.
    mode_count >= 1 sets the effective number of modes per pulse in pulsed
    generation (zero-delay intensity correlation 1 + 1/mode_count); cw
    generation is single mode and ignores it.
    """

    mean_intensity: float
    coherence_time: float
    lineshape: str = "gaussian"
    doppler_shift: float = 0.0
    mode_count: float = 1.0

    def __post_init__(self):
        if not self.mean_intensity > 0.0:
            raise ParamError(
                "mean_intensity must be positive; a zero field has no "
                "defined coherence and is rejected"
            )
        if not self.coherence_time > 0.0:
            raise ParamError("coherence_time must be positive")
        if self.lineshape not in LINESHAPES:
            raise ParamError(
                f"lineshape must be one of {LINESHAPES}, got {self.lineshape!r}"
            )
        if not self.mode_count >= 1.0:
            raise ParamError("mode_count must be >= 1")


@dataclass(frozen=True)
class PhaseScanSpec:
    """Deterministic phase sweep plus optional white phase jitter.

    rate is in rad/s. For the triangle waveform the phase ramps linearly
    from 0 to 2 pi at the given rate, then back down, repeating.
    jitter_rms adds independent zero-mean Gaussian phase noise per sample
    (or per pulse) on top of the deterministic sweep.
    """

    waveform: str = "static"
    rate: float = 0.0
    jitter_rms: float = 0.0

    def __post_init__(self):
        if self.waveform not in SCAN_WAVEFORMS:
            raise ParamError(
                f"waveform must be one of {SCAN_WAVEFORMS}, got {self.waveform!r}"
            )
        if self.jitter_rms < 0.0:
            raise ParamError("jitter_rms must be >= 0")
        if self.waveform != "static" and self.rate == 0.0:
            warnings.warn("phase scan waveform set but rate is zero; scan is static")


@dataclass(frozen=True)
class CoherentLOSpec:
    """Coherent local oscillator: constant magnitude, programmable phase.

    amplitude is the mean photon flux |alpha|^2 (photons/s cw, photons per
    pulse in gated mode), not the field amplitude.
    """

    amplitude: float
    static_phase: float = 0.0
    scan: PhaseScanSpec = field(default_factory=PhaseScanSpec)

    def __post_init__(self):
        if self.amplitude < 0.0:
            raise ParamError("amplitude (photon flux |alpha|^2) must be >= 0")


@dataclass
class ComplexEnvelope:
    """Uniformly sampled complex field envelope V(t).

    samples[k] is the field at t0 + k * dt. |V|^2 is instantaneous
    intensity in the same units as mean_intensity.
    """

    samples: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ParamError("samples must be a non-empty 1-d array")
        if not self.dt > 0.0:
            raise ParamError("dt must be positive")

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size * self.dt

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.samples.size)

    def mean_intensity(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))


@dataclass
class PulseTrain:
    """Per-pulse complex amplitudes of a gated source.

    amplitudes[j] is the effective single-mode amplitude of pulse
    first_gate + j; |amplitude|^2 is that pulse's mean photon number.
    mode_match carries the (arm 1, arm 2) spatial/polarization overlap
    with the local oscillator, applied at the mixing stage.
    """

    amplitudes: np.ndarray
    pulse_period: float
    mode_match: tuple[float, float] = (1.0, 1.0)
    first_gate: int = 0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.ndim != 1 or self.amplitudes.size == 0:
            raise ParamError("amplitudes must be a non-empty 1-d array")
        if not self.pulse_period > 0.0:
            raise ParamError("pulse_period must be positive")
        b1, b2 = self.mode_match
        if not (0.0 <= b1 <= 1.0 and 0.0 <= b2 <= 1.0):
            raise ParamError("mode_match entries must lie in [0, 1]")

    @property
    def n(self) -> int:
        return self.amplitudes.size

    def gate_indices(self) -> np.ndarray:
        return self.first_gate + np.arange(self.amplitudes.size)

    def mean_photons(self) -> float:
        return float(np.mean(np.abs(self.amplitudes) ** 2))


def gamma_reference(
    lineshape: str,
    tau,
    coherence_time: float,
    doppler_shift: float = 0.0,
) -> np.ndarray:
    """Analytic complex degree of coherence gamma(tau) for a lineshape.

    Returns |gamma| * exp(-i * doppler_shift * tau); the sign convention
    matches the autocorrelation <V(t) conj(V(t + tau))> of fields produced
    by this module.
    """
    tau = np.asarray(tau, dtype=float)
    if lineshape == "gaussian":
        mag = np.exp(-0.5 * (tau / coherence_time) ** 2)
    elif lineshape == "lorentzian":
        mag = np.exp(-np.abs(tau) / coherence_time)
    else:
        raise ParamError(f"lineshape must be one of {LINESHAPES}, got {lineshape!r}")
    return mag * np.exp(-1j * doppler_shift * tau)


def _check_cw_grid(spec: ThermalFieldSpec, duration: float, dt: float) -> int:
    if not dt > 0.0:
        raise ParamError("dt must be positive")
    if not duration > 0.0:
        raise ParamError("duration must be positive")
    if dt > spec.coherence_time / MIN_SAMPLES_PER_TC:
        raise SamplingError(
            f"dt = {dt:g} s undersamples coherence_time = "
            f"{spec.coherence_time:g} s; need dt <= coherence_time / "
            f"{MIN_SAMPLES_PER_TC:g}",
            category="sampling-too-coarse",
        )
    if duration < MIN_DURATIONS * spec.coherence_time:
        raise SamplingError(
            f"duration = {duration:g} s is shorter than {MIN_DURATIONS:g} "
            f"coherence times ({MIN_DURATIONS * spec.coherence_time:g} s)",
            category="duration-too-short",
        )
    return int(round(duration / dt))


def gen_cw_thermal(
    spec: ThermalFieldSpec, duration: float, dt: float, seed
) -> ComplexEnvelope:
    """Synthesize a cw quasi-thermal field record.

    White complex Gaussian noise is shaped in the frequency domain so that
    the circular autocorrelation of the output equals
    mean_intensity * gamma(tau) for the requested lineshape exactly. The
    Doppler shift is applied afterwards as a deterministic phase ramp
    exp(+i doppler_shift t), so it rotates the correlation phase without
    touching |gamma|.
    """
    n = _check_cw_grid(spec, duration, dt)
    rng = as_rng(seed)

    # Circulant lag grid: lag to the nearest record edge, so r is symmetric
    # and its DFT (the power spectrum) is real and non-negative up to
    # rounding, which we clip away.
    k = np.arange(n)
    lag = np.minimum(k, n - k) * dt
    r = spec.mean_intensity * np.abs(gamma_reference(spec.lineshape, lag, spec.coherence_time))
    psd = np.fft.fft(r).real
    np.clip(psd, 0.0, None, out=psd)

    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    z *= np.sqrt(0.5)
    v = np.fft.ifft(np.sqrt(psd) * z) * np.sqrt(n)
    if spec.doppler_shift != 0.0:
        v = v * np.exp(1j * spec.doppler_shift * dt * k)
    return ComplexEnvelope(samples=v, dt=dt, t0=0.0)


def gen_cw_phase_diffused(
    spec: ThermalFieldSpec, duration: float, dt: float, seed
) -> ComplexEnvelope:
    """Constant-intensity field with a randomly diffusing phase.

    Models a narrowband laser-like source: |V| is fixed at
    sqrt(mean_intensity) while the phase random-walks, giving
    |gamma(tau)| = exp(-|tau| / coherence_time) but zero excess intensity
    noise (the intensity correlation is flat). Useful as the classical
    comparison case where only the field coherence survives. The lineshape
    field of the spec is ignored; the diffusion process is Lorentzian by
    nature.
    """
    n = _check_cw_grid(spec, duration, dt)
    rng = as_rng(seed)
    # Wiener phase with Var[theta(t+tau) - theta(t)] = 2 tau / T_c gives
    # <exp(i dtheta)> = exp(-tau / T_c).
    steps = rng.standard_normal(n) * np.sqrt(2.0 * dt / spec.coherence_time)
    theta = rng.uniform(0.0, 2.0 * np.pi) + np.cumsum(steps)
    t = dt * np.arange(n)
    v = np.sqrt(spec.mean_intensity) * np.exp(1j * (theta + spec.doppler_shift * t))
    return ComplexEnvelope(samples=v, dt=dt, t0=0.0)


def gen_pulsed_thermal(
    spec: ThermalFieldSpec,
    n_pulses: int,
    seed,
    pulse_period: float = 2e-8,
    first_gate: int = 0,
) -> PulseTrain:
    """Draw a train of independent thermal pulses.

    Each pulse's photon number is Gamma-distributed with shape mode_count
    and mean mean_intensity, which reproduces the zero-delay intensity
    correlation 1 + 1/mode_count of a mode_count-mode thermal field for
    any real mode_count >= 1. Pulse phases are independent and uniform,
    so distinct pulses are completely uncorrelated and the doppler_shift /
    lineshape fields of the spec play no role here. first_gate labels the
    train's first pulse, so long records can be produced in seed-stable
    segments.
    """
    if int(n_pulses) != n_pulses or n_pulses < 2:
        raise ParamError("n_pulses must be an integer >= 2")
    n_pulses = int(n_pulses)
    if n_pulses < 10_000:
        warnings.warn(
            f"n_pulses = {n_pulses} is below 10000; correlation statistics "
            "of the train will be noisy"
        )
    rng = as_rng(seed)
    mu = rng.gamma(shape=spec.mode_count, scale=spec.mean_intensity / spec.mode_count, size=n_pulses)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=n_pulses)
    return PulseTrain(np.sqrt(mu) * np.exp(1j * phi), pulse_period,
                      first_gate=int(first_gate))


def _scan_phase(scan: PhaseScanSpec, t: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if scan.waveform == "static" or scan.rate == 0.0:
        phase = np.zeros_like(t)
    elif scan.waveform == "linear_ramp":
        phase = scan.rate * t
    else:  # triangle: 0 -> 2pi at |rate|, then back down, repeating
        x = np.abs(scan.rate) * t / (2.0 * np.pi)
        phase = 2.0 * np.pi * (1.0 - np.abs(np.mod(x, 2.0) - 1.0))
    if scan.jitter_rms > 0.0:
        phase = phase + scan.jitter_rms * rng.standard_normal(t.size)
    return phase


def gen_coherent_lo(
    spec: CoherentLOSpec,
    *,
    duration: float | None = None,
    dt: float | None = None,
    n_pulses: int | None = None,
    pulse_period: float | None = None,
    seed=None,
    t0: float = 0.0,
    first_gate: int = 0,
) -> ComplexEnvelope | PulseTrain:
    """Generate a coherent local oscillator record.

    Pass (duration, dt) for a cw envelope or (n_pulses, pulse_period) for
    a gated train; exactly one of the two modes must be selected. The field
    has constant magnitude sqrt(amplitude) and phase
    static_phase + scan(t) + jitter, with scan time measured from t = 0 of
    the absolute grid (so two LOs on the same grid stay phase-locked).
    """
    cw = duration is not None or dt is not None
    gated = n_pulses is not None or pulse_period is not None
    if cw == gated:
        raise ParamError(
            "select exactly one mode: (duration, dt) for cw or "
            "(n_pulses, pulse_period) for gated"
        )
    rng = as_rng(seed)
    a = np.sqrt(spec.amplitude)
    if cw:
        if duration is None or dt is None:
            raise ParamError("cw mode needs both duration and dt")
        if not dt > 0.0 or not duration > 0.0:
            raise ParamError("duration and dt must be positive")
        n = int(round(duration / dt))
        if n < 1:
            raise ParamError("duration shorter than one sample")
        t = t0 + dt * np.arange(n)
        phase = spec.static_phase + _scan_phase(spec.scan, t, rng)
        return ComplexEnvelope(samples=a * np.exp(1j * phase), dt=dt, t0=t0)
    if n_pulses is None or pulse_period is None:
        raise ParamError("gated mode needs both n_pulses and pulse_period")
    if int(n_pulses) != n_pulses or n_pulses < 1:
        raise ParamError("n_pulses must be an integer >= 1")
    t = pulse_period * (first_gate + np.arange(int(n_pulses)))
    phase = spec.static_phase + _scan_phase(spec.scan, t, rng)
    return PulseTrain(a * np.exp(1j * phase), pulse_period, first_gate=first_gate)
