"""Detection models and correlation estimators.

Two detection chains are provided. The analog chain turns a field envelope
into a bandwidth-limited photocurrent with additive Gaussian electronic
noise, matching a photodiode plus oscilloscope. The gated chain turns a
pulse train into per-gate click records from a non-photon-number-resolving
single photon detector.

Correlators normalize within finite averaging windows and report the
spread across windows as the standard error, the way a scope trace is
processed in practice. The window-to-window scatter then captures drift
and shot noise together.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import signal as _sig

from ._util import as_rng
from .errors import GridError, ParamError
from .fields import ComplexEnvelope, PulseTrain

# An analog bandwidth above 1/(10 dt) cannot be represented faithfully on
# the grid; detect_analog warns past this point.
_BW_SAMPLES = 10.0


@dataclass(frozen=True)
class DetectorSpec:
    """Detector parameters shared by the analog and gated models.

    bandwidth (Hz) is the single-pole low-pass corner of the analog chain
    (np.inf disables filtering). efficiency multiplies detected intensity
    in both chains. dark_prob_per_gate, gate_width and dead_time only
    matter for gated detection; electronic_noise_rms and bandwidth only
    for analog detection.
    """

    bandwidth: float = 30e6
    electronic_noise_rms: float = 0.0
    efficiency: float = 0.2
    dark_prob_per_gate: float = 1e-4
    gate_width: float = 2.5e-9
    dead_time: float = 0.0

    def __post_init__(self):
        if not self.bandwidth > 0.0:
            raise ParamError("bandwidth must be positive (np.inf disables filtering)")
        if self.electronic_noise_rms < 0.0:
            raise ParamError("electronic_noise_rms must be >= 0")
        if not 0.0 < self.efficiency <= 1.0:
            raise ParamError("efficiency must lie in (0, 1]")
        if not 0.0 <= self.dark_prob_per_gate < 1.0:
            raise ParamError("dark_prob_per_gate must lie in [0, 1)")
        if not self.gate_width > 0.0:
            raise ParamError("gate_width must be positive")
        if self.dead_time < 0.0:
            raise ParamError("dead_time must be >= 0")


@dataclass
class PhotocurrentTrace:
    """Real-valued sampled photocurrent, units of detected photon rate."""

    samples: np.ndarray
    dt: float
    t0: float = 0.0
    noise_rms: float = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ParamError("samples must be a non-empty 1-d array")
        if not self.dt > 0.0:
            raise ParamError("dt must be positive")

    @property
    def n(self) -> int:
        return self.samples.size


@dataclass
class ClickRecord:
    """Per-gate click outcomes of a gated single photon detector."""

    gate_index: np.ndarray
    clicked: np.ndarray

    def __post_init__(self):
        self.gate_index = np.asarray(self.gate_index, dtype=np.int64)
        self.clicked = np.asarray(self.clicked, dtype=bool)
        if self.gate_index.shape != self.clicked.shape or self.gate_index.ndim != 1:
            raise ParamError("gate_index and clicked must be 1-d arrays of equal length")
        if self.gate_index.size == 0:
            raise ParamError("empty click record")
        if self.gate_index.size > 1 and not np.all(np.diff(self.gate_index) > 0):
            raise ParamError("gate_index must be strictly increasing")

    @property
    def n(self) -> int:
        return self.gate_index.size

    def click_count(self) -> int:
        return int(np.count_nonzero(self.clicked))


@dataclass
class CorrelationEstimate:
    """Normalized second-order correlation on a delay axis.

    tau is in seconds when kind == "time" and in whole pulse offsets when
    kind == "pulse_offset". averaging_window is the span (seconds for
    time-domain data, gates otherwise) over which each independent
    normalization was taken; n_windows is how many such spans entered the
    mean and the stderr.
    """

    tau: np.ndarray
    g2: np.ndarray
    stderr: np.ndarray
    averaging_window: float = 2e-3
    kind: str = "time"
    n_windows: int = 0

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=float)
        self.g2 = np.asarray(self.g2, dtype=float)
        self.stderr = np.asarray(self.stderr, dtype=float)
        if not (self.tau.shape == self.g2.shape == self.stderr.shape):
            raise ParamError("tau, g2, stderr must share one shape")
        if self.tau.ndim != 1 or self.tau.size == 0:
            raise ParamError("estimate must hold at least one delay bin")
        if self.tau.size > 1 and not np.all(np.diff(self.tau) > 0):
            raise ParamError("tau must be strictly ascending")
        if np.any(self.stderr < 0):
            raise ParamError("stderr must be >= 0 elementwise")
        if not self.averaging_window > 0.0:
            raise ParamError("averaging_window must be positive")

    def at(self, tau: float) -> tuple[float, float]:
        """(g2, stderr) at the bin nearest tau."""
        i = int(np.argmin(np.abs(self.tau - tau)))
        return float(self.g2[i]), float(self.stderr[i])


def _total_intensity(fields) -> tuple[np.ndarray, float, float]:
    """Sum |V|^2 over one envelope or a sequence of co-sampled envelopes.

    Several envelopes model orthogonal mode components falling on one
    detector: their intensities add, their amplitudes do not.
    """
    if isinstance(fields, ComplexEnvelope):
        fields = (fields,)
    fields = tuple(fields)
    if not fields:
        raise ParamError("no field components given")
    ref = fields[0]
    if not isinstance(ref, ComplexEnvelope):
        raise ParamError("detect_analog needs ComplexEnvelope input")
    total = np.abs(ref.samples) ** 2
    for f in fields[1:]:
        if not isinstance(f, ComplexEnvelope):
            raise ParamError("detect_analog needs ComplexEnvelope input")
        if f.n != ref.n or not np.isclose(f.dt, ref.dt, rtol=1e-9, atol=0.0) or not np.isclose(
            f.t0, ref.t0, rtol=0.0, atol=1e-9 * ref.dt
        ):
            raise GridError(
                "field components must share the exact sample grid",
                category="grid-mismatch",
            )
        total += np.abs(f.samples) ** 2
    return total, ref.dt, ref.t0


def detect_analog(field, spec: DetectorSpec, seed=None) -> PhotocurrentTrace:
    """Analog photodetection: intensity -> filtered, noisy photocurrent.

    i(t) = efficiency * lowpass(|V(t)|^2) + n(t), with a single-pole IIR
    low-pass at spec.bandwidth (initialized at steady state so the record
    has no turn-on transient) and white Gaussian n(t) of rms
    spec.electronic_noise_rms. Pass a sequence of envelopes to model
    orthogonal components hitting the same detector.
    """
    intensity, dt, t0 = _total_intensity(field)
    if np.isfinite(spec.bandwidth):
        if dt > 1.0 / (_BW_SAMPLES * spec.bandwidth):
            warnings.warn(
                f"dt = {dt:g} s is coarse for bandwidth = {spec.bandwidth:g} Hz; "
                "the filter corner is not well resolved"
            )
        a = np.exp(-2.0 * np.pi * spec.bandwidth * dt)
        b, den = [1.0 - a], [1.0, -a]
        zi = _sig.lfilter_zi(b, den) * intensity[0]
        filtered, _ = _sig.lfilter(b, den, intensity, zi=zi)
    else:
        filtered = intensity
    current = spec.efficiency * filtered
    if spec.electronic_noise_rms > 0.0:
        rng = as_rng(seed)
        current = current + rng.normal(0.0, spec.electronic_noise_rms, current.size)
    return PhotocurrentTrace(samples=current, dt=dt, t0=t0, noise_rms=spec.electronic_noise_rms)


def _align_traces(i1: PhotocurrentTrace, i2: PhotocurrentTrace):
    if not np.isclose(i1.dt, i2.dt, rtol=1e-9, atol=0.0):
        raise GridError(
            f"sample steps differ: {i1.dt:g} vs {i2.dt:g}", category="grid-mismatch"
        )
    off = (i2.t0 - i1.t0) / i1.dt
    off_int = int(round(off))
    if abs(off - off_int) > 1e-6:
        raise GridError(
            "time origins differ by a non-integer number of samples",
            category="grid-mismatch",
        )
    s1, s2 = max(0, off_int), max(0, -off_int)
    n = min(i1.n - s1, i2.n - s2)
    if n <= 0:
        raise GridError("traces do not overlap in time", category="empty-overlap")
    return i1.samples[s1 : s1 + n], i2.samples[s2 : s2 + n]


def _window_stats(per_window: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = per_window.mean(axis=0)
    stderr = per_window.std(axis=0, ddof=1) / np.sqrt(per_window.shape[0])
    return mean, stderr


def correlate_photocurrents(
    i1: PhotocurrentTrace,
    i2: PhotocurrentTrace,
    max_tau: float,
    window: float = 2e-3,
) -> CorrelationEstimate:
    """Windowed estimate of g2(tau) = <i1(t) i2(t+tau)> / (<i1><i2>).

    The overlap of the two traces is cut into contiguous windows of the
    given length; each window is normalized by its own mean currents and
    the estimate is the across-window average, with the standard error of
    that average as the uncertainty. At least two full windows (plus
    max_tau margins) must fit, otherwise a GridError with category
    "window-longer-than-record" is raised.
    """
    x1, x2 = _align_traces(i1, i2)
    dt = i1.dt
    if not max_tau >= 0.0:
        raise ParamError("max_tau must be >= 0")
    lag = int(round(max_tau / dt))
    w = int(round(window / dt))
    if w < 2:
        raise ParamError("window must span at least two samples")
    n_win = (x1.size - 2 * lag) // w
    if n_win < 2:
        raise GridError(
            f"need two windows of {w} samples plus 2*{lag} margin, record has "
            f"{x1.size}",
            category="window-longer-than-record",
        )
    per_window = np.empty((n_win, 2 * lag + 1))
    for iw in range(n_win):
        lo = lag + iw * w
        a = x1[lo : lo + w]
        b_ext = x2[lo - lag : lo + w + lag]
        raw = _sig.correlate(b_ext, a, mode="valid", method="fft") / w
        per_window[iw] = raw / (a.mean() * x2[lo : lo + w].mean())
    g2, stderr = _window_stats(per_window)
    return CorrelationEstimate(
        tau=dt * np.arange(-lag, lag + 1),
        g2=g2,
        stderr=stderr,
        averaging_window=w * dt,
        kind="time",
        n_windows=n_win,
    )


def g2_at_lag(
    i1: PhotocurrentTrace,
    i2: PhotocurrentTrace,
    tau: float,
    window: float = 2e-3,
) -> CorrelationEstimate:
    """Single-delay version of correlate_photocurrents (much cheaper)."""
    x1, x2 = _align_traces(i1, i2)
    dt = i1.dt
    frac = tau / dt
    k = int(round(frac))
    if abs(frac - k) > 1e-6 * max(1.0, abs(frac)):
        raise GridError(
            f"tau = {tau:g} is not a whole number of samples", category="grid-mismatch"
        )
    if abs(k) >= x1.size:
        raise GridError(
            f"lag of {k} samples exceeds the {x1.size}-sample overlap",
            category="shift-exceeds-record",
        )
    if k >= 0:
        a, b = x1[: x1.size - k], x2[k:]
    else:
        a, b = x1[-k:], x2[: x2.size + k]
    w = int(round(window / dt))
    if w < 2:
        raise ParamError("window must span at least two samples")
    n_win = a.size // w
    if n_win < 2:
        raise GridError(
            f"need two windows of {w} samples, overlap has {a.size}",
            category="window-longer-than-record",
        )
    m = n_win * w
    aw = a[:m].reshape(n_win, w)
    bw = b[:m].reshape(n_win, w)
    per_window = (aw * bw).mean(axis=1) / (aw.mean(axis=1) * bw.mean(axis=1))
    g2, stderr = _window_stats(per_window[:, None])
    return CorrelationEstimate(
        tau=np.array([k * dt]),
        g2=g2,
        stderr=stderr,
        averaging_window=w * dt,
        kind="time",
        n_windows=n_win,
    )


def _total_photons(trains) -> tuple[np.ndarray, PulseTrain]:
    if isinstance(trains, PulseTrain):
        trains = (trains,)
    trains = tuple(trains)
    if not trains:
        raise ParamError("no train components given")
    ref = trains[0]
    if not isinstance(ref, PulseTrain):
        raise ParamError("detect_spd needs PulseTrain input")
    mu = np.abs(ref.amplitudes) ** 2
    for tr in trains[1:]:
        if not isinstance(tr, PulseTrain):
            raise ParamError("detect_spd needs PulseTrain input")
        if (
            tr.n != ref.n
            or tr.first_gate != ref.first_gate
            or not np.isclose(tr.pulse_period, ref.pulse_period, rtol=1e-9, atol=0.0)
        ):
            raise GridError(
                "train components must share gates exactly", category="grid-mismatch"
            )
        mu += np.abs(tr.amplitudes) ** 2
    return mu, ref


def detect_spd(train, spec: DetectorSpec, seed=None) -> ClickRecord:
    """Gated single photon detection without photon number resolution.

    Click probability per gate is 1 - (1 - dark) * exp(-efficiency * mu)
    with mu the pulse's photon number summed over any orthogonal
    components. If dead_time > 0, a click suppresses the following
    ceil(dead_time / pulse_period) gates.
    """
    mu, ref = _total_photons(train)
    rng = as_rng(seed)
    p_click = 1.0 - (1.0 - spec.dark_prob_per_gate) * np.exp(-spec.efficiency * mu)
    clicked = rng.random(mu.size) < p_click
    if spec.dead_time > 0.0:
        blocked = int(np.ceil(spec.dead_time / ref.pulse_period - 1e-12))
        if blocked > 0:
            last = -(blocked + 1)
            for idx in np.flatnonzero(clicked):
                if idx - last <= blocked:
                    clicked[idx] = False
                else:
                    last = idx
    return ClickRecord(gate_index=ref.gate_indices(), clicked=clicked)


def coincide(
    c1: ClickRecord,
    c2: ClickRecord,
    electronic_delay: int = 0,
    max_offset: int = 10,
) -> CorrelationEstimate:
    """Coincidence analysis of two click records on a pulse-offset axis.

    electronic_delay shifts record 2 by that many gates before matching
    (the cable delay in front of the coincidence logic), so offset m pairs
    detector-1 gate n with detector-2 gate n + m - electronic_delay. For
    each m the normalized correlation is
    g2(m) = P_coinc / (P1 * P2) over the gates both records cover, and the
    uncertainty follows from Poisson counting statistics.
    """
    if int(max_offset) != max_offset or max_offset < 0:
        raise ParamError("max_offset must be an integer >= 0")
    max_offset = int(max_offset)
    if int(electronic_delay) != electronic_delay:
        raise ParamError("electronic_delay must be a whole number of gates")

    # Dense boolean occupancy per slot. Record 2 slots include the delay.
    lo1, hi1 = int(c1.gate_index[0]), int(c1.gate_index[-1])
    b1 = np.zeros(hi1 - lo1 + 1, dtype=bool)
    b1[c1.gate_index - lo1] = c1.clicked
    lo2 = int(c2.gate_index[0]) + int(electronic_delay)
    hi2 = int(c2.gate_index[-1]) + int(electronic_delay)
    b2 = np.zeros(hi2 - lo2 + 1, dtype=bool)
    b2[c2.gate_index - (lo2 - int(electronic_delay))] = c2.clicked

    offsets = np.arange(-max_offset, max_offset + 1)
    g2 = np.empty(offsets.size)
    stderr = np.empty(offsets.size)
    n_min = None
    for i, m in enumerate(offsets):
        # Slots s counted for det 1, s + m for det 2.
        start = max(lo1, lo2 - m)
        stop = min(hi1, hi2 - m)
        n = stop - start + 1
        if n <= 0:
            raise GridError(
                f"records share no gates at offset {m:d}", category="empty-overlap"
            )
        sub1 = b1[start - lo1 : start - lo1 + n]
        sub2 = b2[start + m - lo2 : start + m - lo2 + n]
        c = int(np.count_nonzero(sub1 & sub2))
        k1 = int(np.count_nonzero(sub1))
        k2 = int(np.count_nonzero(sub2))
        if k1 == 0 or k2 == 0:
            raise GridError(
                f"no clicks in overlap at offset {m:d}; cannot normalize",
                category="empty-overlap",
            )
        g2[i] = c * n / (k1 * k2)
        if c > 0:
            stderr[i] = g2[i] * np.sqrt(1.0 / c + 1.0 / k1 + 1.0 / k2)
        else:
            stderr[i] = n / (k1 * k2)
        n_min = n if n_min is None else min(n_min, n)
    return CorrelationEstimate(
        tau=offsets.astype(float),
        g2=g2,
        stderr=stderr,
        averaging_window=float(n_min),
        kind="pulse_offset",
        n_windows=int(n_min),
    )
