"""Linear optical elements acting on envelopes and pulse trains.

All elements are lossless or explicitly lossy linear maps. The 50:50
splitter convention puts the factor i on reflection:

    out_a = (in_a + i in_b) / sqrt(2)
    out_b = (i in_a + in_b) / sqrt(2)

so |out_a|^2 + |out_b|^2 = |in_a|^2 + |in_b|^2 exactly. split() is mix()
with a dark second port. Operations never mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import GridError, ParamError
from .fields import ComplexEnvelope, PulseTrain

_SQRT2 = np.sqrt(2.0)

# Relative slack when deciding whether a requested delay or a pair of time
# origins lands on the sample grid. Generously above float rounding,
# far below one sample.
_GRID_RTOL = 1e-6


@dataclass
class BeamSplitterOut:
    """The two output ports of a splitter or mixer."""

    out_a: ComplexEnvelope | PulseTrain
    out_b: ComplexEnvelope | PulseTrain


def _rebuild(ref, samples, *, start_offset: int = 0):
    """New record like ref with the given samples, origin moved by start_offset."""
    if isinstance(ref, ComplexEnvelope):
        return ComplexEnvelope(samples=samples, dt=ref.dt, t0=ref.t0 + start_offset * ref.dt)
    return PulseTrain(
        amplitudes=samples,
        pulse_period=ref.pulse_period,
        mode_match=ref.mode_match,
        first_gate=ref.first_gate + start_offset,
    )


def _scaled(field, factor: complex):
    if isinstance(field, ComplexEnvelope):
        return replace(field, samples=field.samples * factor)
    if isinstance(field, PulseTrain):
        return replace(field, amplitudes=field.amplitudes * factor)
    raise ParamError(f"unsupported field type {type(field).__name__}")


def _samples(field) -> np.ndarray:
    return field.samples if isinstance(field, ComplexEnvelope) else field.amplitudes


def _align(a, b):
    """Overlap two records on a common grid.

    Returns (samples_a, samples_b, template) where template is a record
    whose metadata describes the overlapped region. Raises GridError when
    the grids are incompatible or do not overlap.
    """
    if type(a) is not type(b):
        raise GridError(
            f"cannot combine {type(a).__name__} with {type(b).__name__}",
            category="grid-mismatch",
        )
    if isinstance(a, ComplexEnvelope):
        if not np.isclose(a.dt, b.dt, rtol=_GRID_RTOL, atol=0.0):
            raise GridError(
                f"sample steps differ: {a.dt:g} vs {b.dt:g}", category="grid-mismatch"
            )
        off = (b.t0 - a.t0) / a.dt
        off_int = int(round(off))
        if abs(off - off_int) > _GRID_RTOL:
            raise GridError(
                f"time origins differ by a non-integer number of samples "
                f"({off:g} dt)",
                category="grid-mismatch",
            )
        start_a, start_b = max(0, off_int), max(0, -off_int)
        n = min(a.n - start_a, b.n - start_b)
        if n <= 0:
            raise GridError("records do not overlap in time", category="empty-overlap")
        template = _rebuild(a, a.samples[start_a : start_a + n], start_offset=start_a)
        return (
            a.samples[start_a : start_a + n],
            b.samples[start_b : start_b + n],
            template,
        )
    if not np.isclose(a.pulse_period, b.pulse_period, rtol=_GRID_RTOL, atol=0.0):
        raise GridError(
            f"pulse periods differ: {a.pulse_period:g} vs {b.pulse_period:g}",
            category="grid-mismatch",
        )
    off_int = b.first_gate - a.first_gate
    start_a, start_b = max(0, off_int), max(0, -off_int)
    n = min(a.n - start_a, b.n - start_b)
    if n <= 0:
        raise GridError("trains share no gate indices", category="empty-overlap")
    template = _rebuild(a, a.amplitudes[start_a : start_a + n], start_offset=start_a)
    return (
        a.amplitudes[start_a : start_a + n],
        b.amplitudes[start_b : start_b + n],
        template,
    )


def mix(signal, lo) -> BeamSplitterOut:
    """Interfere two fields on a 50:50 splitter.

    The records are first restricted to their common time support (same
    step, integer origin offset); the outputs live on that overlap.
    """
    s, l, template = _align(signal, lo)
    out_a = (s + 1j * l) / _SQRT2
    out_b = (1j * s + l) / _SQRT2
    return BeamSplitterOut(
        out_a=_rebuild(template, out_a),
        out_b=_rebuild(template, out_b),
    )


def split(field) -> BeamSplitterOut:
    """Send one field through a 50:50 splitter (second input dark)."""
    return BeamSplitterOut(
        out_a=_scaled(field, 1.0 / _SQRT2),
        out_b=_scaled(field, 1j / _SQRT2),
    )


def delay(field, shift):
    """Delay a record by a whole number of samples or pulses.

    For envelopes, shift is in seconds and must land on the sample grid;
    for trains it may be an integer pulse count or seconds equal to a
    whole number of periods. A positive shift moves the record later: the
    output keeps only the samples whose delayed times fall inside the
    original window, so content is truncated, never wrapped around. The
    time origin is updated so absolute timestamps stay physical.
    """
    if isinstance(field, ComplexEnvelope):
        step = field.dt
        samples = field.samples
    elif isinstance(field, PulseTrain):
        step = field.pulse_period
        samples = field.amplitudes
    else:
        raise ParamError(f"unsupported field type {type(field).__name__}")

    if isinstance(field, PulseTrain) and isinstance(shift, (int, np.integer)):
        s = int(shift)
    else:
        frac = shift / step
        s = int(round(frac))
        if abs(frac - s) > _GRID_RTOL * max(1.0, abs(frac)):
            raise GridError(
                f"shift = {shift:g} is not a whole number of steps "
                f"(step = {step:g})",
                category="grid-mismatch",
            )
    n = samples.size
    if abs(s) >= n:
        raise GridError(
            f"shift of {s} steps exceeds the {n}-step record",
            category="shift-exceeds-record",
        )
    if s >= 0:
        return _rebuild(field, samples[: n - s], start_offset=s)
    return _rebuild(field, samples[-s:], start_offset=0)


def attenuate(field, transmission: float):
    """Scale a field by an intensity transmission in [0, 1]."""
    if not 0.0 <= transmission <= 1.0:
        raise ParamError(f"transmission must lie in [0, 1], got {transmission:g}")
    return _scaled(field, np.sqrt(transmission))


def phase_shift(field, phase):
    """Multiply a field by exp(i phase); lossless path phase modulator.

    phase may be a scalar or an array matching the record sample for
    sample, which models a swept or jittered path length.
    """
    phase = np.asarray(phase, dtype=float)
    if phase.ndim not in (0, 1):
        raise ParamError("phase must be scalar or 1-d")
    if phase.ndim == 1 and phase.size != _samples(field).size:
        raise ParamError(
            f"phase array length {phase.size} does not match the "
            f"{_samples(field).size}-sample record"
        )
    return _scaled(field, np.exp(1j * phase))
