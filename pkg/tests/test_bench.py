"""Beam splitter, delay, attenuator, and phase shifter contracts."""

import numpy as np
import pytest

from hbtsim import (
    ComplexEnvelope,
    GridError,
    ParamError,
    PulseTrain,
    attenuate,
    delay,
    mix,
    phase_shift,
    split,
)


def _env(samples, dt=1e-6, t0=0.0):
    return ComplexEnvelope(samples=np.asarray(samples, dtype=complex), dt=dt, t0=t0)


def _rand_env(n, seed, dt=1e-6, t0=0.0):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return _env(z, dt=dt, t0=t0)


def test_mix_conserves_energy():
    a = _rand_env(500, 1)
    b = _rand_env(500, 2)
    out = mix(a, b)
    e_in = np.abs(a.samples) ** 2 + np.abs(b.samples) ** 2
    e_out = np.abs(out.out_a.samples) ** 2 + np.abs(out.out_b.samples) ** 2
    assert np.max(np.abs(e_out - e_in)) < 1e-12


def test_mix_interference_phase_convention():
    # With the i-on-reflection convention, port a sees 1 - sin(phi) and
    # port b sees 1 + sin(phi) for equal-amplitude inputs.
    a = _env(np.ones(64))
    for phi in (0.0, np.pi / 2, -np.pi / 2, 1.2):
        out = mix(a, phase_shift(a, phi))
        ia = np.mean(np.abs(out.out_a.samples) ** 2)
        ib = np.mean(np.abs(out.out_b.samples) ** 2)
        assert ia == pytest.approx(1.0 - np.sin(phi), abs=1e-12)
        assert ib == pytest.approx(1.0 + np.sin(phi), abs=1e-12)


def test_split_halves_energy_and_matches_dark_mix():
    x = _rand_env(300, 3)
    ports = split(x)
    assert np.allclose(ports.out_a.samples, x.samples / np.sqrt(2.0), rtol=1e-15, atol=0)
    assert np.allclose(ports.out_b.samples, 1j * x.samples / np.sqrt(2.0), rtol=1e-15, atol=0)
    dark = mix(x, attenuate(x, 0.0))
    assert np.allclose(dark.out_a.samples, ports.out_a.samples, rtol=1e-14, atol=1e-15)


def test_interferometer_closes():
    # Splitting and immediately recombining sends everything out one port.
    x = _rand_env(200, 4)
    ports = split(x)
    out = mix(ports.out_a, ports.out_b)
    assert np.max(np.abs(out.out_a.samples)) < 1e-14
    assert np.allclose(out.out_b.samples, 1j * x.samples, rtol=0, atol=1e-14)


def test_mix_restricts_to_overlap():
    dt = 1e-6
    a = _rand_env(10, 5, dt=dt, t0=0.0)
    b = _rand_env(10, 6, dt=dt, t0=3 * dt)
    out = mix(a, b)
    assert out.out_a.n == 7
    assert out.out_a.t0 == pytest.approx(3 * dt)
    expect = (a.samples[3:] + 1j * b.samples[:7]) / np.sqrt(2.0)
    assert np.allclose(out.out_a.samples, expect, rtol=1e-15, atol=0)


def test_mix_grid_errors():
    a = _rand_env(10, 7, dt=1e-6)
    with pytest.raises(GridError) as exc:
        mix(a, _rand_env(10, 8, dt=2e-6))
    assert exc.value.category == "grid-mismatch"
    with pytest.raises(GridError) as exc:
        mix(a, _rand_env(10, 8, dt=1e-6, t0=0.4e-6))
    assert exc.value.category == "grid-mismatch"
    with pytest.raises(GridError) as exc:
        mix(a, _rand_env(10, 8, dt=1e-6, t0=20e-6))
    assert exc.value.category == "empty-overlap"
    train = PulseTrain(np.ones(10, dtype=complex), 1e-6)
    with pytest.raises(GridError) as exc:
        mix(a, train)
    assert exc.value.category == "grid-mismatch"


def test_mix_trains_aligns_gates():
    rng = np.random.default_rng(9)
    a = PulseTrain(rng.standard_normal(10) + 0j, 2e-8, first_gate=0)
    b = PulseTrain(rng.standard_normal(10) + 0j, 2e-8, first_gate=4)
    out = mix(a, b)
    assert out.out_a.n == 6
    assert out.out_a.first_gate == 4
    expect = (a.amplitudes[4:] + 1j * b.amplitudes[:6]) / np.sqrt(2.0)
    assert np.allclose(out.out_a.amplitudes, expect, rtol=1e-15, atol=0)


def test_delay_envelope_truncates_not_wraps():
    dt = 1e-6
    x = _rand_env(10, 10, dt=dt)
    d = delay(x, 3 * dt)
    assert d.n == 7
    assert d.t0 == pytest.approx(3 * dt)
    assert np.array_equal(d.samples, x.samples[:7])
    adv = delay(x, -2 * dt)
    assert adv.n == 8
    assert adv.t0 == 0.0
    assert np.array_equal(adv.samples, x.samples[2:])


def test_delay_grid_guards():
    dt = 1e-6
    x = _rand_env(10, 11, dt=dt)
    with pytest.raises(GridError) as exc:
        delay(x, 2.5 * dt)
    assert exc.value.category == "grid-mismatch"
    with pytest.raises(GridError) as exc:
        delay(x, 10 * dt)
    assert exc.value.category == "shift-exceeds-record"


def test_delay_train_by_pulses_or_seconds():
    tr = PulseTrain(np.arange(1, 9, dtype=complex), 2e-8, first_gate=5)
    by_count = delay(tr, 2)
    assert by_count.first_gate == 7
    assert np.array_equal(by_count.amplitudes, tr.amplitudes[:6])
    by_time = delay(tr, 2 * 2e-8)
    assert by_time.first_gate == 7
    assert np.array_equal(by_time.amplitudes, by_count.amplitudes)
    with pytest.raises(GridError):
        delay(tr, 1.5 * 2e-8)


def test_attenuate_scaling_and_bounds():
    x = _rand_env(100, 12)
    half = attenuate(x, 0.5)
    assert np.allclose(np.abs(half.samples) ** 2, 0.5 * np.abs(x.samples) ** 2,
                       rtol=1e-12, atol=0)
    assert np.all(attenuate(x, 0.0).samples == 0)
    assert np.array_equal(attenuate(x, 1.0).samples, x.samples)
    for bad in (-0.1, 1.2):
        with pytest.raises(ParamError):
            attenuate(x, bad)


def test_phase_shift_scalar_and_array():
    x = _rand_env(50, 13)
    flipped = phase_shift(x, np.pi)
    assert np.allclose(flipped.samples, -x.samples, rtol=0, atol=1e-14)
    ramp = np.linspace(0.0, 2.0, 50)
    swept = phase_shift(x, ramp)
    assert np.allclose(swept.samples, x.samples * np.exp(1j * ramp), rtol=1e-15, atol=0)
    # Lossless by construction.
    assert np.allclose(np.abs(swept.samples), np.abs(x.samples), rtol=1e-15, atol=0)
    with pytest.raises(ParamError):
        phase_shift(x, np.zeros(49))
    with pytest.raises(ParamError):
        phase_shift(x, np.zeros((5, 10)))


def test_elements_do_not_mutate_inputs():
    x = _rand_env(20, 14)
    before = x.samples.copy()
    split(x)
    mix(x, x)
    delay(x, 1e-6)
    attenuate(x, 0.3)
    phase_shift(x, 0.7)
    assert np.array_equal(x.samples, before)
