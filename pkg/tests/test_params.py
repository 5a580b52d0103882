import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from superatom.params import (
    AtomicInputs,
    PulseSpec,
    SystemParams,
    collective_kappa,
    drive_amplitude,
    mean_photon_number,
    raman_decay_rate,
    tukey_envelope,
)

DEFAULT_PULSE = PulseSpec(peak_rate=6.7)


def test_default_rates_are_reference_fit():
    p = SystemParams()
    assert (p.kappa, p.gamma_r, p.gamma_d) == (0.55, 0.14, 1.49)


@pytest.mark.parametrize("field,value", [("kappa", -0.1), ("gamma_r", float("nan")), ("gamma_d", float("inf"))])
def test_rates_validated(field, value):
    with pytest.raises(ValueError):
        SystemParams(**{field: value})


def test_pulse_validation():
    with pytest.raises(ValueError):
        PulseSpec(peak_rate=-1.0)
    with pytest.raises(ValueError):
        PulseSpec(peak_rate=1.0, ramp=0.0)
    with pytest.raises(ValueError):
        PulseSpec(peak_rate=1.0, t_start=0.0, t_end=0.9, ramp=0.5)


def test_envelope_flat_top_and_support():
    assert tukey_envelope(3.0, DEFAULT_PULSE) == 1.0
    assert tukey_envelope(0.5, DEFAULT_PULSE) == 1.0
    assert tukey_envelope(-0.2, DEFAULT_PULSE) == 0.0
    assert tukey_envelope(6.0, DEFAULT_PULSE) == 0.0
    assert tukey_envelope(7.3, DEFAULT_PULSE) == 0.0


def test_envelope_half_ramp_value():
    # raised cosine at half ramp: (1 - cos(pi/2)) / 2 = 1/2
    assert tukey_envelope(0.25, DEFAULT_PULSE) == pytest.approx(0.5, abs=1e-12)
    assert tukey_envelope(5.75, DEFAULT_PULSE) == pytest.approx(0.5, abs=1e-12)


def test_envelope_continuity_on_dense_grid():
    # no discontinuities: grid jumps are slope-limited and shrink linearly with dt
    for dt in (1e-4, 1e-5):
        t = np.arange(-0.5, 6.5, dt)
        env = tukey_envelope(t, DEFAULT_PULSE)
        max_jump = np.max(np.abs(np.diff(env)))
        assert max_jump < np.pi / (2 * DEFAULT_PULSE.ramp) * dt * 1.01
    # a jump that survives dt -> 0 would stay O(1); bound it well below any step
    t = np.arange(-0.5, 6.5, 1e-7)
    assert np.max(np.abs(np.diff(tukey_envelope(t, DEFAULT_PULSE)))) < 1e-6


@given(st.floats(min_value=-2.0, max_value=8.0))
def test_envelope_bounds(t):
    env = tukey_envelope(t, DEFAULT_PULSE)
    assert 0.0 <= env <= 1.0


@given(st.floats(min_value=0.0, max_value=0.5 - 1e-9), st.floats(min_value=1e-9, max_value=0.5))
def test_envelope_rising_edge_monotone(t, dt):
    t2 = min(t + dt, 0.5)
    assert tukey_envelope(t2, DEFAULT_PULSE) >= tukey_envelope(t, DEFAULT_PULSE)


def test_drive_amplitude_values():
    assert drive_amplitude(3.0, DEFAULT_PULSE) == pytest.approx(math.sqrt(6.7), rel=1e-12)
    assert drive_amplitude(3.0, DEFAULT_PULSE) == pytest.approx(2.588, abs=1e-3)
    assert drive_amplitude(-1.0, DEFAULT_PULSE) == 0.0


@given(st.floats(min_value=-1.0, max_value=7.0))
def test_amplitude_squared_is_rate_times_envelope_squared(t):
    a = drive_amplitude(t, DEFAULT_PULSE)
    assert a * a == pytest.approx(6.7 * tukey_envelope(t, DEFAULT_PULSE) ** 2, rel=1e-12, abs=1e-12)


def test_mean_photon_number_against_quadrature():
    for pulse in (DEFAULT_PULSE, PulseSpec(peak_rate=3.4, t_start=1.0, t_end=9.0, ramp=1.5)):
        val, err = quad(lambda t: drive_amplitude(t, pulse) ** 2, pulse.t_start, pulse.t_end, limit=200)
        assert mean_photon_number(pulse) == pytest.approx(val, rel=1e-9)


ATOMIC = AtomicInputs(
    omega=2 * math.pi * 12.0,      # rad/us
    delta=2 * math.pi * 100.0,
    gamma_e=2 * math.pi * 6.065,
    n_atoms=5000,
    g0=0.05,
)


def test_raman_decay_rate_value():
    expected = (ATOMIC.omega / (2 * ATOMIC.delta)) ** 2 * ATOMIC.gamma_e
    got = raman_decay_rate(ATOMIC)
    assert got == pytest.approx(expected, rel=1e-14)
    assert got == pytest.approx(0.137, abs=5e-4)
    # consistent with the fitted value 0.14 within 5 percent
    assert abs(got / 0.14 - 1.0) < 0.05


def test_raman_decay_zero_drive_and_scaling():
    zero = AtomicInputs(omega=0.0, delta=ATOMIC.delta, gamma_e=ATOMIC.gamma_e, n_atoms=1, g0=1.0)
    assert raman_decay_rate(zero) == 0.0
    doubled = AtomicInputs(omega=ATOMIC.omega, delta=2 * ATOMIC.delta, gamma_e=ATOMIC.gamma_e, n_atoms=1, g0=1.0)
    assert raman_decay_rate(doubled) == pytest.approx(raman_decay_rate(ATOMIC) / 4.0, rel=1e-12)


def test_raman_decay_zero_detuning_rejected():
    bad = AtomicInputs(omega=1.0, delta=0.0, gamma_e=1.0, n_atoms=1, g0=1.0)
    with pytest.raises(ValueError):
        raman_decay_rate(bad)
    with pytest.raises(ValueError):
        collective_kappa(bad)


def test_collective_kappa_scaling():
    base = collective_kappa(ATOMIC)
    quad_atoms = AtomicInputs(ATOMIC.omega, ATOMIC.delta, ATOMIC.gamma_e, 4 * ATOMIC.n_atoms, ATOMIC.g0)
    assert collective_kappa(quad_atoms) == pytest.approx(4 * base, rel=1e-12)
    none = AtomicInputs(ATOMIC.omega, ATOMIC.delta, ATOMIC.gamma_e, 0, ATOMIC.g0)
    assert collective_kappa(none) == 0.0


def test_collective_kappa_reproduces_fit_from_matched_coupling():
    # inputs tuned so the collective coupling equals 2 sqrt(0.55)
    target = 2 * math.sqrt(0.55)
    g0 = target * (2 * ATOMIC.delta) / (math.sqrt(ATOMIC.n_atoms) * ATOMIC.omega)
    tuned = AtomicInputs(ATOMIC.omega, ATOMIC.delta, ATOMIC.gamma_e, ATOMIC.n_atoms, g0)
    assert collective_kappa(tuned) == pytest.approx(0.55, rel=1e-12)
