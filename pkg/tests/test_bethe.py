import math

import numpy as np
import pytest
from scipy.special import erfc

from superatom.bethe import (
    asymptotic_psi3,
    bound_state_component,
    custom_mode,
    flat_mode,
    gaussian_mode,
    greens_scatter_oracle,
    ideal_correlations,
    ideal_map,
    outgoing_wavefunction,
    pair_correlation,
    phi_derivative,
    phi_integral,
    scattering_component,
)
from superatom.jacobi import to_jacobi

KAPPA = 0.8


def phi_flat_exact(s, kappa):
    return 2.0 / kappa * math.exp(-0.5 * kappa * s)


def phi_gauss_exact(s, t0, tau, kappa):
    pref = tau * math.sqrt(math.pi / 2.0) * math.exp(kappa**2 * tau**2 / 8.0 - kappa * t0 / 2.0)
    return pref * erfc((s - t0 + kappa * tau**2 / 2.0) / (math.sqrt(2.0) * tau))


def test_phi_flat_matches_elementary_integral():
    mode = flat_mode()
    for s in (-1.0, 0.0, 2.5):
        assert phi_integral(mode, s, KAPPA) == pytest.approx(phi_flat_exact(s, KAPPA), abs=1e-10)


def test_phi_flat_divergent_tail_rejected():
    with pytest.raises(ValueError):
        phi_integral(flat_mode(), 0.0, -0.3)
    with pytest.raises(ValueError):
        phi_integral(flat_mode(), 0.0, 0.0)


def test_phi_gaussian_matches_erfc_closed_form():
    for tau in (0.7, 2.0):
        mode = gaussian_mode(t0=0.3, tau=tau)
        for s in (-1.0, 0.3, 1.8):
            assert phi_integral(mode, s, KAPPA) == pytest.approx(
                phi_gauss_exact(s, 0.3, tau, KAPPA), rel=1e-9
            )


def test_phi_empty_support():
    mode = custom_mode(lambda t: 1.0, support=(0.0, 1.0))
    assert phi_integral(mode, 2.0, KAPPA) == 0.0
    assert phi_derivative(mode, 2.0, KAPPA) == 0.0


def test_phi_derivative_is_negative_integrand():
    mode = gaussian_mode(t0=0.0, tau=1.0)
    s = 0.4
    assert phi_derivative(mode, s, KAPPA) == pytest.approx(
        -mode.psi(s) * math.exp(-0.5 * KAPPA * s), rel=1e-14
    )


def test_single_photon_flat_mode_transmission():
    # resonant transmission deep in a flat mode: amplitude -1, unit magnitude
    v = outgoing_wavefunction(1, flat_mode(), [0.7], KAPPA)
    assert v == pytest.approx(-1.0, abs=1e-10)
    assert abs(v) == pytest.approx(1.0, abs=1e-10)


def test_two_photon_flat_mode_closed_form():
    mode = flat_mode()
    for ds in (0.0, 0.4, 1.7, 5.0):
        v = outgoing_wavefunction(2, mode, [ds, 0.0], KAPPA)
        assert v == pytest.approx(1.0 - 4.0 * math.exp(-0.5 * KAPPA * ds), abs=1e-9)
    assert abs(outgoing_wavefunction(2, mode, [0.0, 0.0], KAPPA)) == pytest.approx(3.0, abs=1e-9)


def test_three_photon_flat_mode_matches_wide_mode_form():
    # literal generating-functional evaluation carries (-1)^n
    mode = flat_mode()
    v = outgoing_wavefunction(3, mode, [0.0, 0.0, 0.0], KAPPA)
    assert v == pytest.approx(-5.0, abs=1e-9)
    for coords in ([1.0, 0.4, -0.2], [2.0, 0.0, -1.0], [0.3, 0.3, 0.0]):
        v = outgoing_wavefunction(3, mode, coords, KAPPA)
        assert v == pytest.approx(-asymptotic_psi3(*coords, KAPPA), abs=1e-8)


def test_wavefunction_symmetric_under_coordinate_exchange():
    mode = gaussian_mode(t0=0.0, tau=2.0)
    a = outgoing_wavefunction(3, mode, [0.5, -0.3, 1.1], 1.0)
    b = outgoing_wavefunction(3, mode, [1.1, 0.5, -0.3], 1.0)
    assert a == pytest.approx(b, rel=1e-14)


def test_wavefunction_rejects_large_n():
    with pytest.raises(ValueError):
        outgoing_wavefunction(4, flat_mode(), [0, 0, 0, 0], 1.0)


def test_asymptotic_values():
    assert asymptotic_psi3(0.0, 0.0, 0.0, KAPPA) == 5.0
    assert asymptotic_psi3(100.0, 50.0, 0.0, 2.0) == pytest.approx(1.0, abs=1e-12)
    # s2 = s3 with exp(-kappa d / 2) = 1/2: -3 + 8/2 = 1
    d = 2.0 * math.log(2.0) / KAPPA
    assert asymptotic_psi3(d, 0.0, 0.0, KAPPA) == pytest.approx(1.0, abs=1e-12)


def test_bound_state_decomposition():
    assert bound_state_component(0.0, 0.0, 0.0, KAPPA) == 4.0
    assert scattering_component(0.0, 0.0, 0.0, KAPPA) == pytest.approx(1.0)
    d = math.log(2.0) / KAPPA
    assert bound_state_component(d, 0.0, 0.0, KAPPA) == pytest.approx(2.0)


def test_bunching_decays_slower_than_bound_state_alone():
    # along s2 = s3 the full amplitude approaches its limit at half the rate
    # at which the bound-state component falls off: the coherent admixture of
    # scattering states halves the decay exponent of the bunching signal
    d1, d2 = 4.0 / KAPPA, 6.0 / KAPPA
    limit = asymptotic_psi3(1e6, 0.0, 0.0, KAPPA)
    dev1 = asymptotic_psi3(d1, 0.0, 0.0, KAPPA) - limit
    dev2 = asymptotic_psi3(d2, 0.0, 0.0, KAPPA) - limit
    rate_full = -math.log(dev2 / dev1) / (d2 - d1)
    rate_bound = -math.log(
        bound_state_component(d2, 0.0, 0.0, KAPPA) / bound_state_component(d1, 0.0, 0.0, KAPPA)
    ) / (d2 - d1)
    assert rate_bound == pytest.approx(KAPPA, rel=1e-9)
    assert rate_full == pytest.approx(0.5 * KAPPA, rel=1e-9)
    assert rate_bound == pytest.approx(2.0 * rate_full, rel=1e-9)


@pytest.mark.parametrize("tau_kappa", [0.5, 2.0, 10.0])
def test_oracle_equivalence_random_tuples(tau_kappa):
    kappa = 1.0
    tau = tau_kappa / kappa
    mode = gaussian_mode(t0=0.0, tau=tau)
    rng = np.random.default_rng(7)
    for n in (1, 2, 3):
        for _ in range(3):
            coords = sorted(rng.uniform(-1.2 * tau, 1.2 * tau, size=n), reverse=True)
            a = outgoing_wavefunction(n, mode, coords, kappa)
            b = greens_scatter_oracle(n, mode, coords, kappa, tol=1e-5)
            assert abs(a - b) <= 1e-5 * max(abs(a), abs(b), 1e-9)


def test_oracle_single_photon_past_mode():
    mode = gaussian_mode(t0=-30.0, tau=1.0)
    v_eq = outgoing_wavefunction(1, mode, [-30.0], 1.0)
    v_or = greens_scatter_oracle(1, mode, [-30.0], 1.0, tol=1e-6)
    assert abs(v_eq - v_or) < 1e-6 * abs(v_eq)


def test_oracle_wide_mode_approaches_asymptotic_value():
    tau_kappa = 10.0
    mode = gaussian_mode(t0=0.0, tau=tau_kappa)
    v = greens_scatter_oracle(3, mode, [0.0, 0.0, 0.0], 1.0, tol=1e-5)
    assert v.real == pytest.approx(-5.0, abs=10.0 / tau_kappa)


def test_oracle_needs_finite_support():
    with pytest.raises(ValueError):
        greens_scatter_oracle(1, flat_mode(), [0.0], 1.0)


def test_ideal_correlations_closed_values():
    c = ideal_correlations(0.0, 0.0, KAPPA)
    assert (c.g2_12, c.g2_13, c.g2_23) == (9.0, 9.0, 9.0)
    assert c.g3 == 25.0
    assert c.g3_connected == 0.0


def test_ideal_connected_line_profile():
    # along s2 = s3: g3c = 32 x (x - 1), minimum -8 at x = 1/2
    for x in (0.2, 0.5, 0.9):
        d = -2.0 * math.log(x) / KAPPA
        _, eta, zeta = to_jacobi(d, 0.0, 0.0)
        c = ideal_correlations(eta, zeta, KAPPA)
        assert c.g3_connected == pytest.approx(32.0 * x * (x - 1.0), abs=1e-9)
    d_min = 2.0 * math.log(2.0) / KAPPA
    _, eta, zeta = to_jacobi(d_min, 0.0, 0.0)
    assert ideal_correlations(eta, zeta, KAPPA).g3_connected == pytest.approx(-8.0, abs=1e-9)


def test_ideal_saturation_when_one_photon_separates():
    # far third photon: g3 -> g2 of the close pair, connected part -> 0
    ds_close = 0.9
    far = 80.0
    _, eta, zeta = to_jacobi(far, ds_close, 0.0)
    c = ideal_correlations(eta, zeta, KAPPA)
    assert c.g3 == pytest.approx(pair_correlation(ds_close, KAPPA), rel=1e-6)
    assert c.g3_connected == pytest.approx(0.0, abs=1e-6)


def test_ideal_map_center_cell():
    jm = ideal_map(1.0, extent=1.0, cell_width=0.5)
    assert jm.value_at(0.0, 0.0) == pytest.approx(25.0)
    assert jm.value_at(0.0, 0.0, connected=True) == pytest.approx(0.0, abs=1e-12)
    assert jm.g3.shape == (5, 5)
