"""Exactly solvable model: few-photon scattering off a lossless chiral emitter.

For a product input of n photons in a single temporal mode psi, the outgoing
n-photon amplitude at ordered times s_1 >= ... >= s_n is the mixed derivative

    psi_out = d/da_1 ... d/da_n  exp((kappa/2) sum_i (s_i - 2 a_i))
              * phi(s_1 - a_1) * prod_{i>=2} [phi(s_i - a_i) - phi(s_{i-1} + a_{i-1})]

evaluated at a_i = 0, with phi(s) = int_s^inf psi(t) exp(-kappa t / 2) dt.
The derivatives are taken exactly with multi-component dual numbers.

An independent cross-check integrates the scattering Green's function

    G(t, s) = theta(t_1 >= s_1 >= ... >= t_n >= s_n)
              sum_{perm} prod_i [delta(t_i - s_perm(i)) - kappa theta(t_i - s_perm(i))]
              * exp(-kappa (t_i - s_i) / 2)

against the product input. The ordered domain factorizes into per-variable
intervals, so after collapsing the delta terms analytically the integral is a
sum of products of one-dimensional quadratures.

For a wide mode the amplitude in the pulse center reduces to closed forms;
with x_ij = exp(-kappa (s_i - s_j)/2), the three-photon one is
1 + 12 x_13 - 4 (x_12 + x_23) (positive-at-separation sign convention; the
literal generating-functional evaluation carries an extra factor (-1)^n,
which cancels in every observable).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .duals import MultiDual
from .jacobi import from_jacobi

__all__ = [
    "ModeFunction",
    "flat_mode",
    "gaussian_mode",
    "custom_mode",
    "QuadratureError",
    "phi_integral",
    "phi_derivative",
    "outgoing_wavefunction",
    "greens_scatter_oracle",
    "asymptotic_psi3",
    "bound_state_component",
    "scattering_component",
    "pair_correlation",
    "IdealCorrelations",
    "ideal_correlations",
    "ideal_map",
]


class QuadratureError(RuntimeError):
    """Requested quadrature tolerance could not be certified."""


@dataclass(frozen=True)
class ModeFunction:
    """Single-photon temporal mode.

    kind    : "flat", "gaussian" or "custom"
    psi     : amplitude psi(t); flat modes have unit amplitude on their support
    tau     : characteristic width (us), None for flat modes
    support : (lo, hi); either bound may be infinite for flat/gaussian modes
    """

    kind: str
    psi: Callable[[float], complex]
    tau: float | None
    support: tuple[float, float]

    def effective_support(self, kappa: float) -> tuple[float, float]:
        """Finite interval outside which psi(t) exp(+-kappa t / 2) is negligible."""
        lo, hi = self.support
        if self.kind == "gaussian":
            t0 = 0.5 * (lo + hi) if math.isfinite(lo) and math.isfinite(hi) else self._center
            half = 14.0 * self.tau + 0.5 * abs(kappa) * self.tau**2
            return (t0 - half, t0 + half)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"{self.kind} mode has no finite effective support")
        return (lo, hi)

    @property
    def _center(self) -> float:
        return getattr(self.psi, "t0", 0.0)


def flat_mode(support: tuple[float, float] = (-np.inf, np.inf)) -> ModeFunction:
    lo, hi = support

    def psi(t: float) -> float:
        return 1.0 if lo <= t <= hi else 0.0

    return ModeFunction(kind="flat", psi=psi, tau=None, support=(lo, hi))


def gaussian_mode(t0: float = 0.0, tau: float = 1.0) -> ModeFunction:
    if tau <= 0:
        raise ValueError("tau must be > 0")

    def psi(t: float) -> float:
        return math.exp(-0.5 * ((t - t0) / tau) ** 2)

    psi.t0 = t0  # type: ignore[attr-defined]
    return ModeFunction(kind="gaussian", psi=psi, tau=tau, support=(-np.inf, np.inf))


def custom_mode(psi: Callable[[float], complex], support: tuple[float, float], tau: float | None = None) -> ModeFunction:
    lo, hi = support
    if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
        raise ValueError("custom modes need a finite support interval")
    return ModeFunction(kind="custom", psi=psi, tau=tau, support=(lo, hi))


def _quad_complex(
    f: Callable[[float], complex], a: float, b: float, epsabs: float, epsrel: float | None = None
) -> tuple[complex, float]:
    epsrel = epsabs if epsrel is None else epsrel
    re, re_err = quad(lambda t: np.real(f(t)), a, b, epsabs=epsabs, epsrel=epsrel, limit=300)
    im, im_err = quad(lambda t: np.imag(f(t)), a, b, epsabs=epsabs, epsrel=epsrel, limit=300)
    return complex(re, im), re_err + im_err


def phi_integral(mode: ModeFunction, s: float, kappa: float, tol: float = 1e-12) -> complex:
    """Tail integral phi(s) = int_s^inf psi(t) exp(-kappa t / 2) dt by adaptive quadrature."""
    lo, hi = mode.support
    if not math.isfinite(hi):
        if kappa <= 0 and mode.kind == "flat":
            raise ValueError("divergent tail: flat mode with kappa <= 0")
        hi = np.inf
    a = max(s, lo)
    if a >= hi:
        return 0.0 + 0.0j
    val, _ = _quad_complex(lambda t: mode.psi(t) * math.exp(-0.5 * kappa * t), a, hi, tol)
    return val


def phi_derivative(mode: ModeFunction, s: float, kappa: float) -> complex:
    """d phi / d s = -psi(s) exp(-kappa s / 2)."""
    lo, hi = mode.support
    if s < lo or s > hi:
        return 0.0 + 0.0j
    return -mode.psi(s) * math.exp(-0.5 * kappa * s)


def outgoing_wavefunction(n: int, mode: ModeFunction, coords, kappa: float, tol: float = 1e-12) -> complex:
    """Outgoing n-photon amplitude via the generating functional (n <= 3).

    Coordinates are symmetrized by sorting (bosonic symmetry); the derivative
    with respect to each auxiliary parameter is taken exactly with one
    nilpotent dual component per parameter.
    """
    if n not in (1, 2, 3):
        raise ValueError(f"supported photon numbers are 1..3, got {n}")
    coords = sorted((float(c) for c in coords), reverse=True)
    if len(coords) != n:
        raise ValueError(f"expected {n} coordinates, got {len(coords)}")

    phi0 = [phi_integral(mode, s, kappa, tol=tol) for s in coords]
    dphi = [phi_derivative(mode, s, kappa) for s in coords]

    def phi_dual(i_arg: int, i_eps: int, sign: float) -> MultiDual:
        # phi(s_{i_arg} + sign * a_{i_eps})
        return MultiDual.lifted(phi0[i_arg], dphi[i_arg], i_eps, sign, n)

    # exp((kappa/2) sum_i (s_i - 2 a_i))
    exponent = MultiDual.const(0.5 * kappa * sum(coords), n)
    for i in range(n):
        exponent = exponent - MultiDual.variable(0.0, i, n) * kappa
    result = exponent.exp()

    result = result * phi_dual(0, 0, -1.0)
    for i in range(1, n):
        result = result * (phi_dual(i, i, -1.0) - phi_dual(i - 1, i - 1, +1.0))
    return result.top()


def asymptotic_psi3(s1: float, s2: float, s3: float, kappa: float) -> float:
    """Three-photon amplitude deep inside a wide flat mode (sorted internally)."""
    a, b, c = sorted((s1, s2, s3), reverse=True)
    x13 = math.exp(-0.5 * kappa * (a - c))
    x12 = math.exp(-0.5 * kappa * (a - b))
    x23 = math.exp(-0.5 * kappa * (b - c))
    return 1.0 + 12.0 * x13 - 4.0 * (x12 + x23)


def bound_state_component(s1: float, s2: float, s3: float, kappa: float) -> float:
    """Three-body bound-state part 4 exp(-kappa (s_max - s_min))."""
    a, _, c = sorted((s1, s2, s3), reverse=True)
    return 4.0 * math.exp(-kappa * (a - c))


def scattering_component(s1: float, s2: float, s3: float, kappa: float) -> float:
    """Remainder after removing the bound state; equals 1 at coincident times."""
    return asymptotic_psi3(s1, s2, s3, kappa) - bound_state_component(s1, s2, s3, kappa)


def greens_scatter_oracle(n: int, mode: ModeFunction, coords, kappa: float, tol: float = 1e-8) -> complex:
    """Outgoing amplitude by direct quadrature of the scattering Green's function.

    Independent of the generating-functional evaluation: the input coordinates
    t interleave the fixed output coordinates s from above,
    t_1 >= s_1 >= t_2 >= s_2 >= ... (the interleaving that reduces to the tail
    integral phi and hence reproduces the generating functional), and the sum
    runs over all n! permutations and every delta/theta branch choice. Delta
    terms are collapsed analytically; the ordered domain is a product of
    intervals, so the absolutely continuous parts factorize into
    one-dimensional adaptive quadratures. Raises QuadratureError if the
    accumulated quadrature error estimate exceeds tol relative to the result.
    """
    if n not in (1, 2, 3):
        raise ValueError(f"supported photon numbers are 1..3, got {n}")
    s = sorted((float(c) for c in coords), reverse=True)
    if len(s) != n:
        raise ValueError(f"expected {n} coordinates, got {len(s)}")
    _, eff_hi = mode.effective_support(kappa)
    if eff_hi < s[0]:
        eff_hi = s[0]

    def m_func(t: float) -> complex:
        return mode.psi(t) * math.exp(-0.5 * kappa * t)

    # integration interval of input variable i: [s_i, s_{i-1}] (first one up to the mode edge)
    bounds = [(s[i], eff_hi if i == 0 else s[i - 1]) for i in range(n)]

    def evaluate(abs_tol: float) -> tuple[complex, float]:
        integral_cache: dict[tuple[float, float], tuple[complex, float]] = {}

        def theta_factor(a: float, b: float) -> tuple[complex, float]:
            key = (a, b)
            if key not in integral_cache:
                if b <= a:
                    integral_cache[key] = (0.0 + 0.0j, 0.0)
                else:
                    val, err = _quad_complex(m_func, a, b, abs_tol, epsrel=1e-12)
                    integral_cache[key] = (-kappa * val, abs(kappa) * err)
            return integral_cache[key]

        total = 0.0 + 0.0j
        err_total = 0.0
        for perm in itertools.permutations(range(n)):
            for mask in range(1 << n):
                term = 1.0 + 0.0j
                term_err_rel = 0.0
                for i in range(n):
                    lo_i, hi_i = bounds[i]
                    target = s[perm[i]]
                    if mask & (1 << i):
                        # delta branch pins t_i = s_perm(i); boundary hits count in full
                        if not (lo_i <= target <= hi_i):
                            term = 0.0
                            break
                        term *= m_func(target)
                    else:
                        # theta branch: t_i >= s_perm(i) within its interval
                        val, err = theta_factor(max(lo_i, target), hi_i)
                        if val == 0.0 and err == 0.0:
                            term = 0.0
                            break
                        if abs(val) > 0:
                            term_err_rel += err / abs(val)
                        term *= val
                if term != 0.0:
                    total += term
                    err_total += abs(term) * term_err_rel
        scale = math.exp(0.5 * kappa * sum(s))
        return total * scale, err_total * scale

    # absolute quadrature budget, refined if the conservative estimate misses tol
    probe = max(abs(m_func(x)) for x in np.linspace(s[-1], eff_hi, 65))
    abs_tol = max(tol * 1e-4 * probe * max(eff_hi - s[-1], 1.0), 1e-300)
    result, err_total = evaluate(abs_tol)
    for _ in range(4):
        budget = tol * max(abs(result), 1e-12)
        if err_total <= budget:
            return result
        abs_tol = max(abs_tol * min(0.1, 0.1 * budget / err_total), 1e-300)
        result, err_total = evaluate(abs_tol)
    if err_total > tol * max(abs(result), 1e-12):
        raise QuadratureError(
            f"quadrature error estimate {err_total:.3g} exceeds tol for result {result:.6g}"
        )
    return result


def pair_correlation(ds: float, kappa: float) -> float:
    """Ideal-model g2 at separation ds: (1 - 4 exp(-kappa |ds| / 2))^2."""
    return (1.0 - 4.0 * math.exp(-0.5 * kappa * abs(ds))) ** 2


@dataclass(frozen=True)
class IdealCorrelations:
    g2_12: float
    g2_13: float
    g2_23: float
    g3: float
    g3_connected: float


def ideal_correlations(eta: float, zeta: float, kappa: float) -> IdealCorrelations:
    """Ideal-model correlations at relative coordinates (eta, zeta).

    Single-photon transmission has unit magnitude, so g3 = psi3^2 with psi3
    the wide-mode three-photon amplitude, and each pair gives
    g2 = (1 - 4 exp(-kappa ds/2))^2.
    """
    s1, s2, s3 = from_jacobi(0.0, eta, zeta)
    g2_12 = pair_correlation(s1 - s2, kappa)
    g2_13 = pair_correlation(s1 - s3, kappa)
    g2_23 = pair_correlation(s2 - s3, kappa)
    psi = asymptotic_psi3(s1, s2, s3, kappa)
    g3 = psi * psi
    g3c = 2.0 + g3 - (g2_12 + g2_13 + g2_23)
    return IdealCorrelations(g2_12, g2_13, g2_23, g3, g3c)


def ideal_map(kappa: float, extent: float = 3.0, cell_width: float = 0.1):
    """Ideal-model JacobiMap on cells centered at integer multiples of cell_width."""
    from .jacobi import JacobiMap

    n = int(math.floor(extent / cell_width + 1e-9))
    centers = np.arange(-n, n + 1) * cell_width
    g3 = np.empty((centers.size, centers.size))
    g3c = np.empty_like(g3)
    for ie, eta in enumerate(centers):
        for iz, zeta in enumerate(centers):
            c = ideal_correlations(float(eta), float(zeta), kappa)
            g3[ie, iz] = c.g3
            g3c[ie, iz] = c.g3_connected
    return JacobiMap(
        eta_centers=centers.copy(),
        zeta_centers=centers.copy(),
        g3=g3,
        g3c=g3c,
        n_samples=np.ones_like(g3, dtype=np.int64),
        r_range=(float("nan"), float("nan")),
        cell_width=cell_width,
        g3_stderr=np.zeros_like(g3),
        g3c_stderr=np.zeros_like(g3),
    )
