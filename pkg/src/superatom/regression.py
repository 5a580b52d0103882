"""Exact multi-time correlators of the outgoing field via quantum regression.

Normally ordered correlators G^(n)(s_1..s_n) = <E+(s_1)..E+(s_n)E(s_n)..E(s_1)>
are evaluated by forward propagation interleaved with applications of the
output-field sandwich rho -> E rho E+, E = alpha - i sqrt(kappa) s_GW. The
procedure is exact for a single emitter because emitted photons never return.

Correlators are evaluated for time-ordered arguments only; unsorted queries
are sorted first (the normalized correlators are symmetric, so nothing is
lost). Grid evaluation caches one propagator per grid interval and reuses it
across all time tuples.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from . import lindblad
from .lindblad import IntegrationError, SuperatomState, evolve, output_rate
from .params import PulseSpec, SystemParams, drive_amplitude, tukey_envelope

__all__ = [
    "CorrelationGrid",
    "sandwich_E",
    "sandwich_superop",
    "intensity_functional",
    "interval_propagators",
    "correlation_tensors",
    "correlator_G",
    "normalized_g",
    "g3_grid",
    "binned_reference_map",
    "write_pairs_csv",
    "write_triples_csv",
]

log = logging.getLogger(__name__)

_CLAMP = 1e-10  # negative real parts above this magnitude indicate a real problem


def _output_operator(alpha: complex, kappa: float) -> np.ndarray:
    return alpha * np.eye(3, dtype=complex) - 1j * np.sqrt(kappa) * lindblad.SIGMA_GW


def sandwich_E(state: SuperatomState, alpha: complex, kappa: float) -> SuperatomState:
    """Unnormalized state E rho E+; its trace is the photon-rate contribution."""
    e = _output_operator(alpha, kappa)
    return SuperatomState(rho=e @ state.rho @ e.conj().T, t=state.t)


def sandwich_superop(alpha: complex, kappa: float) -> np.ndarray:
    """9x9 map of vec(rho) -> vec(E rho E+), column-stacking convention."""
    e = _output_operator(alpha, kappa)
    return np.kron(e.conj(), e)


def intensity_functional(alpha: complex, kappa: float) -> np.ndarray:
    """9-vector f with f . vec(rho) = Tr(rho E+ E) = <E+ E>."""
    e = _output_operator(alpha, kappa)
    m = e.conj().T @ e
    return m.T.ravel(order="F")


def interval_propagators(
    params: SystemParams, pulse: PulseSpec, times: np.ndarray, tol: float = 1e-10
) -> list[np.ndarray]:
    """One 9x9 propagator per interval between consecutive grid times.

    Intervals on which the drive amplitude is constant get an exact matrix
    exponential (cached by amplitude and duration); ramp intervals are
    integrated with the adaptive integrator.
    """
    l_const = lindblad.liouvillian(0.0, params)
    scale = np.sqrt(params.kappa) * np.sqrt(pulse.peak_rate)
    cache: dict[tuple[float, float], np.ndarray] = {}
    props = []
    for a, b in zip(times[:-1], times[1:]):
        if pulse.amplitude_is_constant(a, b):
            alpha = drive_amplitude(0.5 * (a + b), pulse)
            key = (round(alpha, 14), round(b - a, 14))
            if key not in cache:
                cache[key] = expm(lindblad.liouvillian(alpha, params) * (b - a))
            props.append(cache[key])
            continue

        def rhs(t: float, u: np.ndarray) -> np.ndarray:
            mat = u.reshape(9, 9)
            amp = scale * tukey_envelope(t, pulse)
            return (l_const @ mat + amp * (lindblad._L_DRIVE_UNIT @ mat)).ravel()

        sol = solve_ivp(
            rhs,
            (a, b),
            np.eye(9, dtype=complex).ravel(),
            method="DOP853",
            rtol=tol,
            atol=tol * 1e-2,
        )
        if not sol.success:
            raise IntegrationError(f"propagator integration failed: {sol.message}", sol.t[-1])
        props.append(sol.y[:, -1].reshape(9, 9))
    return props


def _check_and_clamp(values: np.ndarray, label: str) -> np.ndarray:
    """Keep real parts; clamp roundoff negatives; warn on larger anomalies."""
    re = values.real.copy() if np.iscomplexobj(values) else values.copy()
    if np.iscomplexobj(values):
        scale = np.max(np.abs(values)) or 1.0
        worst_im = np.max(np.abs(values.imag))
        if worst_im > 1e-8 * scale:
            log.warning("%s: imaginary parts up to %.3g relative to scale %.3g", label, worst_im, scale)
    tiny = (re < 0.0) & (re > -_CLAMP)
    if np.any(tiny):
        log.warning("%s: clamped %d tiny negative values to 0", label, int(np.count_nonzero(tiny)))
        re[tiny] = 0.0
    if np.any(re < 0.0):
        log.warning("%s: negative values beyond clamp threshold (min %.3g)", label, float(re.min()))
    return re


def correlation_tensors(
    params: SystemParams, pulse: PulseSpec, times, tol: float = 1e-10
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unnormalized I(s), G2(s_i, s_j), G3(s_i, s_j, s_k) on a sorted time grid.

    Returns (I, G2, G3) with G2 and G3 stored fully symmetrized. Cost is one
    propagator per grid interval plus O(M^3) cached 9x9 matrix-vector
    applications for the C(M+2, 3) distinct sorted triples.
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    m = times.size
    props = interval_propagators(params, pulse, times, tol=tol)
    # transposed propagators act on row-stacked batches of vec states
    props_t = [p.T.copy() for p in props]

    state0 = evolve(SuperatomState.ground(t=pulse.t_start), float(times[0]), params, pulse, tol=tol)
    rho_vecs = np.empty((m, 9), dtype=complex)
    rho_vecs[0] = lindblad.vec(state0.rho)
    for i in range(m - 1):
        rho_vecs[i + 1] = props[i] @ rho_vecs[i]

    alphas = np.array([drive_amplitude(float(t), pulse) for t in times])
    sandwiches = [sandwich_superop(a, params.kappa) for a in alphas]
    sandwiches_t = [s.T.copy() for s in sandwiches]
    intens = [intensity_functional(a, params.kappa) for a in alphas]

    intensity = _check_and_clamp(np.array([intens[i] @ rho_vecs[i] for i in range(m)]), "I")

    g2 = np.zeros((m, m), dtype=complex)
    g3 = np.zeros((m, m, m), dtype=complex)

    # rows of z: state sandwiched at time index i, propagated to the current index j
    z = np.zeros((m, 9), dtype=complex)
    snapshots: list[np.ndarray] = []
    for j in range(m):
        if j > 0:
            z[:j] = z[:j] @ props_t[j - 1]
        z[j] = sandwiches[j] @ rho_vecs[j]
        vals = z[: j + 1] @ intens[j]
        g2[: j + 1, j] = vals
        g2[j, : j + 1] = vals
        snapshots.append(z[: j + 1].copy())

    for j in range(m):
        w = snapshots[j] @ sandwiches_t[j]
        idx = np.arange(j + 1)
        for k in range(j, m):
            if k > j:
                w = w @ props_t[k - 1]
            vals = w @ intens[k]
            g3[idx, j, k] = vals
            g3[idx, k, j] = vals
            g3[j, idx, k] = vals
            g3[k, idx, j] = vals
            g3[j, k, idx] = vals
            g3[k, j, idx] = vals

    return intensity, _check_and_clamp(g2, "G2"), _check_and_clamp(g3, "G3")


def correlator_G(
    n: int, times, params: SystemParams, pulse: PulseSpec, tol: float = 1e-10
) -> float:
    """G^(n) at arbitrary times by direct propagate/sandwich alternation.

    The state is renormalized after every sandwich (accumulating the scalar
    factor) so weak-drive correlators keep full relative accuracy.
    """
    if n not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {n}")
    times = sorted(float(t) for t in times)
    if len(times) != n:
        raise ValueError(f"expected {n} times, got {len(times)}")
    state = SuperatomState.ground(t=min(pulse.t_start, times[0]))
    factor = 1.0
    for s in times:
        state = evolve(state, s, params, pulse, tol=tol)
        sand = sandwich_E(state, drive_amplitude(s, pulse), params.kappa)
        tr = float(np.real(np.trace(sand.rho)))
        if tr <= 0.0:
            return 0.0
        factor *= tr
        state = SuperatomState(rho=sand.rho / tr, t=s)
    return factor


def normalized_g(
    n: int, times, params: SystemParams, pulse: PulseSpec, tol: float = 1e-10
) -> float:
    """g^(n) = G^(n) / prod_i I(s_i)."""
    times = sorted(float(t) for t in times)
    big_g = correlator_G(n, times, params, pulse, tol=tol)
    state = SuperatomState.ground(t=min(pulse.t_start, times[0]))
    denom = 1.0
    for s in times:
        state = evolve(state, s, params, pulse, tol=tol)
        rate = output_rate(state, drive_amplitude(s, pulse), kappa=params.kappa)
        if rate <= 0.0:
            raise ValueError(f"vanishing intensity at s = {s}; g^({n}) undefined")
        denom *= rate
    return big_g / denom


@dataclass
class CorrelationGrid:
    """Correlator values on a uniform time grid.

    g2 and g3 hold the normalized correlators as fully symmetric arrays;
    big_g2 / big_g3 keep the unnormalized numerators.
    """

    times: np.ndarray
    intensity: np.ndarray
    g2: np.ndarray
    g3: np.ndarray
    big_g2: np.ndarray
    big_g3: np.ndarray

    def g3_connected(self) -> np.ndarray:
        """Connected correlator 2 + g3 - (g2_12 + g2_13 + g2_23), symmetric."""
        m = self.times.size
        a = self.g2[:, :, None]          # (i, j)
        b = self.g2[:, None, :]          # (i, k)
        c = self.g2[None, :, :]          # (j, k)
        return 2.0 + self.g3 - (a + b + c).reshape(m, m, m)


def g3_grid(
    params: SystemParams, pulse: PulseSpec, grid, stride: int = 1, tol: float = 1e-10
) -> CorrelationGrid:
    """Fill I, g2, g3 over all ordered tuples of grid points.

    The grid must be uniform and sorted; stride >= 1 subsamples the grid for
    the correlator lattice (intensities are computed on the same subsample).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-D array")
    if grid.size > 1:
        steps = np.diff(grid)
        if np.any(steps <= 0) or np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]:
            raise ValueError("grid must be uniform and strictly increasing")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    times = grid[::stride]
    intensity, big_g2, big_g3 = correlation_tensors(params, pulse, times, tol=tol)
    if np.any(intensity <= 0.0):
        raise ValueError("vanishing intensity on the grid; normalized correlators undefined")
    # scalar products commute, so the pair normalization is exactly symmetric
    g2 = big_g2 / np.multiply.outer(intensity, intensity)
    # triple products are not associative at the ulp level: normalize sorted
    # entries once and mirror, keeping permutation symmetry bit-exact
    m = times.size
    g3 = np.zeros_like(big_g3)
    for j in range(m):
        idx = np.arange(j + 1)
        for k in range(j, m):
            vals = big_g3[idx, j, k] / (intensity[idx] * intensity[j] * intensity[k])
            g3[idx, j, k] = vals
            g3[idx, k, j] = vals
            g3[j, idx, k] = vals
            g3[k, idx, j] = vals
            g3[j, k, idx] = vals
            g3[k, j, idx] = vals
    return CorrelationGrid(times, intensity, g2, g3, big_g2, big_g3)


def binned_reference_map(
    params: SystemParams,
    pulse: PulseSpec,
    bins,
    r_range: tuple[float, float] = (2.5, 3.5),
    cell_width: float | None = None,
    tol: float = 1e-10,
):
    """Exact expectation of the coincidence estimator's (eta, zeta) map.

    The counting estimator measures cell averages of G3 / (binned rates), not
    point values, so a like-for-like reference integrates the regression
    tensors over each time bin (3-node Gauss-Legendre per bin, effectively
    exact at these smoothness scales) and projects through the identical
    triple-to-cell table.
    """
    from numpy.polynomial.legendre import leggauss

    from .jacobi import JacobiMap, TripleCellTable, connected_g3

    m = bins.n_bins
    w = bins.bin_width
    nodes, wts = leggauss(3)
    lattice = (bins.centers[:, None] + nodes[None, :] * (w / 2)).ravel()
    intensity, big_g2, big_g3 = correlation_tensors(params, pulse, lattice, tol=tol)
    wv = np.tile(wts, m) * (w / 2)
    lam = (intensity.reshape(m, 3) @ wts) * (w / 2)  # expected counts per pulse per bin
    if np.any(lam <= 0):
        raise ValueError("vanishing bin rate inside the window")
    avg3 = np.einsum("i,j,k,ijk->ijk", wv, wv, wv, big_g3).reshape(m, 3, m, 3, m, 3).sum(axis=(1, 3, 5))
    avg2 = np.einsum("i,j,ij->ij", wv, wv, big_g2).reshape(m, 3, m, 3).sum(axis=(1, 3))
    g3_bin = avg3 / (lam[:, None, None] * lam[None, :, None] * lam[None, None, :])
    g2_bin = avg2 / (lam[:, None] * lam[None, :])

    cw = w if cell_width is None else cell_width
    table = TripleCellTable(bins.centers, r_range, cw)
    tri = table.triples
    i, j, k = tri[:, 0], tri[:, 1], tri[:, 2]
    vals3 = g3_bin[i, j, k]
    valsc = connected_g3(vals3, (g2_bin[i, j], g2_bin[i, k], g2_bin[j, k]))
    mean3, counts = table.project_values(vals3)
    meanc, _ = table.project_values(valsc)
    shape = table.shape
    return JacobiMap(
        eta_centers=table.eta_centers,
        zeta_centers=table.zeta_centers,
        g3=mean3.reshape(shape),
        g3c=meanc.reshape(shape),
        n_samples=counts.reshape(shape),
        r_range=table.r_range,
        cell_width=cw,
        g3_stderr=np.zeros(shape),
        g3c_stderr=np.zeros(shape),
    )


def write_pairs_csv(grid: CorrelationGrid, path, header_lines=()) -> None:
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("s1_us,s2_us,g2\n")
        m = grid.times.size
        for i in range(m):
            for j in range(i, m):
                fh.write(f"{grid.times[i]:.9g},{grid.times[j]:.9g},{grid.g2[i, j]:.9g}\n")


def write_triples_csv(grid: CorrelationGrid, path, header_lines=()) -> None:
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("s1_us,s2_us,s3_us,g3\n")
        m = grid.times.size
        for i in range(m):
            for j in range(i, m):
                for k in range(j, m):
                    fh.write(
                        f"{grid.times[i]:.9g},{grid.times[j]:.9g},"
                        f"{grid.times[k]:.9g},{grid.g3[i, j, k]:.9g}\n"
                    )
