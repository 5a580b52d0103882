"""Master equation of the driven three-level superatom.

The effective emitter has basis states G (ground), W (bright collective
excitation) and D (dark manifold, collapsed to a single level: every
dissipator below addresses the manifold only through its total population).
The density matrix evolves under

    drho/dt = -i [H0(t), rho] + (kappa + gamma_r) D[s_GW] rho
              + gamma_d D[s_DW] rho + gamma_r D[s_GD] rho

with D[c] rho = c rho c+ - {c+ c, rho}/2 and the drive
H0(t) = sqrt(kappa) * (conj(alpha(t)) s_GW + alpha(t) s_WG). The outgoing
field operator is E(t) = alpha(t) - i sqrt(kappa) s_GW.

Superoperators act on column-stacked density matrices: vec(rho) concatenates
the columns of rho (Fortran order), so vec(A rho B) = kron(B.T, A) vec(rho).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .params import PulseSpec, SystemParams, drive_amplitude, tukey_envelope

__all__ = [
    "G",
    "W",
    "D",
    "SIGMA_GW",
    "SIGMA_WG",
    "SIGMA_DW",
    "SIGMA_GD",
    "SuperatomState",
    "IntegrationError",
    "drive_hamiltonian",
    "dissipator_superop",
    "liouvillian",
    "liouvillian_at",
    "evolve",
    "output_rate",
    "transmission_trace",
    "write_trace_csv",
]

G, W, D = 0, 1, 2

_I3 = np.eye(3, dtype=complex)


def _ketbra(i: int, j: int) -> np.ndarray:
    m = np.zeros((3, 3), dtype=complex)
    m[i, j] = 1.0
    return m


SIGMA_GW = _ketbra(G, W)
SIGMA_WG = _ketbra(W, G)
SIGMA_DW = _ketbra(D, W)
SIGMA_GD = _ketbra(G, D)


class IntegrationError(RuntimeError):
    """Master-equation integration failed; carries the time reached."""

    def __init__(self, message: str, t_reached: float):
        super().__init__(f"{message} (time reached: {t_reached:.6g} us)")
        self.t_reached = t_reached


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stack a 3x3 matrix into a 9-vector."""
    return np.asarray(rho, dtype=complex).ravel(order="F")


def unvec(y: np.ndarray) -> np.ndarray:
    return np.asarray(y, dtype=complex).reshape((3, 3), order="F")


def _left_right(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> a rho b in the column-stacking convention."""
    return np.kron(b.T, a)


def drive_hamiltonian(alpha: complex, kappa: float) -> np.ndarray:
    """H0 = sqrt(kappa) (conj(alpha) s_GW + alpha s_WG)."""
    rk = np.sqrt(kappa)
    return rk * (np.conj(alpha) * SIGMA_GW + alpha * SIGMA_WG)


def dissipator_superop(c: np.ndarray) -> np.ndarray:
    """Superoperator of the Lindblad dissipator D[c] (unit rate)."""
    cdc = c.conj().T @ c
    return _left_right(c, c.conj().T) - 0.5 * (_left_right(cdc, _I3) + _left_right(_I3, cdc))


def _hamiltonian_superop(h: np.ndarray) -> np.ndarray:
    return -1j * (_left_right(h, _I3) - _left_right(_I3, h))


# Drive-independent pieces, reused by every Liouvillian evaluation.
_L_DRIVE_UNIT = _hamiltonian_superop(SIGMA_GW + SIGMA_WG)  # for real alpha, scaled by sqrt(kappa)*alpha
_D_GW = dissipator_superop(SIGMA_GW)
_D_DW = dissipator_superop(SIGMA_DW)
_D_GD = dissipator_superop(SIGMA_GD)


def liouvillian(alpha: complex, params: SystemParams, include_dissipators: bool = True) -> np.ndarray:
    """9x9 generator at fixed drive amplitude.

    With include_dissipators=False only the coherent commutator part is kept;
    that seam exists so tests can run the dissipation-free Rabi oracle while
    keeping the drive coupling sqrt(kappa)*alpha.
    """
    alpha = complex(alpha)
    if alpha.imag == 0.0:
        l = (np.sqrt(params.kappa) * alpha.real) * _L_DRIVE_UNIT
    else:
        l = _hamiltonian_superop(drive_hamiltonian(alpha, params.kappa))
    if include_dissipators:
        l = l + (params.kappa + params.gamma_r) * _D_GW
        l = l + params.gamma_d * _D_DW
        l = l + params.gamma_r * _D_GD
    return l


def liouvillian_at(
    t: float, params: SystemParams, pulse: PulseSpec, include_dissipators: bool = True
) -> np.ndarray:
    """Generator evaluated with the pulsed drive alpha(t)."""
    return liouvillian(drive_amplitude(t, pulse), params, include_dissipators)


@dataclass
class SuperatomState:
    """3x3 density matrix over the ordered basis (G, W, D) at time t."""

    rho: np.ndarray
    t: float = 0.0

    @classmethod
    def ground(cls, t: float = 0.0) -> "SuperatomState":
        rho = np.zeros((3, 3), dtype=complex)
        rho[G, G] = 1.0
        return cls(rho=rho, t=t)

    def trace_error(self) -> float:
        return abs(np.trace(self.rho) - 1.0)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T)).min())

    def population(self, level: int) -> float:
        return float(np.real(self.rho[level, level]))


def _segments(t0: float, t1: float, pulse: PulseSpec) -> list[tuple[float, float]]:
    """Split [t0, t1] at envelope breakpoints to keep the RHS smooth per segment."""
    cuts = [t0] + [b for b in pulse.breakpoints() if t0 < b < t1] + [t1]
    return [(a, b) for a, b in zip(cuts[:-1], cuts[1:]) if b > a]


def evolve(
    state: SuperatomState,
    t1: float,
    params: SystemParams,
    pulse: PulseSpec,
    tol: float = 1e-8,
    include_dissipators: bool = True,
) -> SuperatomState:
    """Propagate the state to time t1 with an adaptive embedded Runge-Kutta pair.

    tol is the per-step relative tolerance; the absolute tolerance is tol/100.
    Raises IntegrationError (carrying the time reached) if the integrator
    fails, e.g. on step-size underflow.
    """
    if t1 < state.t:
        raise ValueError(f"t1 = {t1} must be >= state.t = {state.t}")
    if t1 == state.t:
        return SuperatomState(rho=state.rho.copy(), t=state.t)

    l_const = liouvillian(0.0, params, include_dissipators)
    scale = np.sqrt(params.kappa) * np.sqrt(pulse.peak_rate)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        a = scale * tukey_envelope(t, pulse)
        return l_const @ y + a * (_L_DRIVE_UNIT @ y)

    y = vec(state.rho)
    t = state.t
    for a, b in _segments(state.t, t1, pulse):
        if pulse.amplitude_is_constant(a, b) and drive_amplitude(0.5 * (a + b), pulse) == 0.0:
            # no drive on this segment: constant generator, exact propagation
            y = expm(l_const * (b - a)) @ y
            t = b
            continue
        sol = solve_ivp(
            rhs, (a, b), y, method="DOP853", rtol=tol, atol=tol * 1e-2, dense_output=False
        )
        if not sol.success:
            raise IntegrationError(f"master-equation integration failed: {sol.message}", sol.t[-1])
        y = sol.y[:, -1]
        t = b
    return SuperatomState(rho=unvec(y), t=t)


def output_rate(state: SuperatomState, alpha: complex, kappa: float | None = None, params: SystemParams | None = None) -> float:
    """Outgoing photon rate I = <E+ E> with E = alpha - i sqrt(kappa) s_GW.

    I = |alpha|^2 + 2 sqrt(kappa) Im(conj(alpha) <s_GW>) + kappa <s_WW>.
    Pass either kappa directly or a SystemParams.
    """
    if kappa is None:
        if params is None:
            raise ValueError("output_rate needs kappa or params")
        kappa = params.kappa
    rho = state.rho
    coh = rho[W, G]  # <s_GW> = Tr(rho |G><W|) = rho[W, G]
    pw = np.real(rho[W, W])
    return float(abs(alpha) ** 2 + 2.0 * np.sqrt(kappa) * np.imag(np.conj(alpha) * coh) + kappa * pw)


def transmission_trace(
    params: SystemParams, pulse: PulseSpec, grid, tol: float = 1e-8
) -> np.ndarray:
    """Single forward propagation sampled on the (sorted ascending) time grid.

    Returns an array of rows (t, I_in, I_out) where I_in = |alpha(t)|^2.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size and np.any(np.diff(grid) < 0):
        raise ValueError("grid must be sorted ascending")
    state = SuperatomState.ground(t=min(float(grid[0]), pulse.t_start) if grid.size else pulse.t_start)
    out = np.empty((grid.size, 3))
    for k, t in enumerate(grid):
        state = evolve(state, float(t), params, pulse, tol=tol)
        a = drive_amplitude(float(t), pulse)
        out[k, 0] = t
        out[k, 1] = a * a
        out[k, 2] = output_rate(state, a, kappa=params.kappa)
    return out


def write_trace_csv(trace: np.ndarray, path, header_lines=()) -> None:
    """Serialize a transmission trace as CSV with 9 significant digits."""
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("time_us,input_rate,output_rate\n")
        for t, i_in, i_out in trace:
            fh.write(f"{t:.9g},{i_in:.9g},{i_out:.9g}\n")
