"""Physical parameters, the probe-pulse envelope, and rate-conversion helpers.

Units are fixed throughout the package: times in microseconds, rates in 1/us,
field amplitudes in sqrt(photons/us). Angular frequencies (Rabi frequency,
detuning, linewidth) are in rad/us.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SystemParams",
    "AtomicInputs",
    "PulseSpec",
    "tukey_envelope",
    "drive_amplitude",
    "raman_decay_rate",
    "collective_kappa",
    "mean_photon_number",
]


@dataclass(frozen=True)
class SystemParams:
    """Effective rates of the driven superatom.

    kappa   : collectively enhanced emission rate into the probe mode (1/us)
    gamma_r : spontaneous (Raman) decay rate of the excited state (1/us)
    gamma_d : dephasing rate from the bright state into the dark manifold (1/us)

    Defaults are the fitted values used for all reference computations.
    """

    kappa: float = 0.55
    gamma_r: float = 0.14
    gamma_d: float = 1.49

    def __post_init__(self) -> None:
        for name in ("kappa", "gamma_r", "gamma_d"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class AtomicInputs:
    """Microscopic quantities that determine the effective model rates.

    omega   : control Rabi frequency (rad/us)
    delta   : single-photon detuning (rad/us)
    gamma_e : intermediate-state linewidth (rad/us)
    n_atoms : atom number inside the blockaded volume
    g0      : single-atom coupling constant (1/sqrt(us))
    """

    omega: float
    delta: float
    gamma_e: float
    n_atoms: float
    g0: float

    def __post_init__(self) -> None:
        if self.n_atoms < 0:
            raise ValueError(f"n_atoms must be >= 0, got {self.n_atoms!r}")


@dataclass(frozen=True)
class PulseSpec:
    """Flat-top probe pulse with raised-cosine (Tukey) ramps.

    peak_rate : peak photon rate R on the flat top (photons/us)
    t_start   : time the pulse switches on (us)
    t_end     : time the pulse is fully off (us)
    ramp      : duration of each raised-cosine taper (us)
    """

    peak_rate: float
    t_start: float = 0.0
    t_end: float = 6.0
    ramp: float = 0.5

    def __post_init__(self) -> None:
        for name in ("peak_rate", "t_start", "t_end", "ramp"):
            if not math.isfinite(float(getattr(self, name))):
                raise ValueError(f"{name} must be finite")
        if self.peak_rate < 0:
            raise ValueError(f"peak_rate must be >= 0, got {self.peak_rate!r}")
        if not self.ramp > 0:
            raise ValueError(f"ramp must be > 0, got {self.ramp!r}")
        if self.t_end - self.t_start < 2 * self.ramp:
            raise ValueError(
                f"pulse too short: t_end - t_start = {self.t_end - self.t_start} "
                f"< 2 * ramp = {2 * self.ramp}"
            )

    @property
    def flat_start(self) -> float:
        return self.t_start + self.ramp

    @property
    def flat_end(self) -> float:
        return self.t_end - self.ramp

    def breakpoints(self) -> tuple[float, float, float, float]:
        """Times where the envelope is not smooth (integration split points)."""
        return (self.t_start, self.flat_start, self.flat_end, self.t_end)

    def amplitude_is_constant(self, t0: float, t1: float) -> bool:
        """True if the drive amplitude is constant on the whole interval [t0, t1]."""
        if t1 <= self.t_start or t0 >= self.t_end:
            return True
        return t0 >= self.flat_start and t1 <= self.flat_end


def tukey_envelope(t, pulse: PulseSpec):
    """Dimensionless pulse envelope in [0, 1].

    Zero outside [t_start, t_end], one on the flat top, raised-cosine
    0.5*(1 - cos(pi*(t - t_start)/ramp)) on the rising edge and the mirror
    image on the falling edge. Continuous everywhere. Accepts scalars or
    arrays.
    """
    t = np.asarray(t, dtype=float)
    rise = 0.5 * (1.0 - np.cos(np.pi * np.clip((t - pulse.t_start) / pulse.ramp, 0.0, 1.0)))
    fall = 0.5 * (1.0 - np.cos(np.pi * np.clip((pulse.t_end - t) / pulse.ramp, 0.0, 1.0)))
    env = np.where((t <= pulse.t_start) | (t >= pulse.t_end), 0.0, np.minimum(rise, fall))
    if env.ndim == 0:
        return float(env)
    return env


def drive_amplitude(t, pulse: PulseSpec):
    """Coherent drive amplitude alpha(t) = sqrt(peak_rate) * envelope(t).

    Real and nonnegative by the global-phase convention; |alpha(t)|^2 is the
    instantaneous input photon rate.
    """
    return math.sqrt(pulse.peak_rate) * tukey_envelope(t, pulse)


def mean_photon_number(pulse: PulseSpec) -> float:
    """Integral of |alpha(t)|^2 over the pulse.

    Each squared raised-cosine ramp integrates to (3/8)*ramp, so the total is
    peak_rate * (t_end - t_start - 2*ramp + 0.75*ramp).
    """
    flat = pulse.t_end - pulse.t_start - 2.0 * pulse.ramp
    return pulse.peak_rate * (flat + 0.75 * pulse.ramp)


def raman_decay_rate(a: AtomicInputs) -> float:
    """Effective decay rate (Omega / (2*Delta))^2 * Gamma_e of the upper state."""
    if a.delta == 0:
        raise ValueError("raman_decay_rate requires a nonzero detuning")
    return (a.omega / (2.0 * a.delta)) ** 2 * a.gamma_e


def collective_kappa(a: AtomicInputs) -> float:
    """Collectively enhanced emission rate from the coupling sqrt(N)*g0*Omega/(2*Delta).

    The coupling constant equals 2*sqrt(kappa), hence kappa = g_col^2 / 4.
    """
    if a.delta == 0:
        raise ValueError("collective_kappa requires a nonzero detuning")
    g_col = math.sqrt(a.n_atoms) * a.g0 * a.omega / (2.0 * a.delta)
    return g_col**2 / 4.0
