"""Quantum-jump Monte Carlo unraveling with a displaced detection channel.

Each probe pulse is one stochastic trajectory of the pure state
psi = (g, w, d). The detected jump operator is the physical output field
c0(t) = alpha(t) - i sqrt(kappa) s_GW, i.e. the interference of transmitted
drive and scattered light; loss Gamma, dephasing gamma_d and dark decay
Gamma jump without producing clicks. Displacing the collective-emission
operator by the c-number alpha requires the compensation Hamiltonian
-(i/2)(conj(b) L - b L+), which combines with the drive to the one-sided
coupling sqrt(kappa) alpha s_WG; the ensemble average then reproduces the
master equation exactly (D[L + b] rho = D[L] rho + [(conj(b) L - b L+)/2, rho]).

Between jumps the unnormalized state follows dpsi/dt = -i H_eff psi with

    H_eff = sqrt(kappa) alpha s_WG
            - (i/2) diag(alpha^2, alpha^2 + kappa + Gamma + gamma_d, alpha^2 + Gamma)

integrated with fixed RK4 substeps <= dt_max; jump times are located by
bisecting the squared-norm decay against a uniform draw.

Randomness is counter-based and splittable: pulse number p of a run with
seed S consumes the Philox stream keyed (S, p), so results are byte-identical
for any pulse ordering, chunking or thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .params import PulseSpec, SystemParams, mean_photon_number

__all__ = [
    "ClickRecord",
    "ClickData",
    "TrajectoryConfig",
    "TrajectoryError",
    "simulate_pulse",
    "simulate_ensemble",
    "ensemble_density_checkpoints",
    "EnsembleCheckpoints",
    "write_clicks_csv",
    "read_clicks_csv",
    "write_clicks_binary",
    "read_clicks_binary",
    "CLICK_DTYPE",
]

CHUNK_PULSES = 1024

CLICK_DTYPE = np.dtype([("pulse_id", "<u4"), ("time_us", "<f8"), ("channel", "u1")])

_STATUS_OK = 0
_STATUS_RNG_EXHAUSTED = 1
_STATUS_CLICK_OVERFLOW = 2
_STATUS_NONFINITE = 3


class TrajectoryError(RuntimeError):
    """Trajectory generation failed (non-finite state or resource exhaustion)."""


@dataclass(frozen=True)
class TrajectoryConfig:
    """Ensemble controls for the Monte Carlo unraveling."""

    n_pulses: int
    seed: int
    dt_max: float = 0.005
    detectors: int = 1
    dead_time: float = 0.0

    def __post_init__(self) -> None:
        if self.n_pulses < 1:
            raise ValueError("n_pulses must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 bits")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be > 0")
        if not 1 <= self.detectors <= 64:
            raise ValueError("detectors must be in 1..64")
        if self.dead_time < 0:
            raise ValueError("dead_time must be >= 0")


@dataclass
class ClickRecord:
    """Detection timestamps of one pulse; channels align with clicks."""

    pulse_id: int
    clicks: np.ndarray
    channels: np.ndarray


@dataclass
class ClickData:
    """Columnar click streams for many pulses (pulse p owns slice offsets[p]:offsets[p+1])."""

    offsets: np.ndarray
    times: np.ndarray
    channels: np.ndarray
    jump_counts: np.ndarray = field(default_factory=lambda: np.zeros(4, dtype=np.int64))

    @property
    def n_pulses(self) -> int:
        return self.offsets.size - 1

    @property
    def n_clicks(self) -> int:
        return self.times.size

    def record(self, pulse_id: int) -> ClickRecord:
        a, b = self.offsets[pulse_id], self.offsets[pulse_id + 1]
        return ClickRecord(pulse_id, self.times[a:b].copy(), self.channels[a:b].copy())

    def __iter__(self):
        for p in range(self.n_pulses):
            yield self.record(p)


@njit(cache=True, nogil=True, inline="always")
def _alpha(t, t_start, t_end, ramp, amp):
    if t <= t_start or t >= t_end:
        return 0.0
    if t < t_start + ramp:
        return amp * 0.5 * (1.0 - math.cos(math.pi * (t - t_start) / ramp))
    if t > t_end - ramp:
        return amp * 0.5 * (1.0 - math.cos(math.pi * (t_end - t) / ramp))
    return amp


@njit(cache=True, nogil=True, inline="always")
def _rk4(g, w, d, t, h, t_start, t_end, ramp, amp, rk, ktot, gam):
    a = _alpha(t, t_start, t_end, ramp, amp)
    k1g = -0.5 * a * a * g
    k1w = -1j * rk * a * g - 0.5 * (a * a + ktot) * w
    k1d = -0.5 * (a * a + gam) * d
    a = _alpha(t + 0.5 * h, t_start, t_end, ramp, amp)
    g2 = g + 0.5 * h * k1g
    w2 = w + 0.5 * h * k1w
    d2 = d + 0.5 * h * k1d
    k2g = -0.5 * a * a * g2
    k2w = -1j * rk * a * g2 - 0.5 * (a * a + ktot) * w2
    k2d = -0.5 * (a * a + gam) * d2
    g3 = g + 0.5 * h * k2g
    w3 = w + 0.5 * h * k2w
    d3 = d + 0.5 * h * k2d
    k3g = -0.5 * a * a * g3
    k3w = -1j * rk * a * g3 - 0.5 * (a * a + ktot) * w3
    k3d = -0.5 * (a * a + gam) * d3
    a = _alpha(t + h, t_start, t_end, ramp, amp)
    g4 = g + h * k3g
    w4 = w + h * k3w
    d4 = d + h * k3d
    k4g = -0.5 * a * a * g4
    k4w = -1j * rk * a * g4 - 0.5 * (a * a + ktot) * w4
    k4d = -0.5 * (a * a + gam) * d4
    s = h / 6.0
    return (
        g + s * (k1g + 2.0 * k2g + 2.0 * k3g + k4g),
        w + s * (k1w + 2.0 * k2w + 2.0 * k3w + k4w),
        d + s * (k1d + 2.0 * k2d + 2.0 * k3d + k4d),
    )


@njit(cache=True, nogil=True)
def _simulate_chunk(
    uniforms,            # (npulse, nbuf) float64
    t_start, t_end, ramp, amp,
    kappa, gamma_r, gamma_d,
    dt_max, detectors, dead_time,
    events,              # sorted times in (t_start, t_end], last == t_end
    event_cp,            # checkpoint index per event, -1 if none
    click_t,             # (npulse, cap) float64 out
    click_c,             # (npulse, cap) uint8 out
    click_n,             # (npulse,) int64 out
    cp_sum,              # (ncp, 3, 3) complex128 accumulators
    cp_sumsq_re,         # (ncp, 3, 3) float64
    cp_sumsq_im,         # (ncp, 3, 3) float64
    jump_counts,         # (4,) int64
    status,              # (npulse,) uint8 out
    used,                # (npulse,) int64 out
):
    npulse = uniforms.shape[0]
    nbuf = uniforms.shape[1]
    cap = click_t.shape[1]
    ncp = cp_sum.shape[0]
    rk = math.sqrt(kappa)
    ktot = kappa + gamma_r + gamma_d
    last_click = np.empty(64, dtype=np.float64)
    psi = np.empty(3, dtype=np.complex128)
    cp_local = np.empty((ncp, 3, 3), dtype=np.complex128)
    jumps_local = np.empty(4, dtype=np.int64)

    for p in range(npulse):
        g = 1.0 + 0.0j
        w = 0.0 + 0.0j
        d = 0.0 + 0.0j
        iu = 0
        nclick = 0
        st = _STATUS_OK
        for c in range(detectors):
            last_click[c] = -1.0e300
        for c in range(4):
            jumps_local[c] = 0

        if iu >= nbuf:
            status[p] = _STATUS_RNG_EXHAUSTED
            continue
        r = 1.0 - uniforms[p, iu]
        iu += 1

        t = t_start
        ev = 0
        while ev < events.size and st == _STATUS_OK:
            seg_end = events[ev]
            nsub = int(math.ceil((seg_end - t) / dt_max))
            if nsub < 1:
                nsub = 1
            h = (seg_end - t) / nsub
            for sub in range(nsub):
                target = seg_end if sub == nsub - 1 else t + h
                # integrate to the substep target, handling any jumps inside
                while True:
                    hh = target - t
                    if hh <= 1e-15:
                        break
                    g1, w1, d1 = _rk4(g, w, d, t, hh, t_start, t_end, ramp, amp, rk, ktot, gamma_r)
                    n2 = abs(g1) ** 2 + abs(w1) ** 2 + abs(d1) ** 2
                    if not math.isfinite(n2):
                        st = _STATUS_NONFINITE
                        break
                    if n2 > r:
                        g, w, d = g1, w1, d1
                        t = target
                        break
                    # norm crossed the threshold: bisect the jump time in (t, target]
                    flo = 0.0
                    fhi = 1.0
                    for _b in range(52):
                        fm = 0.5 * (flo + fhi)
                        gm, wm, dm = _rk4(g, w, d, t, fm * hh, t_start, t_end, ramp, amp, rk, ktot, gamma_r)
                        nm = abs(gm) ** 2 + abs(wm) ** 2 + abs(dm) ** 2
                        if nm > r:
                            flo = fm
                        else:
                            fhi = fm
                    tj = t + fhi * hh
                    gj, wj, dj = _rk4(g, w, d, t, fhi * hh, t_start, t_end, ramp, amp, rk, ktot, gamma_r)
                    a = _alpha(tj, t_start, t_end, ramp, amp)
                    c0g = a * gj - 1j * rk * wj
                    p0 = abs(c0g) ** 2 + a * a * (abs(wj) ** 2 + abs(dj) ** 2)
                    p1 = gamma_r * abs(wj) ** 2
                    p2 = gamma_d * abs(wj) ** 2
                    p3 = gamma_r * abs(dj) ** 2
                    ptot = p0 + p1 + p2 + p3
                    if ptot <= 0.0 or not math.isfinite(ptot):
                        st = _STATUS_NONFINITE
                        break
                    if iu >= nbuf:
                        st = _STATUS_RNG_EXHAUSTED
                        break
                    u = uniforms[p, iu] * ptot
                    iu += 1
                    if u < p0:
                        channel = 0
                    elif u < p0 + p1:
                        channel = 1
                    elif u < p0 + p1 + p2:
                        channel = 2
                    else:
                        channel = 3
                    jumps_local[channel] += 1
                    if channel == 0:
                        det = 0
                        if detectors > 1:
                            if iu >= nbuf:
                                st = _STATUS_RNG_EXHAUSTED
                                break
                            det = int(uniforms[p, iu] * detectors)
                            if det >= detectors:
                                det = detectors - 1
                            iu += 1
                        if tj - last_click[det] >= dead_time or dead_time == 0.0:
                            if nclick >= cap:
                                st = _STATUS_CLICK_OVERFLOW
                                break
                            click_t[p, nclick] = tj
                            click_c[p, nclick] = det
                            nclick += 1
                            last_click[det] = tj
                        nrm = math.sqrt(p0)
                        g = (a * gj - 1j * rk * wj) / nrm
                        w = a * wj / nrm
                        d = a * dj / nrm
                    elif channel == 1:
                        g = 1.0 + 0.0j
                        w = 0.0 + 0.0j
                        d = 0.0 + 0.0j
                    elif channel == 2:
                        g = 0.0 + 0.0j
                        w = 0.0 + 0.0j
                        d = 1.0 + 0.0j
                    else:
                        g = 1.0 + 0.0j
                        w = 0.0 + 0.0j
                        d = 0.0 + 0.0j
                    t = tj
                    if iu >= nbuf:
                        st = _STATUS_RNG_EXHAUSTED
                        break
                    r = 1.0 - uniforms[p, iu]
                    iu += 1
                if st != _STATUS_OK:
                    break
            if st != _STATUS_OK:
                break
            cp = event_cp[ev]
            if cp >= 0:
                n2 = abs(g) ** 2 + abs(w) ** 2 + abs(d) ** 2
                psi[0] = g
                psi[1] = w
                psi[2] = d
                for a_i in range(3):
                    for b_i in range(3):
                        cp_local[cp, a_i, b_i] = psi[a_i] * np.conj(psi[b_i]) / n2
            ev += 1

        click_n[p] = nclick
        status[p] = st
        used[p] = iu
        if st == _STATUS_OK:
            # fold per-pulse results only on success so a buffer retry cannot
            # double-count this pulse
            for c in range(4):
                jump_counts[c] += jumps_local[c]
            for cp in range(ncp):
                for a_i in range(3):
                    for b_i in range(3):
                        val = cp_local[cp, a_i, b_i]
                        cp_sum[cp, a_i, b_i] += val
                        cp_sumsq_re[cp, a_i, b_i] += val.real * val.real
                        cp_sumsq_im[cp, a_i, b_i] += val.imag * val.imag


def _pulse_uniform_rows(seed: int, pulse_ids: np.ndarray, nbuf: int) -> np.ndarray:
    rows = np.empty((pulse_ids.size, nbuf), dtype=np.float64)
    for i, pid in enumerate(pulse_ids):
        key = np.array([seed, pid], dtype=np.uint64)
        rows[i] = np.random.Generator(np.random.Philox(key=key)).random(nbuf)
    return rows


def _events_for(pulse: PulseSpec, checkpoint_times: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    marks = {pulse.flat_start: -1, pulse.flat_end: -1, pulse.t_end: -1}
    if checkpoint_times is not None:
        for i, ct in enumerate(checkpoint_times):
            if not (pulse.t_start < ct <= pulse.t_end):
                raise ValueError("checkpoint times must lie in (t_start, t_end]")
            marks[float(ct)] = i
    times = np.array(sorted(marks), dtype=np.float64)
    cps = np.array([marks[t] for t in times], dtype=np.int64)
    return times, cps


def _buffer_sizes(params: SystemParams, pulse: PulseSpec) -> tuple[int, int]:
    duration = pulse.t_end - pulse.t_start
    est = mean_photon_number(pulse) + (params.kappa + params.gamma_r + params.gamma_d) * duration
    nbuf = 64 + int(8.0 * est)
    cap = 64 + int(4.0 * est)
    return nbuf, cap


def _run_chunk(
    params: SystemParams,
    pulse: PulseSpec,
    cfg: TrajectoryConfig,
    pulse_ids: np.ndarray,
    events: np.ndarray,
    event_cp: np.ndarray,
    ncp: int,
    nbuf: int,
    cap: int,
):
    """Simulate one chunk; deterministically retries pulses that exhaust buffers."""
    amp = math.sqrt(pulse.peak_rate)
    cp_sum = np.zeros((ncp, 3, 3), dtype=np.complex128)
    cp_sq_re = np.zeros((ncp, 3, 3), dtype=np.float64)
    cp_sq_im = np.zeros((ncp, 3, 3), dtype=np.float64)
    jumps = np.zeros(4, dtype=np.int64)

    def attempt(ids: np.ndarray, nb: int, cp: int):
        uniforms = _pulse_uniform_rows(cfg.seed, ids, nb)
        ct = np.zeros((ids.size, cp), dtype=np.float64)
        cc = np.zeros((ids.size, cp), dtype=np.uint8)
        cn = np.zeros(ids.size, dtype=np.int64)
        st = np.zeros(ids.size, dtype=np.uint8)
        us = np.zeros(ids.size, dtype=np.int64)
        _simulate_chunk(
            uniforms, pulse.t_start, pulse.t_end, pulse.ramp, amp,
            params.kappa, params.gamma_r, params.gamma_d,
            cfg.dt_max, cfg.detectors, cfg.dead_time,
            events, event_cp, ct, cc, cn, cp_sum, cp_sq_re, cp_sq_im, jumps, st, us,
        )
        return ct, cc, cn, st

    ct, cc, cn, st = attempt(pulse_ids, nbuf, cap)
    bad = np.nonzero(st != _STATUS_OK)[0]
    for idx in bad:
        if st[idx] == _STATUS_NONFINITE:
            raise TrajectoryError(
                f"non-finite state norm in pulse {int(pulse_ids[idx])} "
                f"(params={params}, dt_max={cfg.dt_max})"
            )
        nb, cp = nbuf, cap
        for _ in range(16):
            nb *= 2
            cp *= 2
            # a retried pulse re-reads the same leading stream, so the part of the
            # trajectory already generated is reproduced exactly
            rct, rcc, rcn, rst = attempt(pulse_ids[idx : idx + 1], nb, cp)
            if rst[0] == _STATUS_OK:
                ct = ct if cp <= ct.shape[1] else np.pad(ct, ((0, 0), (0, cp - ct.shape[1])))
                cc = cc if cp <= cc.shape[1] else np.pad(cc, ((0, 0), (0, cp - cc.shape[1])))
                ct[idx, : rcn[0]] = rct[0, : rcn[0]]
                cc[idx, : rcn[0]] = rcc[0, : rcn[0]]
                cn[idx] = rcn[0]
                break
            if rst[0] == _STATUS_NONFINITE:
                raise TrajectoryError(f"non-finite state norm in pulse {int(pulse_ids[idx])}")
        else:
            raise TrajectoryError(f"buffers exhausted for pulse {int(pulse_ids[idx])}")

    total = int(cn.sum())
    times = np.empty(total, dtype=np.float64)
    chans = np.empty(total, dtype=np.uint8)
    offsets = np.zeros(pulse_ids.size + 1, dtype=np.int64)
    pos = 0
    for i in range(pulse_ids.size):
        k = int(cn[i])
        times[pos : pos + k] = ct[i, :k]
        chans[pos : pos + k] = cc[i, :k]
        pos += k
        offsets[i + 1] = pos
    return offsets, times, chans, cp_sum, cp_sq_re, cp_sq_im, jumps


def simulate_ensemble(
    params: SystemParams,
    pulse: PulseSpec,
    config: TrajectoryConfig,
    threads: int = 1,
) -> ClickData:
    """Independent trajectories for pulses 0..n_pulses-1, each reset to the ground state.

    Results are byte-identical for any thread count: pulse p consumes the
    counter-based stream keyed (seed, p) and chunks are concatenated in pulse
    order.
    """
    events, event_cp = _events_for(pulse, None)
    nbuf, cap = _buffer_sizes(params, pulse)
    chunks = [
        np.arange(a, min(a + CHUNK_PULSES, config.n_pulses), dtype=np.uint64)
        for a in range(0, config.n_pulses, CHUNK_PULSES)
    ]

    def work(ids):
        return _run_chunk(params, pulse, config, ids, events, event_cp, 0, nbuf, cap)

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(ids) for ids in chunks]

    total_clicks = sum(r[1].size for r in results)
    offsets = np.zeros(config.n_pulses + 1, dtype=np.int64)
    times = np.empty(total_clicks, dtype=np.float64)
    chans = np.empty(total_clicks, dtype=np.uint8)
    jump_counts = np.zeros(4, dtype=np.int64)
    pos = 0
    p0 = 0
    for ids, r in zip(chunks, results):
        off, t, c = r[0], r[1], r[2]
        times[pos : pos + t.size] = t
        chans[pos : pos + c.size] = c
        offsets[p0 + 1 : p0 + ids.size + 1] = pos + off[1:]
        pos += t.size
        p0 += ids.size
        jump_counts += r[6]
    return ClickData(offsets=offsets, times=times, channels=chans, jump_counts=jump_counts)


def simulate_pulse(
    params: SystemParams,
    pulse: PulseSpec,
    rng_key: tuple[int, int],
    dt_max: float = 0.005,
    detectors: int = 1,
    dead_time: float = 0.0,
) -> ClickRecord:
    """One trajectory; rng_key = (seed, pulse_id) selects its random stream."""
    seed, pulse_id = rng_key
    cfg = TrajectoryConfig(n_pulses=1, seed=seed, dt_max=dt_max, detectors=detectors, dead_time=dead_time)
    events, event_cp = _events_for(pulse, None)
    nbuf, cap = _buffer_sizes(params, pulse)
    ids = np.array([pulse_id], dtype=np.uint64)
    off, times, chans, *_ = _run_chunk(params, pulse, cfg, ids, events, event_cp, 0, nbuf, cap)
    return ClickRecord(pulse_id=int(pulse_id), clicks=times, channels=chans)


@dataclass
class EnsembleCheckpoints:
    """Trajectory-ensemble density matrices at checkpoint times."""

    times: np.ndarray
    mean: np.ndarray        # (ncp, 3, 3) complex
    sem_re: np.ndarray      # standard error of the real parts
    sem_im: np.ndarray
    n_trajectories: int


def ensemble_density_checkpoints(
    params: SystemParams,
    pulse: PulseSpec,
    config: TrajectoryConfig,
    checkpoint_times,
    threads: int = 1,
) -> EnsembleCheckpoints:
    """Ensemble average of |psi><psi| (normalized) at the requested times."""
    cp_times = np.asarray(checkpoint_times, dtype=np.float64)
    events, event_cp = _events_for(pulse, cp_times)
    nbuf, cap = _buffer_sizes(params, pulse)
    ncp = cp_times.size
    chunks = [
        np.arange(a, min(a + CHUNK_PULSES, config.n_pulses), dtype=np.uint64)
        for a in range(0, config.n_pulses, CHUNK_PULSES)
    ]

    def work(ids):
        return _run_chunk(params, pulse, config, ids, events, event_cp, ncp, nbuf, cap)

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(ids) for ids in chunks]

    n = config.n_pulses
    cp_sum = np.zeros((ncp, 3, 3), dtype=np.complex128)
    sq_re = np.zeros((ncp, 3, 3))
    sq_im = np.zeros((ncp, 3, 3))
    for r in results:
        cp_sum += r[3]
        sq_re += r[4]
        sq_im += r[5]
    mean = cp_sum / n
    var_re = np.maximum(sq_re / n - mean.real**2, 0.0)
    var_im = np.maximum(sq_im / n - mean.imag**2, 0.0)
    denom = max(n - 1, 1)
    sem_re = np.sqrt(var_re * n / denom / n)
    sem_im = np.sqrt(var_im * n / denom / n)
    return EnsembleCheckpoints(cp_times, mean, sem_re, sem_im, n)


def write_clicks_csv(data: ClickData, path, header_lines=()) -> None:
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"# n_pulses = {data.n_pulses}\n")
        fh.write("pulse_id,time_us,channel\n")
        for p in range(data.n_pulses):
            a, b = data.offsets[p], data.offsets[p + 1]
            for i in range(a, b):
                fh.write(f"{p},{data.times[i]:.9g},{int(data.channels[i])}\n")


def read_clicks_csv(path) -> ClickData:
    pulse_ids = []
    times = []
    chans = []
    n_pulses = 0
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("n_pulses"):
                    n_pulses = int(body.split("=", 1)[1])
                continue
            if line.startswith("pulse_id"):
                continue
            p, t, c = line.split(",")
            pulse_ids.append(int(p))
            times.append(float(t))
            chans.append(int(c))
    pulse_arr = np.array(pulse_ids, dtype=np.int64)
    n_pulses = max(n_pulses, int(pulse_arr.max()) + 1 if pulse_arr.size else 0)
    return _from_rows(pulse_arr, np.array(times), np.array(chans, dtype=np.uint8), n_pulses)


def _from_rows(pulse_arr, times, chans, n_pulses) -> ClickData:
    offsets = np.zeros(n_pulses + 1, dtype=np.int64)
    counts = np.bincount(pulse_arr, minlength=n_pulses) if pulse_arr.size else np.zeros(n_pulses, dtype=np.int64)
    offsets[1:] = np.cumsum(counts)
    order = np.argsort(pulse_arr, kind="stable")
    return ClickData(offsets=offsets, times=times[order], channels=chans[order])


def write_clicks_binary(data: ClickData, path) -> None:
    """Compact little-endian records: u32 pulse_id, f64 time_us, u8 channel."""
    rec = np.empty(data.n_clicks, dtype=CLICK_DTYPE)
    pulse_col = np.repeat(
        np.arange(data.n_pulses, dtype=np.uint32), np.diff(data.offsets).astype(np.int64)
    )
    rec["pulse_id"] = pulse_col
    rec["time_us"] = data.times
    rec["channel"] = data.channels
    rec.tofile(path)


def read_clicks_binary(path, n_pulses: int | None = None) -> ClickData:
    rec = np.fromfile(path, dtype=CLICK_DTYPE)
    pulses = rec["pulse_id"].astype(np.int64)
    if n_pulses is None:
        n_pulses = int(pulses.max()) + 1 if pulses.size else 0
    return _from_rows(pulses, rec["time_us"].astype(np.float64), rec["channel"], n_pulses)
