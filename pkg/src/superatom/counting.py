"""Correlation estimation from timestamp streams by coincidence counting.

Per-pulse coincidences only: the emitter is reset between pulses, so
cross-pulse tuples carry no signal. For each pulse with k clicks inside the
window, all C(k, 2) pairs and C(k, 3) triples accumulate into sorted-index
histograms, cost O(sum_p k_p^3). Estimates are normalized by the estimated
per-bin rates with the multiplicity convention of unordered tuples: a tuple
occupying bins (b1 <= b2 <= b3) is compared against
n_pulses * prod_i lambda_i * S with lambda_i the expected counts per bin and
S = 1, 1/2, 1/6 for distinct, one-pair and all-equal bins.

Standard errors come from batch statistics over fixed-size pulse chunks
(pulses are independent, so the chunk scatter estimates the true sampling
variance including intra-pulse correlations between tuples, which a naive
sqrt(counts) badly underestimates at occupancies of order one); the small
rate-estimate uncertainty is added in quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .jacobi import JacobiMap, TripleCellTable
from .trajectories import ClickData

__all__ = [
    "BinningSpec",
    "RateHistogram",
    "CoincidenceHistogram",
    "GEstimate",
    "rate_histogram",
    "coincidence_histogram",
    "normalized_correlation",
    "g3c_jacobi_estimate",
]

CHUNK_PULSES = 1024
_MIN_CHUNKS_FOR_BATCH_ERRORS = 8


@dataclass(frozen=True)
class BinningSpec:
    """Uniform time bins covering the half-open window [lo, hi)."""

    bin_width: float
    window: tuple[float, float]

    def __post_init__(self) -> None:
        if not self.bin_width > 0:
            raise ValueError("bin_width must be > 0")
        lo, hi = self.window
        if not hi > lo:
            raise ValueError("window must be nonempty")

    @property
    def n_bins(self) -> int:
        lo, hi = self.window
        return int(math.floor((hi - lo) / self.bin_width + 1e-9))

    @property
    def centers(self) -> np.ndarray:
        lo = self.window[0]
        return lo + (np.arange(self.n_bins) + 0.5) * self.bin_width


@njit(cache=True, nogil=True)
def _count_chunk(times, offsets, lo, inv_w, m, bins_buf, c1, c2, c3, order):
    for p in range(offsets.size - 1):
        nb = 0
        for i in range(offsets[p], offsets[p + 1]):
            x = (times[i] - lo) * inv_w
            if 0.0 <= x:
                b = int(x)
                if b < m:
                    bins_buf[nb] = b
                    nb += 1
        for i in range(nb):
            bi = bins_buf[i]
            c1[bi] += 1
            if order >= 2:
                for j in range(i + 1, nb):
                    bj = bins_buf[j]
                    c2[bi, bj] += 1
                    if order >= 3:
                        for k in range(j + 1, nb):
                            c3[bi, bj, bins_buf[k]] += 1


def _chunk_slices(n_pulses: int) -> list[tuple[int, int]]:
    return [(a, min(a + CHUNK_PULSES, n_pulses)) for a in range(0, n_pulses, CHUNK_PULSES)]


def _count_all(data: ClickData, bins: BinningSpec, order: int, per_chunk: bool):
    """Histogram totals (and optionally the per-chunk tensors) up to `order`."""
    m = bins.n_bins
    lo = bins.window[0]
    inv_w = 1.0 / bins.bin_width
    max_clicks = int(np.max(np.diff(data.offsets))) if data.n_pulses else 0
    bins_buf = np.empty(max(max_clicks, 1), dtype=np.int64)
    tot1 = np.zeros(m, dtype=np.int64)
    tot2 = np.zeros((m, m), dtype=np.int64)
    tot3 = np.zeros((m, m, m), dtype=np.int64) if order >= 3 else np.zeros((1, 1, 1), dtype=np.int64)
    chunks = []
    for a, b in _chunk_slices(data.n_pulses):
        c1 = np.zeros(m, dtype=np.int64)
        c2 = np.zeros((m, m), dtype=np.int64)
        c3 = np.zeros((m, m, m), dtype=np.int64) if order >= 3 else np.zeros((1, 1, 1), dtype=np.int64)
        off = data.offsets[a : b + 1]
        _count_chunk(data.times, off, lo, inv_w, m, bins_buf, c1, c2, c3, order)
        tot1 += c1
        tot2 += c2
        tot3 += c3
        if per_chunk:
            chunks.append((b - a, c1, c2, c3))
    return tot1, tot2, tot3, chunks


@dataclass
class RateHistogram:
    """Estimated photon rate per bin: counts / (n_pulses * bin_width)."""

    bins: BinningSpec
    counts: np.ndarray
    n_pulses: int

    @property
    def centers(self) -> np.ndarray:
        return self.bins.centers

    @property
    def rate(self) -> np.ndarray:
        return self.counts / (self.n_pulses * self.bins.bin_width)

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(self.counts) / (self.n_pulses * self.bins.bin_width)

    @property
    def lam(self) -> np.ndarray:
        """Expected counts per pulse and bin."""
        return self.counts / self.n_pulses


def rate_histogram(data: ClickData, bins: BinningSpec) -> RateHistogram:
    if data.n_pulses == 0:
        raise ValueError("empty click data")
    tot1, _, _, _ = _count_all(data, bins, order=1, per_chunk=False)
    return RateHistogram(bins=bins, counts=tot1, n_pulses=data.n_pulses)


@dataclass
class CoincidenceHistogram:
    """Sorted-index coincidence counts (entries i <= j [<= k] are populated)."""

    order: int
    bins: BinningSpec
    counts: np.ndarray
    n_pulses: int
    chunk_counts: list | None = None  # [(n_pulses, tensor), ...] for batch errors

    def symmetrized(self) -> np.ndarray:
        """Counts mirrored over all index permutations."""
        c = self.counts
        if self.order == 2:
            out = c + c.T
            out[np.diag_indices_from(out)] //= 2
            return out
        out = np.zeros_like(c)
        for perm in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
            out = np.maximum(out, np.transpose(c, perm))
        return out


def coincidence_histogram(
    data: ClickData, bins: BinningSpec, order: int, keep_chunks: bool = False
) -> CoincidenceHistogram:
    if order not in (2, 3):
        raise ValueError("order must be 2 or 3")
    tot1, tot2, tot3, chunks = _count_all(data, bins, order, per_chunk=keep_chunks)
    counts = tot3 if order == 3 else tot2
    chunk_counts = None
    if keep_chunks:
        chunk_counts = [(n, (c3 if order == 3 else c2)) for n, c1, c2, c3 in chunks]
    return CoincidenceHistogram(
        order=order, bins=bins, counts=counts, n_pulses=data.n_pulses, chunk_counts=chunk_counts
    )


def _multiplicity_factor(order: int, m: int) -> np.ndarray:
    """S factor per sorted tuple: 1 distinct, 1/2 one pair, 1/6 all equal."""
    if order == 2:
        s = np.ones((m, m))
        s[np.diag_indices(m)] = 0.5
        return s
    i, j, k = np.meshgrid(np.arange(m), np.arange(m), np.arange(m), indexing="ij")
    s = np.ones((m, m, m))
    s[(i == j) | (j == k) | (i == k)] = 0.5
    s[(i == j) & (j == k)] = 1.0 / 6.0
    return s


@dataclass
class GEstimate:
    """Normalized correlation estimate on the sorted-index lattice."""

    order: int
    bins: BinningSpec
    values: np.ndarray
    stderr: np.ndarray
    counts: np.ndarray
    n_pulses: int


def _batch_counts_sigma(chunk_counts, total, n_pulses) -> np.ndarray | None:
    """Std of total counts from chunk scatter: Var(total) = N * Var_pulse(T)."""
    if chunk_counts is None or len(chunk_counts) < _MIN_CHUNKS_FOR_BATCH_ERRORS:
        return None
    mean_per_pulse = total / n_pulses
    acc = np.zeros_like(total, dtype=np.float64)
    for n_ch, tensor in chunk_counts:
        resid = tensor - n_ch * mean_per_pulse
        acc += resid * resid / n_ch
    var_pulse = acc / (len(chunk_counts) - 1)
    return np.sqrt(n_pulses * var_pulse)


def normalized_correlation(hist: CoincidenceHistogram, rate_hist: RateHistogram) -> GEstimate:
    """g estimate per sorted bin tuple with standard errors.

    Errors use chunked batch statistics when enough chunks exist (falling
    back to Poisson counting errors otherwise) and include the rate-estimate
    uncertainty in quadrature.
    """
    if hist.bins != rate_hist.bins:
        raise ValueError("histogram and rate histogram bins differ")
    m = hist.bins.n_bins
    lam = rate_hist.lam
    s = _multiplicity_factor(hist.order, m)
    if hist.order == 2:
        lam_prod = np.multiply.outer(lam, lam)
        rel_lam_var = np.add.outer(1.0 / np.maximum(rate_hist.counts, 1), 1.0 / np.maximum(rate_hist.counts, 1))
    else:
        lam_prod = np.multiply.outer(np.multiply.outer(lam, lam), lam)
        inv = 1.0 / np.maximum(rate_hist.counts, 1)
        rel_lam_var = (
            np.add.outer(np.add.outer(inv, inv), inv)
        )
    denom = hist.n_pulses * lam_prod * s
    counts = hist.counts
    bad = (denom == 0) & (counts > 0)
    if np.any(bad):
        raise ValueError(
            f"{int(np.count_nonzero(bad))} bins have coincidences but zero estimated rate"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(denom > 0, counts / np.where(denom > 0, denom, 1.0), 0.0)
    sigma_counts = _batch_counts_sigma(hist.chunk_counts, counts.astype(np.float64), hist.n_pulses)
    if sigma_counts is None:
        sigma_counts = np.sqrt(np.maximum(counts, 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        stderr = np.where(denom > 0, sigma_counts / np.where(denom > 0, denom, 1.0), np.inf)
    stderr = np.sqrt(stderr**2 + values**2 * rel_lam_var)
    return GEstimate(
        order=hist.order, bins=hist.bins, values=values, stderr=stderr,
        counts=counts, n_pulses=hist.n_pulses,
    )


def g3c_jacobi_estimate(
    data: ClickData,
    bins: BinningSpec,
    r_range: tuple[float, float] = (2.5, 3.5),
    cell_width: float | None = None,
) -> JacobiMap:
    """g3 and connected-g3 map in (eta, zeta), R-averaged, with standard errors.

    Projects through the same lattice table as the theoretical maps: every
    sorted bin triple whose center of mass falls in the R window contributes
    its distinct permutations to (eta, zeta) cells; cell values are
    equal-weight means over those members. Errors come from chunk batch
    statistics of the full linear combination (g3 and pair terms together,
    so their covariance is included) plus the rate uncertainty.
    """
    if data.n_pulses == 0:
        raise ValueError("empty click data")
    cw = bins.bin_width if cell_width is None else cell_width
    table = TripleCellTable(bins.centers, r_range, cw)
    tot1, tot2, tot3, chunks = _count_all(data, bins, order=3, per_chunk=True)
    n = data.n_pulses
    lam = tot1 / n
    w = bins.bin_width
    s3 = _multiplicity_factor(3, bins.n_bins)
    s2 = _multiplicity_factor(2, bins.n_bins)

    tri = table.triples
    i, j, k = tri[:, 0], tri[:, 1], tri[:, 2]
    lam_i, lam_j, lam_k = lam[i], lam[j], lam[k]
    valid = (lam_i > 0) & (lam_j > 0) & (lam_k > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        w3 = np.where(valid, 1.0 / (lam_i * lam_j * lam_k * s3[i, j, k]), 0.0)
        w2_ij = np.where(valid, 1.0 / (lam_i * lam_j * s2[i, j]), 0.0)
        w2_ik = np.where(valid, 1.0 / (lam_i * lam_k * s2[i, k]), 0.0)
        w2_jk = np.where(valid, 1.0 / (lam_j * lam_k * s2[j, k]), 0.0)

    def combine(c2: np.ndarray, c3: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-member numerators of g3 and of (g3 - sum g2) for one chunk."""
        num3 = c3[i, j, k] * w3
        pair_sum = c2[i, j] * w2_ij + c2[i, k] * w2_ik + c2[j, k] * w2_jk
        return num3, num3 - pair_sum

    num3_tot, numc_tot = combine(tot2.astype(np.float64), tot3.astype(np.float64))
    mean3, member_counts = table.project_values(np.where(valid, num3_tot / n, np.nan))
    meanc, _ = table.project_values(np.where(valid, numc_tot / n, np.nan))

    # chunk batch statistics of the projected numerators
    per_chunk3 = []
    per_chunkc = []
    for n_ch, c1, c2, c3 in chunks:
        a3, ac = combine(c2.astype(np.float64), c3.astype(np.float64))
        p3, _ = table.project_values(np.where(valid, a3, np.nan))
        pc, _ = table.project_values(np.where(valid, ac, np.nan))
        per_chunk3.append((n_ch, p3))
        per_chunkc.append((n_ch, pc))

    def batch_sigma(per_chunk, mean_per_pulse):
        if len(per_chunk) < _MIN_CHUNKS_FOR_BATCH_ERRORS:
            return np.full_like(mean_per_pulse, np.nan)
        acc = np.zeros_like(mean_per_pulse)
        for n_ch, vals in per_chunk:
            resid = vals - n_ch * mean_per_pulse
            acc += np.where(np.isfinite(resid), resid * resid, 0.0) / n_ch
        var_pulse = acc / (len(per_chunk) - 1)
        return np.sqrt(var_pulse / n)

    sig3 = batch_sigma(per_chunk3, mean3)
    sigc = batch_sigma(per_chunkc, meanc)

    # rate-uncertainty contribution (small): relative 1/counts per involved bin
    inv_counts = 1.0 / np.maximum(tot1, 1)
    rel2 = inv_counts[i] + inv_counts[j] + inv_counts[k]
    lam_err3, _ = table.project_values(np.where(valid, (num3_tot / n) ** 2 * rel2, np.nan))
    sig3 = np.sqrt(np.where(np.isfinite(sig3), sig3**2, 0.0) + np.abs(lam_err3))
    sigc = np.sqrt(np.where(np.isfinite(sigc), sigc**2, 0.0) + np.abs(lam_err3))

    # raw coincidence statistics per cell for the populated flag
    raw, _ = table.project_values(tot3[i, j, k].astype(np.float64))
    raw_sum = raw * np.where(member_counts > 0, member_counts, 1)

    shape = table.shape
    g3c_map = 2.0 + meanc
    return JacobiMap(
        eta_centers=table.eta_centers,
        zeta_centers=table.zeta_centers,
        g3=mean3.reshape(shape),
        g3c=g3c_map.reshape(shape),
        n_samples=np.nan_to_num(raw_sum, nan=0.0).astype(np.int64).reshape(shape),
        r_range=table.r_range,
        cell_width=cw,
        g3_stderr=sig3.reshape(shape),
        g3c_stderr=sigc.reshape(shape),
    )
