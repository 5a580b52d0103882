"""Jacobi-coordinate analysis of three-time correlation data.

The linear transform

    R    = (s1 + s2 + s3) / sqrt(3)
    eta  = (s1 - s2) / sqrt(2)
    zeta = sqrt(2/3) * ((s1 + s2)/2 - s3)

separates the center-of-mass time R from two relative coordinates. Maps are
built by averaging correlator values over all time triples whose R falls in
a window, binned by (eta, zeta). Cells never touched by data are flagged
absent (NaN), not zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "to_jacobi",
    "from_jacobi",
    "connected_g3",
    "JacobiMap",
    "TripleCellTable",
    "average_over_R",
    "write_map_csv",
    "read_map_csv",
    "write_pgm",
]

_S3 = math.sqrt(3.0)
_S2 = math.sqrt(2.0)
_S23 = math.sqrt(2.0 / 3.0)
_S6 = math.sqrt(6.0)

# all distinct orderings of three items, as index patterns into a sorted triple
_PERMS = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))


def to_jacobi(s1, s2, s3):
    """(R, eta, zeta) of a time triple; accepts scalars or arrays."""
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    s3 = np.asarray(s3, dtype=float)
    r = (s1 + s2 + s3) / _S3
    eta = (s1 - s2) / _S2
    zeta = _S23 * (0.5 * (s1 + s2) - s3)
    if r.ndim == 0:
        return float(r), float(eta), float(zeta)
    return r, eta, zeta


def from_jacobi(r, eta, zeta):
    """Inverse map (the transform is orthogonal, so the inverse is its transpose)."""
    r = np.asarray(r, dtype=float)
    eta = np.asarray(eta, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    s1 = r / _S3 + eta / _S2 + zeta / _S6
    s2 = r / _S3 - eta / _S2 + zeta / _S6
    s3 = r / _S3 - 2.0 * zeta / _S6
    if s1.ndim == 0:
        return float(s1), float(s2), float(s3)
    return s1, s2, s3


def connected_g3(g3, g2_pairs):
    """Connected part 2 + g3 - (g2_12 + g2_13 + g2_23).

    Zero for uncorrelated (Gaussian) light and whenever one photon is far
    from the other two.
    """
    a, b, c = g2_pairs
    return 2.0 + np.asarray(g3) - (np.asarray(a) + np.asarray(b) + np.asarray(c))


@dataclass
class JacobiMap:
    """Binned (eta, zeta) map of g3 and its connected part.

    Cell centers sit on integer multiples of cell_width; absent cells hold
    NaN. r_range is expressed in units of sqrt(3) us, i.e. the actual window
    is R in [sqrt(3)*r_lo, sqrt(3)*r_hi].
    """

    eta_centers: np.ndarray
    zeta_centers: np.ndarray
    g3: np.ndarray
    g3c: np.ndarray
    n_samples: np.ndarray
    r_range: tuple[float, float]
    cell_width: float
    g3_stderr: np.ndarray | None = None
    g3c_stderr: np.ndarray | None = None

    def populated(self) -> np.ndarray:
        return self.n_samples > 0

    def cell_index(self, eta: float, zeta: float) -> tuple[int, int]:
        ie = int(round(eta / self.cell_width)) - int(round(self.eta_centers[0] / self.cell_width))
        iz = int(round(zeta / self.cell_width)) - int(round(self.zeta_centers[0] / self.cell_width))
        if not (0 <= ie < self.eta_centers.size and 0 <= iz < self.zeta_centers.size):
            raise KeyError(f"cell ({eta}, {zeta}) outside map")
        return ie, iz

    def value_at(self, eta: float, zeta: float, connected: bool = False) -> float:
        ie, iz = self.cell_index(eta, zeta)
        return float(self.g3c[ie, iz] if connected else self.g3[ie, iz])


class TripleCellTable:
    """Projection of a sorted-time lattice onto (eta, zeta) cells.

    For bin-center times c_0 < ... < c_{M-1}, enumerates every sorted index
    triple (i <= j <= k) whose center-of-mass time lies inside the R window
    and records, for each distinct permutation of the triple, the flat index
    of the (eta, zeta) cell it lands in. Both the theoretical maps and the
    coincidence estimator project through the same table, so their cell
    membership is identical by construction.
    """

    def __init__(self, centers, r_range: tuple[float, float], cell_width: float):
        centers = np.asarray(centers, dtype=float)
        if centers.ndim != 1 or centers.size == 0:
            raise ValueError("centers must be a nonempty 1-D array")
        self.centers = centers
        self.r_range = (float(r_range[0]), float(r_range[1]))
        self.cell_width = float(cell_width)
        if self.cell_width <= 0:
            raise ValueError("cell_width must be > 0")
        lo, hi = 3.0 * self.r_range[0], 3.0 * self.r_range[1]

        m = centers.size
        triples = []
        for i in range(m):
            for j in range(i, m):
                for k in range(j, m):
                    s = centers[i] + centers[j] + centers[k]
                    if lo <= s <= hi:
                        triples.append((i, j, k))
        if not triples:
            raise ValueError("empty R window: no lattice triple has its center of mass inside")
        self.triples = np.array(triples, dtype=np.int64)

        # (eta, zeta) integer cell coordinates for every distinct permutation
        perm_cells: list[np.ndarray] = []
        all_e: list[int] = []
        all_z: list[int] = []
        for i, j, k in self.triples:
            seen = set()
            cells = []
            for p in _PERMS:
                trip = (int((i, j, k)[p[0]]), int((i, j, k)[p[1]]), int((i, j, k)[p[2]]))
                if trip in seen:
                    continue
                seen.add(trip)
                s1, s2, s3 = centers[trip[0]], centers[trip[1]], centers[trip[2]]
                _, eta, zeta = to_jacobi(s1, s2, s3)
                ce = int(round(eta / self.cell_width))
                cz = int(round(zeta / self.cell_width))
                cells.append((ce, cz))
                all_e.append(ce)
                all_z.append(cz)
            perm_cells.append(np.array(cells, dtype=np.int64))

        e_min, e_max = min(all_e), max(all_e)
        z_min, z_max = min(all_z), max(all_z)
        self.eta_centers = np.arange(e_min, e_max + 1) * self.cell_width
        self.zeta_centers = np.arange(z_min, z_max + 1) * self.cell_width
        n_z = z_max - z_min + 1

        # flatten per-triple cell lists into (offsets, flat cell ids)
        offsets = np.zeros(len(perm_cells) + 1, dtype=np.int64)
        flat: list[int] = []
        for n, cells in enumerate(perm_cells):
            offsets[n + 1] = offsets[n] + len(cells)
            for ce, cz in cells:
                flat.append((ce - e_min) * n_z + (cz - z_min))
        self.cell_offsets = offsets
        self.cell_ids = np.array(flat, dtype=np.int64)
        self.n_cells = self.eta_centers.size * self.zeta_centers.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.eta_centers.size, self.zeta_centers.size)

    def project_values(self, values_per_triple: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Equal-weight cell mean of per-triple values over distinct permutations.

        Returns (mean, count) as flat arrays of length n_cells; empty cells
        hold NaN.
        """
        sums = np.zeros(self.n_cells)
        counts = np.zeros(self.n_cells, dtype=np.int64)
        reps = np.diff(self.cell_offsets)
        np.add.at(sums, self.cell_ids, np.repeat(values_per_triple, reps))
        np.add.at(counts, self.cell_ids, 1)
        with np.errstate(invalid="ignore"):
            mean = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
        return mean, counts


def average_over_R(grid, r_range: tuple[float, float] = (2.5, 3.5), cell_width: float = 0.1) -> JacobiMap:
    """Average g3 and its connected part over the R window, binned by (eta, zeta).

    The connected part is formed per time triple first and averaged
    independently of g3. Input is a CorrelationGrid (times, g2, g3).
    """
    table = TripleCellTable(grid.times, r_range, cell_width)
    tri = table.triples
    i, j, k = tri[:, 0], tri[:, 1], tri[:, 2]
    g3_vals = grid.g3[i, j, k]
    g3c_vals = connected_g3(g3_vals, (grid.g2[i, j], grid.g2[i, k], grid.g2[j, k]))
    g3_mean, counts = table.project_values(g3_vals)
    g3c_mean, _ = table.project_values(g3c_vals)
    shape = table.shape
    return JacobiMap(
        eta_centers=table.eta_centers,
        zeta_centers=table.zeta_centers,
        g3=g3_mean.reshape(shape),
        g3c=g3c_mean.reshape(shape),
        n_samples=counts.reshape(shape),
        r_range=table.r_range,
        cell_width=table.cell_width,
    )


def write_map_csv(jmap: JacobiMap, path, header_lines=()) -> None:
    """Serialize populated cells; stderr is the g3_connected standard error (0 if exact)."""
    err = jmap.g3c_stderr
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"# r_range_sqrt3_us = {jmap.r_range[0]:.9g},{jmap.r_range[1]:.9g}\n")
        fh.write(f"# cell_width_us = {jmap.cell_width:.9g}\n")
        fh.write("eta_us,zeta_us,g3,g3_connected,stderr,n_samples\n")
        for ie, eta in enumerate(jmap.eta_centers):
            for iz, zeta in enumerate(jmap.zeta_centers):
                if jmap.n_samples[ie, iz] <= 0:
                    continue
                e = err[ie, iz] if err is not None else 0.0
                fh.write(
                    f"{eta:.9g},{zeta:.9g},{jmap.g3[ie, iz]:.9g},"
                    f"{jmap.g3c[ie, iz]:.9g},{e:.9g},{int(jmap.n_samples[ie, iz])}\n"
                )


def read_map_csv(path) -> JacobiMap:
    r_range = (float("nan"), float("nan"))
    cell_width = float("nan")
    rows = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("r_range_sqrt3_us"):
                    lo, hi = body.split("=", 1)[1].split(",")
                    r_range = (float(lo), float(hi))
                elif body.startswith("cell_width_us"):
                    cell_width = float(body.split("=", 1)[1])
                continue
            if line.startswith("eta_us"):
                continue
            parts = line.split(",")
            rows.append(
                (float(parts[0]), float(parts[1]), float(parts[2]), float(parts[3]),
                 float(parts[4]), int(parts[5]))
            )
    if not rows or not math.isfinite(cell_width):
        raise ValueError(f"not a map CSV: {path}")
    ce = sorted({int(round(r[0] / cell_width)) for r in rows})
    cz = sorted({int(round(r[1] / cell_width)) for r in rows})
    e_range = range(ce[0], ce[-1] + 1)
    z_range = range(cz[0], cz[-1] + 1)
    shape = (len(e_range), len(z_range))
    g3 = np.full(shape, np.nan)
    g3c = np.full(shape, np.nan)
    err = np.full(shape, np.nan)
    n = np.zeros(shape, dtype=np.int64)
    for eta, zeta, v3, v3c, e, ns in rows:
        ie = int(round(eta / cell_width)) - e_range.start
        iz = int(round(zeta / cell_width)) - z_range.start
        g3[ie, iz] = v3
        g3c[ie, iz] = v3c
        err[ie, iz] = e
        n[ie, iz] = ns
    return JacobiMap(
        eta_centers=np.array(e_range) * cell_width,
        zeta_centers=np.array(z_range) * cell_width,
        g3=g3,
        g3c=g3c,
        n_samples=n,
        r_range=r_range,
        cell_width=cell_width,
        g3c_stderr=err,
    )


def write_pgm(values: np.ndarray, path, comment_lines=()) -> None:
    """Lossless-scaled 16-bit grayscale PGM of a 2-D map; NaN renders as 0."""
    vals = np.asarray(values, dtype=float)
    finite = vals[np.isfinite(vals)]
    vmin = float(finite.min()) if finite.size else 0.0
    vmax = float(finite.max()) if finite.size else 1.0
    span = (vmax - vmin) or 1.0
    scaled = np.zeros(vals.shape, dtype=np.uint16)
    mask = np.isfinite(vals)
    scaled[mask] = np.round((vals[mask] - vmin) / span * 65535.0).astype(np.uint16)
    with open(path, "wb") as fh:
        fh.write(b"P5\n")
        for line in comment_lines:
            fh.write(f"# {line}\n".encode())
        fh.write(f"# vmin = {vmin:.9g} vmax = {vmax:.9g}\n".encode())
        fh.write(f"{vals.shape[1]} {vals.shape[0]}\n65535\n".encode())
        fh.write(scaled.astype(">u2").tobytes())
