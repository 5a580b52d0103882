import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superatom.jacobi import (
    TripleCellTable,
    average_over_R,
    connected_g3,
    from_jacobi,
    read_map_csv,
    to_jacobi,
    write_map_csv,
    write_pgm,
)

times = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)


def test_symmetric_point_maps_to_axis():
    r, eta, zeta = to_jacobi(2.0, 2.0, 2.0)
    assert r == pytest.approx(math.sqrt(3) * 2.0, rel=1e-14)
    assert eta == 0.0 and zeta == 0.0


def test_printed_example_values():
    r, eta, zeta = to_jacobi(3.0, 2.0, 1.0)
    assert r == pytest.approx(3.4641016151377544, abs=1e-10)
    assert eta == pytest.approx(0.7071067811865476, abs=1e-10)
    assert zeta == pytest.approx(1.224744871391589, abs=1e-10)


@given(times, times, times)
@settings(max_examples=200, deadline=None)
def test_roundtrip(s1, s2, s3):
    r, eta, zeta = to_jacobi(s1, s2, s3)
    t1, t2, t3 = from_jacobi(r, eta, zeta)
    scale = max(1.0, abs(s1), abs(s2), abs(s3))
    assert abs(t1 - s1) < 1e-12 * scale
    assert abs(t2 - s2) < 1e-12 * scale
    assert abs(t3 - s3) < 1e-12 * scale


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
@settings(max_examples=100, deadline=None)
def test_connected_g3_linearity(g3, a, b, c):
    base = connected_g3(g3, (a, b, c))
    assert connected_g3(g3 + 1.0, (a, b, c)) == pytest.approx(base + 1.0, abs=1e-12)
    assert connected_g3(g3, (a + 0.5, b, c)) == pytest.approx(base - 0.5, abs=1e-12)


def test_connected_g3_nulls():
    assert connected_g3(1.0, (1.0, 1.0, 1.0)) == 0.0
    # one photon far away: g3 -> g2 of the close pair, other pairs -> 1
    assert connected_g3(1.73, (1.73, 1.0, 1.0)) == pytest.approx(0.0, abs=1e-14)
    # ideal-model equal times: 2 + 25 - 3 * 9 = 0
    assert connected_g3(25.0, (9.0, 9.0, 9.0)) == 0.0


@given(st.floats(0.1, 5.0), st.floats(0.1, 5.0), st.floats(0.1, 5.0))
@settings(max_examples=100, deadline=None)
def test_connected_g3_separation_null_random(g2_close, x, y):
    assert connected_g3(g2_close, (g2_close, 1.0, 1.0)) == pytest.approx(0.0, abs=1e-12)


class _FakeGrid:
    def __init__(self, times, g2, g3):
        self.times = times
        self.g2 = g2
        self.g3 = g3


def _synthetic_grid(fn, n=14, dt=0.25, t0=1.0):
    ts = t0 + dt * np.arange(n)
    g3 = np.empty((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                g3[i, j, k] = fn(ts[i], ts[j], ts[k])
    g2 = np.ones((n, n))
    return _FakeGrid(ts, g2, g3)


def test_average_over_r_identity_for_constant_input():
    grid = _synthetic_grid(lambda *s: 1.7)
    jm = average_over_R(grid, r_range=(0.0, 100.0), cell_width=0.25)
    vals = jm.g3[jm.populated()]
    assert np.max(np.abs(vals - 1.7)) < 1e-12


def test_sixfold_symmetry_for_stationary_input():
    # value depends only on pairwise separations: full six-element orbit symmetry,
    # including the inversion (eta, zeta) -> (-eta, -zeta)
    def fn(a, b, c):
        return 1.0 + math.exp(-abs(a - b)) + math.exp(-abs(a - c)) + math.exp(-abs(b - c))

    grid = _synthetic_grid(fn)
    jm = average_over_R(grid, r_range=(0.0, 100.0), cell_width=0.25 / math.sqrt(2))
    ne, nz = jm.g3.shape
    worst = 0.0
    for ie in range(ne):
        for iz in range(nz):
            a = jm.g3[ie, iz]
            b = jm.g3[ne - 1 - ie, nz - 1 - iz]
            if np.isfinite(a) and np.isfinite(b):
                worst = max(worst, abs(a - b))
    assert worst < 1e-12


def test_empty_r_window_rejected():
    grid = _synthetic_grid(lambda *s: 1.0)
    with pytest.raises(ValueError):
        average_over_R(grid, r_range=(90.0, 100.0), cell_width=0.25)


def test_cells_outside_support_are_absent_not_zero():
    grid = _synthetic_grid(lambda *s: 2.0, n=4)
    jm = average_over_R(grid, r_range=(0.0, 100.0), cell_width=0.1)
    assert np.isnan(jm.g3[~jm.populated()]).all()
    assert (jm.g3[jm.populated()] == 2.0).all()


def test_triple_cell_table_covers_distinct_permutations():
    table = TripleCellTable(np.array([0.0, 1.0, 2.0]), r_range=(0.0, 10.0), cell_width=0.3)
    reps = np.diff(table.cell_offsets)
    tri = table.triples
    distinct = np.array([len({tuple(p) for p in _perms(t)}) for t in tri])
    assert np.array_equal(reps, distinct)


def _perms(t):
    i, j, k = t
    return [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)]


def test_map_csv_roundtrip(tmp_path):
    grid = _synthetic_grid(lambda a, b, c: 1.0 + 0.1 * math.cos(a - c), n=8)
    jm = average_over_R(grid, r_range=(0.0, 100.0), cell_width=0.25)
    path = tmp_path / "map.csv"
    write_map_csv(jm, path, header_lines=["origin = test"])
    back = read_map_csv(path)
    assert back.cell_width == pytest.approx(jm.cell_width)
    pop = jm.populated()
    assert np.array_equal(pop, back.populated())
    assert np.allclose(jm.g3[pop], back.g3[pop], rtol=1e-8)
    assert np.allclose(jm.g3c[pop], back.g3c[pop], rtol=1e-8, atol=1e-8)
    text = path.read_text()
    assert text.startswith("# origin = test")
    assert "eta_us,zeta_us,g3,g3_connected,stderr,n_samples" in text


def test_pgm_writer(tmp_path):
    vals = np.array([[0.0, 1.0], [np.nan, 0.5]])
    path = tmp_path / "map.pgm"
    write_pgm(vals, path, comment_lines=["demo"])
    raw = path.read_bytes()
    assert raw.startswith(b"P5\n")
    assert b"65535" in raw
    # 2x2 16-bit payload
    assert len(raw.split(b"65535\n", 1)[1]) == 8
