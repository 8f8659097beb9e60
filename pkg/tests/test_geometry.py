import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from marcsparse.geometry import (
    Box,
    DyadicCube,
    DyadicLattice,
    Grid,
    block_sums,
    cube_average,
    cube_cells,
    level_blocks,
    scan_lattices,
    spread_to_cells,
    triple_cells,
)
from marcsparse.functions import GridFunction

BOX = Box(2, (0.0, 0.0), 1.0)
GRID16 = Grid(BOX, 16)


def dyadic_values(shape, scale=2.0 ** -8, lo=-(2 ** 12), hi=2 ** 12):
    """Arrays of exactly representable multiples of `scale`."""
    return st.lists(
        st.integers(lo, hi), min_size=shape[0] * shape[1], max_size=shape[0] * shape[1]
    ).map(lambda xs: np.array(xs, dtype=np.float64).reshape(shape) * scale)


@st.composite
def lattice_cubes(draw, max_level=3):
    thirds = draw(st.tuples(st.integers(0, 2), st.integers(0, 2)))
    level = draw(st.integers(0, max_level))
    idx = []
    for a in thirds:
        if a == 0:
            m_lo, m_hi = 0, (1 << level) - 1
        else:
            m_lo = -(((a << level) + 2) // 3)
            m_hi = m_lo + (1 << level)
        idx.append(draw(st.integers(m_lo, m_hi)))
    return DyadicCube(level, tuple(idx), BOX, thirds)


# ---------------------------------------------------------------------------
# cells

def test_root_cube_covers_grid():
    q = DyadicCube(0, (0, 0), BOX)
    block = cube_cells(q, GRID16)
    assert block.count == 16 * 16
    assert block.slices() == (slice(0, 16), slice(0, 16))


def test_level_one_quadrant_block():
    q = DyadicCube(1, (1, 0), BOX)
    block = cube_cells(q, GRID16)
    assert block.slices() == (slice(8, 16), slice(0, 8))


def test_unresolvable_cube_raises():
    q = DyadicCube(5, (0, 0), BOX)
    with pytest.raises(ValueError, match="unresolvable"):
        cube_cells(q, GRID16)


def test_cell_of_boundary_half_open():
    g = Grid(Box(1, (0.0,), 1.0), 8)
    assert g.cell_of_boundary(-1.0) == 0
    assert g.cell_of_boundary(0.0) == 4
    assert g.cell_of_boundary(1.0) == 8


def test_triple_cells_interior_and_clipped():
    g = Grid(BOX, 32)
    q = DyadicCube(3, (3, 4), BOX)
    t = triple_cells(q, g)
    assert t.slices() == (slice(8, 20), slice(12, 24))
    corner = DyadicCube(3, (0, 0), BOX)
    assert triple_cells(corner, g).count == 8 * 8


@given(lattice_cubes())
def test_children_partition_parent_cells(q):
    parent = cube_cells(q, GRID16)
    cover = np.zeros(GRID16.shape, dtype=np.int64)
    for child in q.children():
        cover[cube_cells(child, GRID16).slices()] += 1
    want = np.zeros_like(cover)
    want[parent.slices()] = 1
    assert np.array_equal(cover, want)


@given(lattice_cubes())
def test_shifted_interior_counts_are_dyadic(q):
    block = cube_cells(q, GRID16)
    inside = all(
        lo >= b_lo and hi <= b_hi
        for lo, hi, b_lo, b_hi in zip(q.lo, q.hi, BOX.lo, BOX.hi)
    )
    if inside:
        assert block.count == (16 >> q.level) ** 2


# ---------------------------------------------------------------------------
# averages

def test_average_of_constant_is_exact():
    f = GridFunction(GRID16, np.full(GRID16.shape, 3.0))
    for lat in scan_lattices(BOX, 2):
        for q in lat.all_cubes():
            if cube_cells(q, GRID16).count:
                assert cube_average(f, q) == 3.0


def test_average_of_coordinate_on_quadrant():
    # mean of x over the quadrant with x in [0, 1]: cell centers are placed
    # symmetrically, so the midpoint value 1/2 is hit exactly
    x = GRID16.coords()[0]
    f = GridFunction(GRID16, x)
    q = DyadicCube(1, (1, 0), BOX)
    val = cube_average(f, q)
    assert abs(val - 0.5) <= GRID16.spacing
    assert val == pytest.approx(0.5, abs=1e-15)


def test_average_of_left_half_indicator():
    x = GRID16.coords()[0]
    f = GridFunction(GRID16, (x < 0).astype(np.float64))
    q = DyadicCube(0, (0, 0), BOX)
    assert cube_average(f, q) == 0.5


@given(lattice_cubes(max_level=2), dyadic_values((16, 16)))
def test_average_consistency_is_bitwise(q, vals):
    f = GridFunction(GRID16, vals)
    expected = (16 >> q.level) ** 2
    assume(cube_cells(q, GRID16).count == expected)  # interior cubes only
    kids = q.children()
    acc = 0.0
    for child in kids:
        assert cube_cells(child, GRID16).count == (16 >> (q.level + 1)) ** 2
        acc = acc + cube_average(f, child)
    assert cube_average(f, q) == acc / 4.0


@given(lattice_cubes(max_level=2))
def test_average_commutes_with_power_of_two_scaling(q):
    vals = np.linspace(-1.0, 1.0, 256).reshape(16, 16)
    f = GridFunction(GRID16, vals)
    assume(cube_cells(q, GRID16).count > 0)
    a = cube_average(f, q)
    assert cube_average(GridFunction(GRID16, 4.0 * vals), q) == 4.0 * a


# ---------------------------------------------------------------------------
# lattices

def test_scan_lattices_order_and_count():
    lats = scan_lattices(BOX, 3)
    assert len(lats) == 9
    assert lats[0].shift_thirds == (0, 0)
    assert lats[-1].shift_thirds == (2, 2)


def test_shifted_level_has_extra_cube_per_axis():
    lat = DyadicLattice(BOX, 3, (1, 0))
    level2 = list(lat.cubes(2))
    assert len(level2) == 5 * 4  # 2^2 + 1 along the shifted axis


@given(
    st.floats(0.05, 0.45),
    st.floats(-0.95, 0.35),
    st.floats(-0.95, 0.35),
)
def test_every_small_cube_sits_in_a_comparable_lattice_cube(s, ax, ay):
    # three third-shifted lattices per axis realize boundary offsets
    # {0, 1/3, 2/3} * side at every level, so any cube of side s fits in
    # some lattice cube of side at most 6s
    assume(ax + s < 1.0 and ay + s < 1.0)
    lats = scan_lattices(BOX, 6)
    hits = []
    for lat in lats:
        for level in range(7):
            side = BOX.side * 2.0 ** (-level)
            if side > 6.0 * s or side < s:
                continue
            for q in lat.cubes(level):
                if (q.lo[0] <= ax and ax + s <= q.hi[0]
                        and q.lo[1] <= ay and ay + s <= q.hi[1]):
                    hits.append(q)
    assert any(q.side <= 6.0 * s * (1 + 1e-12) for q in hits)


def test_parent_child_roundtrip_with_shifts():
    q = DyadicCube(3, (-2, 5), BOX, (1, 2))
    for child in q.children():
        assert child.parent() == q
        assert q.contains_cube(child)
    assert not q.contains_cube(q.parent())


# ---------------------------------------------------------------------------
# level scans

def test_level_blocks_tile_the_grid():
    rng = np.random.default_rng(7)
    vals = rng.standard_normal(GRID16.shape)
    for lat in scan_lattices(BOX, 3):
        for level in range(4):
            blocks = level_blocks(lat, level, GRID16)
            for e in blocks.edges:
                assert e[0] == 0 and e[-1] == 16
                assert np.all(np.diff(e) > 0)
            ones = spread_to_cells(np.ones(blocks.shape), blocks.edges)
            assert np.array_equal(ones, np.ones(GRID16.shape))
            sums = block_sums(vals, blocks.edges)
            e0, e1 = blocks.edges
            for i in range(len(e0) - 1):
                for j in range(len(e1) - 1):
                    direct = vals[e0[i]:e0[i + 1], e1[j]:e1[j + 1]].sum()
                    assert sums[i, j] == pytest.approx(direct, rel=1e-10, abs=1e-12)


def test_level_blocks_counts_match_cube_cells():
    lat = DyadicLattice(BOX, 3, (2, 1))
    blocks = level_blocks(lat, 2, GRID16)
    counts = blocks.counts()
    for i, mi in enumerate(blocks.indices[0]):
        for j, mj in enumerate(blocks.indices[1]):
            q = DyadicCube(2, (int(mi), int(mj)), BOX, (2, 1))
            assert counts[i, j] == cube_cells(q, GRID16).count


def test_boundary_arithmetic_matches_across_levels():
    # the same geometric boundary computed at different levels must agree
    # bitwise, otherwise cell rasterizations would not partition
    q = DyadicCube(2, (-1, 3), BOX, (1, 1))
    kids = q.children()
    assert kids[0].lo == q.lo
    assert kids[3].hi == q.hi
    assert kids[0].hi[0] == kids[3].lo[0]


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(BOX, 12)  # not a power of two
    with pytest.raises(ValueError):
        Grid(BOX, 4)  # too coarse
    with pytest.raises(ValueError):
        Box(2, (0.0,), 1.0)  # dim mismatch
