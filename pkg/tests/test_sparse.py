"""Certificate-chain tests for the sparse domination pipeline."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.fft import irfft2

from marcsparse.functions import (GridFunction, make_test_field,
                                  make_test_kernels)
from marcsparse.geometry import Box, DyadicCube, Grid, cube_cells, triple_cells
from marcsparse.operators import (build_ladder, fractional_integral,
                                  mollified_marcinkiewicz, mollifier_raster,
                                  _angular_values, _cumulative_ball_spectra,
                                  _offset_plan, _ring_indices)
from marcsparse.sparse import (DominationBlowupError, build_fractional_sparse_family,
                               build_sparse_family, default_root, head_cutoff,
                               load_sparse_text, save_sparse_text,
                               sparse_operator, verify_sparse, _window_stacks)

GRID = Grid(Box(2, (0.0, 0.0), 2.0), 64)
KERNELS = make_test_kernels()


def _reach(m: int, l: int) -> float:
    return 2.0 ** (m + 2) + 2.0 ** (m - l - 2)


# ---------------------------------------------------------------------------
# kernel support and head cutoff

def test_head_cutoff_is_the_first_escaping_octave():
    for l in (1, 2, 4, 8):
        for side in (0.125, 0.25, 1.0, 1.5):
            j = head_cutoff(side, l)
            assert _reach(j - 1, l) <= side < _reach(j, l)


def test_octave_piece_support_stays_in_the_quadrupled_annulus():
    # one octave piece, mollified one octave below, lives in
    # 2^(m-2) <= |z| <= 2^(m+2): the inner radius is at least 2^m and
    # shrinks by at most the mollifier support 2^(m-3), the outer radius
    # 2^(m+2) grows by the same amount.
    ladder = build_ladder(GRID)
    s = ladder.samples_per_octave
    plan = _offset_plan(GRID.points_per_axis, GRID.spacing, 8)
    ring_idx = _ring_indices(plan, ladder)
    values = np.zeros(plan.shape)
    nz = ring_idx >= 0
    values[nz] = _angular_values(plan, KERNELS["cos"])[nz] * plan.radius[nz] ** (0.25 - 1.0)

    k = 5 * s + 5                       # mid-octave start, m = oct(k) = 0
    m = ladder.octave_of(k)
    wanted = np.zeros(ladder.count + 1, dtype=bool)
    wanted[[k, k + s]] = True
    spectra = _cumulative_ball_spectra(plan, ring_idx, values, ladder, wanted)
    ann_hat = (spectra[k + s] - spectra[k]) / ladder.radii[k]
    phat = mollifier_raster(plan, m - 1)
    assert phat is not None             # genuinely mollified at this scale
    comp = irfft2(ann_hat * phat, s=plan.shape)

    h = GRID.spacing
    outside = (plan.radius < 2.0 ** (m - 2) - h) | (plan.radius > 2.0 ** (m + 2) + h)
    assert np.max(np.abs(comp[outside])) <= 1e-12 * np.max(np.abs(comp))


def test_windowed_stacks_match_the_full_grid_operator():
    # the per-node windows must reproduce the global square function of the
    # masked density; they share the ladder but nothing of the FFT layout
    f = make_test_field(GRID, "two_bump")
    ladder = build_ladder(GRID)
    for beta, l in ((0.25, 2), (0.01, 1), (0.5, 4)):
        for cube in (default_root(GRID), DyadicCube(3, (5, 4), GRID.box)):
            block = cube_cells(cube, GRID)
            stacks, _ = _window_stacks(f, block, ladder, KERNELS["rough"], beta, l)
            v_win = np.sqrt(stacks.sum(axis=0))
            masked = np.zeros(GRID.shape)
            t3 = triple_cells(cube, GRID).slices()
            masked[t3] = f.values[t3]
            v_glob = mollified_marcinkiewicz(
                GridFunction(GRID, masked), KERNELS["rough"], beta, l
            ).values[block.slices()]
            scale = np.max(v_glob)
            assert np.max(np.abs(v_win - v_glob)) <= 1e-12 * scale


# ---------------------------------------------------------------------------
# construction and certificates

@pytest.mark.parametrize("field", ["gaussian", "disk", "two_bump", "spike"])
def test_family_certificate_verifies(field):
    f = make_test_field(GRID, field)
    fam = build_sparse_family(f, KERNELS["cos"], 0.1, 2)
    cert = verify_sparse(fam, f, KERNELS["cos"])
    assert cert.partition
    assert cert.eta_ratio >= 0.5
    assert cert.pointwise_margin >= 0.0
    assert cert.ok


def test_spike_family_recurses_toward_the_singularity():
    f = make_test_field(GRID, "spike")
    fam = build_sparse_family(f, KERNELS["cos"], 0.25, 2)
    assert len(fam) > 1
    deep_level = max(n.cube.level for n in fam.nodes)
    assert deep_level > fam.root.level
    # the refinement clusters around the singular cell: some deepest cube
    # holds it (it may sit at a corner shared by several), and every cube
    # of the family stays within its own side length of it
    spike_cell = np.unravel_index(np.argmax(f.values), f.values.shape)
    holds = []
    for node in fam.nodes:
        b = cube_cells(node.cube, GRID)
        gaps = [max(a - c, c + 1 - s, 0) for a, c, s in
                zip(b.starts, spike_cell, b.stops)]
        assert max(gaps) <= b.stops[0] - b.starts[0]
        if node.cube.level == deep_level and max(gaps) == 0:
            holds.append(node)
    assert holds


def test_children_nest_and_retained_counts_are_exact():
    f = make_test_field(GRID, "spike")
    fam = build_sparse_family(f, KERNELS["cos"], 0.25, 2)
    for node in fam.nodes:
        occupied = 0
        for cid in node.children:
            child = fam.nodes[cid].cube
            assert node.cube.contains_cube(child)
            occupied += cube_cells(child, GRID).count
        assert node.e_count == node.cell_count - occupied
        assert 2 * node.e_count >= node.cell_count


def test_build_is_deterministic():
    f = make_test_field(GRID, "spike")
    a = build_sparse_family(f, KERNELS["cos"], 0.1, 2)
    b = build_sparse_family(f, KERNELS["cos"], 0.1, 2)
    assert a.d_used == b.d_used
    assert [n.cube for n in a.nodes] == [n.cube for n in b.nodes]
    assert [n.tau for n in a.nodes] == [n.tau for n in b.nodes]


def test_zero_field_needs_no_doubling():
    f = GridFunction(GRID, np.zeros(GRID.shape))
    fam = build_sparse_family(f, KERNELS["cos"], 0.25, 2)
    assert len(fam) == 1
    assert fam.d_used == 1.0
    cert = verify_sparse(fam, f, KERNELS["cos"])
    assert cert.ok and cert.operator_max == 0.0


def test_blowup_raises_after_the_doubling_budget():
    f = make_test_field(GRID, "gaussian")
    with pytest.raises(DominationBlowupError):
        build_sparse_family(f, KERNELS["cos"], 0.25, 2, d_init=1e-9,
                            max_doublings=0)


def test_verifier_rejects_a_tampered_family():
    f = make_test_field(GRID, "spike")
    fam = build_sparse_family(f, KERNELS["cos"], 0.25, 2)
    node = fam.nodes[-1]
    fam.nodes[-1] = type(node)(node.cube, node.avg3, node.tau,
                               node.e_count - 1, node.cell_count,
                               node.children)
    with pytest.raises(AssertionError):
        verify_sparse(fam, f, KERNELS["cos"])


def test_root_with_overhanging_triple_is_rejected():
    corner = DyadicCube(2, (0, 0), GRID.box)   # its triple leaves the box
    f = make_test_field(GRID, "gaussian")
    with pytest.raises(ValueError):
        build_sparse_family(f, KERNELS["cos"], 0.25, 2, root=corner)


# ---------------------------------------------------------------------------
# sparse averaging operator

@given(st.sampled_from([1.0, 2.0]), st.sampled_from([2.0 ** 3, 2.0 ** -2]))
@settings(max_examples=8, deadline=None)
def test_sparse_operator_power_of_two_homogeneity(r, lam):
    f = make_test_field(GRID, "two_bump")
    fam = build_sparse_family(f, KERNELS["cos"], 0.25, 2)
    base = sparse_operator(fam, f, r, 0.25)
    scaled = sparse_operator(fam, f.scaled(lam), r, 0.25)
    # triple means, squares and square roots all commute with powers of two
    assert np.array_equal(scaled.values, lam * base.values)


def test_tripled_support_dominates_the_cube_form():
    f = make_test_field(GRID, "spike")
    fam = build_sparse_family(f, KERNELS["cos"], 0.25, 2)
    on_q = sparse_operator(fam, f, 2.0, 0.25, support="cube")
    on_3q = sparse_operator(fam, f, 2.0, 0.25, support="tripled")
    assert np.all(on_3q.values >= on_q.values * (1.0 - 1e-12))


def test_certificate_bound_equals_the_operator_times_the_constant():
    # the verifier's bound is exactly D * l * (l^2 averaging operator)
    f = make_test_field(GRID, "spike")
    fam = build_sparse_family(f, KERNELS["cos"], 0.1, 4)
    aop = sparse_operator(fam, f, 2.0, 0.1).values
    bound2 = np.zeros(GRID.shape)
    for node in fam.nodes:
        bound2[cube_cells(node.cube, GRID).slices()] += node.tau ** 2
    rb = cube_cells(fam.root, GRID).slices()
    lhs = np.sqrt(bound2[rb])
    rhs = fam.d_used * fam.smoothing_l * aop[rb]
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(np.max(rhs), 1e-300)


# ---------------------------------------------------------------------------
# averaging families and the fractional sandwich

def test_constant_field_gives_a_single_averaging_node():
    f = GridFunction(GRID, np.ones(GRID.shape))
    fam = build_fractional_sparse_family(f)
    assert len(fam) == 1
    assert fam.nodes[0].ratio == 1.0


def test_spike_averaging_family_is_half_sparse():
    f = make_test_field(GRID, "spike")
    fam = build_fractional_sparse_family(f)
    assert len(fam) > 1
    for node in fam.nodes:
        assert 2 * node.e_count >= node.cell_count
    # at the default ratio every fourth-level cube whose triple sees the
    # spike stops, and together those tile the root; one doubling pushes
    # the stopping down a level where nine small cubes suffice
    assert fam.d_used == 16.0


def test_fractional_integral_sandwich_is_finite():
    # smoke version of the two-sided comparison: on the root cube the
    # fractional integral and the l^1 averaging operator of the stopping
    # family stay within a bounded factor of each other
    f = make_test_field(GRID, "two_bump")
    beta = 0.25
    fam = build_fractional_sparse_family(f)
    aop = sparse_operator(fam, f, 1.0, beta).values
    pot = fractional_integral(f, beta).values
    rb = cube_cells(fam.root, GRID).slices()
    ratio = pot[rb] / aop[rb]
    assert np.all(np.isfinite(ratio)) and np.min(ratio) > 0.0
    assert np.max(ratio) / np.min(ratio) < 1e3


# ---------------------------------------------------------------------------
# text export

def test_family_export_round_trip(tmp_path):
    f = make_test_field(GRID, "spike")
    fam = build_sparse_family(f, KERNELS["cos"], 0.1, 2)
    path = tmp_path / "family.txt"
    save_sparse_text(fam, str(path))
    eta, d_used, entries = load_sparse_text(str(path))
    assert eta == fam.eta and d_used == fam.d_used
    assert len(entries) == len(fam)
    for (level, index, ratio), node in zip(entries, fam.nodes):
        assert level == node.cube.level
        assert index == node.cube.index
        assert ratio == node.ratio
