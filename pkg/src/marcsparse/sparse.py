"""Sparse domination of the smoothed square function by averaging operators.

The construction is a stopping-time recursion on a dyadic root cube Q0 whose
concentric triple lies inside the box.  At each node P it evaluates, on a
window cropped to 3P, the per-octave pieces of the smoothed square function
of f * chi_{3P}, together with a local grand maximal function built from the
tails of those pieces.  Cells where either exceeds the threshold

    tau_P = D * l * |P|^(beta/n) * <|f|>_{3P}

form an exceptional set E.  If E holds more than a 2^-(n+2) fraction of P the
domination constant D doubles and the node is re-thresholded (the stacks do
not depend on D, so retries cost no transforms).  Otherwise E is covered by
the maximal dyadic subcubes carrying an E-fraction above 2^-(n+1); those are
the children of the recursion, they take up at most half of P, and the rest
of P is retained, which makes the family 1/2-sparse by construction.

Two facts make the per-node windows sufficient.  First, a kernel piece of
octave m, mollified l octaves below, is supported in |z| < 2^(m+2) +
2^(m-l-2), so octaves below the head cutoff J(side) see no data outside the
concentric triple; their sum is exactly the child's own windowed square
function.  Second, the remaining tail octaves are controlled on the whole
subcube by the local maximal function at any retained cell of it.  Chaining
the two along the recursion tree gives the pointwise certificate

    smoothed square function of f * chi_{3Q0}  <=  D * l * A^{2,beta} f

on Q0, where A^{2,beta} is the l^2 sparse averaging operator of the family
with triple averages.  `verify_sparse` re-checks that inequality against the
full-grid operator, which goes through an independent transform layout.

Raising D partway through the recursion never invalidates finished nodes:
exceptional sets only shrink when D grows, so retained cells keep their
bound and the covers built earlier remain covers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functions import GridFunction, SphereKernel
from .geometry import CellBlock, DyadicCube, Grid, cube_cells, triple_cells
from .operators import (
    RadiusLadder,
    _angular_values,
    _check_beta,
    _cumulative_ball_spectra,
    _offset_plan,
    _ring_indices,
    _ring_population,
    build_ladder,
    mollified_marcinkiewicz,
    mollifier_raster,
)

__all__ = [
    "DominationBlowupError",
    "SparseCertificate",
    "SparseFamily",
    "SparseNode",
    "build_fractional_sparse_family",
    "build_sparse_family",
    "default_root",
    "head_cutoff",
    "load_sparse_text",
    "save_sparse_text",
    "sparse_operator",
    "verify_sparse",
]


class DominationBlowupError(RuntimeError):
    """The adaptive domination constant exceeded its doubling budget."""


# ---------------------------------------------------------------------------
# family containers

@dataclass(frozen=True)
class SparseNode:
    """One cube of the sparse family with its retained-set bookkeeping."""

    cube: DyadicCube
    avg3: float          # <|f|>_{3Q} of the build-time density
    tau: float           # threshold at the final domination constant
    e_count: int         # retained cells |E_Q|
    cell_count: int      # cells of Q
    children: tuple[int, ...]

    @property
    def ratio(self) -> float:
        return self.e_count / self.cell_count


@dataclass
class SparseFamily:
    """Stopping-time family over a root cube, eta-sparse by cell count."""

    grid: Grid
    root: DyadicCube
    beta: float
    smoothing_l: int
    samples_per_octave: int
    eta: float
    d_used: float
    kind: str                  # "square_function" or "averaging"
    nodes: list[SparseNode]

    @property
    def root_id(self) -> int:
        return len(self.nodes) - 1  # recursion appends post-order

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class SparseCertificate:
    """Desk-checkable witnesses that a family dominates the square function."""

    eta_ratio: float         # min |E_Q| / |Q| over the family
    partition: bool          # retained sets tile the root exactly
    pointwise_margin: float  # min of bound * slack - operator over root cells
    operator_max: float
    bound_max: float
    d_used: float
    ok: bool


def default_root(grid: Grid) -> DyadicCube:
    """Level-2 cube in the first quadrant; its triple stays inside the box."""
    return DyadicCube(2, (2,) * grid.dim, grid.box)


# ---------------------------------------------------------------------------
# windowed per-octave stacks

def head_cutoff(side: float, smoothing_l: int) -> int:
    """First octave whose kernel support can leave the concentric triple.

    A piece of octave m reaches at most 2^(m+2) + 2^(m-l-2): annulus outer
    radius plus mollifier support.  Octaves strictly below the cutoff stay
    within distance `side`, hence inside 3Q for data seen from Q.
    """
    reach_unit = 4.0 + 2.0 ** (-smoothing_l) / 4.0
    return math.floor(math.log2(side / reach_unit)) + 1


def _window_stacks(f: GridFunction, block: CellBlock, ladder: RadiusLadder,
                   kernel: SphereKernel, beta: float,
                   smoothing_l: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-octave squares of the smoothed square function of f * chi_{3P}.

    Returns (stacks, octaves): stacks[i] is the octave-`octaves[i]` part of
    the squared square function, evaluated on the cells of P only.  The sum
    over i equals the full-grid operator applied to the masked density, up
    to transform roundoff; rings, trapezoid weights and mollifier scales all
    follow the shared ladder, so the pieces agree across window sizes.
    """
    grid = f.grid
    h = grid.spacing
    c = block.stops[0] - block.starts[0]
    n_pts = 3 * c
    s = ladder.samples_per_octave
    top = ladder.count - s

    radii = ladder.radii
    maxrad = (n_pts - 1) * h * math.sqrt(2.0)
    top_local = min(top, int(np.searchsorted(radii, maxrad, side="left")) - 1)

    mscale_top = ladder.octave_of(top_local) - smoothing_l
    margin = max(0, math.ceil(2.0 ** mscale_top / 4.0 / h))
    plan = _offset_plan(n_pts, h, margin)
    ring_idx = _ring_indices(plan, ladder)
    pop = _ring_population(ring_idx, ladder)

    values = np.zeros(plan.shape)
    nz = ring_idx >= 0
    values[nz] = _angular_values(plan, kernel)[nz] * plan.radius[nz] ** (beta - 1.0)
    wanted = np.arange(ladder.count + 1) <= top_local + s
    spectra = _cumulative_ball_spectra(plan, ring_idx, values, ladder, wanted)

    w0 = block.starts[0] - c
    w1 = block.starts[1] - c
    fw = f.values[w0:w0 + n_pts, w1:w1 + n_pts]
    fhat = plan.pad_forward(fw)

    oct_lo = ladder.octave_of(0)
    oct_hi = ladder.octave_of(top_local)
    octaves = np.arange(oct_lo, oct_hi + 1)
    stacks = np.zeros((len(octaves), c, c))

    h2 = h * h
    moll_cache: dict[int, np.ndarray | None] = {}
    for k in range(top_local + 1):
        if not np.any(pop[k + 1:k + s + 1]):
            continue
        ann_hat = (spectra[k + s] - spectra[k]) / radii[k]
        mscale = ladder.octave_of(k) - smoothing_l
        if mscale not in moll_cache:
            moll_cache[mscale] = mollifier_raster(plan, mscale)
        phat = moll_cache[mscale]
        if phat is None:
            term = plan.read(ann_hat * fhat) * h2
        else:
            term = plan.read(ann_hat * phat * fhat) * h2 * h2
        term = term[c:2 * c, c:2 * c]
        w = 0.5 if k in (0, top) else 1.0
        stacks[ladder.octave_of(k) - oct_lo] += w * (term * term)
    stacks *= ladder.log_step
    return stacks, octaves


def _local_maximal_squares(stacks: np.ndarray, octaves: np.ndarray,
                           side: float, smoothing_l: int) -> np.ndarray:
    """Squared local grand maximal function on the cells of P.

    For every dyadic subcube R of P (P itself down to single cells) the tail
    octaves at and above the head cutoff of R are summed pointwise, maximized
    over R, and the block maximum is spread back to R's cells; the result is
    the max over subcube levels.  Retained cells therefore witness the tail
    bound for every child cube through the cell block they share with it.
    """
    c = stacks.shape[1]
    suffix = np.zeros((len(octaves) + 1, c, c))
    suffix[:-1] = np.cumsum(stacks[::-1], axis=0)[::-1]

    out = np.zeros((c, c))
    depth = 0
    bs = c
    while bs >= 1:
        cutoff = head_cutoff(side / 2.0 ** depth, smoothing_l)
        io = int(np.searchsorted(octaves, cutoff))
        tail = suffix[io]
        nb = c // bs
        bm = tail.reshape(nb, bs, nb, bs).max(axis=(1, 3))
        spread = np.repeat(np.repeat(bm, bs, axis=0), bs, axis=1)
        np.maximum(out, spread, out=out)
        depth += 1
        bs //= 2
    return out


# ---------------------------------------------------------------------------
# Calderon-Zygmund cover of the exceptional set

def _cz_cover(exceptional: np.ndarray) -> tuple[list[tuple[int, int, int]], np.ndarray]:
    """Maximal dyadic subcubes with E-fraction above 2^-(n+1), n = 2.

    Returns the selected (depth, i, j) triples relative to the parent block
    and the mask of their union.  Fractions compare in integers, so the
    selection is exact; and single cells can never be selected, because a
    four-cell cube holding any E-cell already carries fraction 1/4 > 1/8.
    """
    c = exceptional.shape[0]
    ints = exceptional.astype(np.int64)
    selected: list[tuple[int, int, int]] = []
    blocked = np.zeros((1, 1), dtype=bool)
    depth = 1
    bs = c // 2
    while bs >= 1:
        nb = c // bs
        counts = ints.reshape(nb, bs, nb, bs).sum(axis=(1, 3))
        anc = np.repeat(np.repeat(blocked, 2, axis=0), 2, axis=1)
        sel = (counts * 8 > bs * bs) & ~anc
        if bs == 1 and np.any(sel):
            raise AssertionError("single cell selected by the dyadic cover")
        for i, j in np.argwhere(sel):
            selected.append((depth, int(i), int(j)))
        blocked = anc | sel
        depth += 1
        bs //= 2
    covered = blocked  # at loop exit one entry per cell
    if np.any(exceptional & ~covered):
        raise AssertionError("dyadic cover missed part of the exceptional set")
    return selected, covered


# ---------------------------------------------------------------------------
# main constructions

def build_sparse_family(f: GridFunction, kernel: SphereKernel, beta: float,
                        smoothing_l: int, root: DyadicCube | None = None,
                        samples_per_octave: int = 8, d_init: float = 1.0,
                        max_doublings: int = 20,
                        max_depth: int = 12) -> SparseFamily:
    """Stopping-time sparse family dominating the smoothed square function.

    Leaves (cubes of at most four cells, or at the depth cap) retain all of
    their cells; there the constant keeps doubling until the windowed square
    function sits below the threshold on the whole cube, which closes the
    pointwise certificate chain.
    """
    _check_beta(beta)
    if smoothing_l < 1:
        raise ValueError("smoothing parameter must be >= 1")
    grid = f.grid
    if root is None:
        root = default_root(grid)
    _check_root(root, grid)
    ladder = build_ladder(grid, samples_per_octave)

    state = {"d": float(d_init), "doublings": 0}
    nodes: list[SparseNode] = []
    pending: list[tuple[int, float, float]] = []  # (node position, avg3, side)

    def double() -> None:
        state["d"] *= 2.0
        state["doublings"] += 1
        if state["doublings"] > max_doublings:
            raise DominationBlowupError(
                "domination constant blow-up: exceeded "
                f"{max_doublings} doublings")

    def visit(cube: DyadicCube, depth: int) -> int:
        block = cube_cells(cube, grid)
        c = block.stops[0] - block.starts[0]
        stacks, octaves = _window_stacks(f, block, ladder, kernel, beta, smoothing_l)
        v2 = stacks.sum(axis=0)
        m2 = _local_maximal_squares(stacks, octaves, cube.side, smoothing_l)
        trip = triple_cells(cube, grid)
        avg3 = float(np.sum(np.abs(f.values[trip.slices()])) / trip.count)
        geom = cube.side ** beta
        is_leaf = c <= 2 or depth >= max_depth

        while True:
            tau = state["d"] * smoothing_l * geom * avg3
            tau2 = tau * tau
            if is_leaf:
                if np.any(v2 > tau2):
                    double()
                    continue
                exceptional = None
            else:
                exceptional = (v2 > tau2) | (m2 > tau2)
                if int(np.count_nonzero(exceptional)) > (c * c) // 16:
                    double()
                    continue
            break

        if is_leaf:
            children: tuple[int, ...] = ()
            e_count = c * c
        else:
            picks, covered = _cz_cover(exceptional)
            child_ids = []
            kept = c * c - int(np.count_nonzero(covered))
            if kept * 2 < c * c:
                raise AssertionError("retained set fell below half the cube")
            for d, i, j in picks:
                sub = DyadicCube(
                    cube.level + d,
                    ((cube.index[0] << d) + i, (cube.index[1] << d) + j),
                    grid.box,
                )
                child_ids.append(visit(sub, depth + d))
            children = tuple(child_ids)
            e_count = kept

        nodes.append(SparseNode(cube, avg3, 0.0, e_count, c * c, children))
        pending.append((len(nodes) - 1, avg3, cube.side))
        return len(nodes) - 1

    visit(root, 0)

    # thresholds are reported at the final constant; exceptional sets only
    # shrink as D grows, so every retained cell still satisfies its bound
    d_final = state["d"]
    for pos, avg3, side in pending:
        n = nodes[pos]
        tau = d_final * smoothing_l * side ** beta * avg3
        nodes[pos] = SparseNode(n.cube, n.avg3, tau, n.e_count, n.cell_count,
                                n.children)
    return SparseFamily(grid, root, beta, smoothing_l, samples_per_octave,
                        0.5, d_final, "square_function", nodes)


def build_fractional_sparse_family(f: GridFunction, root: DyadicCube | None = None,
                                   ratio: float = 8.0, max_doublings: int = 20,
                                   max_depth: int = 12) -> SparseFamily:
    """Stopping cubes of the triple average, for sandwiching the fractional
    integral between sparse averaging operators.

    Children of a node are the maximal dyadic subcubes whose triple average
    exceeds `ratio` times the node's own; the ratio doubles adaptively until
    the children occupy at most half of the node.
    """
    if ratio <= 1.0:
        raise ValueError("stopping ratio must exceed 1")
    grid = f.grid
    if root is None:
        root = default_root(grid)
    _check_root(root, grid)
    dens = np.abs(f.values)

    def avg3(cube: DyadicCube) -> float:
        t = triple_cells(cube, grid)
        return float(np.sum(dens[t.slices()]) / t.count)

    state = {"ratio": float(ratio), "doublings": 0}
    nodes: list[SparseNode] = []

    def stopping(cube: DyadicCube, bar: float) -> list[DyadicCube]:
        out: list[DyadicCube] = []
        if (1 << (cube.level + 1)) > grid.points_per_axis:
            return out
        for ch in cube.children():
            if avg3(ch) > bar:
                out.append(ch)
            else:
                out.extend(stopping(ch, bar))
        return out

    def visit(cube: DyadicCube, depth: int) -> int:
        block = cube_cells(cube, grid)
        c = block.stops[0] - block.starts[0]
        base = avg3(cube)
        is_leaf = c <= 2 or depth >= max_depth
        picks: list[DyadicCube] = []
        if not is_leaf:
            while True:
                picks = stopping(cube, state["ratio"] * base)
                occupied = sum(cube_cells(p, grid).count for p in picks)
                if occupied * 2 <= c * c:
                    break
                state["ratio"] *= 2.0
                state["doublings"] += 1
                if state["doublings"] > max_doublings:
                    raise DominationBlowupError(
                        "stopping ratio blow-up: exceeded "
                        f"{max_doublings} doublings")
        child_ids = tuple(visit(p, depth + (p.level - cube.level)) for p in picks)
        occupied = sum(cube_cells(p, grid).count for p in picks)
        nodes.append(SparseNode(cube, base, 0.0, c * c - occupied, c * c,
                                child_ids))
        return len(nodes) - 1

    visit(root, 0)
    return SparseFamily(grid, root, 0.0, 0, 0, 0.5, state["ratio"],
                        "averaging", nodes)


def _check_root(root: DyadicCube, grid: Grid) -> None:
    if root.root != grid.box:
        raise ValueError("root cube does not live on the grid box")
    if any(a != 0 for a in root.shift_thirds):
        raise ValueError("the recursion root must be unshifted")
    own = cube_cells(root, grid)
    c = own.stops[0] - own.starts[0]
    if c < 4:
        raise ValueError("root cube must hold at least 4 cells per axis")
    if triple_cells(root, grid).count != 9 * own.count:
        raise ValueError("the triple of the root must lie inside the box")


# ---------------------------------------------------------------------------
# sparse averaging operators and certificates

def sparse_operator(family: SparseFamily, g: GridFunction, r: float,
                    beta: float, support: str = "cube") -> GridFunction:
    """l^r sparse averaging operator of the family applied to g.

    Every term uses the triple average of |g|.  With support "cube" the term
    (|Q|^(beta/n) <|g|>_{3Q})^r lands on Q, the convention of the domination
    certificate; with support "tripled" both the measure factor and the
    painted region switch to 3Q, the convention of the enlarged family whose
    sparseness constant drops by 3^-n.
    """
    _check_beta(beta)
    if support not in ("cube", "tripled"):
        raise ValueError("support must be 'cube' or 'tripled'")
    if g.grid != family.grid:
        raise ValueError("function grid does not match the family grid")
    if r < 1.0:
        raise ValueError("exponent r must be >= 1")
    grid = family.grid
    dens = np.abs(g.values)
    acc = np.zeros(grid.shape)
    for node in family.nodes:
        trip = triple_cells(node.cube, grid)
        avg = float(np.sum(dens[trip.slices()]) / trip.count)
        if support == "cube":
            size = node.cube.side
            region = cube_cells(node.cube, grid)
        else:
            size = 3.0 * node.cube.side
            region = trip
        acc[region.slices()] += (size ** beta * avg) ** r
    if r == 1.0:
        out = acc
    elif r == 2.0:
        out = np.sqrt(acc)
    else:
        out = acc ** (1.0 / r)
    return GridFunction(grid, out)


def verify_sparse(family: SparseFamily, f: GridFunction,
                  kernel: SphereKernel,
                  slack: float = 1e-6) -> SparseCertificate:
    """Re-check sparseness and the pointwise domination from scratch.

    The retained sets are rebuilt from the stored tree and must tile the
    root cube exactly; the square function side is recomputed by the
    full-grid operator on f * chi_{3Q0}, whose transform layout shares
    nothing with the windowed construction.
    """
    if family.kind != "square_function":
        raise ValueError("certificates apply to square-function families")
    grid = family.grid
    root_block = cube_cells(family.root, grid)
    rb = root_block.slices()

    paint = np.zeros(grid.shape, dtype=np.int64)
    eta_ratio = 1.0
    for node in family.nodes:
        block = cube_cells(node.cube, grid)
        mask = np.ones((block.stops[0] - block.starts[0],
                        block.stops[1] - block.starts[1]), dtype=np.int64)
        for cid in node.children:
            ch = cube_cells(family.nodes[cid].cube, grid)
            mask[ch.starts[0] - block.starts[0]:ch.stops[0] - block.starts[0],
                 ch.starts[1] - block.starts[1]:ch.stops[1] - block.starts[1]] = 0
        kept = int(mask.sum())
        if kept != node.e_count:
            raise AssertionError("stored retained count disagrees with the tree")
        paint[block.slices()] += mask
        eta_ratio = min(eta_ratio, kept / node.cell_count)
    inside = paint[rb]
    partition = bool(inside.min() == 1 and inside.max() == 1)

    bound2 = np.zeros(grid.shape)
    for node in family.nodes:
        bound2[cube_cells(node.cube, grid).slices()] += node.tau * node.tau
    bound = np.sqrt(bound2[rb])

    masked = np.zeros(grid.shape)
    t3 = triple_cells(family.root, grid).slices()
    masked[t3] = f.values[t3]
    mu = mollified_marcinkiewicz(GridFunction(grid, masked), kernel,
                                 family.beta, family.smoothing_l,
                                 family.samples_per_octave).values[rb]

    margin = float(np.min(bound * (1.0 + slack) - mu))
    ok = partition and eta_ratio >= family.eta and margin >= 0.0
    return SparseCertificate(eta_ratio, partition, margin, float(np.max(mu)),
                             float(np.max(bound)), family.d_used, ok)


# ---------------------------------------------------------------------------
# text export

def save_sparse_text(family: SparseFamily, path: str) -> None:
    """Write the family as `eta`/`d_used` header lines plus one line per
    cube: level, index per axis, retained-cell ratio."""
    lines = [
        "# sparse family over root cube "
        f"level {family.root.level} index {family.root.index}",
        f"eta {family.eta:.17g}",
        f"d_used {family.d_used:.17g}",
    ]
    for node in family.nodes:
        idx = " ".join(str(m) for m in node.cube.index)
        lines.append(f"{node.cube.level} {idx} {node.ratio:.17g}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_sparse_text(path: str) -> tuple[float, float, list[tuple[int, tuple[int, ...], float]]]:
    """Read a family file back as (eta, d_used, [(level, index, ratio)])."""
    eta = d_used = None
    entries: list[tuple[int, tuple[int, ...], float]] = []
    with open(path, encoding="ascii") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "eta":
                eta = float(parts[1])
            elif parts[0] == "d_used":
                d_used = float(parts[1])
            else:
                level = int(parts[0])
                entries.append((level, tuple(int(v) for v in parts[1:-1]),
                                float(parts[-1])))
    if eta is None or d_used is None:
        raise ValueError("family file is missing its eta or d_used header")
    return eta, d_used, entries
