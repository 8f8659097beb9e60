"""Boxes, staggered grids, dyadic lattices and exact cube/cell arithmetic.

Conventions the rest of the package relies on:

* A Box is the axis-aligned cube  prod_i [c_i - L, c_i + L].  A Grid samples
  a box at N^n cell centers offset by h/2 from the cell corners, so no sample
  ever coincides with the box center or with a dyadic cube boundary.
* A dyadic cube is addressed by (level, index) relative to a root box and an
  optional per-axis third shift.  Every boundary coordinate is produced by
  the single expression  lo + shift + m * side  evaluated in one place; since
  side(level-1) == 2 * side(level) holds bitwise and rounding commutes with
  scaling by powers of two, parents and children agree on shared boundaries
  to the last bit and cell rasterizations partition exactly, with no epsilon
  tuning anywhere.
* Third shifts translate the lattice by {0, 1/3, 2/3} of the box side.
  2^k/3 is never an integer, so at every level the three shifted lattices
  realize boundary offsets of {0, 1/3, 2/3} times the cube side; that is
  what makes "max over the 3^n shifted lattices" a faithful surrogate for
  the sup over all cubes.  Shifted cubes may overhang the box; averages are
  then taken over the visible cells only.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Box",
    "Grid",
    "DyadicCube",
    "DyadicLattice",
    "CellBlock",
    "LevelBlocks",
    "cube_cells",
    "triple_cells",
    "cube_average",
    "scan_lattices",
    "level_blocks",
    "block_sums",
    "spread_to_cells",
]


@dataclass(frozen=True)
class Box:
    """Axis-aligned cube of side 2 * half_width centered at `center`."""

    dim: int
    center: tuple[float, ...]
    half_width: float

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if len(self.center) != self.dim:
            raise ValueError("center has wrong dimension")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "half_width", float(self.half_width))

    @property
    def side(self) -> float:
        return 2.0 * self.half_width

    @property
    def lo(self) -> tuple[float, ...]:
        return tuple(c - self.half_width for c in self.center)

    @property
    def hi(self) -> tuple[float, ...]:
        return tuple(c + self.half_width for c in self.center)


@dataclass(frozen=True)
class Grid:
    """Uniform staggered grid: N^dim cells, samples at cell centers."""

    box: Box
    points_per_axis: int

    def __post_init__(self) -> None:
        n = self.points_per_axis
        if n < 8:
            raise ValueError("points_per_axis must be >= 8")
        if n & (n - 1):
            raise ValueError("points_per_axis must be a power of two")

    @property
    def dim(self) -> int:
        return self.box.dim

    @property
    def spacing(self) -> float:
        return self.box.side / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    def axis_coords(self, axis: int) -> np.ndarray:
        """Cell-center coordinates along one axis."""
        h = self.spacing
        lo = self.box.lo[axis]
        return lo + (np.arange(self.points_per_axis) + 0.5) * h

    def coords(self) -> list[np.ndarray]:
        """Meshgrid ('ij' indexing) of cell-center coordinates."""
        axes = [self.axis_coords(i) for i in range(self.dim)]
        return list(np.meshgrid(*axes, indexing="ij"))

    def cell_of_boundary(self, b: float, axis: int = 0) -> int:
        """First cell index along `axis` whose center is >= b (may be out of range).

        Half-open convention: cells of [b1, b2) are exactly
        range(cell_of_boundary(b1), cell_of_boundary(b2)).
        """
        u = (b - self.box.lo[axis]) / self.spacing
        return int(math.ceil(u - 0.5))


def _cube_side(root: Box, level: int) -> float:
    return root.side * 2.0 ** (-level)


def _shift_abs(root: Box, thirds: int) -> float:
    # thirds in {0, 1, 2}; the division by 3 rounds once, identically each call
    return (thirds * root.side) / 3.0


def _boundary(root: Box, shift_thirds: tuple[int, ...], level: int, axis: int, m: int) -> float:
    side = _cube_side(root, level)
    return root.lo[axis] + (_shift_abs(root, shift_thirds[axis]) + m * side)


def _index_range(thirds: int, level: int) -> tuple[int, int]:
    """Inclusive index range of cubes intersecting the root box interior."""
    if thirds == 0:
        return 0, (1 << level) - 1
    m_lo = -(((thirds << level) + 2) // 3)  # = -ceil(thirds * 2^level / 3)
    return m_lo, m_lo + (1 << level)


@dataclass(frozen=True)
class DyadicCube:
    """Cube (level, index) in a rooted, optionally third-shifted, dyadic lattice."""

    level: int
    index: tuple[int, ...]
    root: Box
    shift_thirds: tuple[int, ...] = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.shift_thirds is None:
            object.__setattr__(self, "shift_thirds", (0,) * self.root.dim)
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if len(self.index) != self.root.dim or len(self.shift_thirds) != self.root.dim:
            raise ValueError("index/shift dimension mismatch")
        object.__setattr__(self, "index", tuple(int(m) for m in self.index))
        object.__setattr__(self, "shift_thirds", tuple(int(s) for s in self.shift_thirds))
        for m, a in zip(self.index, self.shift_thirds):
            if a not in (0, 1, 2):
                raise ValueError("shift_thirds entries must be 0, 1 or 2")
            # shifted cubes may overhang or miss the box entirely (their cell
            # blocks are then empty); only the unshifted lattice tiles it
            # exactly, so only there is the index range a hard invariant
            if a == 0 and not 0 <= m < (1 << self.level):
                raise ValueError("cube index outside the root box")

    @property
    def dim(self) -> int:
        return self.root.dim

    @property
    def side(self) -> float:
        return _cube_side(self.root, self.level)

    @property
    def measure(self) -> float:
        return self.side ** self.dim

    @property
    def lo(self) -> tuple[float, ...]:
        return tuple(
            _boundary(self.root, self.shift_thirds, self.level, i, self.index[i])
            for i in range(self.dim)
        )

    @property
    def hi(self) -> tuple[float, ...]:
        return tuple(
            _boundary(self.root, self.shift_thirds, self.level, i, self.index[i] + 1)
            for i in range(self.dim)
        )

    @property
    def center(self) -> tuple[float, ...]:
        return tuple((a + b) / 2 for a, b in zip(self.lo, self.hi))

    def children(self) -> list["DyadicCube"]:
        """The 2^dim children, in lexicographic offset order."""
        out = []
        for offs in itertools.product((0, 1), repeat=self.dim):
            idx = tuple(2 * m + o for m, o in zip(self.index, offs))
            out.append(DyadicCube(self.level + 1, idx, self.root, self.shift_thirds))
        return out

    def parent(self) -> "DyadicCube":
        if self.level == 0:
            raise ValueError("root cube has no parent")
        # floor division: indices of shifted lattices can be negative
        idx = tuple(m // 2 for m in self.index)
        return DyadicCube(self.level - 1, idx, self.root, self.shift_thirds)

    def contains_cube(self, other: "DyadicCube") -> bool:
        """Ancestor test within the same lattice (same root and shift)."""
        if other.root != self.root or other.shift_thirds != self.shift_thirds:
            raise ValueError("cubes from different lattices")
        if other.level < self.level:
            return False
        d = other.level - self.level
        return all((m >> d) == s for m, s in zip(other.index, self.index))


@dataclass(frozen=True)
class DyadicLattice:
    """All dyadic cubes up to max_level rooted at `root`, with one third shift."""

    root: Box
    max_level: int
    shift_thirds: tuple[int, ...] = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.shift_thirds is None:
            object.__setattr__(self, "shift_thirds", (0,) * self.root.dim)
        object.__setattr__(self, "shift_thirds", tuple(int(s) for s in self.shift_thirds))
        if self.max_level < 0:
            raise ValueError("max_level must be >= 0")

    def cubes(self, level: int):
        """Yield every cube of one level that meets the root box interior."""
        ranges = [
            range(*(lambda lo_hi: (lo_hi[0], lo_hi[1] + 1))(_index_range(a, level)))
            for a in self.shift_thirds
        ]
        for idx in itertools.product(*ranges):
            yield DyadicCube(level, idx, self.root, self.shift_thirds)

    def all_cubes(self):
        for level in range(self.max_level + 1):
            yield from self.cubes(level)


def scan_lattices(box: Box, max_level: int) -> list[DyadicLattice]:
    """The 3^dim third-shifted lattices, unshifted first, in lex shift order."""
    out = []
    for thirds in itertools.product((0, 1, 2), repeat=box.dim):
        out.append(DyadicLattice(box, max_level, thirds))
    return out


@dataclass(frozen=True)
class CellBlock:
    """A rectangular block of grid cells, [start, stop) per axis."""

    starts: tuple[int, ...]
    stops: tuple[int, ...]

    @property
    def count(self) -> int:
        c = 1
        for a, b in zip(self.starts, self.stops):
            c *= max(b - a, 0)
        return c

    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(a, b) for a, b in zip(self.starts, self.stops))


def _block_for(cube: DyadicCube, grid: Grid, expand: int = 0) -> CellBlock:
    n = grid.points_per_axis
    starts, stops = [], []
    for i in range(cube.dim):
        lo = _boundary(cube.root, cube.shift_thirds, cube.level, i, cube.index[i] - expand)
        hi = _boundary(cube.root, cube.shift_thirds, cube.level, i, cube.index[i] + 1 + expand)
        a = grid.cell_of_boundary(lo, i)
        b = grid.cell_of_boundary(hi, i)
        starts.append(min(max(a, 0), n))
        stops.append(min(max(b, 0), n))
    return CellBlock(tuple(starts), tuple(stops))


def cube_cells(cube: DyadicCube, grid: Grid) -> CellBlock:
    """Grid cells whose centers lie in the cube (half-open), clipped to the box."""
    if cube.root != grid.box:
        raise ValueError("cube root does not match the grid box")
    if (1 << cube.level) > grid.points_per_axis:
        raise ValueError("unresolvable cube: side finer than the grid spacing")
    return _block_for(cube, grid)


def triple_cells(cube: DyadicCube, grid: Grid) -> CellBlock:
    """Cells of the concentric triple 3Q, via the same boundary arithmetic."""
    if cube.root != grid.box:
        raise ValueError("cube root does not match the grid box")
    if (1 << cube.level) > grid.points_per_axis:
        raise ValueError("unresolvable cube: side finer than the grid spacing")
    return _block_for(cube, grid, expand=1)


def _fold_sum(values: np.ndarray, cube: DyadicCube, grid: Grid) -> float:
    """Cell sum over the cube by the canonical child-fold order.

    The left fold over lexicographically ordered children makes the identity
    parent_sum == fold(child sums) hold bitwise, which in turn makes cube
    averages consistent across levels with no tolerance.
    """
    if (1 << (cube.level + 1)) > grid.points_per_axis:
        block = _block_for(cube, grid)
        if block.count == 0:
            return 0.0
        return float(np.sum(values[block.slices()]))
    total = 0.0
    for child in cube.children():
        total = total + _fold_sum(values, child, grid)
    return total


def cube_average(f, cube: DyadicCube) -> float:
    """Mean of f over the cube's visible cells (midpoint rule).

    For cubes inside the box the cell count is a power of two per axis, so
    this equals cell_sum * h^n / |Q| exactly; overhanging shifted cubes are
    averaged over their visible part only.
    """
    grid = f.grid
    block = cube_cells(cube, grid)
    if block.count == 0:
        raise ValueError("cube has no grid cells inside the box")
    return _fold_sum(f.values, cube, grid) / block.count


@dataclass(frozen=True)
class LevelBlocks:
    """Per-axis cell edges for all same-level cubes of a lattice with >= 1 cell."""

    level: int
    edges: tuple[np.ndarray, ...]    # len(edges[i]) == n_blocks_i + 1, increasing
    indices: tuple[np.ndarray, ...]  # lattice index m of each block, per axis

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(e) - 1 for e in self.edges)

    def widths(self, axis: int) -> np.ndarray:
        return np.diff(self.edges[axis])

    def counts(self) -> np.ndarray:
        """Cell count per cube, as a dense array over the block grid."""
        out = np.ones((1,) * len(self.edges), dtype=np.int64)
        for ax in range(len(self.edges)):
            w = self.widths(ax).astype(np.int64)
            shape = [1] * len(self.edges)
            shape[ax] = len(w)
            out = out * w.reshape(shape)
        return out


def level_blocks(lattice: DyadicLattice, level: int, grid: Grid) -> LevelBlocks:
    if (1 << level) > grid.points_per_axis:
        raise ValueError("unresolvable level for this grid")
    n = grid.points_per_axis
    edges, indices = [], []
    for axis in range(grid.dim):
        a = lattice.shift_thirds[axis]
        m_lo, m_hi = _index_range(a, level)
        ms = np.arange(m_lo, m_hi + 2)
        raw = np.array(
            [grid.cell_of_boundary(
                _boundary(lattice.root, lattice.shift_thirds, level, axis, int(m)), axis)
             for m in ms],
            dtype=np.int64,
        )
        e = np.clip(raw, 0, n)
        keep = np.nonzero(np.diff(e) > 0)[0]  # drop blocks clipped to nothing
        edges.append(np.concatenate([e[keep], [e[keep[-1] + 1]]]))
        indices.append(ms[keep])
    return LevelBlocks(level, tuple(edges), tuple(indices))


def block_sums(values: np.ndarray, edges: tuple[np.ndarray, ...]) -> np.ndarray:
    """Sums of `values` over the rectangular blocks defined by per-axis edges."""
    out = values
    for ax, e in enumerate(edges):
        c = np.cumsum(out, axis=ax)
        pad = [(0, 0)] * out.ndim
        pad[ax] = (1, 0)
        c = np.pad(c, pad)
        upper = np.take(c, e[1:], axis=ax)
        lower = np.take(c, e[:-1], axis=ax)
        out = upper - lower
    return out


def spread_to_cells(block_values: np.ndarray, edges: tuple[np.ndarray, ...]) -> np.ndarray:
    """Distribute one value per block back onto its cells (inverse of averaging)."""
    out = block_values
    for ax, e in enumerate(edges):
        out = np.repeat(out, np.diff(e), axis=ax)
    return out
