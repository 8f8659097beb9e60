"""Sampled fields, sphere kernels, norms and the bundled test inputs.

A GridFunction is a float64 array of samples at the cell centers of a Grid.
Text serialization writes one header line "n N L" followed by the samples in
row-major order with %.17g, which round-trips float64 exactly; only grids on
origin-centered boxes are serialized, so the header determines the geometry.

SphereKernel stores M equispaced unit-circle samples and evaluates by
periodic piecewise-linear interpolation in angle.  Construction projects the
samples onto mean zero (the compatibility condition every kernel here must
satisfy); sup_norm records the max absolute sample after projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Box, Grid, block_sums, cube_average, level_blocks, spread_to_cells

__all__ = [
    "GridFunction",
    "SphereKernel",
    "BmoSymbol",
    "lp_norm",
    "bmo_norm",
    "make_test_kernels",
    "make_test_field",
    "gaussian_field",
    "disk_field",
    "two_bump_field",
    "spike_field",
    "log_abs_symbol",
    "snap_to_grid",
    "save_text",
    "load_text",
]

TEST_FIELD_IDS = ("gaussian", "disk", "two_bump", "spike")
TEST_KERNEL_IDS = ("cos", "sin2", "rough")


@dataclass(frozen=True)
class GridFunction:
    """Samples of a scalar field at the cell centers of a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "values", v)

    def scaled(self, c: float) -> "GridFunction":
        return GridFunction(self.grid, c * self.values)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        if other.grid != self.grid:
            raise ValueError("grid mismatch")
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        if other.grid != self.grid:
            raise ValueError("grid mismatch")
        return GridFunction(self.grid, self.values - other.values)


def save_text(f: GridFunction, path: str) -> None:
    """Write "n N L" then the samples row-major, one per line, %.17g."""
    box = f.grid.box
    if any(c != 0.0 for c in box.center):
        raise ValueError("text format stores origin-centered boxes only")
    with open(path, "w") as fh:
        fh.write(f"{box.dim} {f.grid.points_per_axis} {box.half_width:.17g}\n")
        flat = f.values.reshape(-1)
        fh.write("\n".join(f"{x:.17g}" for x in flat))
        fh.write("\n")


def load_text(path: str) -> GridFunction:
    with open(path) as fh:
        head = fh.readline().split()
        if len(head) != 3:
            raise ValueError("bad header, expected 'n N L'")
        n, npts, half = int(head[0]), int(head[1]), float(head[2])
        data = np.loadtxt(fh, dtype=np.float64).reshape((npts,) * n)
    grid = Grid(Box(n, (0.0,) * n, half), npts)
    return GridFunction(grid, data)


# ---------------------------------------------------------------------------
# sphere kernels

@dataclass(frozen=True)
class SphereKernel:
    """Mean-zero kernel on the unit circle, piecewise linear in angle."""

    name: str
    samples: np.ndarray  # values at angles 2*pi*j/M

    def __post_init__(self) -> None:
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 1 or len(s) < 8:
            raise ValueError("need at least 8 angular samples")
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_samples(cls, name: str, raw: np.ndarray) -> "SphereKernel":
        raw = np.asarray(raw, dtype=np.float64)
        return cls(name, raw - np.mean(raw))

    @property
    def angular_count(self) -> int:
        return len(self.samples)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def mean(self) -> float:
        return float(np.mean(self.samples))

    def eval(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Evaluate at the direction of (x, y); 0-homogeneous by construction."""
        m = self.angular_count
        theta = np.arctan2(y, x)
        pos = np.mod(theta * (m / (2.0 * np.pi)), m)
        j0 = np.floor(pos).astype(np.int64)
        j0 = np.minimum(j0, m - 1)  # guard pos == m after mod rounding
        frac = pos - j0
        t = self.samples
        return (1.0 - frac) * t[j0] + frac * t[(j0 + 1) % m]


def make_test_kernels(angular_count: int = 512) -> dict[str, SphereKernel]:
    """The bundled kernels: smooth even, smooth odd-harmonic, and rough sign."""
    m = angular_count
    theta = 2.0 * np.pi * np.arange(m) / m
    cos_t = np.cos(theta)
    kernels = {
        "cos": SphereKernel.from_samples("cos", cos_t),
        "sin2": SphereKernel.from_samples("sin2", np.sin(2.0 * theta)),
    }
    # sign(cos): samples that land numerically on the jump are snapped to 0
    # so the raw sample mean vanishes exactly (the true mean is 0).
    c = cos_t.copy()
    c[np.abs(c) < 1e-12] = 0.0
    kernels["rough"] = SphereKernel.from_samples("rough", np.sign(c))
    return kernels


# ---------------------------------------------------------------------------
# norms

def lp_norm(f: GridFunction, p: float, weight: GridFunction | None = None) -> float:
    """Discrete L^p norm, optionally weighted: (sum |f|^p w h^n)^(1/p)."""
    if not p >= 1:
        raise ValueError("p must be >= 1")
    a = np.abs(f.values)
    if weight is not None:
        if weight.grid != f.grid:
            raise ValueError("weight grid mismatch")
        if np.any(weight.values <= 0):
            raise ValueError("weight samples must be positive")
    if p == 1:
        core = a
    elif p == 2:
        core = a * a
    else:
        core = a ** p
    if weight is not None:
        core = core * weight.values
    s = float(np.sum(core)) * f.grid.cell_volume
    if p == 1:
        return s
    if p == 2:
        return math.sqrt(s)
    if p == 3:
        # cbrt (unlike s ** (1/3)) commutes with power-of-two scalings
        return float(np.cbrt(s))
    return s ** (1.0 / p)


def bmo_norm(b: GridFunction, lattices) -> float:
    """Max over lattice cubes of the mean absolute deviation from the cube mean.

    Cube means use visible cells only, so the value is invariant under
    b -> b + const and scales linearly in b; the scan is vectorized per
    level with prefix sums shared across all cubes of that level.
    """
    lattices = list(lattices)
    if not lattices:
        raise ValueError("need at least one lattice")
    grid = b.grid
    best = 0.0
    for lat in lattices:
        for level in range(lat.max_level + 1):
            blocks = level_blocks(lat, level, grid)
            counts = blocks.counts().astype(np.float64)
            sums = block_sums(b.values, blocks.edges)
            means = sums / counts
            mean_map = spread_to_cells(means, blocks.edges)
            dev = np.abs(b.values - mean_map)
            dev_means = block_sums(dev, blocks.edges) / counts
            m = float(np.max(dev_means))
            if m > best:
                best = m
    return best


@dataclass(frozen=True)
class BmoSymbol:
    """A commutator symbol together with its scanned oscillation norm."""

    field: GridFunction
    norm: float

    @classmethod
    def from_field(cls, field: GridFunction, lattices) -> "BmoSymbol":
        return cls(field, bmo_norm(field, lattices))


# ---------------------------------------------------------------------------
# bundled test fields

def snap_to_grid(grid: Grid, point) -> tuple[float, ...]:
    """Nearest cell center; keeps analytically radial inputs exactly radial."""
    out = []
    for i, c in enumerate(point):
        ax = grid.axis_coords(i)
        out.append(float(ax[int(np.argmin(np.abs(ax - c)))]))
    return tuple(out)


def gaussian_field(grid: Grid, center=(0.5, 0.5), sigma: float = 0.25,
                   amplitude: float = 1.0) -> GridFunction:
    c = snap_to_grid(grid, center)
    xs = grid.coords()
    r2 = sum((x - ci) ** 2 for x, ci in zip(xs, c))
    return GridFunction(grid, amplitude * np.exp(-r2 / (2.0 * sigma * sigma)))


def disk_field(grid: Grid, radius: float = 1.0, center=None) -> GridFunction:
    xs = grid.coords()
    if center is None:
        center = (0.0,) * grid.dim
    r2 = sum((x - ci) ** 2 for x, ci in zip(xs, center))
    return GridFunction(grid, (r2 <= radius * radius).astype(np.float64))


def two_bump_field(grid: Grid) -> GridFunction:
    a = gaussian_field(grid, center=(0.35, 0.35), sigma=0.12, amplitude=1.0)
    b = gaussian_field(grid, center=(0.70, 0.65), sigma=0.10, amplitude=0.8)
    return GridFunction(grid, a.values + b.values)


def spike_field(grid: Grid, at=(0.5, 0.5)) -> GridFunction:
    """Unit mass concentrated in the single cell nearest `at`."""
    c = snap_to_grid(grid, at)
    idx = []
    for i, ci in enumerate(c):
        ax = grid.axis_coords(i)
        idx.append(int(np.argmin(np.abs(ax - ci))))
    v = np.zeros(grid.shape)
    v[tuple(idx)] = 1.0 / grid.cell_volume
    return GridFunction(grid, v)


def make_test_field(grid: Grid, field_id: str) -> GridFunction:
    if field_id == "gaussian":
        return gaussian_field(grid)
    if field_id == "disk":
        return disk_field(grid)
    if field_id == "two_bump":
        return two_bump_field(grid)
    if field_id == "spike":
        return spike_field(grid)
    raise ValueError(f"unknown test field {field_id!r}")


def log_abs_symbol(grid: Grid) -> GridFunction:
    """log|x| sampled at cell centers (never hits the origin on a staggered grid)."""
    xs = grid.coords()
    r2 = sum(x * x for x in xs)
    return GridFunction(grid, 0.5 * np.log(r2))
