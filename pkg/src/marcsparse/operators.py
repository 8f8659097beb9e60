"""Discretized square functions, fractional integrals and related operators.

Discretization conventions, shared by every operator here:

* One geometric radius ladder r_k = (h/2) * 2^(k/s) per grid, with s samples
  per octave and K a multiple of s, covering everything from below the cell
  scale to the box diameter.  All ball and annulus boundaries are ladder
  points, so ring cell sets coincide bitwise across operators; cells whose
  center radius equals a ladder point exactly belong to the lower ring
  (searchsorted side='left' on the shared radii array).
* Square-function integrals in t are trapezoid sums in u = log t (du =
  ln(2)/s) plus, where the integrand continues past the last ladder point as
  an exact power, an analytic tail.
* Convolutions are circular FFT products with wrapped center-at-zero kernels
  on a padded M x M grid.  Kernels are masked to per-axis offsets |o| <= N-1
  (the only offsets realized by pairs of grid points), and M >= 2N + 2*margin
  where margin bounds the mollifier support, so the circular product equals
  the exact linear convolution on the read window.  Each discrete convolution
  carries one factor h^n.
* The near field of the fractional integral uses exact-cell subsampling
  (16 x 16 midpoints) for offsets within 3h plus an equal-area polar value
  for the self cell; plain midpoint values are used beyond.  The refinement
  only increases the result, which preserves the pointwise dominations the
  acceptance checks rely on.
* The mollifier profile is (80/pi) * max(0, 1 - (4|x|)^2)^4, dilated by
  2^m; rasters are renormalized to unit discrete mass and collapse to an
  exact delta once the support falls below the grid scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import irfft2, next_fast_len, rfft2

from .functions import GridFunction, SphereKernel
from .geometry import DyadicLattice, Grid, cube_cells, triple_cells

__all__ = [
    "RadiusLadder",
    "build_ladder",
    "marcinkiewicz",
    "commutator",
    "fractional_integral",
    "fractional_maximal",
    "dyadic_marcinkiewicz",
    "mollified_marcinkiewicz",
    "grand_maximal",
    "multiplier_envelope",
    "mollifier_profile",
    "mollifier_raster",
]


# ---------------------------------------------------------------------------
# radius ladder and wrapped-offset machinery

@dataclass(frozen=True)
class RadiusLadder:
    """Geometric radii r_k = r0 * 2^(k / samples_per_octave), k = 0..count."""

    r0: float
    samples_per_octave: int
    count: int  # inclusive top index, a multiple of samples_per_octave

    @property
    def radii(self) -> np.ndarray:
        k = np.arange(self.count + 1, dtype=np.float64)
        return self.r0 * np.exp2(k / self.samples_per_octave)

    @property
    def log_step(self) -> float:
        return math.log(2.0) / self.samples_per_octave

    def octave_of(self, k: int) -> int:
        """Floor of log2 of r_k; exact because r0 is a power of two here."""
        u0 = math.log2(self.r0)
        return math.floor(u0 + k / self.samples_per_octave)


def build_ladder(grid: Grid, samples_per_octave: int = 8) -> RadiusLadder:
    """Ladder from h/2 up to at least the box diameter, whole octaves."""
    if samples_per_octave < 2:
        raise ValueError("need at least 2 radius samples per octave")
    r0 = grid.spacing / 2.0
    diam = grid.box.side * math.sqrt(grid.dim)
    octaves = math.ceil(math.log2(diam / r0))
    return RadiusLadder(r0, samples_per_octave, samples_per_octave * octaves)


@dataclass(frozen=True)
class _OffsetPlan:
    """Wrapped offset grid shared by the FFT kernels of one evaluation.

    Works for the full grid and for square windows cropped out of it: only
    the cell count and spacing matter.  Kernels masked to per-axis offsets
    |o| <= n_pts - 1 plus wrap size M >= 2 * (n_pts + margin) make the
    circular product equal the exact linear convolution on the read window.
    """

    n_pts: int
    spacing: float
    m_size: int
    ox: np.ndarray       # (M,) offset coordinate per wrap index, axis 0
    oy: np.ndarray
    radius: np.ndarray   # (M, M) Euclidean offset length
    usable: np.ndarray   # (M, M) per-axis |o| <= n_pts-1, excludes nothing else
    shape: tuple[int, int]

    def pad_forward(self, values: np.ndarray) -> np.ndarray:
        buf = np.zeros((self.m_size, self.m_size))
        n = self.n_pts
        buf[:n, :n] = values
        return rfft2(buf)

    def read(self, spectrum: np.ndarray) -> np.ndarray:
        n = self.n_pts
        return irfft2(spectrum, s=(self.m_size, self.m_size))[:n, :n]


def _offset_plan(n_pts: int, spacing: float, margin_cells: int) -> _OffsetPlan:
    m = int(next_fast_len(2 * (n_pts + margin_cells), real=True))
    idx = np.arange(m)
    off = np.where(idx <= m // 2, idx, idx - m)
    ox = off * spacing
    oy = ox.copy()
    rad = np.hypot(ox[:, None], oy[None, :])
    usable = (np.abs(off)[:, None] <= n_pts - 1) & (np.abs(off)[None, :] <= n_pts - 1)
    return _OffsetPlan(n_pts, spacing, m, ox, oy, rad, usable, (m, m))


def _grid_plan(grid: Grid, margin_cells: int) -> _OffsetPlan:
    if grid.dim != 2:
        raise ValueError("FFT operators are implemented for dim == 2")
    return _offset_plan(grid.points_per_axis, grid.spacing, margin_cells)


def _ring_indices(plan: _OffsetPlan, ladder: RadiusLadder) -> np.ndarray:
    """Ring number of every usable nonzero offset; -1 elsewhere."""
    radii = ladder.radii
    out = np.full(plan.shape, -1, dtype=np.int64)
    mask = plan.usable & (plan.radius > 0)
    ring = np.searchsorted(radii, plan.radius[mask], side="left")
    if np.any(ring > ladder.count):
        raise AssertionError("ladder does not cover the box diameter")
    out[mask] = ring
    return out


def _cumulative_ball_spectra(plan: _OffsetPlan, ring_idx: np.ndarray,
                             values: np.ndarray, ladder: RadiusLadder,
                             wanted: np.ndarray | None = None) -> np.ndarray:
    """rfft2 of the ball kernels sum_{ring <= k} values, one per ladder point.

    `wanted[k]` can deselect snapshots that the caller will never read; the
    running kernel is still accumulated ring by ring so the kept snapshots
    are identical to the dense computation.
    """
    m = plan.m_size
    half = m // 2 + 1
    out = np.zeros((ladder.count + 1, m, half), dtype=np.complex128)
    kern = np.zeros(plan.shape)
    for k in range(ladder.count + 1):
        sel = ring_idx == k
        if np.any(sel):
            kern[sel] = values[sel]
        if wanted is None or wanted[k]:
            out[k] = rfft2(kern)
    return out


def _ring_population(ring_idx: np.ndarray, ladder: RadiusLadder) -> np.ndarray:
    pop = np.zeros(ladder.count + 1, dtype=np.int64)
    ks, counts = np.unique(ring_idx[ring_idx >= 0], return_counts=True)
    pop[ks] = counts
    return pop


def _angular_values(plan: _OffsetPlan, kernel: SphereKernel) -> np.ndarray:
    ox, oy = np.broadcast_arrays(plan.ox[:, None], plan.oy[None, :])
    return kernel.eval(ox, oy)


# ---------------------------------------------------------------------------
# mollifier

def mollifier_profile(r: np.ndarray) -> np.ndarray:
    """Radial bump (80/pi) * max(0, 1 - (4r)^2)^4; unit mass, support r <= 1/4."""
    u = np.maximum(0.0, 1.0 - (4.0 * r) ** 2)
    return (80.0 / np.pi) * u ** 4


def mollifier_raster(plan: _OffsetPlan, scale_m: int):
    """Raster of the dilated mollifier, or None when it degenerates to a delta.

    Renormalized so the discrete mass is exactly 1; convolving with None is
    the identity, which is the exact limit rather than an approximation.
    """
    h = plan.spacing
    support = 2.0 ** scale_m / 4.0
    if support <= h / 2.0:
        return None
    rad = plan.radius
    inside = plan.usable & (rad < support)
    if np.count_nonzero(inside) <= 1:
        return None
    vals = np.zeros(plan.shape)
    scale = 2.0 ** (-scale_m)
    vals[inside] = mollifier_profile(rad[inside] * scale) * scale ** 2
    mass = float(np.sum(vals)) * h ** 2
    vals /= mass
    return rfft2(vals)


# ---------------------------------------------------------------------------
# square function and commutator

def _check_beta(beta: float) -> None:
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")


def marcinkiewicz(f: GridFunction, kernel: SphereKernel, beta: float,
                  symbol: GridFunction | None = None,
                  samples_per_octave: int = 8) -> GridFunction:
    """Fractional square function; with `symbol` b, its commutator variant.

    Ball sums F(x, t_k) over the shared radius ladder enter a trapezoid sum
    in log t of |F|^2 / t^2 plus the exact analytic tail  |F(T)|^2 / (2 T^2)
    for t beyond the last ladder point, where F is constant.
    """
    _check_beta(beta)
    grid = f.grid
    ladder = build_ladder(grid, samples_per_octave)
    plan = _grid_plan(grid, 0)
    ring_idx = _ring_indices(plan, ladder)

    values = np.zeros(plan.shape)
    nz = ring_idx >= 0
    values[nz] = _angular_values(plan, kernel)[nz] * plan.radius[nz] ** (beta - 1.0)
    spectra = _cumulative_ball_spectra(plan, ring_idx, values, ladder)

    h2 = grid.spacing ** 2
    fhat = plan.pad_forward(f.values)
    bfhat = None
    if symbol is not None:
        if symbol.grid != grid:
            raise ValueError("symbol grid mismatch")
        bfhat = plan.pad_forward(symbol.values * f.values)

    radii = ladder.radii
    acc = np.zeros(grid.shape)
    tail = None
    for k in range(ladder.count + 1):
        fk = plan.read(spectra[k] * fhat) * h2
        if bfhat is not None:
            fk = symbol.values * fk - plan.read(spectra[k] * bfhat) * h2
        contrib = fk * fk / radii[k] ** 2
        w = 0.5 if k in (0, ladder.count) else 1.0
        acc += w * contrib
        if k == ladder.count:
            tail = contrib / 2.0
    return GridFunction(grid, np.sqrt(ladder.log_step * acc + tail))


def commutator(f: GridFunction, kernel: SphereKernel, beta: float,
               symbol: GridFunction, samples_per_octave: int = 8) -> GridFunction:
    """Square function of [b, .]: the symbol is multiplied inside the balls."""
    return marcinkiewicz(f, kernel, beta, symbol=symbol,
                         samples_per_octave=samples_per_octave)


# ---------------------------------------------------------------------------
# fractional integral and maximal function

def fractional_integral(f: GridFunction, beta: float) -> GridFunction:
    """Convolution with |z|^(beta - n), near field refined.

    Offsets within 3h are replaced by 16 x 16 subcell midpoint averages and
    the self cell by the equal-area polar value 2 pi rho^beta / beta / h^2
    with rho = h / sqrt(pi); both refinements only increase the kernel.
    """
    _check_beta(beta)
    grid = f.grid
    if grid.dim != 2:
        raise ValueError("implemented for dim == 2")
    plan = _grid_plan(grid, 0)
    h = grid.spacing
    rad = plan.radius

    kern = np.zeros(plan.shape)
    nz = plan.usable & (rad > 0)
    kern[nz] = rad[nz] ** (beta - 2.0)

    near = plan.usable & (rad > 0) & (rad <= 3.0 * h)
    ii, jj = np.nonzero(near)
    sub = (np.arange(16) + 0.5) / 16.0 - 0.5
    dx, dy = np.meshgrid(sub * h, sub * h, indexing="ij")
    for i, j in zip(ii, jj):
        zx = plan.ox[i] + dx
        zy = plan.oy[j] + dy
        kern[i, j] = float(np.mean(np.hypot(zx, zy) ** (beta - 2.0)))

    rho = h / math.sqrt(math.pi)
    kern[0, 0] = 2.0 * math.pi * rho ** beta / beta / (h * h)

    fhat = plan.pad_forward(f.values)
    out = plan.read(rfft2(kern) * fhat) * h ** 2
    return GridFunction(grid, out)


def fractional_maximal(f: GridFunction, beta: float) -> GridFunction:
    """max over dyadic radii r of r^(beta - n) * sum_{|x-y| <= r} |f| h^n."""
    _check_beta(beta)
    grid = f.grid
    ladder = build_ladder(grid)
    plan = _grid_plan(grid, 0)
    ring_idx = _ring_indices(plan, ladder)

    s = ladder.samples_per_octave
    reach = grid.box.side * 2.0 * math.sqrt(grid.dim)
    ks = []
    m = 1  # radius h = r0 * 2, ladder index s
    while True:
        ks.append(m * s)
        if ladder.r0 * 2.0 ** m >= reach or m * s >= ladder.count:
            break
        m += 1
    wanted = np.zeros(ladder.count + 1, dtype=bool)
    wanted[ks] = True

    ind = np.zeros(plan.shape)
    ind[plan.usable] = 1.0
    # the dyadic maximal ball includes the cell of x itself
    ring_idx_self = ring_idx.copy()
    ring_idx_self[0, 0] = 0
    spectra = _cumulative_ball_spectra(plan, ring_idx_self, ind, ladder, wanted)

    h2 = grid.spacing ** 2
    fhat = plan.pad_forward(np.abs(f.values))
    radii = ladder.radii
    out = np.zeros(grid.shape)
    for k in ks:
        ball = plan.read(spectra[k] * fhat) * h2
        np.maximum(out, radii[k] ** (beta - grid.dim) * ball, out=out)
    return GridFunction(grid, out)


# ---------------------------------------------------------------------------
# scale-decomposed square functions

def _octave_square_function(f: GridFunction, kernel: SphereKernel, beta: float,
                            smoothing_l: int | None,
                            samples_per_octave: int) -> GridFunction:
    """Common core of the scale-decomposed square functions.

    Annulus kernels (ball difference over one octave, divided by the inner
    radius) are optionally mollified at scale 2^(octave - l); per-octave
    integrals over one doubling of t glue into a single flat trapezoid over
    the whole ladder because adjacent octaves share their boundary sample.
    """
    _check_beta(beta)
    grid = f.grid
    ladder = build_ladder(grid, samples_per_octave)
    s = ladder.samples_per_octave

    margin = 0
    if smoothing_l is not None:
        if smoothing_l < 1:
            raise ValueError("smoothing parameter must be >= 1")
        top_octave = ladder.octave_of(ladder.count - s)
        margin = math.ceil(2.0 ** (top_octave - smoothing_l) / 4.0 / grid.spacing)
    plan = _grid_plan(grid, margin)
    ring_idx = _ring_indices(plan, ladder)
    pop = _ring_population(ring_idx, ladder)

    values = np.zeros(plan.shape)
    nz = ring_idx >= 0
    values[nz] = _angular_values(plan, kernel)[nz] * plan.radius[nz] ** (beta - 1.0)
    spectra = _cumulative_ball_spectra(plan, ring_idx, values, ladder)

    h2 = grid.spacing ** 2
    fhat = plan.pad_forward(f.values)
    radii = ladder.radii
    top = ladder.count - s
    acc = np.zeros(grid.shape)
    moll_cache: dict[int, np.ndarray | None] = {}
    for k in range(top + 1):
        if not np.any(pop[k + 1:k + s + 1]):
            continue  # annulus holds no cells: the term is exactly zero
        ann_hat = (spectra[k + s] - spectra[k]) / radii[k]
        if smoothing_l is not None:
            mscale = ladder.octave_of(k) - smoothing_l
            if mscale not in moll_cache:
                moll_cache[mscale] = mollifier_raster(plan, mscale)
            phat = moll_cache[mscale]
            if phat is None:
                term = plan.read(ann_hat * fhat) * h2
            else:
                term = plan.read(ann_hat * phat * fhat) * h2 * h2
        else:
            term = plan.read(ann_hat * fhat) * h2
        w = 0.5 if k in (0, top) else 1.0
        acc += w * (term * term)
    return GridFunction(grid, np.sqrt(ladder.log_step * acc))


def dyadic_marcinkiewicz(f: GridFunction, kernel: SphereKernel, beta: float,
                         samples_per_octave: int = 8) -> GridFunction:
    """Square function summed over octave annuli with unit t-normalization."""
    return _octave_square_function(f, kernel, beta, None, samples_per_octave)


def mollified_marcinkiewicz(f: GridFunction, kernel: SphereKernel, beta: float,
                            smoothing_l: int, samples_per_octave: int = 8) -> GridFunction:
    """Octave square function with each annulus mollified l octaves below it."""
    return _octave_square_function(f, kernel, beta, smoothing_l, samples_per_octave)


def grand_maximal(f: GridFunction, kernel: SphereKernel, beta: float,
                  smoothing_l: int, max_level: int,
                  samples_per_octave: int = 8) -> GridFunction:
    """sup over dyadic Q containing x of sup_Q of the square function of
    f restricted to the complement of 3Q.

    Reference implementation: one full square-function evaluation per cube;
    the sparse pipeline uses its own windowed variant instead.
    """
    grid = f.grid
    lat = DyadicLattice(grid.box, max_level)
    out = np.zeros(grid.shape)
    for q in lat.all_cubes():
        cells = triple_cells(q, grid)
        masked = f.values.copy()
        masked[cells.slices()] = 0.0
        v = _octave_square_function(GridFunction(grid, masked), kernel, beta,
                                    smoothing_l, samples_per_octave)
        own = cube_cells(q, grid).slices()
        peak = float(np.max(v.values[own]))
        np.maximum(out[own], peak, out=out[own])
    return GridFunction(grid, out)


# ---------------------------------------------------------------------------
# Fourier-side envelope

def multiplier_envelope(kernel: SphereKernel, beta: float, j: int, t: float,
                        xi: tuple[float, float]) -> complex:
    """Fourier transform of one annulus kernel at frequency xi.

    Direct oscillatory polar quadrature with the kernel's own angular grid
    refined in whole multiples (the piecewise-linear kernel is evaluated
    exactly at refined nodes) and midpoint radial sampling dense enough for
    the phase 2 pi r |xi|; convention: exp(-2 pi i <x, xi>).
    """
    _check_beta(beta)
    if not 1.0 <= t <= 2.0:
        raise ValueError("t must lie in [1, 2]")
    a = 2.0 ** j * t
    b = 2.0 * a
    xi = np.asarray(xi, dtype=np.float64)
    xi_abs = float(np.hypot(xi[0], xi[1]))

    base = kernel.angular_count
    mtheta = base * int(max(1, math.ceil(24.0 * b * max(xi_abs, 1e-300) / base)))
    theta = 2.0 * np.pi * np.arange(mtheta) / mtheta
    omega = kernel.eval(np.cos(theta), np.sin(theta))

    nr = int(max(48, math.ceil(24.0 * max(1.0, a * xi_abs))))
    rr = a + (b - a) * (np.arange(nr) + 0.5) / nr
    dr = (b - a) / nr

    dot = np.cos(theta)[None, :] * xi[0] + np.sin(theta)[None, :] * xi[1]
    total = 0.0 + 0.0j
    chunk = max(1, int(2e6) // mtheta)
    for lo in range(0, nr, chunk):
        r = rr[lo:lo + chunk, None]
        phase = np.exp(-2.0j * np.pi * r * dot)
        ang = phase @ omega  # sum over theta of Omega * phase
        total += np.sum(r[:, 0] ** beta * ang)
    dtheta = 2.0 * np.pi / mtheta
    return complex(total * dr * dtheta / a)
