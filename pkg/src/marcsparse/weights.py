"""Muckenhoupt characteristics and weight diagnostics on dyadic scans.

Characteristics are suprema of per-cube products of averages.  The scan
covers the nine third-shifted dyadic lattices (any cube of the box is
comparable to a lattice cube, so the scan is an honest discretization of
the supremum over all cubes) down to cubes four cells wide by default;
below that the averages are dominated by cell quantization rather than by
the weight.  Every average is a plain cell mean of a power of the weight,
shared between the quantities that the algebraic identities relate, so
those identities hold to rounding and not merely to discretization.

Overhanging cubes of the shifted lattices are averaged over their visible
cells only, consistent with the geometry helpers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma_fn

from .functions import GridFunction, bmo_norm
from .geometry import Grid, block_sums, level_blocks, scan_lattices, spread_to_cells

__all__ = [
    "WeightCharacteristic",
    "ap_characteristic",
    "apq_characteristic",
    "characteristic_growth",
    "conjugated_ratios",
    "default_scan_level",
    "exp_bmo_weight",
    "gamma_constant",
    "john_nirenberg_probe",
    "power_rule_margin",
    "power_weight",
    "reverse_holder_pair",
    "reverse_holder_probe",
]


@dataclass(frozen=True)
class WeightCharacteristic:
    """Supremum of a per-cube product of averages, with its witness cube."""

    value: float
    argmax_shift: tuple[int, ...]
    argmax_level: int
    argmax_index: tuple[int, ...]
    cubes: int


def default_scan_level(grid: Grid) -> int:
    """Finest scanned level: cubes at least four cells wide."""
    return int(math.log2(grid.points_per_axis)) - 2


def _conjugate(p: float) -> float:
    if p <= 1.0:
        raise ValueError("exponent must exceed 1")
    return p / (p - 1.0)


def _check_weight(w: GridFunction) -> np.ndarray:
    v = w.values
    if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
        raise ValueError("weights must be finite and strictly positive")
    return v


def _scan_product(u: np.ndarray, v: np.ndarray, expo: float, grid: Grid,
                  max_level: int) -> WeightCharacteristic:
    """sup over scanned cubes of <u>_Q * <v>_Q^expo with argmax bookkeeping.

    Ties keep the first cube in scan order: lattices in their canonical
    shift order, levels ascending, indices lexicographic.
    """
    best = -math.inf
    meta = ((0,) * grid.dim, 0, (0,) * grid.dim)
    cubes = 0
    for lat in scan_lattices(grid.box, max_level):
        for level in range(max_level + 1):
            blocks = level_blocks(lat, level, grid)
            counts = blocks.counts()
            mu = block_sums(u, blocks.edges) / counts
            mv = block_sums(v, blocks.edges) / counts
            vals = mu * mv ** expo
            cubes += vals.size
            flat = int(np.argmax(vals))
            top = float(vals.flat[flat])
            if top > best:
                pos = np.unravel_index(flat, vals.shape)
                index = tuple(int(blocks.indices[ax][pos[ax]])
                              for ax in range(grid.dim))
                meta = (lat.shift_thirds, level, index)
                best = top
    return WeightCharacteristic(best, meta[0], meta[1], meta[2], cubes)


def ap_characteristic(weight: GridFunction, p: float,
                      max_level: int | None = None) -> WeightCharacteristic:
    """sup_Q <w>_Q <w^(1-p')>_Q^(p-1) over the shifted dyadic scan."""
    w = _check_weight(weight)
    grid = weight.grid
    if max_level is None:
        max_level = default_scan_level(grid)
    pc = _conjugate(p)
    return _scan_product(w, w ** (1.0 - pc), p - 1.0, grid, max_level)


def apq_characteristic(weight: GridFunction, p: float, q: float,
                       max_level: int | None = None) -> WeightCharacteristic:
    """sup_Q <w^q>_Q <w^(-p')>_Q^(q/p') over the shifted dyadic scan."""
    w = _check_weight(weight)
    if q <= 0.0:
        raise ValueError("q must be positive")
    grid = weight.grid
    if max_level is None:
        max_level = default_scan_level(grid)
    pc = _conjugate(p)
    return _scan_product(w ** q, w ** (-pc), q / pc, grid, max_level)


def power_rule_margin(weight: GridFunction, p: float, eps: float,
                       max_level: int | None = None) -> float:
    """Worst signed slack of the power rule over the scanned cubes.

    On each cube Q the quantity is
        (<w>_Q <w^(1-p')>_Q^(p-1))^eps - <w^eps>_Q <w^(eps(1-p'))>_Q^(p-1),
    nonnegative in exact arithmetic by Jensen applied to t^eps on both
    averages.  Overhang cubes with a single visible cell are skipped: both
    sides there are the same power product of one value, so the true margin
    is identically zero and its float evaluation only contributes rounding
    wobble.  On every other cube of a nonconstant weight the discrete gap
    dwarfs rounding, so callers may gate the minimum at exactly zero.
    """
    w = _check_weight(weight)
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    pc = _conjugate(p)
    grid = weight.grid
    if max_level is None:
        max_level = default_scan_level(grid)
    dual = w ** (1.0 - pc)
    we = w ** eps
    dual_e = w ** (eps * (1.0 - pc))
    worst = math.inf
    for lat in scan_lattices(grid.box, max_level):
        for level in range(max_level + 1):
            blocks = level_blocks(lat, level, grid)
            counts = blocks.counts()
            base = (block_sums(w, blocks.edges) / counts) \
                * (block_sums(dual, blocks.edges) / counts) ** (p - 1.0)
            powered = (block_sums(we, blocks.edges) / counts) \
                * (block_sums(dual_e, blocks.edges) / counts) ** (p - 1.0)
            gaps = (base ** eps - powered)[counts >= 2]
            if gaps.size:
                gap = float(np.min(gaps))
                if gap < worst:
                    worst = gap
    return worst


def characteristic_growth(make_weight, grid: Grid, p: float, q: float,
                          refinements: int = 2) -> float:
    """Characteristic on the grid over the same scan on a coarser grid.

    Point singularities that break the Muckenhoupt bounds are resolved by
    the cell size, not by deeper levels at fixed spacing, so the probe
    re-renders the weight (`make_weight(grid) -> GridFunction`) at 1/2^r
    of the resolution and compares.  Genuine weights stay near ratio 1; a
    ratio above 4 across two refinements marks a divergent supremum.
    """
    if grid.points_per_axis >> refinements < 8:
        raise ValueError("coarse grid too small for the growth probe")
    coarse_grid = Grid(grid.box, grid.points_per_axis >> refinements)
    fine = apq_characteristic(make_weight(grid), p, q).value
    coarse = apq_characteristic(make_weight(coarse_grid), p, q).value
    return fine / coarse


# ---------------------------------------------------------------------------
# bundled weights

def power_weight(grid: Grid, a: float) -> GridFunction:
    """|x|^a sampled at cell centers; the staggered grid never hits 0."""
    xx, yy = grid.coords()
    r = np.hypot(xx, yy)
    return GridFunction(grid, r ** a)


def exp_bmo_weight(symbol: GridFunction, lam: float,
                   theta: float = 0.0) -> GridFunction:
    """exp(lam * cos(theta) * b): the conjugation family of a bmo symbol.

    cos(theta) snaps to 0 below 1e-15 so the quarter turns return exactly
    the unperturbed weight.
    """
    c = math.cos(theta)
    if abs(c) < 1e-15:
        c = 0.0
    return GridFunction(symbol.grid, np.exp(lam * c * symbol.values))


# ---------------------------------------------------------------------------
# reverse Holder

def reverse_holder_pair(n: int, alpha: float, beta1: float) -> tuple[float, float]:
    """Reverse Holder exponent and constant from the halving parameters.

    alpha is the cell fraction allowed to exceed a level of the maximal
    function, beta1 the weight fraction it may carry.  The pair

        r = 1 - log(1 - beta1) / (2 log(2^n / alpha))
        C = (1 + 1 / (sqrt(1 - beta1) - beta1)) ^ (1/r)

    is valid whenever beta1 < sqrt(1 - beta1); C stays below 7 on the
    whole working range beta1 <= 1/4.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if not 0.0 < beta1 < 0.6:
        raise ValueError("beta1 must lie in (0, 0.6)")
    x = math.sqrt(1.0 - beta1)
    if x <= beta1:
        raise ValueError("beta1 too large for the denominator x - beta1")
    r = 1.0 - math.log1p(-beta1) / (2.0 * math.log(2.0 ** n / alpha))
    c = (1.0 + 1.0 / (x - beta1)) ** (1.0 / r)
    return r, c


def halving_fraction(ap_value: float, p: float, alpha: float) -> float:
    """beta1 = (1 - alpha)^p / [w]_p: the weight mass a small set can hold."""
    if ap_value < 1.0:
        raise ValueError("characteristics are never below 1")
    return (1.0 - alpha) ** p / ap_value


def reverse_holder_probe(weight: GridFunction, r: float,
                         max_level: int | None = None) -> float:
    """max over scanned cubes of <w^r>_Q^(1/r) / <w>_Q."""
    w = _check_weight(weight)
    if r <= 1.0:
        raise ValueError("reverse Holder exponent must exceed 1")
    grid = weight.grid
    if max_level is None:
        max_level = default_scan_level(grid)
    wr = w ** r
    worst = 0.0
    for lat in scan_lattices(grid.box, max_level):
        for level in range(max_level + 1):
            blocks = level_blocks(lat, level, grid)
            counts = blocks.counts()
            m1 = block_sums(w, blocks.edges) / counts
            mr = block_sums(wr, blocks.edges) / counts
            worst = max(worst, float(np.max(mr ** (1.0 / r) / m1)))
    return worst


# ---------------------------------------------------------------------------
# bmo exponential integrability

def john_nirenberg_probe(symbol: GridFunction, bound: float = 4.0,
                         max_level: int | None = None
                         ) -> tuple[float, dict[float, float]]:
    """Largest tested c with sup_Q <exp(c |b - b_Q| / ||b||)>_Q <= bound.

    Candidates run over a geometric grid; returns (best_c, table of c to
    supremum).  A constant symbol has no scale, so best_c is inf and the
    table is empty.
    """
    grid = symbol.grid
    if max_level is None:
        max_level = default_scan_level(grid)
    lattices = scan_lattices(grid.box, max_level)
    norm = bmo_norm(symbol, lattices)
    if norm == 0.0:
        return math.inf, {}

    b = symbol.values
    deviations = []
    for lat in lattices:
        for level in range(max_level + 1):
            blocks = level_blocks(lat, level, grid)
            counts = blocks.counts()
            means = block_sums(b, blocks.edges) / counts
            dev = np.abs(b - spread_to_cells(means, blocks.edges))
            deviations.append((dev, blocks.edges, counts))

    table: dict[float, float] = {}
    best = 0.0
    for j in range(-8, 5):
        c = 2.0 ** (j / 2.0)
        worst = 0.0
        for dev, edges, counts in deviations:
            ex = np.exp(np.minimum(c * dev / norm, 700.0))
            worst = max(worst, float(np.max(block_sums(ex, edges) / counts)))
        table[c] = worst
        if worst <= bound:
            best = max(best, c)
    return best, table


def conjugated_ratios(weight: GridFunction, symbol: GridFunction, p: float,
                      q: float, eps: float, n_theta: int = 8,
                      max_level: int | None = None) -> list[float]:
    """[w * exp(eps b cos theta)]_{p,q} / [w]_{p,q} over a circle of angles.

    The quarter-turn angles reproduce the unperturbed weight exactly, so
    the list always contains 1; as eps shrinks the whole list contracts
    to 1, which is the desk check of characteristic stability under small
    conjugations.
    """
    base = apq_characteristic(weight, p, q, max_level).value
    out = []
    for k in range(n_theta):
        theta = 2.0 * math.pi * k / n_theta
        factor = exp_bmo_weight(symbol, eps, theta)
        conj = GridFunction(weight.grid, weight.values * factor.values)
        out.append(apq_characteristic(conj, p, q, max_level).value / base)
    return out


# ---------------------------------------------------------------------------
# sharp small-beta constant

def gamma_constant(n: int, beta: float, p: float, q: float) -> float:
    """Normalizing constant of the fractional kernel bound, finite as beta
    approaches 0 and exactly 1 there in the plane."""
    if n < 1:
        raise ValueError("dimension must be positive")
    if not 0.0 <= beta < n:
        raise ValueError("beta must lie in [0, n)")
    if q <= 0.0:
        raise ValueError("q must be positive")
    pc = _conjugate(p)
    omega = 2.0 * math.pi ** (n / 2.0) / _gamma_fn(n / 2.0)
    head = omega + (q * omega / (pc * n)) ** (1.0 / pc) * beta
    tail = 2.0 ** (-beta) * math.pi ** (-n / 2.0) \
        * _gamma_fn((n - beta) / 2.0) / (2.0 * _gamma_fn((2.0 + beta) / 2.0))
    return head * tail
