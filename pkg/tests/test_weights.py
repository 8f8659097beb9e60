"""Tests for the Muckenhoupt characteristic scans and weight probes."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marcsparse.functions import GridFunction, log_abs_symbol
from marcsparse.geometry import Box, Grid
from marcsparse.weights import (WeightCharacteristic, ap_characteristic,
                                apq_characteristic, characteristic_growth,
                                conjugated_ratios, exp_bmo_weight,
                                gamma_constant, halving_fraction,
                                john_nirenberg_probe, power_rule_margin,
                                power_weight, reverse_holder_pair,
                                reverse_holder_probe)

GRID = Grid(Box(2, (0.0, 0.0), 2.0), 64)


# ---------------------------------------------------------------------------
# characteristics

def test_constant_weight_has_characteristic_exactly_one():
    one = GridFunction(GRID, np.ones(GRID.shape))
    res = ap_characteristic(one, 2.0)
    assert res.value == 1.0
    # first cube in scan order wins all the ties
    assert res.argmax_shift == (0, 0)
    assert res.argmax_level == 0
    assert res.argmax_index == (0, 0)
    assert res.cubes > 1000


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_constant_scaling_drops_out_exactly(p):
    # 4^(1-p') is a power of two for these p, so the product collapses to
    # 1.0 in floating point, not only in exact arithmetic
    four = GridFunction(GRID, np.full(GRID.shape, 4.0))
    assert ap_characteristic(four, p).value == 1.0


def test_characteristic_is_at_least_one():
    # Jensen: <w> * <w^(-1)> >= 1 on every cube
    w = power_weight(GRID, 0.3)
    assert ap_characteristic(w, 2.0).value >= 1.0
    assert apq_characteristic(w, 2.0, 4.0).value >= 1.0


@given(st.sampled_from([2.0 ** 4, 2.0 ** -3]))
@settings(max_examples=4, deadline=None)
def test_characteristic_scale_invariance(lam):
    w = power_weight(GRID, 0.3)
    scaled = GridFunction(GRID, lam * w.values)
    a = apq_characteristic(w, 2.0, 4.0).value
    b = apq_characteristic(scaled, 2.0, 4.0).value
    assert abs(a - b) <= 1e-12 * a


def test_apq_identity_with_the_q_power():
    # [w^q]_{1+q/p'} equals [w]_{p,q}: same cube averages, same product
    w = power_weight(GRID, 0.3)
    p, q = 2.0, 4.0
    pc = p / (p - 1.0)
    lhs = ap_characteristic(GridFunction(GRID, w.values ** q), 1.0 + q / pc)
    rhs = apq_characteristic(w, p, q)
    assert abs(lhs.value - rhs.value) <= 1e-10 * rhs.value
    assert (lhs.argmax_shift, lhs.argmax_level, lhs.argmax_index) == \
           (rhs.argmax_shift, rhs.argmax_level, rhs.argmax_index)


def test_apq_identity_with_the_dual_power():
    # [w^(-p')]_{1+p'/q} equals [w]_{p,q}^(p'/q)
    w = power_weight(GRID, 0.3)
    p, q = 2.0, 4.0
    pc = p / (p - 1.0)
    lhs = ap_characteristic(GridFunction(GRID, w.values ** (-pc)), 1.0 + pc / q)
    rhs = apq_characteristic(w, p, q).value ** (pc / q)
    assert abs(lhs.value - rhs) <= 1e-10 * rhs


def test_power_weight_membership_window():
    # |x|^a lies in the p,q class iff -n/q < a < n/p'; the growth probe
    # separates both sides of the window at two grid refinements
    inside = characteristic_growth(lambda g: power_weight(g, 0.3), GRID, 2.0, 4.0)
    assert inside < 2.0
    below = characteristic_growth(lambda g: power_weight(g, -0.9), GRID, 2.0, 4.0)
    above = characteristic_growth(lambda g: power_weight(g, 1.5), GRID, 2.0, 4.0)
    assert below > 4.0 and above > 4.0


def test_rejects_nonpositive_weights():
    bad = GridFunction(GRID, np.zeros(GRID.shape))
    with pytest.raises(ValueError):
        ap_characteristic(bad, 2.0)
    with pytest.raises(ValueError):
        apq_characteristic(power_weight(GRID, 0.3), 1.0, 4.0)


# ---------------------------------------------------------------------------
# bundled weights

def test_power_weight_never_hits_the_origin():
    w = power_weight(GRID, -0.9)
    assert np.all(np.isfinite(w.values)) and np.all(w.values > 0.0)


def test_quarter_turn_conjugation_is_the_identity():
    b = log_abs_symbol(GRID)
    w = exp_bmo_weight(b, 0.7, math.pi / 2.0)
    assert np.array_equal(w.values, np.ones(GRID.shape))


def test_conjugated_ratios_contain_the_exact_one():
    w = power_weight(GRID, 0.3)
    b = log_abs_symbol(GRID)
    ratios = conjugated_ratios(w, b, 2.0, 4.0, 0.2)
    assert 1.0 in ratios
    dev_big = max(abs(r - 1.0) for r in ratios)
    dev_small = max(abs(r - 1.0) for r in conjugated_ratios(w, b, 2.0, 4.0, 0.05))
    assert dev_small < dev_big


@pytest.mark.parametrize("eps", [0.25, 0.5, 0.75])
def test_power_rule_holds_on_every_scanned_cube(eps):
    # zero tolerance: the worst Jensen gap stays on the correct side
    w = power_weight(GRID, 0.5)
    assert power_rule_margin(w, 2.0, eps) >= 0.0


def test_power_rule_at_the_characteristic_level():
    w = power_weight(GRID, 0.5)
    base = ap_characteristic(w, 2.0).value
    powered = ap_characteristic(GridFunction(GRID, w.values ** 0.5), 2.0).value
    assert powered <= base ** 0.5


def test_power_rule_rejects_eps_outside_unit_interval():
    w = power_weight(GRID, 0.5)
    with pytest.raises(ValueError):
        power_rule_margin(w, 2.0, 1.0)


# ---------------------------------------------------------------------------
# reverse Holder

def test_reverse_holder_constant_stays_below_seven():
    for n in (1, 2, 3):
        for alpha in (1.0 / 8.0, 0.5):
            for beta1 in np.linspace(1.0 / 16.0, 0.25, 13):
                r, c = reverse_holder_pair(n, alpha, float(beta1))
                assert r > 1.0
                assert c <= 7.0


def test_reverse_holder_probe_respects_the_derived_pair():
    w = power_weight(GRID, 0.3)
    ap = ap_characteristic(w, 2.0).value
    beta1 = halving_fraction(ap, 2.0, 0.5)
    r, c = reverse_holder_pair(2, 0.5, beta1)
    assert reverse_holder_probe(w, r) <= c


def test_reverse_holder_probe_is_at_least_one():
    # Jensen again: the r-mean dominates the mean
    w = exp_bmo_weight(log_abs_symbol(GRID), 0.4)
    probe = reverse_holder_probe(w, 1.1)
    assert probe >= 1.0 - 1e-12


# ---------------------------------------------------------------------------
# exponential integrability

def test_john_nirenberg_probe_on_the_log_symbol():
    best, table = john_nirenberg_probe(log_abs_symbol(GRID))
    assert best > 0.0
    assert table[best] <= 4.0
    # suprema grow with c
    cs = sorted(table)
    sups = [table[c] for c in cs]
    assert all(a <= b + 1e-12 for a, b in zip(sups, sups[1:]))


def test_john_nirenberg_probe_on_a_constant_symbol():
    best, table = john_nirenberg_probe(GridFunction(GRID, np.full(GRID.shape, 3.0)))
    assert math.isinf(best) and table == {}


# ---------------------------------------------------------------------------
# the small-beta constant

def test_gamma_constant_limit_is_one_in_the_plane():
    assert gamma_constant(2, 0.0, 2.0, 4.0) == pytest.approx(1.0, abs=1e-14)


def test_gamma_constant_is_bounded_on_the_working_range():
    for beta in np.linspace(0.001, 0.999, 25):
        v = gamma_constant(2, float(beta), 2.0, 4.0)
        assert 0.5 < v < 2.0


def test_gamma_constant_rejects_bad_arguments():
    with pytest.raises(ValueError):
        gamma_constant(2, 2.5, 2.0, 4.0)
    with pytest.raises(ValueError):
        gamma_constant(2, 0.5, 1.0, 4.0)
