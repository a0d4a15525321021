import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from accelmodes.core_map import TWO_PI, MapParams, OrbitLabel
from accelmodes.farey import Omega, convergents, endpoints, farey_algorithm
from accelmodes.islands import AreaConfig, area_numerical
from accelmodes.orbit_finder import find_stable_orbit
from accelmodes.spectroscopy import (
    ExperimentalPath,
    PhysicalSetup,
    critical_kick,
    ep_linear,
    ep_physical,
    intersects_subcritical,
    mode_acceleration,
    mode_table,
    observable_modes,
    passes_appro,
    predict_mode,
    quantally_relevant,
    quantum_relevance,
)

F = Fraction
W39 = Omega.rational(F(39, 100))


def conditions_hold(ep, label, eps, b=6.0):
    t = abs(eps) * ep.kick
    big_omega = float(ep.omega) + ep.offset(eps * ep.kick)
    return abs(label.m / label.p - big_omega) < t / (TWO_PI * math.sqrt(label.p)) and t < b * label.p ** -1.5


def test_ep_linear_examples():
    vertical = ep_linear(W39, math.inf)
    assert vertical.offset(0.3) == 0.0 and vertical.omega_at(-0.2) == pytest.approx(0.39)
    ep = ep_linear(W39, 1.0, kick=1.0)
    assert ep.omega_at(0.05) == pytest.approx(0.44)
    assert ep.omega_at(-0.05) == pytest.approx(0.34)
    assert ep.offset(0.0) == 0.0
    with pytest.raises(ValueError):
        ep_linear(W39, 0.0)
    with pytest.raises(ValueError):
        ExperimentalPath(W39, phi=lambda t: t + 1.0)


def test_one_zero_at_point_39():
    # right arm: Omega = 0.39 + t can never come within t / (2 pi) of 0
    ep = ep_linear(W39, 1.0)
    left, right = intersects_subcritical(ep, OrbitLabel(1, 0))
    assert not right.exists
    # left arm: Omega = 0.39 - t does enter the (1, 0) tongue, for
    # 0.39 / (1 + 1/(2 pi)) < t < 0.39 / (1 - 1/(2 pi))
    assert left.exists
    beta = 1 / TWO_PI
    assert left.abs_lo * ep.kick == pytest.approx(0.39 / (1 + beta))
    assert left.abs_hi * ep.kick == pytest.approx(0.39 / (1 - beta))
    assert conditions_hold(ep, OrbitLabel(1, 0), left.representative)


@given(
    st.integers(1, 12).flatmap(lambda p: st.tuples(st.just(p), st.integers(0, p - 1))).filter(lambda x: math.gcd(*x) == 1),
    st.fractions(F(1, 100), F(99, 100)),
    st.floats(0.5, 200.0),
)
@settings(max_examples=150, deadline=None)
def test_window_matches_sampled_conditions(pm, w, alpha):
    label = OrbitLabel(*pm)
    ep = ep_linear(Omega.rational(w), alpha)
    arms = intersects_subcritical(ep, label)
    t_max = critical_kick(label)
    for arm, sign in zip(arms, (-1, 1)):
        eps = sign * np.linspace(0, t_max, 2001)[1:-1] / ep.kick
        inside = np.array([conditions_hold(ep, label, e) for e in eps])
        if not arm.exists:
            assert not inside.any()
            continue
        lo, hi = sorted(abs(x) for x in arm.epsilon_window)
        strict = (np.abs(eps) > lo * (1 + 1e-9)) & (np.abs(eps) < hi * (1 - 1e-9))
        outside = (np.abs(eps) < lo * (1 - 1e-9)) | (np.abs(eps) > hi * (1 + 1e-9))
        assert inside[strict].all() and not inside[outside].any()


@pytest.mark.parametrize("alpha", [5.0, 13.0, 14.1, 30.0, math.inf])
def test_own_fraction_both_arms_iff_steep(alpha):
    ep = ep_linear(Omega.rational(F(2, 5)), alpha)
    pred = predict_mode(ep, F(2, 5))
    assert pred.side == "vertex"
    assert pred.both_arms == (alpha > TWO_PI * math.sqrt(5))


@given(st.integers(2, 40), st.floats(0.5, 60.0))
@settings(deadline=None)
def test_wrong_side_never_on_opposite_arm(q, alpha):
    # a ratio to the right of omega meets the left arm only if the arm is steeper
    # than the tongue margin, i.e. alpha > 2 pi sqrt(p)
    omega = Omega.rational(F(1, 3))
    r = F(1, 3) + F(1, 3 * q + 1) / q
    r = F(r.numerator, r.denominator)
    if not 0 < r < 1:
        return
    label = OrbitLabel(r.denominator, r.numerator)
    left, _ = intersects_subcritical(ep_linear(omega, alpha), label)
    if alpha <= TWO_PI * math.sqrt(label.p):
        assert not left.exists


def test_golden_vertical_path():
    ep = ep_linear(Omega.golden(), math.inf)
    got = [m.ratio for m in observable_modes(ep, 144)]
    fibs = [F(2, 3), F(3, 5), F(5, 8), F(8, 13), F(13, 21), F(21, 34), F(34, 55), F(55, 89), F(89, 144)]
    assert got[-len(fibs):] == fibs
    assert set(got[:-len(fibs)]) <= {F(0), F(1), F(1, 2)}


def test_modes_are_farey_endpoints_and_convergents_included():
    for omega in (Omega.golden(), Omega.pi_minus_3(), Omega.parse("0.390152")):
        for alpha in (math.inf, 20.0):
            ep = ep_linear(omega, alpha)
            table = mode_table(ep, 120)
            ends = set(endpoints(farey_algorithm(omega, max_denominator=120)))
            assert {m.ratio for m in table} == ends
            observed = {m.ratio for m in table if m.observable}
            for c in convergents(omega, 120):
                pred = predict_mode(ep, c)
                if pred.passes_2cond and pred.passes_appro:
                    assert c in observed


def test_side_consistency():
    ep = ep_linear(Omega.parse("0.390152"), 10.0)
    for m in mode_table(ep, 200):
        if not m.passes_2cond:
            continue
        steep = 1 / ep.alpha > 1 / (TWO_PI * math.sqrt(m.label.p))
        same = m.arms[0] if m.side == "left" else m.arms[1]
        assert same.exists or steep


def test_pi_minus_three_filter_recorded():
    ep = ep_linear(Omega.pi_minus_3(), math.inf)
    table = mode_table(ep, 106)
    observed = [m for m in table if m.observable]
    assert F(1, 7) in {m.ratio for m in observed} and F(15, 106) in {m.ratio for m in observed}
    for m in table:
        if not m.observable:
            assert not (m.passes_appro and m.passes_2cond)


def test_rational_terminates():
    ep = ep_linear(Omega.rational(F(2, 5)), 30.0)
    table = mode_table(ep, 1000)
    assert table[-1].ratio == F(2, 5)
    assert observable_modes(ep, 1000)[-1].label == OrbitLabel(5, 2)


def test_jumping_index_and_acceleration():
    ep = ep_linear(Omega.rational(F(2, 5)), 30.0)
    pred = predict_mode(ep, F(2, 5))
    assert pred.jumping_index == int(math.copysign(1, pred.epsilon)) * 2
    om = ep.omega_at(pred.epsilon)
    assert pred.acceleration == pytest.approx(mode_acceleration(om, pred.label, pred.epsilon))


def test_mode_acceleration_examples():
    assert mode_acceleration(0.4, OrbitLabel(5, 2), 0.3) == 0.0
    assert mode_acceleration(0.39, OrbitLabel(5, 2), -0.1) == pytest.approx(0.6283, abs=1e-4)
    assert mode_acceleration(0.39, OrbitLabel(5, 2), 0.1) == pytest.approx(-0.6283, abs=1e-4)
    with pytest.raises(ValueError):
        mode_acceleration(0.39, OrbitLabel(5, 2), 0.0)


def test_quantum_relevance():
    assert quantum_relevance(0.0, 0.1) == 0.0
    with pytest.raises(ValueError):
        quantum_relevance(1.0, 0.0)
    # along a path ktilde = eps k the area ~ sqrt|eps|, so A/|eps| ~ |eps|^{-1/2}
    ratios = [quantum_relevance(math.sqrt(e), e) for e in (1e-2, 1e-4)]
    assert ratios[1] / ratios[0] == pytest.approx(10.0)
    label, params = OrbitLabel(5, 2), MapParams(0.4 - 0.013 / TWO_PI, 0.1257)
    stable, _ = find_stable_orbit(params, label)
    area = area_numerical(params, label, stable.points[0], AreaConfig(grid=40, iterations=400)).area
    r = quantum_relevance(area, 0.1257 / (0.8 * math.pi))
    assert 0 < r < math.inf
    assert quantally_relevant(area, 1e-3) and not quantally_relevant(0.0, 1e-3)


def test_physical_path_slope():
    setup = PhysicalSetup(G=4 * math.pi / 894e-9, g=9.81, mass=2.207e-25)
    assert 0 < setup.omega_value < 1
    ep = ep_physical(setup)
    h = 1e-7
    assert (ep.offset(h) - ep.offset(-h)) / (2 * h) == pytest.approx(1 / setup.alpha, rel=1e-6)
    assert ep.offset(0.0) == 0.0
    table = mode_table(ep, 30)
    assert table


def test_passes_appro_vertical():
    ep = ep_linear(Omega.golden(), math.inf)
    assert passes_appro(ep, OrbitLabel(8, 5), b=TWO_PI)
    # |3/4 - 0.618| = 0.132 exceeds 1/16
    assert not passes_appro(ep, OrbitLabel(4, 3), b=TWO_PI)
