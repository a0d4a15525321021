import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from accelmodes.core_map import (
    TWO_PI,
    CylinderPoint,
    MapParams,
    NotPeriodicError,
    OrbitLabel,
    TorusPoint,
    compose_period,
    compose_with_tangent,
    conjugate_point,
    cylinder_to_torus,
    determinant_drift,
    jacobian_torus,
    step_cylinder,
    step_torus,
    tangent_period,
    torus_to_cylinder,
    torus_trajectory,
    unwrap_winding,
    wrap,
    wrap_centered,
)
from accelmodes.gauss_sums import resonant_action

angles = st.floats(0.0, TWO_PI, exclude_max=True)
labels = st.sampled_from([OrbitLabel(p, m) for p in range(1, 11) for m in range(p) if math.gcd(p, m) == 1])


def close_angle(a, b, tol):
    return abs(wrap_centered(a - b)) < tol


def test_step_torus_examples():
    pt = step_torus(TorusPoint(1.0, 0.5), MapParams(0.0, 0.0))
    assert pt == TorusPoint(1.0, 1.5)
    pt = step_torus(TorusPoint(0.0, 0.0), MapParams(0.25, 0.0))
    assert pt.J == pytest.approx(math.pi / 2) and pt.theta == 0.0
    pt = step_torus(TorusPoint(0.0, math.pi / 2), MapParams(0.0, 0.5))
    assert pt.theta == pytest.approx(math.pi / 2) and pt.J == pytest.approx(0.5)


def test_angle_advanced_before_kick():
    # the kick uses the updated angle: sin(theta + J), not sin(theta)
    pt = step_torus(TorusPoint(1.0, 0.0), MapParams(0.0, 0.3))
    assert pt.J == pytest.approx(1.0 + 0.3 * math.sin(1.0))


@given(st.floats(-1e6, 1e6))
def test_wrap_range(x):
    y = wrap(x)
    assert 0.0 <= y < TWO_PI
    assert close_angle(y, x, 1e-6)


def test_wrap_tiny_negative():
    assert wrap(-1e-300) == 0.0 or wrap(-1e-300) < TWO_PI


@given(angles, angles, st.floats(-2, 2), st.floats(-3, 3))
def test_step_torus_reduced(J, theta, omega, k):
    pt = step_torus(TorusPoint(J, theta), MapParams(omega, k))
    assert 0.0 <= pt.J < TWO_PI and 0.0 <= pt.theta < TWO_PI


def test_trajectory_length():
    traj = torus_trajectory(TorusPoint(0.1, 0.2), MapParams(0.3, 0.4), 7)
    assert len(traj) == 8 and traj[0] == TorusPoint(0.1, 0.2)


@given(angles, angles, st.floats(-1, 1), st.floats(-2, 2))
def test_one_step_jacobian_unimodular(J, theta, omega, k):
    M = jacobian_torus(TorusPoint(J, theta), MapParams(omega, k))
    assert abs(np.linalg.det(M) - 1.0) < 1e-12


def test_one_step_jacobian_finite_difference():
    params = MapParams(0.17, 0.9)
    J, th, h = 1.3, 2.1, 1e-6
    M = jacobian_torus(TorusPoint(J, th), params)

    def f(J, th):
        pt = step_torus(TorusPoint(J, th), params)
        return np.array([pt.J, pt.theta])

    num = np.column_stack([(f(J + h, th) - f(J - h, th)) / (2 * h), (f(J, th + h) - f(J, th - h)) / (2 * h)])
    assert np.allclose(M, num, atol=1e-6)


def test_label_validation():
    assert str(OrbitLabel(5, 2)) == "(5,2)"
    assert OrbitLabel.parse("3,1") == OrbitLabel(3, 1)
    with pytest.raises(ValueError):
        OrbitLabel(4, 2)
    with pytest.raises(ValueError):
        OrbitLabel(0, 1)
    with pytest.raises(ValueError):
        OrbitLabel(3, -1)
    with pytest.raises(TypeError):
        OrbitLabel(2.0, 1)


def test_step_cylinder_identity_at_origin():
    pt = step_cylinder(0, CylinderPoint(0.0, 0.0), None, OrbitLabel(3, 1), 0.0, 0.0)
    assert pt == CylinderPoint(0.0, 0.0)


@given(labels, st.floats(-3, 3), angles, st.integers(0, 50), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_cylinder_map_period_p_in_time(label, L, theta, n, ea, ek):
    a = step_cylinder(n, CylinderPoint(L, theta), None, label, ea, ek)
    b = step_cylinder(n + label.p, CylinderPoint(L, theta), None, label, ea, ek)
    assert a.L == pytest.approx(b.L, abs=1e-12) and close_angle(a.theta, b.theta, 1e-12)


def test_five_two_circle_returns():
    label = OrbitLabel(5, 2)
    pt = CylinderPoint(resonant_action(5, 0), 0.0)
    for n in range(5):
        pt = step_cylinder(n, pt, None, label, 0.0, 0.0)
    assert pt.L == 0.0 and close_angle(pt.theta, 0.0, 1e-12)


@given(labels, st.integers(0, 9), angles)
def test_resonant_circles_fixed(label, s, theta):
    L = resonant_action(label.p, s)
    out = compose_period(CylinderPoint(L, theta), (0.0, 0.0), label)
    assert out.L == L and close_angle(out.theta, theta, 1e-12)


def test_two_one_hand_iteration():
    out = compose_period(CylinderPoint(-math.pi / 2, 0.3), (0.0, 0.0), OrbitLabel(2, 1))
    assert out.L == pytest.approx(-math.pi / 2) and out.theta == pytest.approx(0.3)


@given(st.floats(-3, 3), angles, st.floats(-0.5, 0.5), st.floats(-1, 1))
def test_p1_composition_is_one_step(L, theta, ea, ek):
    a = compose_period(CylinderPoint(L, theta), (ea, ek), OrbitLabel(1, 0))
    b = step_cylinder(0, CylinderPoint(L, theta), None, OrbitLabel(1, 0), ea, ek)
    assert a.L == pytest.approx(b.L, rel=1e-15, abs=1e-15) and close_angle(a.theta, b.theta, 1e-14)


def test_tangent_unperturbed_is_shear_power():
    for p in (1, 2, 5):
        M = tangent_period(CylinderPoint(0.4, 1.0), (0.0, 0.0), OrbitLabel(p, 1 if p > 1 else 0))
        assert np.allclose(M, np.linalg.matrix_power(np.array([[1.0, 0.0], [1.0, 1.0]]), p))


def test_p1_trace_at_fixed_point():
    k = 0.2
    theta = math.pi + math.asin(2 * math.pi * 0.01 / k)
    M = tangent_period(CylinderPoint(0.0, theta), (2 * math.pi * 0.01, k), OrbitLabel(1, 0))
    assert np.trace(M) == pytest.approx(2 + k * math.cos(theta))


def test_tangent_finite_difference():
    label, ea, ek = OrbitLabel(5, 2), -0.013, 0.1257
    L, th, h = 0.2, 1.1, 1e-6
    M = tangent_period(CylinderPoint(L, th), (ea, ek), label)

    def f(L, th):
        q = compose_period(CylinderPoint(L, th), (ea, ek), label)
        return np.array([q.L, q.theta])

    num = np.column_stack([(f(L + h, th) - f(L - h, th)) / (2 * h), (f(L, th + h) - f(L, th - h)) / (2 * h)])
    assert np.allclose(M, num, atol=1e-5)


def test_tangent_determinant_random():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(1000):
        p = int(rng.integers(1, 11))
        m = next(m for m in rng.permutation(p) if math.gcd(p, int(m)) == 1)
        _, _, M = compose_with_tangent(rng.uniform(-3, 3), rng.uniform(0, TWO_PI), OrbitLabel(p, int(m)),
                                       rng.uniform(-0.3, 0.3), rng.uniform(-1, 1))
        worst = max(worst, abs(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0] - 1))
    assert worst < 1e-12


@given(labels, angles, angles, st.floats(-0.3, 0.3), st.floats(-0.5, 0.5))
@settings(max_examples=50)
def test_torus_cylinder_agreement(label, J, theta, ea, ek):
    params = MapParams(label.m / label.p + ea / TWO_PI, ek)
    torus = torus_trajectory(TorusPoint(J, theta), params, 3 * label.p)
    cyl = torus_to_cylinder(torus[0], 0, label)
    for n in range(1, len(torus)):
        cyl = step_cylinder(n - 1, cyl, params, label, ea, ek)
        back = cylinder_to_torus(cyl, n, label)
        assert close_angle(back.J, torus[n].J, 1e-9) and close_angle(back.theta, torus[n].theta, 1e-9)


@given(angles, angles, st.floats(-1, 1), st.floats(-2, 2))
def test_conjugacy(J, theta, omega, k):
    a = conjugate_point(step_torus(TorusPoint(J, theta), MapParams(omega, -k)))
    b = step_torus(conjugate_point(TorusPoint(J, theta)), MapParams(omega, k))
    assert close_angle(a.J, b.J, 1e-12) and close_angle(a.theta, b.theta, 1e-12)


def test_unwrap_winding_fixed_point():
    k = 0.2
    params = MapParams(0.01, k)
    theta = math.pi + math.asin(2 * math.pi * 0.01 / k)
    traj = torus_trajectory(TorusPoint(0.0, theta), params, 1)
    assert unwrap_winding(traj, params) == 0


def test_unwrap_winding_circle():
    label = OrbitLabel(5, 2)
    params = MapParams(0.4, 0.0)
    L = resonant_action(5, 2)
    traj = torus_trajectory(TorusPoint(wrap(L), 0.7), params, 5)
    assert unwrap_winding(traj, params) == 2 + 0 * label.p


def test_unwrap_winding_rejects_open_trajectory():
    params = MapParams(0.123, 0.7)
    with pytest.raises(NotPeriodicError):
        unwrap_winding(torus_trajectory(TorusPoint(0.3, 0.4), params, 5), params)


def test_determinant_drift_short():
    k = 0.1
    theta = math.pi + math.asin(2 * math.pi * 0.005 / k)
    assert determinant_drift(TorusPoint(0.0, theta), MapParams(0.005, k), 20_000) < 1e-11
