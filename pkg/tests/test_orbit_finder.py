import math

import numpy as np
import pytest

from accelmodes.core_map import (
    TWO_PI,
    CylinderPoint,
    MapParams,
    OrbitLabel,
    compose_period_array,
    cylinder_eps,
    unwrap_winding,
    wrap_centered,
)
from accelmodes.orbit_finder import (
    DegenerateCircleError,
    critical_border,
    find_orbit,
    find_stable_orbit,
    measured_halfwidths,
    scaled_overlay,
    scan_tongue,
)
from accelmodes.perturbation import tongue_margin

FIG2 = (OrbitLabel(5, 2), MapParams(0.4 - 0.013 / TWO_PI, 0.1257))


def test_p1_both_roots():
    params, label = MapParams(0.01, 0.2), OrbitLabel(1, 0)
    x = math.asin(0.1 * math.pi)
    unstable = find_orbit(params, label, CylinderPoint(0.0, -x))
    stable = find_orbit(params, label, CylinderPoint(0.0, math.pi + x))
    assert unstable.trace == pytest.approx(2 + 0.2 * math.cos(x))
    assert not unstable.stable
    assert stable.trace == pytest.approx(2 - 0.2 * math.cos(x))
    assert stable.stable
    assert math.sin(unstable.points[0].theta) == pytest.approx(-0.1 * math.pi, abs=1e-12)
    assert stable.residual < 1e-12


def test_degenerate_circle():
    with pytest.raises(DegenerateCircleError):
        find_orbit(MapParams(0.4, 0.0), OrbitLabel(5, 2), CylinderPoint(0.0, 0.1))


def test_fig2_orbit_stable_and_audited():
    label, params = FIG2
    stable, _ = find_stable_orbit(params, label)
    assert stable is not None and stable.stable and abs(stable.trace) < 2
    assert len(stable.points) == 5
    assert unwrap_winding(list(stable.points) + [stable.points[0]], params, tol=1e-8) == 2


def test_stability_spot_check():
    label, params = FIG2
    stable, _ = find_stable_orbit(params, label)
    ea, ek = cylinder_eps(params, label)
    c = stable.points[0]
    L, th = np.array([c.J + 1e-6]), np.array([c.theta])
    worst = 0.0
    for _ in range(20_000):  # 1e5 map steps
        L, th = compose_period_array(L, th, label, ea, ek)
        worst = max(worst, abs(wrap_centered(L[0] - c.J)), abs(wrap_centered(th[0] - c.theta)))
    assert worst < 1e-2


def test_vertex_and_wedge():
    for label in (OrbitLabel(1, 0), OrbitLabel(2, 1), OrbitLabel(3, 1)):
        centre = label.m / label.p
        ratios = []
        for k in (0.005, 0.02):
            w = 1.25 * tongue_margin(label, k)
            scan = scan_tongue(label, (centre - w, centre + w), (k, k), (101, 1))
            row = scan.omegas[scan.stable[0]]
            # the stable run is centred on m/p
            assert abs(0.5 * (row.min() + row.max()) - centre) < 2 * (scan.omegas[1] - scan.omegas[0])
            ratios.append(measured_halfwidths(scan)[0] / k)
        # an angle, not a cusp: width / ktilde stays at (2 pi)^-1 p^-1/2
        for r in ratios:
            assert r == pytest.approx(1 / (TWO_PI * math.sqrt(label.p)), rel=0.05)


def test_scan_shape_and_determinism():
    label = OrbitLabel(2, 1)
    a = scan_tongue(label, (0.45, 0.55), (0.05, 0.3), (7, 3))
    b = scan_tongue(label, (0.45, 0.55), (0.05, 0.3), (7, 3))
    assert a.stable.shape == (3, 7)
    assert np.array_equal(a.stable, b.stable)
    assert np.array_equal(np.nan_to_num(a.trace, nan=9.0), np.nan_to_num(b.trace, nan=9.0))
    assert len(list(a.rows())) == 21
    with pytest.raises(ValueError):
        scan_tongue(label, (0.45, 0.55), (0.05, 0.3), (0, 3))


def test_scan_parallel_matches_serial():
    label = OrbitLabel(1, 0)
    a = scan_tongue(label, (-0.02, 0.02), (0.05, 0.1), (5, 2))
    b = scan_tongue(label, (-0.02, 0.02), (0.05, 0.1), (5, 2), threads=2)
    assert np.array_equal(a.stable, b.stable)


def test_overlap_cell_exists():
    omegas, ks = (0.38, 0.44), (0.8, 1.2)
    s21 = scan_tongue(OrbitLabel(2, 1), omegas, ks, (7, 3))
    s31 = scan_tongue(OrbitLabel(3, 1), omegas, ks, (7, 3))
    assert (s21.stable & s31.stable).any()


def test_scaled_overlay():
    assert scaled_overlay([]) == []
    label = OrbitLabel(1, 0)
    scan = scan_tongue(label, (-0.01, 0.01), (0.02, 0.05), (201, 2))
    for row in scaled_overlay([scan]):
        assert row["scaled_ktilde"] / row["scaled_right"] == pytest.approx(TWO_PI, rel=0.05)
        assert row["scaled_ktilde"] / row["scaled_left"] == pytest.approx(-TWO_PI, rel=0.05)


def test_critical_border_errors():
    with pytest.raises(ValueError):
        critical_border(OrbitLabel(1, 0), 1.0, 1.0)
    # a ray that starts beyond the border has no stable orbit to follow
    with pytest.raises(RuntimeError):
        critical_border(OrbitLabel(1, 0), 0.1405, 30.0, ktilde_min=20.0, steps=3)
