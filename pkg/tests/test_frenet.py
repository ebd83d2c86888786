import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmsteer.errors import FrameDegeneracyError, IntegrationError
from swarmsteer.frenet import (AgentState2, AgentState3, clamp_curvature, perp, renormalize,
                               step_frame_2d, step_frame_3d, turning_rate)

finite = st.floats(-1e6, 1e6, allow_nan=False)


@pytest.mark.parametrize("v, want", [((1, 0), (0, 1)), ((0, 400), (-400, 0)), ((3, 4), (-4, 3))])
def test_perp_examples(v, want):
    assert np.array_equal(perp(v), want)


@given(finite, finite)
def test_perp_properties(a, b):
    p = perp((a, b))
    assert math.isclose(np.hypot(*p), np.hypot(a, b))
    assert abs(p @ np.array([a, b])) <= 1e-15 * (a * a + b * b)


def test_straight_line_step():
    s = AgentState2.from_heading((0, 0), 0.0, 200.0)
    s2 = step_frame_2d(s, 0.0, 1.0)
    assert np.allclose(s2.r, (200, 0), atol=1e-12)
    assert np.array_equal(s2.x, s.x)
    assert s2.nu == s.nu


def test_heading_unchanged_zero_curvature():
    s = AgentState2.from_heading((5, -3), 0.7, 60.0)
    for _ in range(1000):
        s = step_frame_2d(s, 0.0, 0.04)
    assert abs(s.heading - 0.7) < 1e-12


def test_circle_returns_to_start():
    nu, u, dt = 200.0, 0.001, 0.04
    period = 2 * math.pi / (nu * u)
    n = int(round(period / dt))
    s = AgentState2.from_heading((0, 0), 0.0, nu)
    pts = [s.r]
    # fine final step lands exactly on the period
    for _ in range(n - 1):
        s = step_frame_2d(s, u, dt)
        pts.append(s.r)
    s = step_frame_2d(s, u, period - (n - 1) * dt)
    assert np.linalg.norm(s.r) < 1e-3 * nu * period
    # radius 1/u around the centre (0, 1000)
    radii = np.linalg.norm(np.array(pts) - (0, 1000), axis=1)
    assert np.allclose(radii, 1000.0, rtol=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(1.0, 300.0), st.floats(-3.0, 3.0), st.integers(1, 400))
def test_constant_curvature_heading_oracle(rate, nu, th0, n):
    # turning rates up to 1 rad/s at the 25 Hz tick
    dt = 0.04
    u = rate / nu
    s = AgentState2.from_heading((0, 0), th0, nu)
    for _ in range(n):
        s = step_frame_2d(s, u, dt)
    want = th0 + nu * u * n * dt
    assert abs(math.remainder(s.heading - want, 2 * math.pi)) < 1e-6
    assert abs(s.x @ s.y) < 1e-9 and abs(np.linalg.norm(s.x) - 1) < 1e-9


def test_step_rejects_bad_dt():
    s = AgentState2.from_heading((0, 0), 0.0, 1.0)
    with pytest.raises(ValueError):
        step_frame_2d(s, 0.0, 0.0)


def test_nonfinite_step_names_agent():
    s = AgentState2.from_heading((0, 0), 0.0, 1.0)
    with pytest.raises(IntegrationError, match="agent 4"):
        step_frame_2d(s, math.inf, 0.1, agent=4)


def _planar3(r, theta, nu):
    c, s = math.cos(theta), math.sin(theta)
    return AgentState3.from_frame((*r, 0.0), (c, s, 0.0), (-s, c, 0.0), nu)


def test_3d_straight_line():
    s = _planar3((1, 2), 0.3, 50.0)
    s2 = step_frame_3d(s, (0.0, 0.0), 2.0)
    assert np.allclose(s2.r, s.r + 100.0 * s.x, atol=1e-12)


def test_3d_planar_consistency(rng):
    s2 = AgentState2.from_heading((10, 20), 0.4, 80.0)
    s3 = _planar3((10, 20), 0.4, 80.0)
    for _ in range(500):
        u = rng.uniform(-0.02, 0.02)
        s2 = step_frame_2d(s2, u, 0.04)
        s3 = step_frame_3d(s3, (u, 0.0), 0.04)
        assert abs(s3.r[2]) < 1e-9
        assert np.allclose(s3.r[:2], s2.r, atol=1e-9, rtol=0)
        assert np.allclose(s3.x[:2], s2.x, atol=1e-9, rtol=0)


def test_3d_frame_stays_right_handed(rng):
    s = AgentState3.from_frame((0, 0, 0), (1, 0, 0), (0, 1, 0), 60.0)
    for _ in range(10_000):
        s = step_frame_3d(s, rng.uniform(-0.05, 0.05, size=2), 0.04)
    m = np.array([s.x, s.y, s.z])
    assert abs(np.linalg.det(m) - 1.0) < 1e-9
    assert np.allclose(m @ m.T, np.eye(3), atol=1e-9)
    assert s.nu == 60.0


def test_renormalize_idempotent():
    x, y = np.array([0.6, 0.8]), np.array([-0.8, 0.6])
    x2, y2 = renormalize((x, y))
    assert np.allclose(x2, x, atol=1e-15) and np.allclose(y2, y, atol=1e-15)


def test_renormalize_resets_2d_normal():
    x = np.array([1.0, 1e-6]) / np.hypot(1.0, 1e-6)
    x2, y2 = renormalize((x, np.array([0.0, 1.0])))
    assert np.array_equal(y2, perp(x2))


def test_renormalize_3d_defect(rng):
    for _ in range(100):
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        x = q[:, 0] + 1e-4 * rng.normal(size=3)
        y = q[:, 1] + 1e-4 * rng.normal(size=3)
        xn, yn, zn = renormalize((x, y, q[:, 2]))
        assert np.allclose(xn, x / np.linalg.norm(x), atol=1e-15)
        m = np.array([xn, yn, zn])
        assert np.max(np.abs(m @ m.T - np.eye(3))) < 1e-14


def test_renormalize_degenerate():
    with pytest.raises(FrameDegeneracyError):
        renormalize((np.zeros(2), np.array([0.0, 1.0])))


@pytest.mark.parametrize("nu, u, want", [(200, 0.001, 11.4592), (60, 1 / 60, 57.2958), (60, 0.0, 0.0)])
def test_turning_rate(nu, u, want):
    assert turning_rate(nu, u) == pytest.approx(want, abs=5e-5)


def test_clamp():
    assert clamp_curvature(0.5, 10.0) == (0.5, False)
    assert clamp_curvature(-12.0, 10.0) == (-10.0, True)
