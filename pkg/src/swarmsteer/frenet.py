"""Unit-mass self-steering particles moving in natural Frenet frames.

Units are millimetres, seconds and radians throughout; degrees appear only
in :func:`turning_rate`.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._backend import kernels
from .errors import FrameDegeneracyError, IntegrationError

log = logging.getLogger(__name__)

DEFAULT_U_MAX = 10.0  # 1/mm


def perp(v):
    """Counter-clockwise quarter turn of a planar vector."""
    return np.array([-v[1], v[0]], dtype=float)


@dataclass(frozen=True, eq=False)
class AgentState2:
    r: np.ndarray
    x: np.ndarray
    y: np.ndarray
    nu: float

    @classmethod
    def from_heading(cls, r, theta, nu):
        c, s = math.cos(theta), math.sin(theta)
        return cls(np.array(r, dtype=float), np.array([c, s]), np.array([-s, c]), float(nu))

    @property
    def heading(self):
        return math.atan2(self.x[1], self.x[0])

    @property
    def velocity(self):
        return self.nu * self.x


@dataclass(frozen=True, eq=False)
class AgentState3:
    r: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    nu: float

    @classmethod
    def from_frame(cls, r, x, y, nu):
        f = kernels.renorm3(*x, *y)
        return cls(np.array(r, dtype=float), np.array(f[0:3]), np.array(f[3:6]),
                   np.array(f[6:9]), float(nu))

    @property
    def velocity(self):
        return self.nu * self.x


class Curvature3(NamedTuple):
    u: float
    v: float


def _check_finite(values, agent):
    for v in values:
        if not math.isfinite(v):
            raise IntegrationError("non-finite state after step", agent=agent)


def step_frame_2d(s: AgentState2, u: float, dt: float, agent=None) -> AgentState2:
    """Advance a planar agent by one RK4 step at constant curvature ``u``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    try:
        out = kernels.frame2_rk4(s.r[0], s.r[1], s.x[0], s.x[1], s.y[0], s.y[1], s.nu, u, dt)
    except FrameDegeneracyError as exc:
        raise IntegrationError(str(exc), agent=agent) from exc
    _check_finite(out, agent)
    return AgentState2(np.array(out[0:2]), np.array(out[2:4]), np.array(out[4:6]), s.nu)


def step_frame_3d(s: AgentState3, c, dt: float, agent=None) -> AgentState3:
    if not dt > 0:
        raise ValueError("dt must be positive")
    u, v = c
    flat = (*s.r, *s.x, *s.y, *s.z)
    try:
        out = kernels.frame3_rk4(flat, s.nu, u, v, dt)
    except FrameDegeneracyError as exc:
        raise IntegrationError(str(exc), agent=agent) from exc
    _check_finite(out, agent)
    return AgentState3(np.array(out[0:3]), np.array(out[3:6]), np.array(out[6:9]),
                       np.array(out[9:12]), s.nu)


def renormalize(frame):
    """Gram-Schmidt re-orthonormalization keeping the tangent direction.

    ``frame`` is ``(x, y)`` in the plane (``y`` is reset to ``perp(x)``) or
    ``(x, y, z)`` in space (``z`` is rebuilt as ``x`` cross ``y``).
    """
    x = frame[0]
    if len(x) == 2:
        f = kernels.renorm2(x[0], x[1])
        return np.array(f[0:2]), np.array(f[2:4])
    f = kernels.renorm3(*x, *frame[1])
    return np.array(f[0:3]), np.array(f[3:6]), np.array(f[6:9])


def turning_rate(nu, u):
    """Turning rate in degrees per second for speed ``nu`` and curvature ``u``."""
    return (180.0 / math.pi) * nu * u


def clamp_curvature(u, u_max=DEFAULT_U_MAX, agent=None):
    """Return ``(u_clamped, was_clamped)``."""
    if abs(u) <= u_max:
        return u, False
    log.debug("curvature %.6g clamped to +/-%.6g (agent %s)", u, u_max, agent)
    return math.copysign(u_max, u), True
