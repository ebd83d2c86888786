"""Topological velocity alignment over K-nearest-neighbour interactions.

Each agent steers its tangent toward the direction of its neighbourhood's
centre-of-mass velocity. The second half of the module is the planar
two-agent shape system (rho, psi, phi) with its closed-form contrast decay.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import (CollocationError, ContractViolation, DegenerateNeighborhoodError,
                     InsufficientAgentsError)

wrap_angle = kernels.wrap_angle

# |v_COM| below this fraction of the mean neighbour speed counts as zero
COM_EPS = 1e-9


@dataclass(frozen=True)
class Neighborhood:
    members: tuple
    K: int

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class TvaParams:
    mu: float = 1.0
    K: int = 3

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.K < 1:
            raise ValueError("K must be at least 1")


@dataclass(frozen=True)
class TvaShape:
    rho: float
    psi: float
    phi: float


def k_nearest(positions, i, K):
    """The K agents nearest to agent ``i``; ties go to the lower index."""
    pos = np.asarray(positions, dtype=float)
    n = len(pos)
    if K >= n:
        raise InsufficientAgentsError(f"K = {K} needs at least {K + 1} agents, got {n}")
    d = pos - pos[i]
    d2 = np.einsum("ij,ij->i", d, d)
    idx = np.arange(n)
    order = np.lexsort((idx, d2))
    members = tuple(int(j) for j in order if j != i)[:K]
    return Neighborhood(members, K)


def com_velocity(velocities, nbhd: Neighborhood):
    """Mean velocity of the neighbourhood; ``velocities`` is (n, dim)."""
    v = np.asarray(velocities, dtype=float)
    return v[list(nbhd.members)].sum(axis=0) / len(nbhd.members)


def com_direction_with_fallback(velocities, positions, i, K, tangents=None):
    """Unit COM direction and the neighbourhood size actually used.

    Adds the (K+1)-th nearest neighbour when the K-neighbourhood's COM
    velocity vanishes. With ``tangents`` given, a single neighbour's
    direction is its tangent itself, which keeps two-agent contrasts
    exactly symmetric.
    """
    v = np.asarray(velocities, dtype=float)
    for size in (K, K + 1):
        if size >= len(v):
            break
        nb = k_nearest(positions, i, size)
        if size == 1 and tangents is not None:
            return np.array(tangents[nb.members[0]], dtype=float), size
        vc = com_velocity(v, nb)
        scale = np.mean(np.linalg.norm(v[list(nb.members)], axis=1))
        norm = float(np.linalg.norm(vc))
        if norm >= COM_EPS * scale and norm > 0.0:
            return vc / norm, size
    raise DegenerateNeighborhoodError(
        f"neighbourhood COM velocity of agent {i} vanishes even with {K + 1} neighbours")


def contrast(x_i, x_n):
    """Misalignment 1 - x_i . x_n, in [0, 2]."""
    x_i = np.asarray(x_i, dtype=float)
    x_n = np.asarray(x_n, dtype=float)
    for name, v in (("x_i", x_i), ("x_N", x_n)):
        if abs(float(np.linalg.norm(v)) - 1.0) > 1e-6:
            raise ContractViolation(f"{name} is not a unit vector")
    return 1.0 - float(np.dot(x_i, x_n))


def tva_controls(state, x_n, mu):
    """Curvature command(s) steering ``state`` toward ``x_n``.

    Planar states return ``u``; spatial states return ``(u, v)``.
    """
    if not state.nu > 0:
        raise ValueError("speed must be positive")
    u = mu * float(np.dot(x_n, state.y)) / state.nu
    if len(state.x) == 2:
        return u
    v = mu * float(np.dot(x_n, state.z)) / state.nu
    return u, v


def lateral_acceleration(state, x_n, mu):
    """nu^2 (u y + v z) for the alignment controls."""
    c = tva_controls(state, x_n, mu)
    if len(state.x) == 2:
        return state.nu ** 2 * c * state.y
    return state.nu ** 2 * (c[0] * state.y + c[1] * state.z)


# ---------------------------------------------------------------------------
# Two-agent planar shape system
# ---------------------------------------------------------------------------

def shape_from_states(a1, a2) -> TvaShape:
    r = a2.r - a1.r
    rho = math.sqrt(r[0] * r[0] + r[1] * r[1])
    if rho < 1e-9:
        raise CollocationError("agents are collocated")
    baseline = math.atan2(r[1], r[0])
    th1 = math.atan2(a1.x[1], a1.x[0])
    th2 = math.atan2(a2.x[1], a2.x[0])
    return TvaShape(rho, wrap_angle(math.pi - baseline + th1), wrap_angle(th1 - th2))


def shape_matrix(shape: TvaShape):
    """Relative pose g1^-1 g2 in SE(2) written with the scalar shape variables."""
    cp, sp = math.cos(shape.phi), math.sin(shape.phi)
    return np.array([[cp, sp, -shape.rho * math.cos(shape.psi)],
                     [-sp, cp, shape.rho * math.sin(shape.psi)],
                     [0.0, 0.0, 1.0]])


def pose_matrix(state):
    g = np.eye(3)
    g[0:2, 0] = state.x
    g[0:2, 1] = state.y
    g[0:2, 2] = state.r
    return g


def relative_pose(a1, a2):
    """g1^-1 g2 assembled from frame dot products."""
    r = a2.r - a1.r
    return np.array([[a1.x @ a2.x, a1.x @ a2.y, a1.x @ r],
                     [a1.y @ a2.x, a1.y @ a2.y, a1.y @ r],
                     [0.0, 0.0, 1.0]])


def shape_step_closed_loop(s: TvaShape, nu1, nu2, mu, dt) -> TvaShape:
    return TvaShape(*kernels.tva_shape_rk4(s.rho, s.psi, s.phi, nu1, nu2, mu, dt))


def shape_trajectory(s: TvaShape, nu1, nu2, mu, dt, n):
    """Array (n + 1, 3) of (rho, psi, phi)."""
    return kernels.tva_shape_integrate(s.rho, s.psi, s.phi, nu1, nu2, mu, dt, int(n))


def pair_trajectory(a1, a2, mu, dt, n, substeps=1):
    """Both planar agents under the alignment law, law re-evaluated per RK4 stage.

    Returns (n + 1, 8) rows of (r1, x1, r2, x2) on the grid ``k * dt``.
    """
    s0 = [a1.r[0], a1.r[1], a1.x[0], a1.x[1], a2.r[0], a2.r[1], a2.x[0], a2.x[1]]
    return kernels.tva_pair_integrate(s0, a1.nu, a2.nu, mu, dt, int(substeps), int(n))


def contrast_from_phi(phi):
    return 1.0 - np.cos(phi)


def theta_closed_form(theta0, mu, t):
    """Two-agent contrast at time ``t`` from its initial value."""
    if theta0 == 0.0:
        return 0.0 * np.asarray(t, dtype=float) if np.ndim(t) else 0.0
    if theta0 == 2.0:
        return 0.0 * np.asarray(t, dtype=float) + 2.0 if np.ndim(t) else 2.0
    if not 0.0 < theta0 < 2.0:
        raise ValueError("theta0 must lie in [0, 2]")
    c = 2.0 / theta0 - 1.0
    e = np.exp(-4.0 * mu * np.asarray(t, dtype=float))
    out = 2.0 * e / (c + e)
    return float(out) if np.ndim(out) == 0 else out


def theta_crossing_time(theta0, mu, level):
    """Time at which the closed-form contrast reaches ``level``."""
    c = 2.0 / theta0 - 1.0
    return math.log((2.0 - level) / (level * c)) / (4.0 * mu)
