"""Mutual motion camouflage for a planar pair of agents.

Both agents share one steering signal ``u`` (1/s); agent ``i`` applies the
curvature ``u / nu_i``. The relative motion reduces to the scalar shape
variables (rho, gamma, lambda) with speed of the relative velocity ``delta``
conserved, and the reduced flow preserves

    E(rho, gamma) = rho**2 (delta**2 - gamma**2) exp(-2 mu rho).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import AlignmentError, CollocationError
from .frenet import AgentState2, perp


@dataclass(frozen=True, eq=False)
class RelativeState:
    r: np.ndarray
    g: np.ndarray
    h: np.ndarray


@dataclass(frozen=True)
class MmcShape:
    rho: float
    gamma: float
    lam: float
    delta: float


@dataclass(frozen=True)
class MmcParams:
    mu: float = 0.001
    k_d: float = 0.0
    E_d: float | None = None

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.k_d < 0:
            raise ValueError("k_d must be non-negative")


def shape_from_pair(a1: AgentState2, a2: AgentState2):
    r = a1.r - a2.r
    g = a1.nu * a1.x - a2.nu * a2.x
    h = perp(g)
    rho = math.sqrt(r[0] * r[0] + r[1] * r[1])
    if rho < 1e-9:
        raise CollocationError("agents are collocated")
    gamma = float(r[0] * g[0] + r[1] * g[1]) / rho
    lam = float(r[0] * h[0] + r[1] * h[1]) / rho
    delta = math.sqrt(g[0] * g[0] + g[1] * g[1])
    return RelativeState(r, g, h), MmcShape(rho, gamma, lam, delta)


def mmc_u(shape: MmcShape, mu: float) -> float:
    return -mu * shape.lam


def conserved_energy(rho, gamma, delta, mu):
    return kernels.mmc_energy(rho, gamma, delta, mu)


def mmc_u_dissipative(shape: MmcShape, params: MmcParams) -> float:
    u = -params.mu * shape.lam
    if params.k_d == 0.0:
        return u
    e = conserved_energy(shape.rho, shape.gamma, shape.delta, params.mu)
    e_d = e if params.E_d is None else params.E_d
    return u + params.k_d * shape.lam * shape.gamma * (e - e_d)


def reduced_step(state, delta, mu, dt, conserve=False, E0=None):
    """One RK4 step of the reduced (rho, gamma) flow.

    With ``conserve`` the result is projected back onto the level set
    ``E = E0`` (default: the energy of ``state``).
    """
    rho, gamma = state
    if E0 is None:
        E0 = kernels.mmc_energy(rho, gamma, delta, mu)
    rho, gamma = kernels.mmc_reduced_rk4(rho, gamma, delta, mu, dt)
    if conserve:
        rho, gamma = kernels.mmc_project(rho, gamma, delta, mu, E0)
    return rho, gamma


def reduced_trajectory(state, delta, mu, dt, n, conserve=False):
    """Array of shape (n + 1, 2) holding (rho, gamma) at every step."""
    return kernels.mmc_reduced_integrate(state[0], state[1], delta, mu, dt, int(n), bool(conserve))


def pair_from_shape(rho, gamma, nu=200.0, origin=(0.0, 0.0), baseline_angle=0.0):
    """Two agents with opposite headings realizing a given (rho, gamma).

    Opposite headings make ``delta = 2 nu``; requires ``|gamma| <= delta``.
    Agent 1 sits ``rho`` ahead of agent 2 along ``baseline_angle``.
    """
    delta = 2.0 * nu
    if abs(gamma) > delta:
        raise ValueError("|gamma| must not exceed 2 nu")
    # g = delta (cos a, sin a) relative to the baseline; lambda = -delta sin a
    a = math.acos(gamma / delta)
    theta1 = baseline_angle + a
    c, s = math.cos(baseline_angle), math.sin(baseline_angle)
    o = np.asarray(origin, dtype=float)
    a2 = AgentState2.from_heading(o, theta1 + math.pi, nu)
    a1 = AgentState2.from_heading(o + rho * np.array([c, s]), theta1, nu)
    return a1, a2


def pack_pair(a1: AgentState2, a2: AgentState2):
    return [a1.r[0], a1.r[1], a1.x[0], a1.x[1], a2.r[0], a2.r[1], a2.x[0], a2.x[1]]


@dataclass
class PairTrajectory:
    t: np.ndarray
    states: np.ndarray  # (n, 8): r1, x1, r2, x2
    nu1: float
    nu2: float

    def positions(self):
        """Array (n_steps, 2 agents, 2)."""
        return np.stack([self.states[:, 0:2], self.states[:, 4:6]], axis=1)

    def headings(self):
        return np.stack([np.arctan2(self.states[:, 3], self.states[:, 2]),
                         np.arctan2(self.states[:, 7], self.states[:, 6])], axis=1)

    def shapes(self):
        """Columns rho, gamma, lambda, delta."""
        s = self.states
        r = s[:, 0:2] - s[:, 4:6]
        g = self.nu1 * s[:, 2:4] - self.nu2 * s[:, 6:8]
        rho = np.sqrt(r[:, 0] ** 2 + r[:, 1] ** 2)
        gamma = (r[:, 0] * g[:, 0] + r[:, 1] * g[:, 1]) / rho
        lam = (r[:, 0] * -g[:, 1] + r[:, 1] * g[:, 0]) / rho
        delta = np.sqrt(g[:, 0] ** 2 + g[:, 1] ** 2)
        return np.column_stack([rho, gamma, lam, delta])


def ideal_pair_trajectory(a1: AgentState2, a2: AgentState2, params: MmcParams,
                          dt: float, T: float, substeps: int = 20) -> PairTrajectory:
    """Reference trajectory of the pair under the exact (continuous) law.

    The law is re-evaluated inside every RK4 stage at step ``dt / substeps``;
    samples are returned on the coarse grid ``k * dt``.
    """
    if substeps < 20:
        raise ValueError("the oracle needs at least 20 substeps per coarse step")
    _, sh = shape_from_pair(a1, a2)
    e_d = params.E_d
    if e_d is None:
        e_d = conserved_energy(sh.rho, sh.gamma, sh.delta, params.mu)
    n = int(math.floor(T / dt + 1e-9))
    states = kernels.mmc_pair_integrate(pack_pair(a1, a2), a1.nu, a2.nu, params.mu,
                                        params.k_d, e_d, dt, int(substeps), n)
    return PairTrajectory(np.arange(n + 1) * dt, states, a1.nu, a2.nu)


def error_metric(expt, ideal):
    """Per-step, per-agent Euclidean position error.

    Both inputs are arrays shaped (steps, agents, dim).
    """
    expt = np.asarray(expt, dtype=float)
    ideal = np.asarray(ideal, dtype=float)
    if expt.shape != ideal.shape:
        raise AlignmentError(f"series shapes differ: {expt.shape} vs {ideal.shape}")
    return np.sqrt(np.sum((expt - ideal) ** 2, axis=-1))
