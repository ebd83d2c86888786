"""Multi-agent run loop at a fixed control rate.

Every tick computes all commands from one snapshot of the swarm, logs a
:class:`StepRecord`, then advances every agent with its command held
constant over the tick.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import mmc, tva
from .errors import SimulationError, SwarmSteerError
from .frenet import (DEFAULT_U_MAX, AgentState2, AgentState3, clamp_curvature, step_frame_2d,
                     step_frame_3d, turning_rate)

log = logging.getLogger(__name__)

LAWS = ("mmc", "tva")


@dataclass
class AgentSpec:
    r: tuple
    nu: float
    heading: float = 0.0
    x: tuple | None = None
    y: tuple | None = None

    def build(self, dim):
        if dim == 2:
            if self.x is not None:
                return AgentState2.from_heading(self.r, math.atan2(self.x[1], self.x[0]), self.nu)
            return AgentState2.from_heading(self.r, self.heading, self.nu)
        if self.x is None:
            c, s = math.cos(self.heading), math.sin(self.heading)
            x, y = (c, s, 0.0), (-s, c, 0.0)
        else:
            x = self.x
            y = self.y if self.y is not None else _any_normal(x)
        return AgentState3.from_frame(self.r, x, y, self.nu)


def _any_normal(x):
    x = np.asarray(x, dtype=float)
    a = np.array([0.0, 0.0, 1.0]) if abs(x[2]) < 0.9 * np.linalg.norm(x) else np.array([1.0, 0.0, 0.0])
    return tuple(np.cross(a, x))


@dataclass
class Avoidance:
    range_mm: float = 300.0
    omega_sat: float = 50.0  # rad/s
    cone_halfangle_rad: float = math.pi / 2


@dataclass
class KEvent:
    t: float
    K: int


@dataclass
class Waypoint:
    t: float
    r: tuple


@dataclass
class PerturberScript:
    """Scripted intruder moving along waypoints at constant speed.

    It leaves waypoint k at time ``t_k`` and waits at waypoint k+1 after
    arriving. Other agents only notice it through collision avoidance.
    """
    speed: float
    waypoints: list

    def __post_init__(self):
        if not self.waypoints:
            raise ValueError("perturber needs at least one waypoint")
        for a, b in zip(self.waypoints, self.waypoints[1:]):
            if b.t < a.t:
                raise ValueError("perturber waypoints must be time-monotone")
            dist = float(np.linalg.norm(np.subtract(b.r, a.r)))
            if dist > self.speed * (b.t - a.t) + 1e-9:
                raise ValueError(f"waypoint at t={b.t} unreachable at speed {self.speed}")

    def _segment(self, t):
        wps = self.waypoints
        if t <= wps[0].t:
            return 0
        k = 0
        for j, w in enumerate(wps):
            if w.t <= t:
                k = j
        return k

    def position(self, t):
        wps = self.waypoints
        k = self._segment(t)
        p0 = np.asarray(wps[k].r, dtype=float)
        if t <= wps[0].t or k == len(wps) - 1:
            return p0
        seg = np.asarray(wps[k + 1].r, dtype=float) - p0
        length = float(np.linalg.norm(seg))
        travel = self.speed * (t - wps[k].t)
        if length == 0.0 or travel >= length:
            return p0 + seg
        return p0 + seg * (travel / length)

    def heading(self, t):
        wps = self.waypoints
        k = self._segment(t)
        if k == len(wps) - 1:
            k = max(k - 1, 0)
        if len(wps) < 2:
            return 0.0
        seg = np.subtract(wps[k + 1].r, wps[k].r)
        return math.atan2(seg[1], seg[0])


@dataclass
class Noise:
    heading_sigma_rad: float = 0.0
    seed: int | None = None


@dataclass
class SimConfig:
    law: str
    agents: list
    duration: float
    dt: float = 0.04
    dim: int = 2
    tva: tva.TvaParams | None = None
    mmc: mmc.MmcParams | None = None
    avoidance: Avoidance = field(default_factory=Avoidance)
    events: list = field(default_factory=list)
    perturber: PerturberScript | None = None
    noise: Noise = field(default_factory=Noise)
    seed: int = 0
    u_max: float = DEFAULT_U_MAX
    name: str = ""

    def validate(self):
        if self.law not in LAWS:
            raise ValueError(f"law must be one of {LAWS}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if len(self.agents) < 2:
            raise ValueError("at least two agents are required")
        if any(not a.nu > 0 for a in self.agents):
            raise ValueError("all speeds must be positive")
        if self.avoidance.range_mm < 0:
            raise ValueError("avoidance range must be non-negative")
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")
        if self.law == "mmc":
            if self.dim != 2 or len(self.agents) != 2:
                raise ValueError("mmc runs need exactly two planar agents")
            if self.mmc is None:
                raise ValueError("mmc parameters missing")
        else:
            if self.tva is None:
                raise ValueError("tva parameters missing")
            for K in [self.tva.K] + [e.K for e in self.events]:
                if not 1 <= K <= len(self.agents) - 1:
                    raise ValueError(f"K = {K} out of range for {len(self.agents)} agents")
        if any(b.t < a.t for a, b in zip(self.events, self.events[1:])):
            raise ValueError("events must be time-sorted")
        return self

    @property
    def n_ticks(self):
        return int(math.floor(self.duration / self.dt + 1e-9))

    @property
    def noise_seed(self):
        return self.seed if self.noise.seed is None else self.noise.seed


@dataclass
class StepRecord:
    t: float
    positions: np.ndarray
    headings: np.ndarray
    u: np.ndarray
    v: np.ndarray
    omega_deg_s: np.ndarray
    theta: np.ndarray
    used_K: np.ndarray
    avoidance: np.ndarray
    clamped: np.ndarray
    theta_total: float
    perturber: np.ndarray | None = None
    rho: float | None = None
    gamma: float | None = None
    lam: float | None = None
    E: float | None = None
    E_pct_err: float | None = None


def apply_events(t, initial_K, events):
    """Neighbourhood size in force at time ``t``."""
    K = initial_K
    for e in events:
        if e.t <= t + 1e-9:
            K = e.K
        else:
            break
    return K


def _bearing(state, d):
    dx = float(np.dot(d, state.x))
    dy = float(np.dot(d, state.y))
    if len(d) == 2:
        return math.atan2(dy, dx), dy
    lateral = d - dx * state.x
    return math.atan2(float(np.linalg.norm(lateral)), dx), dy


def avoidance_override(state, others, params: Avoidance):
    """Saturated turn rate (rad/s, signed) away from the nearest close obstacle.

    Obstacles count only inside ``range_mm`` and the forward cone. Returns
    None when nothing triggers. A dead-ahead obstacle turns counter-clockwise.
    """
    if params.range_mm <= 0 or len(others) == 0:
        return None
    best = None
    for j, p in enumerate(np.asarray(others, dtype=float)):
        d = p - state.r
        dist = float(np.linalg.norm(d))
        if dist > params.range_mm:
            continue
        bearing, lateral = _bearing(state, d)
        if abs(bearing) > params.cone_halfangle_rad:
            continue
        if best is None or dist < best[0]:
            best = (dist, lateral)
    if best is None:
        return None
    sign = 1.0 if best[1] <= 0.0 else -1.0
    return sign * params.omega_sat


def _rotate_heading(state, eps):
    c, s = math.cos(eps), math.sin(eps)
    x = c * state.x + s * state.y
    y = -s * state.x + c * state.y
    if isinstance(state, AgentState2):
        return AgentState2(state.r, x, y, state.nu)
    return AgentState3(state.r, x, y, state.z, state.nu)


def _heading(state):
    return math.atan2(state.x[1], state.x[0])


class _Runner:
    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.states = [a.build(cfg.dim) for a in cfg.agents]
        self.n = len(self.states)
        self.rng = np.random.default_rng(cfg.noise_seed)
        if cfg.law == "mmc":
            try:
                _, sh = mmc.shape_from_pair(self.states[0], self.states[1])
            except SwarmSteerError as exc:
                raise SimulationError(str(exc), step=0) from exc
            e_d = cfg.mmc.E_d
            if e_d is None:
                e_d = mmc.conserved_energy(sh.rho, sh.gamma, sh.delta, cfg.mmc.mu)
            self.mmc_params = mmc.MmcParams(cfg.mmc.mu, cfg.mmc.k_d, e_d)

    def commands(self, k, t):
        cfg = self.cfg
        n = self.n
        u = np.zeros(n)
        v = np.zeros(n)
        theta = np.zeros(n)
        used = np.zeros(n, dtype=int)
        avoid = np.zeros(n, dtype=bool)
        clamped = np.zeros(n, dtype=bool)
        extra = {}
        pos = np.array([s.r for s in self.states])
        pert = cfg.perturber.position(t) if cfg.perturber is not None else None

        if cfg.law == "mmc":
            try:
                _, sh = mmc.shape_from_pair(self.states[0], self.states[1])
            except SwarmSteerError as exc:
                raise SimulationError(str(exc), step=k) from exc
            p = self.mmc_params
            common = mmc.mmc_u_dissipative(sh, p)
            e = mmc.conserved_energy(sh.rho, sh.gamma, sh.delta, p.mu)
            extra = dict(rho=sh.rho, gamma=sh.gamma, lam=sh.lam, E=e,
                         E_pct_err=100.0 * (e - p.E_d) / p.E_d if p.E_d else 0.0)
            for i, s in enumerate(self.states):
                u[i] = common / s.nu
                used[i] = 1
        else:
            vel = np.array([s.nu * s.x for s in self.states])
            tangents = [s.x for s in self.states]
            K = apply_events(t, cfg.tva.K, cfg.events)
            for i, s in enumerate(self.states):
                try:
                    x_n, used[i] = tva.com_direction_with_fallback(vel, pos, i, K, tangents)
                except SwarmSteerError as exc:
                    raise SimulationError(str(exc), step=k, agent=i) from exc
                theta[i] = 1.0 - float(np.dot(s.x, x_n))
                c = tva.tva_controls(s, x_n, cfg.tva.mu)
                if cfg.dim == 2:
                    u[i] = c
                else:
                    u[i], v[i] = c

        if cfg.avoidance.range_mm > 0:
            for i, s in enumerate(self.states):
                others = [pos[j] for j in range(n) if j != i]
                if pert is not None:
                    others.append(pert)
                w = avoidance_override(s, others, cfg.avoidance)
                if w is not None:
                    avoid[i] = True
                    u[i] = w / s.nu
                    v[i] = 0.0

        for i in range(n):
            u[i], cu = clamp_curvature(u[i], cfg.u_max, agent=i)
            v[i], cv = clamp_curvature(v[i], cfg.u_max, agent=i)
            clamped[i] = cu or cv
        if clamped.any():
            log.info("t=%.3f: curvature clamped for agents %s", t, np.flatnonzero(clamped).tolist())

        omega = np.array([turning_rate(s.nu, u[i]) for i, s in enumerate(self.states)])
        rec = StepRecord(
            t=t, positions=pos, headings=np.array([_heading(s) for s in self.states]),
            u=u, v=v, omega_deg_s=omega, theta=theta, used_K=used, avoidance=avoid,
            clamped=clamped, theta_total=float(theta.sum()), perturber=pert, **extra)
        return rec

    def advance(self, k, rec):
        cfg = self.cfg
        new = []
        for i, s in enumerate(self.states):
            try:
                if cfg.dim == 2:
                    new.append(step_frame_2d(s, rec.u[i], cfg.dt, agent=i))
                else:
                    new.append(step_frame_3d(s, (rec.u[i], rec.v[i]), cfg.dt, agent=i))
            except SwarmSteerError as exc:
                raise SimulationError(str(exc), step=k, agent=i) from exc
        sigma = cfg.noise.heading_sigma_rad
        if sigma > 0:
            new = [_rotate_heading(s, self.rng.normal(0.0, sigma)) for s in new]
        self.states = new


def run(config: SimConfig):
    """Simulate ``config``; one :class:`StepRecord` per control tick."""
    config.validate()
    runner = _Runner(config)
    records = []
    n_ticks = config.n_ticks
    for k in range(n_ticks + 1):
        rec = runner.commands(k, k * config.dt)
        records.append(rec)
        if k < n_ticks:
            runner.advance(k, rec)
    return records


def stack(records, name):
    """Stack one field of every record into an array indexed by tick."""
    return np.array([getattr(r, name) for r in records])


# ---------------------------------------------------------------------------
# Cluster detection
# ---------------------------------------------------------------------------

def _pair_relation(positions, headings, angle_tol, link_mm):
    pos = np.asarray(positions, dtype=float)
    hd = np.asarray(headings, dtype=float)
    n = len(pos)
    if link_mm is None:
        link_mm = 2.0 * default_extent(pos)
    rel = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            dth = abs(tva.wrap_angle(hd[i] - hd[j]))
            rel[i, j] = dth <= angle_tol and np.linalg.norm(pos[i] - pos[j]) <= link_mm
    return rel


def default_extent(positions):
    """Characteristic group spacing: median nearest-neighbour distance."""
    pos = np.asarray(positions, dtype=float)
    d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    np.fill_diagonal(d, np.inf)
    return float(np.median(d.min(axis=1)))


def cluster_count(record, angle_tol=math.radians(5.0), link_mm=None):
    """Number of groups sharing a heading (within ``angle_tol``) and region.

    Agents are linked when their headings agree and they lie within
    ``link_mm`` (default twice the median nearest-neighbour distance);
    groups are the connected components of that relation.
    """
    rel = _pair_relation(record.positions, record.headings, angle_tol, link_mm)
    n = len(rel)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            if rel[i, j]:
                parent[find(i)] = find(j)
    return len({find(i) for i in range(n)})


def heading_spread(headings):
    """Largest pairwise angular difference, radians."""
    hd = np.asarray(headings, dtype=float)
    worst = 0.0
    for i in range(len(hd)):
        for j in range(i + 1, len(hd)):
            worst = max(worst, abs(tva.wrap_angle(hd[i] - hd[j])))
    return worst
