"""JSON experiment configurations.

A config is one JSON object whose keys mirror :class:`~swarmsteer.sim.SimConfig`.
Agents come either as an explicit ``agents`` list or from an ``init``
generator seeded by ``seed``. Optional ``expect`` entries are the
machine-checkable properties reported by the CLI.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import mmc, tva
from .errors import ConfigError
from .sim import AgentSpec, Avoidance, KEvent, Noise, PerturberScript, SimConfig, Waypoint

OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
}


@dataclass
class Expectation:
    metric: str
    op: str
    value: float

    def check(self, actual):
        return bool(OPS[self.op](actual, self.value))

    def __str__(self):
        return f"{self.metric} {self.op} {self.value:g}"


@dataclass
class Experiment:
    name: str
    config: SimConfig
    expect: list = field(default_factory=list)
    oracle_substeps: int = 20
    raw: dict = field(default_factory=dict)


def _line_of(text, key):
    if text is None:
        return None
    needle = f'"{key.split(".")[-1].split("[")[0]}"'
    for no, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return no
    return None


class _Reader:
    def __init__(self, data, text=None):
        self.data = data
        self.text = text

    def fail(self, key, msg):
        raise ConfigError(msg, key=key, line=_line_of(self.text, key))

    def get(self, obj, key, path, kind, default=..., required=False):
        if key not in obj:
            if required or default is ...:
                self.fail(path, "missing required key")
            return default
        val = obj[key]
        if kind is float:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                self.fail(path, f"expected a number, got {val!r}")
            val = float(val)
            if not math.isfinite(val):
                self.fail(path, "must be finite")
        elif kind is int:
            if isinstance(val, bool) or not isinstance(val, int):
                self.fail(path, f"expected an integer, got {val!r}")
        elif kind is str:
            if not isinstance(val, str):
                self.fail(path, f"expected a string, got {val!r}")
        elif kind is list:
            if not isinstance(val, list):
                self.fail(path, "expected a list")
        elif kind is dict:
            if not isinstance(val, dict):
                self.fail(path, "expected an object")
        return val

    def vec(self, obj, key, path, dim):
        v = self.get(obj, key, path, list)
        if len(v) != dim or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in v):
            self.fail(path, f"expected {dim} numbers")
        return tuple(float(c) for c in v)


def _random_positions(rng, n, lo, hi, min_sep, dim, existing=()):
    pts = list(existing)
    out = []
    for _ in range(n):
        for _attempt in range(10000):
            p = rng.uniform(lo, hi, size=dim)
            if all(np.linalg.norm(p - q) >= min_sep for q in pts):
                break
        else:
            raise ConfigError("could not place agents with the requested separation", key="init")
        pts.append(p)
        out.append(p)
    return out


def _disk_point(rng, center, radius):
    a = rng.uniform(-math.pi, math.pi)
    rr = radius * math.sqrt(rng.uniform(0.0, 1.0))
    return np.asarray(center, dtype=float) + rr * np.array([math.cos(a), math.sin(a)])


def generate_agents(init: dict, seed: int, dim: int, rd: _Reader):
    """Build the agent list described by an ``init`` block."""
    kind = rd.get(init, "kind", "init.kind", str)
    rng = np.random.default_rng([seed, 1])
    if kind == "mmc_shape":
        a1, a2 = mmc.pair_from_shape(rd.get(init, "rho", "init.rho", float),
                                     rd.get(init, "gamma", "init.gamma", float),
                                     rd.get(init, "nu", "init.nu", float, 200.0))
        return [AgentSpec(tuple(a.r), a.nu, heading=a.heading) for a in (a1, a2)]
    nu = rd.get(init, "nu", "init.nu", float, 60.0)
    min_sep = rd.get(init, "min_sep_mm", "init.min_sep_mm", float, 0.0)
    if kind == "random_box":
        n = rd.get(init, "n", "init.n", int)
        box = rd.get(init, "box_mm", "init.box_mm", float)
        pts = _random_positions(rng, n, 0.0, box, min_sep, dim)
        heads = rng.uniform(-math.pi, math.pi, size=n)
        return [AgentSpec(tuple(p), nu, heading=float(h)) for p, h in zip(pts, heads)]
    if kind == "clusters":
        if dim != 2:
            rd.fail("init.kind", "clusters init is planar only")
        sizes = rd.get(init, "sizes", "init.sizes", list)
        centers = rd.get(init, "centers", "init.centers", list)
        if len(sizes) != len(centers):
            rd.fail("init.centers", "needs one center per cluster size")
        radius = rd.get(init, "radius_mm", "init.radius_mm", float)
        spread = rd.get(init, "heading_spread_rad", "init.heading_spread_rad", float, math.pi / 4)
        agents = []
        placed = []
        for size, c in zip(sizes, centers):
            base = rng.uniform(-math.pi, math.pi)
            for _ in range(size):
                for _attempt in range(10000):
                    p = _disk_point(rng, c, radius)
                    if all(np.linalg.norm(p - q) >= min_sep for q in placed):
                        break
                else:
                    raise ConfigError("could not place cluster agents", key="init")
                placed.append(p)
                h = base + rng.uniform(-spread, spread)
                agents.append(AgentSpec(tuple(p), nu, heading=float(h)))
        return agents
    rd.fail("init.kind", f"unknown init kind {kind!r}")


def parse_config(data: dict, text: str | None = None, seed: int | None = None) -> Experiment:
    rd = _Reader(data, text)
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object")
    name = rd.get(data, "name", "name", str, "")
    law = rd.get(data, "law", "law", str)
    if law not in ("mmc", "tva"):
        rd.fail("law", "must be 'mmc' or 'tva'")
    dim = rd.get(data, "dim", "dim", int, 2)
    if dim not in (2, 3):
        rd.fail("dim", "must be 2 or 3")
    dt = rd.get(data, "dt", "dt", float, 0.04)
    if not dt > 0:
        rd.fail("dt", "must be positive")
    duration = rd.get(data, "duration", "duration", float)
    if not duration > 0:
        rd.fail("duration", "must be positive")
    cfg_seed = rd.get(data, "seed", "seed", int, 0)
    if seed is not None:
        cfg_seed = seed
    u_max = rd.get(data, "u_max", "u_max", float, 10.0)

    if "agents" in data:
        agents = []
        for i, a in enumerate(rd.get(data, "agents", "agents", list)):
            p = f"agents[{i}]"
            if not isinstance(a, dict):
                rd.fail(p, "expected an object")
            r = rd.vec(a, "r", p + ".r", dim)
            nu = rd.get(a, "nu", p + ".nu", float)
            if not nu > 0:
                rd.fail(p + ".nu", "speed must be positive")
            x = rd.vec(a, "x", p + ".x", dim) if "x" in a else None
            y = rd.vec(a, "y", p + ".y", dim) if "y" in a else None
            heading = rd.get(a, "heading", p + ".heading", float, 0.0)
            agents.append(AgentSpec(r, nu, heading=heading, x=x, y=y))
    elif "init" in data:
        agents = generate_agents(rd.get(data, "init", "init", dict), cfg_seed, dim, rd)
    else:
        rd.fail("agents", "either 'agents' or 'init' is required")

    tva_p = mmc_p = None
    if law == "tva":
        blk = rd.get(data, "tva", "tva", dict, {})
        mu = rd.get(blk, "mu", "tva.mu", float, 1.0)
        K = rd.get(blk, "K", "tva.K", int, 3)
        if not mu > 0:
            rd.fail("tva.mu", "must be positive")
        if not 1 <= K <= len(agents) - 1:
            rd.fail("tva.K", f"must be between 1 and {len(agents) - 1}")
        tva_p = tva.TvaParams(mu, K)
    else:
        blk = rd.get(data, "mmc", "mmc", dict, {})
        mu = rd.get(blk, "mu", "mmc.mu", float, 0.001)
        kd = rd.get(blk, "k_d", "mmc.k_d", float, 0.0)
        e_d = blk.get("E_d")
        if e_d is not None:
            e_d = rd.get(blk, "E_d", "mmc.E_d", float)
        if not mu > 0:
            rd.fail("mmc.mu", "must be positive")
        if kd < 0:
            rd.fail("mmc.k_d", "must be non-negative")
        mmc_p = mmc.MmcParams(mu, kd, e_d)

    av = rd.get(data, "avoidance", "avoidance", dict, {})
    avoidance = Avoidance(
        rd.get(av, "range_mm", "avoidance.range_mm", float, 300.0),
        rd.get(av, "omega_sat", "avoidance.omega_sat", float, 50.0),
        rd.get(av, "cone_halfangle_rad", "avoidance.cone_halfangle_rad", float, math.pi / 2))
    if avoidance.range_mm < 0:
        rd.fail("avoidance.range_mm", "must be non-negative")

    events = []
    for i, e in enumerate(rd.get(data, "events", "events", list, [])):
        p = f"events[{i}]"
        events.append(KEvent(rd.get(e, "t", p + ".t", float), rd.get(e, "K", p + ".K", int)))
    if any(b.t < a.t for a, b in zip(events, events[1:])):
        rd.fail("events", "must be sorted by time")

    perturber = None
    if data.get("perturber") is not None:
        pb = rd.get(data, "perturber", "perturber", dict)
        wps = []
        for i, w in enumerate(rd.get(pb, "waypoints", "perturber.waypoints", list)):
            p = f"perturber.waypoints[{i}]"
            wps.append(Waypoint(rd.get(w, "t", p + ".t", float), rd.vec(w, "r", p + ".r", dim)))
        try:
            perturber = PerturberScript(rd.get(pb, "speed", "perturber.speed", float), wps)
        except ValueError as exc:
            rd.fail("perturber.waypoints", str(exc))

    nz = rd.get(data, "noise", "noise", dict, {})
    noise = Noise(rd.get(nz, "heading_sigma_rad", "noise.heading_sigma_rad", float, 0.0),
                  rd.get(nz, "seed", "noise.seed", int, None))
    if noise.heading_sigma_rad < 0:
        rd.fail("noise.heading_sigma_rad", "must be non-negative")

    cfg = SimConfig(law=law, agents=agents, duration=duration, dt=dt, dim=dim, tva=tva_p,
                    mmc=mmc_p, avoidance=avoidance, events=events, perturber=perturber,
                    noise=noise, seed=cfg_seed, u_max=u_max, name=name)
    try:
        cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    expect = []
    for i, e in enumerate(rd.get(data, "expect", "expect", list, [])):
        p = f"expect[{i}]"
        op = rd.get(e, "op", p + ".op", str)
        if op not in OPS:
            rd.fail(p + ".op", f"unknown operator {op!r}")
        expect.append(Expectation(rd.get(e, "metric", p + ".metric", str), op,
                                  rd.get(e, "value", p + ".value", float)))
    sub = rd.get(rd.get(data, "oracle", "oracle", dict, {}), "substeps", "oracle.substeps", int, 20)
    return Experiment(name=name, config=cfg, expect=expect, oracle_substeps=sub, raw=data)


def load_config(path, seed=None) -> Experiment:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    exp = parse_config(data, text, seed=seed)
    if not exp.name:
        exp.name = path.stem
    return exp
