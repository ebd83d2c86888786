"""Run experiments and summarize their logs.

Every metric here is computed from :class:`~swarmsteer.trajio.Table`
objects, so a run analysed in memory and the same run re-read from its CSV
give identical numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import mmc, sim, tva
from .config import Experiment
from .frenet import AgentState2, turning_rate
from .trajio import Table, error_table, table_from_records

THETA_TOL = 1e-2
FINAL_FRACTION = 0.2


@dataclass
class RunResult:
    experiment: Experiment
    table: Table
    ideal: Table | None = None
    errors: Table | None = None
    metrics: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)

    @property
    def passed(self):
        return all(ok for _, _, ok in self.verdicts)


def ideal_table(cfg: sim.SimConfig, substeps=20) -> Table:
    """Fine-step oracle of an MMC config, laid out like a trajectory log."""
    a1, a2 = (a.build(2) for a in cfg.agents)
    _, sh = mmc.shape_from_pair(a1, a2)
    e_d = cfg.mmc.E_d
    if e_d is None:
        e_d = mmc.conserved_energy(sh.rho, sh.gamma, sh.delta, cfg.mmc.mu)
    params = mmc.MmcParams(cfg.mmc.mu, cfg.mmc.k_d, e_d)
    traj = mmc.ideal_pair_trajectory(a1, a2, params, cfg.dt, cfg.duration, substeps)
    shapes = traj.shapes()
    rho, gamma, lam, delta = shapes.T
    e = np.array([mmc.conserved_energy(*s[[0, 1, 3]], params.mu) for s in shapes])
    common = -params.mu * lam + params.k_d * lam * gamma * (e - e_d)
    nus = np.array([traj.nu1, traj.nu2])
    u = common[:, None] / nus[None, :]
    ticks = len(traj.t)
    pos = traj.positions()
    rep = lambda a: np.repeat(a, 2)
    cols = {
        "t": rep(traj.t),
        "agent_id": np.tile(np.arange(2), ticks),
        "x_mm": pos[:, :, 0].ravel(),
        "y_mm": pos[:, :, 1].ravel(),
        "heading_rad": traj.headings().ravel(),
        "u_per_mm": u.ravel(),
        "omega_deg_s": turning_rate(nus[None, :], u).ravel(),
        "theta_i": np.zeros(2 * ticks),
        "used_K": np.ones(2 * ticks, dtype=int),
        "avoidance": np.zeros(2 * ticks, dtype=int),
        "clamped": np.zeros(2 * ticks, dtype=int),
        "rho_mm": rep(rho), "gamma_mm_s": rep(gamma), "lambda_mm_s": rep(lam), "E": rep(e),
        "E_pct_err": rep(100.0 * (e - e_d) / e_d),
    }
    return Table(cols)


def position_errors(run: Table, ideal: Table):
    """Per-tick, per-agent distance between two aligned logs."""
    return mmc.error_metric(run.positions(), ideal.positions())


def trend_slope(t, y):
    """Least-squares slope of ``y`` against ``t``."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    tc = t - t.mean()
    denom = float(tc @ tc)
    return float(tc @ (y - y.mean()) / denom) if denom > 0 else 0.0


def cumulative_average(values):
    v = np.asarray(values, dtype=float)
    return np.cumsum(v) / np.arange(1, len(v) + 1)


def final_window(n, fraction=FINAL_FRACTION):
    return slice(int(math.floor((1.0 - fraction) * n)), n)


def energy_metrics(table: Table):
    pct = np.abs(table.grid("E_pct_err")[:, 0])
    cum = cumulative_average(pct)
    win = final_window(len(pct))
    return {
        "E_abs_pct_err_max": float(pct.max()),
        "E_abs_pct_err_final20_mean": float(pct[win].mean()),
        "E_cumavg_pct_err_final20_max": float(cum[win].max()),
        "E_cumavg_pct_err_final": float(cum[-1]),
    }


def error_metrics(t, e):
    """Summaries of a (ticks, agents) error array."""
    mean_e = e.mean(axis=1)
    return {
        "error_max_mm": float(e.max()),
        "error_final_mm": float(mean_e[-1]),
        "error_slope_mm_s": trend_slope(t, mean_e),
    }


def settle_time(t, theta_total, tol=THETA_TOL):
    """Earliest time after which Theta_total stays below ``tol`` (inf if never)."""
    above = np.flatnonzero(theta_total >= tol)
    if len(above) == 0:
        return float(t[0])
    if above[-1] == len(t) - 1:
        return math.inf
    return float(t[above[-1] + 1])


def first_below(t, theta_total, tol=THETA_TOL):
    idx = np.flatnonzero(theta_total < tol)
    return float(t[idx[0]]) if len(idx) else math.inf


def largest_rise(values):
    """Largest increase of a series over its running minimum."""
    v = np.asarray(values, dtype=float)
    if len(v) == 0:
        return 0.0
    return float(np.max(v - np.minimum.accumulate(v)))


def perturber_contact_index(cfg: sim.SimConfig, table: Table):
    """First tick at which the perturber is within avoidance range of an agent."""
    if cfg.perturber is None:
        return None
    pos = table.positions()
    for k, t in enumerate(table.times()):
        p = cfg.perturber.position(float(t))
        d = np.linalg.norm(pos[k] - p[None, :], axis=1)
        if np.any(d <= cfg.avoidance.range_mm):
            return k
    return None


class _Rec:
    # minimal stand-in for a StepRecord when only positions and headings matter
    def __init__(self, positions, headings):
        self.positions = positions
        self.headings = headings


def tva_metrics(cfg: sim.SimConfig, table: Table):
    t = table.times()
    theta = table.grid("theta_i")
    total = theta.sum(axis=1)
    headings = table.grid("heading_rad")
    pos = table.positions()
    m = {
        "theta_total_max": float(total.max()),
        "theta_total_final": float(total[-1]),
        "theta_first_below_1e-2_s": first_below(t, total),
        "theta_settle_1e-2_s": settle_time(t, total),
        "heading_spread_final_deg": math.degrees(sim.heading_spread(headings[-1])),
        "cluster_count_final": sim.cluster_count(_Rec(pos[-1], headings[-1])),
    }
    k = perturber_contact_index(cfg, table)
    if k is not None:
        m["perturber_contact_s"] = float(t[k])
        m["theta_rise_after_perturber"] = largest_rise(total[k:])
    if len(cfg.agents) == 2 and cfg.dim == 2:
        th0 = float(theta[0, 0])
        closed = tva.theta_closed_form(th0, cfg.tva.mu, t)
        m["theta_closed_form_err_max"] = float(np.max(np.abs(theta[:, 0] - closed)))
    return m


def summarize(result: RunResult):
    cfg = result.experiment.config
    table = result.table
    m = {}
    if cfg.law == "mmc":
        m.update(energy_metrics(table))
        rho = table.grid("rho_mm")[:, 0]
        m["rho_rel_dev_max"] = float(np.max(np.abs(rho - rho[0])) / rho[0])
        if result.ideal is not None:
            e = position_errors(table, result.ideal)
            m.update(error_metrics(table.times(), e))
    else:
        m.update(tva_metrics(cfg, table))
    m["clamp_events"] = int(table["clamped"].sum())
    m["avoidance_events"] = int(table["avoidance"].sum())
    m["ticks"] = int(len(table.times()))
    return m


def judge(expectations, metrics):
    out = []
    for ex in expectations:
        if ex.metric not in metrics:
            out.append((ex, None, False))
            continue
        val = metrics[ex.metric]
        out.append((ex, val, ex.check(val)))
    return out


def run_experiment(exp: Experiment) -> RunResult:
    cfg = exp.config
    records = sim.run(cfg)
    result = RunResult(exp, table_from_records(records, cfg.law, cfg.dim))
    if cfg.law == "mmc":
        result.ideal = ideal_table(cfg, exp.oracle_substeps)
        e = position_errors(result.table, result.ideal)
        result.errors = error_table(result.table, result.ideal, e, with_energy=True)
    result.metrics = summarize(result)
    result.verdicts = judge(exp.expect, result.metrics)
    return result


def metrics_table(metrics: dict):
    """Two-column (metric, value) view for CSV output."""
    return [("metric", "value")] + [(k, _metric_str(v)) for k, v in metrics.items()]


def _metric_str(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def format_report(name, metrics, verdicts):
    lines = [f"== {name} =="]
    width = max((len(k) for k in metrics), default=0)
    for k, v in metrics.items():
        lines.append(f"  {k:<{width}}  {_metric_str(v)}")
    for ex, val, ok in verdicts:
        shown = "missing" if val is None else f"{val:.6g}"
        lines.append(f"  [{'PASS' if ok else 'FAIL'}] {ex}  (got {shown})")
    return "\n".join(lines)
