"""Acceptance suite: one test per criterion, one verdict line each.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are
also repeated in the terminal summary.
"""
import math
import time

import numpy as np
import pytest

from swarmsteer import mmc, sim, tva
from swarmsteer.cli import main, preset_paths
from swarmsteer.config import load_config
from swarmsteer.experiments import run_experiment
from swarmsteer.frenet import AgentState2, AgentState3

RESULTS = {}


def report(n, title, checks):
    """Record and print the verdict for criterion ``n``.

    ``checks`` is a list of (label, ok) pairs; the criterion passes only
    if every sub-check passes.
    """
    ok = all(c for _, c in checks)
    detail = "; ".join(f"{label} [{'ok' if c else 'FAILED'}]" for label, c in checks)
    line = f"criterion {n:>2} {title}: {'PASS' if ok else 'FAIL'} -- {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def preset(name):
    return load_config(next(p for p in preset_paths() if p.name == name + ".json"))


def test_c01_energy_conservation():
    mu, delta = 0.001, 400.0
    t0 = time.perf_counter()
    proj = mmc.reduced_trajectory((500.0, 100.0), delta, mu, 0.04, 2500, conserve=True)
    free = mmc.reduced_trajectory((500.0, 100.0), delta, mu, 1e-3, 100_000, conserve=False)
    elapsed = time.perf_counter() - t0

    def drift(traj):
        e = traj[:, 0] ** 2 * (delta ** 2 - traj[:, 1] ** 2) * np.exp(-2 * mu * traj[:, 0])
        return float(np.max(np.abs(e - e[0])) / e[0])

    dp, df = drift(proj), drift(free)
    report(1, "energy conservation", [
        (f"projected drift {dp:.2e} < 1e-9 (dt 0.04, 100 s)", dp < 1e-9),
        (f"unprojected drift {df:.2e} < 1e-6 (dt 1e-3)", df < 1e-6),
        (f"runtime {elapsed:.3f} s < 1 s", elapsed < 1.0),
    ])


@pytest.fixture(scope="module")
def mmc_runs():
    t0 = time.perf_counter()
    pure = run_experiment(preset("mmc-pure-noisy"))
    t1 = time.perf_counter()
    diss = run_experiment(preset("mmc-dissipative"))
    t2 = time.perf_counter()
    return pure, diss, t1 - t0, t2 - t1


def test_c02_dissipative_stabilization(mmc_runs):
    pure, diss, tp, td = mmc_runs
    assert pure.experiment.config.seed == diss.experiment.config.seed
    assert diss.experiment.config.mmc.k_d == 1e-15 and pure.experiment.config.mmc.k_d == 0.0
    sd = diss.metrics["E_cumavg_pct_err_final20_max"]
    sp = pure.metrics["E_cumavg_pct_err_final20_max"]
    slope = pure.metrics["error_slope_mm_s"]
    report(2, "dissipative stabilization", [
        (f"k_d=1e-15 cumulative |E-E_d|/E_d over final 20% {sd:.3f}% < 2%", sd < 2.0),
        (f"k_d=0 same statistic {sp:.2f}% > 10%", sp > 10.0),
        (f"k_d=0 error trend slope {slope:.3f} mm/s > 0", slope > 0.0),
        (f"runtime {max(tp, td):.2f} s < 10 s per run", max(tp, td) < 10.0),
    ])


def test_c03_fixed_point_orbit():
    a1, a2 = mmc.pair_from_shape(1000.0, 0.0, 200.0)
    cfg = sim.SimConfig("mmc", [sim.AgentSpec(tuple(a.r), a.nu, heading=a.heading) for a in (a1, a2)],
                        60.0, mmc=mmc.MmcParams(0.001), avoidance=sim.Avoidance(0.0))
    rho = sim.stack(sim.run(cfg), "rho")
    dev = float(np.max(np.abs(rho - 1000.0)) / 1000.0)
    report(3, "fixed-point orbit", [(f"max |rho-1000|/1000 = {dev:.2e} < 1e-3 over 60 s", dev < 1e-3)])


def _two_agent_theta_error(theta0):
    phi = math.acos(1.0 - theta0)
    agents = [sim.AgentSpec((0.0, 0.0), 60.0, heading=phi), sim.AgentSpec((0.0, 1000.0), 60.0, heading=0.0)]
    cfg = sim.SimConfig("tva", agents, 3.0, dt=1e-3, tva=tva.TvaParams(1.0, 1), avoidance=sim.Avoidance(0.0))
    recs = sim.run(cfg)
    t = np.array([r.t for r in recs])
    th = np.array([r.theta[0] for r in recs])
    return float(np.max(np.abs(th - tva.theta_closed_form(theta0, 1.0, t))))


def test_c04_closed_form_contrast():
    rng = np.random.default_rng(2024)
    thetas = [1.0] + list(rng.uniform(0.1, 1.9, size=5))
    errs = [_two_agent_theta_error(th) for th in thetas]
    report(4, "two-agent contrast vs closed form", [
        (f"Theta0={th:.3f}: max err {e:.2e} < 1e-3", e < 1e-3) for th, e in zip(thetas, errs)])


def test_c05_manifold_conservation():
    traj = tva.shape_trajectory(tva.TvaShape(1000.0, 1.0, 0.0), 60.0, 80.0, 1.0, 1e-3, 10_000)
    c = traj[:, 0] * np.sin(traj[:, 1])
    drift = float(np.max(np.abs(c - c[0])) / abs(c[0]))
    inside = bool(np.all((traj[:, 1] > 0) & (traj[:, 1] < math.pi)))
    report(5, "TVA-manifold conservation", [
        (f"rho sin psi drift {drift:.2e} < 1e-6 over 10 s", drift < 1e-6),
        ("psi stays in (0, pi)", inside),
        ("phi stays exactly 0", bool(np.all(traj[:, 2] == 0.0))),
    ])


def test_c06_flocking_preset():
    r = run_experiment(preset("tva-flock8-K3"))
    cfg = r.experiment.config
    m = r.metrics
    report(6, "flocking preset", [
        (f"{len(cfg.agents)} agents, K={cfg.tva.K}", len(cfg.agents) == 8 and cfg.tva.K == 3),
        (f"Theta_total below 1e-2 from t={m['theta_settle_1e-2_s']:.2f} s (<= 10 s)",
         m["theta_settle_1e-2_s"] <= 10.0),
        (f"final heading spread {m['heading_spread_final_deg']:.2e} deg < 1 deg",
         m["heading_spread_final_deg"] < 1.0),
    ])


def test_c07_splitting_preset():
    r = run_experiment(preset("tva-split8-K1"))
    cfg = r.experiment.config
    m = r.metrics
    report(7, "splitting preset", [
        (f"{len(cfg.agents)} agents, K={cfg.tva.K}", len(cfg.agents) == 8 and cfg.tva.K == 1),
        (f"final Theta_total {m['theta_total_final']:.2e} < 1e-2", m["theta_total_final"] < 1e-2),
        (f"cluster_count {m['cluster_count_final']} >= 2", m["cluster_count_final"] >= 2),
    ])


def test_c08_perturbation_preset():
    r = run_experiment(preset("tva-predator6"))
    cfg = r.experiment.config
    m = r.metrics
    report(8, "perturbation preset", [
        (f"{len(cfg.agents)} agents + perturber, K 3->1 at 20 s",
         len(cfg.agents) == 6 and cfg.perturber is not None and cfg.tva.K == 3
         and [(e.t, e.K) for e in cfg.events] == [(20.0, 1)]),
        (f"Theta_total rise {m['theta_rise_after_perturber']:.3f} > 0.05 after contact at "
         f"{m['perturber_contact_s']:.2f} s", m["theta_rise_after_perturber"] > 0.05),
        (f"final Theta_total {m['theta_total_final']:.2e} < 1e-2", m["theta_total_final"] < 1e-2),
        (f"cluster_count {m['cluster_count_final']} >= 2", m["cluster_count_final"] >= 2),
    ])


def test_c09_algebraic_identities():
    rng = np.random.default_rng(99)
    worst_lat = 0.0
    for _ in range(1000):
        nu, mu = rng.uniform(1.0, 300.0), rng.uniform(0.1, 5.0)
        x = rng.normal(size=3)
        x /= np.linalg.norm(x)
        y = np.cross(x, rng.normal(size=3))
        s = AgentState3.from_frame((0, 0, 0), x, y / np.linalg.norm(y), nu)
        xn = rng.normal(size=3)
        xn /= np.linalg.norm(xn)
        lhs = tva.lateral_acceleration(s, xn, mu)
        rhs = mu * nu * (xn - (xn @ s.x) * s.x)
        worst_lat = max(worst_lat, float(np.max(np.abs(lhs - rhs))) / (mu * nu))
    worst_g = 0.0
    for _ in range(1000):
        a1 = AgentState2.from_heading(rng.uniform(-2000, 2000, 2), rng.uniform(-math.pi, math.pi), 60.0)
        a2 = AgentState2.from_heading(rng.uniform(-2000, 2000, 2), rng.uniform(-math.pi, math.pi), 60.0)
        sh = tva.shape_from_states(a1, a2)
        g = tva.shape_matrix(sh)
        ref = tva.relative_pose(a1, a2)
        err = np.abs(g - ref)
        err[0:2, 2] /= sh.rho  # translation entries relative to the separation
        worst_g = max(worst_g, float(err.max()))

    def fd_error(dt):
        n = int(round(3.0 / dt))
        traj = tva.shape_trajectory(tva.TvaShape(1000.0, 0.4, 2.0), 60.0, 60.0, 1.0, dt, n)
        th = tva.contrast_from_phi(traj[:, 2])
        return float(np.max(np.abs(np.diff(th) / dt + 2.0 * th[:-1] * (2.0 - th[:-1]))))

    e1, e2 = fd_error(2e-3), fd_error(1e-3)
    report(9, "algebraic identities", [
        (f"lateral acceleration forms agree to {worst_lat:.1e} (relative to mu nu) < 1e-12", worst_lat < 1e-12),
        (f"shape matrix vs g1^-1 g2 agree to {worst_g:.1e} < 1e-12", worst_g < 1e-12),
        (f"Theta rate finite difference error {e2:.2e} at dt=1e-3, ratio {e1 / e2:.2f} on halving dt (O(dt))",
         1.8 < e1 / e2 < 2.2 and e2 < 4e-3),
    ])


def test_c10_determinism(tmp_path, capsys):
    codes = [main(["presets", "run-all", "--out", str(tmp_path / d)]) for d in ("a", "b")]
    out = capsys.readouterr().out
    half = len(out) // 2
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*.csv"))
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)
    report(10, "determinism", [
        (f"{len(files)} CSV files byte-identical across two run-all passes", bool(files) and same),
        ("identical reports and exit codes", codes[0] == codes[1] and out[:half] == out[half:]),
    ])


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
