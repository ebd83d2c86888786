"""Figure sets built only from trajectory and error logs."""
from __future__ import annotations

import numpy as np

from .experiments import cumulative_average
from .svgplot import line_chart
from .trajio import Table


def _trajectories(table: Table, title):
    pos = table.positions()
    series = [(f"agent {i}", pos[:, i, 0], pos[:, i, 1]) for i in range(table.n_agents)]
    starts = [(f"start {i}", pos[0, i, 0], pos[0, i, 1]) for i in range(table.n_agents)]
    return line_chart(series, title, "x (mm)", "y (mm)", equal_aspect=True, markers=starts)


def _curvature(table: Table):
    t = table.times()
    u = table.grid("u_per_mm")
    series = [(f"agent {i}", t, u[:, i]) for i in range(table.n_agents)]
    return line_chart(series, "Curvature command", "t (s)", "u (1/mm)")


def mmc_figures(table: Table, ideal: Table | None, errors: Table | None):
    figs = {"trajectory_run.svg": _trajectories(table, "Run trajectories")}
    if ideal is not None:
        figs["trajectory_ideal.svg"] = _trajectories(ideal, "Ideal trajectories")
    rho = table.grid("rho_mm")[:, 0]
    gamma = table.grid("gamma_mm_s")[:, 0]
    series = [("run", rho, gamma)]
    if ideal is not None:
        series.append(("ideal", ideal.grid("rho_mm")[:, 0], ideal.grid("gamma_mm_s")[:, 0]))
    figs["phase_rho_gamma.svg"] = line_chart(series, "Shape phase plot", "rho (mm)", "gamma (mm/s)")
    figs["curvature.svg"] = _curvature(table)
    t = table.times()
    if errors is not None:
        e = errors.grid("e_mm")
        figs["error.svg"] = line_chart([(f"agent {i}", t, e[:, i]) for i in range(e.shape[1])],
                                       "Position error vs ideal", "t (s)", "e (mm)")
    pct = table.grid("E_pct_err")[:, 0]
    figs["energy_error.svg"] = line_chart(
        [("% error", t, pct), ("cumulative avg |% error|", t, cumulative_average(np.abs(pct)))],
        "Error in E", "t (s)", "% error")
    return figs


def tva_figures(table: Table):
    t = table.times()
    theta = table.grid("theta_i")
    series = [("total", t, theta.sum(axis=1))]
    series += [(f"agent {i}", t, theta[:, i]) for i in range(table.n_agents)]
    return {
        "trajectories.svg": _trajectories(table, "Trajectories"),
        "contrast.svg": line_chart(series, "Contrast", "t (s)", "Theta"),
        "curvature.svg": _curvature(table),
    }
