"""Curve command.

Samples X^eps_t along t = t_eps + r*w and t = delta*t_eps and writes the
renormalized Wasserstein distances to CSV, next to the predicted profile and
the deterministic sandwich. Rows are computed on the run session's workers.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from commands.analyze import check_moments, estimate_stationary_moment
from components.config import RunConfig, build_system
from components.cutoff import (
    CutoffReport,
    Verdict,
    abstract_profile_value,
    build_report,
    cutoff_time,
    moment_cutoff_prediction,
    profile_value,
    sandwich_bounds,
    stationary_moment_bound,
)
from components.noise import Brownian, Deterministic, NoiseSpec
from components.reports import write_csv, write_plot_script
from components.sde import ou_distance_bound, simulate_marginal, stationary_sample
from components.session import parallel_map
from components.spectral import decompose, normal_growth
from components.wasserstein import EmpiricalMeasure, empirical_moment, wasserstein

logger = logging.getLogger(__name__)

CURVE_R = "curve_r.csv"
CURVE_DELTA = "curve_delta.csv"
CURVE_MOMENT = "curve_moment.csv"
R_HEADER = ("epsilon", "r", "empirical_renormalized_Wp", "predicted_profile", "sandwich_lo", "sandwich_hi")
DELTA_HEADER = ("epsilon", "delta", "empirical_renormalized_Wp")
MOMENT_HEADER = ("epsilon", "r", "empirical_renormalized_moment", "predicted_large_r")


@dataclass(frozen=True, eq=False)
class CurveSystem:
    drift: np.ndarray
    initial: np.ndarray
    noise: NoiseSpec
    report: CutoffReport
    p: float
    moment_order: float
    samples: int
    dt: Optional[float] = None


def prepare(cfg: RunConfig) -> CurveSystem:
    system = build_system(cfg)
    Q, x, noise = system.drift, system.initial, system.noise
    check_moments(noise, cfg.p, cfg.observable_order)
    dec = decompose(Q, x)
    rng = np.random.default_rng(cfg.seed)
    moment, _ = estimate_stationary_moment(Q, noise, cfg.samples, rng, cfg.dt)
    report = build_report(dec, normal_growth(dec), cfg.p, moment, stationary_moment_bound(Q, noise), cfg.window)
    return CurveSystem(Q, x, noise, report, cfg.p, cfg.observable_order, cfg.samples, cfg.dt)


def _synchronous_cost(A: np.ndarray, B: np.ndarray, p: float) -> float:
    """Cost of the coupling that pairs row i with row i."""
    cost = float(np.mean(np.linalg.norm(A - B, axis=1) ** p))
    return cost ** (1.0 / p) if p >= 1.0 else cost


def marginal_pair(system: CurveSystem, eps: float, t: float, rng: np.random.Generator):
    """
    Samples of X^eps_t(x) and O_inf and a bound on W_p(O_t, O_inf).

    Exact drivers share their standard normals across the three laws, so the
    bound is the synchronous coupling of the very samples compared.
    """
    Q, x, noise, n, p, dt = system.drift, system.initial, system.noise, system.samples, system.p, system.dt
    d = Q.shape[0]
    if isinstance(noise, (Brownian, Deterministic)):
        z = rng.standard_normal((n, d))
        X = simulate_marginal(Q, x, eps, noise, t, n, dt, rng, p, normals=z)
        stationary = stationary_sample(Q, noise, n, rng, dt, p, normals=z)
        O_t = simulate_marginal(Q, np.zeros(d), 1.0, noise, t, n, dt, rng, p, normals=z)
        return X, stationary, _synchronous_cost(O_t.samples, stationary.samples, p)
    X = simulate_marginal(Q, x, eps, noise, t, n, dt, rng, p)
    stationary = stationary_sample(Q, noise, n, rng, dt, p)
    return X, stationary, ou_distance_bound(Q, t, p, empirical_moment(stationary, p))


def renormalized_distance(X: EmpiricalMeasure, stationary: EmpiricalMeasure, eps: float, p: float,
                          rng: np.random.Generator) -> float:
    """W_p(X^eps_t, eps*O_inf) / eps^min(1, p)."""
    return wasserstein(X, stationary.scaled(eps), p, rng) / eps ** min(1.0, p)


def predicted_profile(report: CutoffReport, r: float, stationary: EmpiricalMeasure, p: float,
                      rng: np.random.Generator) -> Optional[float]:
    if report.verdict == Verdict.EXPLICIT_PROFILE:
        return profile_value(report, r)
    if report.verdict == Verdict.ABSTRACT_PROFILE:
        return abstract_profile_value(report, r, stationary, p, rng)
    return None


def r_row(system: CurveSystem, eps: float, r: float, rng: np.random.Generator) -> Tuple:
    report, p = system.report, system.p
    t = cutoff_time(report.rate, report.ell, eps) + r * report.window
    if t < 0:
        logger.warning("skipping eps=%g r=%g: t = %.4g is negative", eps, r, t)
        return eps, r, math.nan, None, math.nan, math.nan
    X, stationary, ou = marginal_pair(system, eps, t, rng)
    empirical = renormalized_distance(X, stationary, eps, p, rng)
    moment = empirical_moment(stationary, p) if p < 1.0 else None
    lo, hi = sandwich_bounds(system.drift, system.initial, t, eps, ou, p, moment)
    return eps, r, empirical, predicted_profile(report, r, stationary, p, rng), lo, hi


def delta_row(system: CurveSystem, eps: float, delta: float, rng: np.random.Generator) -> Tuple:
    t = delta * cutoff_time(system.report.rate, system.report.ell, eps)
    X, stationary, _ = marginal_pair(system, eps, t, rng)
    return eps, delta, renormalized_distance(X, stationary, eps, system.p, rng)


def moment_row(system: CurveSystem, eps: float, r: float, rng: np.random.Generator) -> Tuple:
    """E|X^eps_t|^{p'} / eps^{p'} along t_eps + r*w."""
    report, order = system.report, system.moment_order
    t = cutoff_time(report.rate, report.ell, eps) + r * report.window
    if t < 0:
        return eps, r, math.nan, math.nan
    X, stationary, _ = marginal_pair(system, eps, t, rng)
    value = empirical_moment(X, order) / eps ** order
    return eps, r, value, moment_cutoff_prediction(order, empirical_moment(stationary, order), r)


ROWS = {"r": r_row, "delta": delta_row, "moment": moment_row}


def run(cfg: RunConfig, out_dir: str) -> List[str]:
    """
    Write curve_r.csv, curve_delta.csv (and curve_moment.csv when p' is
    configured) plus a plot script into ``out_dir``.
    """
    system = prepare(cfg)
    tasks = [("r", e, r) for e in cfg.eps_grid for r in cfg.r_grid]
    tasks += [("delta", e, dl) for e in cfg.eps_grid for dl in cfg.delta_grid]
    if cfg.moment_order is not None:
        tasks += [("moment", e, r) for e in cfg.eps_grid for r in cfg.r_grid]
    logger.info("curve: %d rows, verdict %s", len(tasks), system.report.verdict.value)

    rows = parallel_map(lambda task, rng: (task[0], ROWS[task[0]](system, task[1], task[2], rng)), tasks)

    written = []
    for kind, name, header in (("r", CURVE_R, R_HEADER), ("delta", CURVE_DELTA, DELTA_HEADER),
                               ("moment", CURVE_MOMENT, MOMENT_HEADER)):
        selected = [row for k, row in rows if k == kind]
        if selected:
            written.append(write_csv(selected, header, os.path.join(out_dir, name)))
    written.append(write_plot_script(out_dir, [os.path.basename(p) for p in written]))
    for path in written:
        print(f"wrote {path}")
    return written
