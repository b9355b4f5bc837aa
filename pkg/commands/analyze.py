"""Analyze command.

Decomposes e^{-Qt}x for one system, runs the normal-growth test and writes
report.json with the resulting cutoff report.
"""

from __future__ import annotations

import logging
import math
from typing import Optional, Tuple

import numpy as np

from components.config import SCHEMA_VERSION, RunConfig, build_system
from components.cutoff import build_report, stationary_moment_bound
from components.dev_utils import show_report
from components.errors import MomentGate, RealSpectrum, SingularCovariance
from components.linalg import lyapunov_solve
from components.noise import Brownian, Deterministic, NoiseSpec, validate_moment
from components.reports import load_schema, to_jsonable, validate_report, write_report
from components.sde import stationary_sample
from components.spectral import decompose, normal_growth, oscillator_2x2_check, weighted_normal_growth

logger = logging.getLogger(__name__)

EXACT_STATIONARY_SAMPLES = 100_000


def check_moments(noise: NoiseSpec, *orders: float):
    for p in orders:
        if not validate_moment(noise, p):
            raise MomentGate(f"order {p} exceeds the moments of the {noise.kind} driver")


def estimate_stationary_moment(
    Q, noise: NoiseSpec, samples: int, rng: np.random.Generator, dt: Optional[float] = None
) -> Tuple[float, float]:
    """Monte Carlo E|O_inf| and its standard error; inf when the first moment is missing."""
    if not validate_moment(noise, 1.0):
        return math.inf, math.nan
    exact = isinstance(noise, (Brownian, Deterministic))
    n = EXACT_STATIONARY_SAMPLES if exact else samples
    U = stationary_sample(Q, noise, n, rng, dt)
    norms = np.linalg.norm(U.samples, axis=1)
    return float(norms.mean()), float(norms.std(ddof=1) / math.sqrt(n))


def _oscillator_section(Q, x) -> Optional[dict]:
    if Q.shape != (2, 2):
        return None
    try:
        return oscillator_2x2_check(Q, x).as_dict()
    except RealSpectrum:
        return None


def _entropy_section(dec, Q, noise: NoiseSpec) -> Optional[dict]:
    if not isinstance(noise, Brownian):
        return None
    try:
        verdict = weighted_normal_growth(dec, lyapunov_solve(Q, noise.covariance))
    except SingularCovariance as e:
        logger.info("no weighted verdict: %s", e)
        return None
    return verdict.as_dict()


def analyze(cfg: RunConfig) -> dict:
    """Build the report document for one configured system."""
    system = build_system(cfg)
    Q, x, noise = system.drift, system.initial, system.noise
    check_moments(noise, cfg.p, cfg.observable_order)

    dec = decompose(Q, x)
    growth = normal_growth(dec)
    rng = np.random.default_rng(cfg.seed)
    moment, moment_se = estimate_stationary_moment(Q, noise, cfg.samples, rng, cfg.dt)
    bound = stationary_moment_bound(Q, noise)
    eta = cfg.eta if cfg.horizon is not None else None
    report = build_report(dec, growth, cfg.p, moment, bound, cfg.window, cfg.horizon, eta)

    return {
        "schema_version": SCHEMA_VERSION,
        "scenario": system.name,
        "params": dict(system.params),
        "regime": system.regime.value if system.regime is not None else None,
        "drift": Q.tolist(),
        "initial_state": x.tolist(),
        "noise": noise.as_dict(),
        "seed": cfg.seed,
        "decomposition": dec.as_dict(),
        "normal_growth": growth.as_dict(),
        "cutoff": report.as_dict(),
        "stationary_moment_se": moment_se,
        "oscillator_check": _oscillator_section(Q, x),
        "entropy_normal_growth": _entropy_section(dec, Q, noise),
    }


def run(cfg: RunConfig, out_dir: str, verbose: bool = False) -> str:
    """
    Write report.json into ``out_dir``.

    Returns:
        str: path of the written report
    """
    doc = analyze(cfg)
    problems = validate_report(to_jsonable(doc), load_schema())
    for problem in problems:
        logger.warning("schema: %s", problem)
    path = write_report(doc, out_dir)
    if verbose:
        show_report(doc)
    print(f"wrote {path}")
    return path
