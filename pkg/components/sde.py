"""
SDE module: marginals of X_t = e^{-Qt}x + eps*O_t and of the stationary
law O_inf.

Brownian and deterministic drivers are sampled exactly; every other driver
goes through Euler-Maruyama on a uniform grid.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from components.entropy import GaussianLaw
from components.errors import DimensionError, DomainError, MomentGate, StepTooLarge
from components.linalg import (
    as_square_matrix,
    check_stability,
    growth_constants,
    lyapunov_solve,
    matrix_exponential,
    propagator,
    psd_sqrt,
)
from components.noise import (
    Brownian,
    Deterministic,
    NoiseSpec,
    RedNoise,
    default_step,
    red_noise_state,
    validate_moment,
)
from components.wasserstein import EmpiricalMeasure, wasserstein

logger = logging.getLogger(__name__)

STATIONARY_FACTOR = 30.0
MAX_STEP_NORM = 0.5
MAX_RECORDS = 1000


@dataclass(frozen=True, eq=False)
class PathBatch:
    times: np.ndarray
    states: np.ndarray  # (len(times), n, d)

    def __post_init__(self):
        if self.states.shape[1] < 1:
            raise ValueError("a path batch needs at least one sample")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("path states must be finite")

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def d(self) -> int:
        return self.states.shape[2]

    def marginal(self, index: int = -1) -> EmpiricalMeasure:
        return EmpiricalMeasure(self.states[index])


def _covariance_from_source(Q: np.ndarray, S: np.ndarray, t: float) -> np.ndarray:
    d = Q.shape[0]
    if t == 0.0:
        return np.zeros((d, d))
    if t * np.linalg.norm(Q, 2) <= 1.0:
        # Van Loan block exponential
        M = np.zeros((2 * d, 2 * d))
        M[:d, :d] = -Q
        M[:d, d:] = S
        M[d:, d:] = Q.T
        F = matrix_exponential(M * t)
        G = F[:d, d:]
        E = F[:d, :d]
        cov = G @ E.T
    else:
        inf = lyapunov_solve(Q, S)
        E = propagator(Q, t)
        cov = inf - E @ inf @ E.T
    return 0.5 * (cov + cov.T)


def gaussian_covariance(Q, sigma, t: float) -> np.ndarray:
    """Sigma_t = int_0^t e^{-Qs} sigma sigma^T e^{-Q^T s} ds."""
    Q = as_square_matrix(Q)
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    if t < 0:
        raise ValueError("t must be non-negative")
    return _covariance_from_source(Q, sigma @ sigma.T, float(t))


def exact_marginal(Q, sigma, x, eps: float, t: float) -> GaussianLaw:
    """
    N(e^{-Qt}x, eps^2 Sigma_t) for Brownian forcing sigma dW.

    Needs t > 0 and eps > 0. At t = 0 the law is the point mass at x, which
    has no density.
    """
    if not t > 0.0:
        raise DomainError(f"exact marginal needs t > 0, got {t}")
    if not eps > 0.0:
        raise DomainError(f"exact marginal needs eps > 0, got {eps}")
    Q = as_square_matrix(Q)
    mean = propagator(Q, t) @ np.asarray(x, dtype=float)
    return GaussianLaw(mean, eps ** 2 * gaussian_covariance(Q, sigma, t))


def _check_inputs(Q, spec: NoiseSpec, p: Optional[float]):
    check_stability(Q)
    if spec.dim != Q.shape[0]:
        raise DimensionError(f"noise has dimension {spec.dim}, drift has {Q.shape[0]}")
    if p is not None and not validate_moment(spec, p):
        raise MomentGate(f"order {p} exceeds the moments of the {spec.kind} driver")


def _euler(Q, x, eps, spec, t, n, dt, rng, record_paths):
    steps = max(1, int(math.ceil(t / dt)))
    h = t / steps
    X = np.tile(np.asarray(x, dtype=float), (n, 1))
    stepper = red_noise_state(spec, rng, n) if isinstance(spec, RedNoise) else None
    stride = max(1, steps // MAX_RECORDS)
    times, states = [0.0], [X.copy()]
    drift_step = np.eye(Q.shape[0]) - h * Q
    for k in range(1, steps + 1):
        dL = stepper.step(h) if stepper is not None else spec.increments(h, rng, n)
        X = X @ drift_step.T + eps * dL
        if record_paths and (k % stride == 0 or k == steps):
            times.append(k * h)
            states.append(X.copy())
    if record_paths:
        return PathBatch(np.asarray(times), np.stack(states))
    return EmpiricalMeasure(X)


def simulate_marginal(
    Q,
    x,
    eps: float,
    spec: NoiseSpec,
    t: float,
    n: int,
    dt: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
    p: Optional[float] = None,
    record_paths: bool = False,
    exact: bool = True,
    normals: Optional[np.ndarray] = None,
):
    """
    n i.i.d. samples of X^eps_t(x).

    ``normals`` (n, d) standard normals may be supplied for the Brownian
    fast path so that two marginals share their randomness.
    """
    Q = as_square_matrix(Q)
    x = np.asarray(x, dtype=float).ravel()
    if n < 1:
        raise ValueError("n must be at least 1")
    _check_inputs(Q, spec, p)
    rng = np.random.default_rng() if rng is None else rng
    dt = default_step(Q) if dt is None else float(dt)
    if dt * np.linalg.norm(Q, 2) > MAX_STEP_NORM:
        raise StepTooLarge(f"dt * |Q| = {dt * np.linalg.norm(Q, 2):.3g} exceeds {MAX_STEP_NORM}")

    flow = propagator(Q, t) @ x
    if (t == 0.0 or eps == 0.0) and not record_paths:
        return EmpiricalMeasure(np.tile(flow, (n, 1)))
    if exact and not record_paths:
        if isinstance(spec, Brownian):
            cov = _covariance_from_source(Q, spec.covariance, float(t))
            z = rng.standard_normal((n, Q.shape[0])) if normals is None else np.asarray(normals)
            return EmpiricalMeasure(flow + eps * z @ psd_sqrt(cov).T)
        if isinstance(spec, Deterministic):
            forced = np.linalg.solve(Q, (np.eye(Q.shape[0]) - propagator(Q, t)) @ spec.drift)
            return EmpiricalMeasure(np.tile(flow + eps * forced, (n, 1)))
    logger.debug("euler: t=%.4g dt=%.3g n=%d noise=%s", t, dt, n, spec.kind)
    return _euler(Q, x, eps, spec, float(t), n, dt, rng, record_paths)


def stationary_horizon(Q, spec: Optional[NoiseSpec] = None) -> float:
    q_min = float(np.min(check_stability(Q).real))
    if isinstance(spec, RedNoise):
        q_min = min(q_min, float(np.min(check_stability(spec.damping).real)))
    return STATIONARY_FACTOR / q_min


def stationary_sample(
    Q,
    spec: NoiseSpec,
    n: int,
    rng: Optional[np.random.Generator] = None,
    dt: Optional[float] = None,
    p: Optional[float] = None,
    normals: Optional[np.ndarray] = None,
) -> EmpiricalMeasure:
    """Samples of O_inf, the eps = 1 equilibrium."""
    Q = as_square_matrix(Q)
    _check_inputs(Q, spec, p)
    rng = np.random.default_rng() if rng is None else rng
    d = Q.shape[0]
    if isinstance(spec, Brownian):
        cov = lyapunov_solve(Q, spec.covariance)
        z = rng.standard_normal((n, d)) if normals is None else np.asarray(normals)
        return EmpiricalMeasure(z @ psd_sqrt(cov).T)
    if isinstance(spec, Deterministic):
        return EmpiricalMeasure(np.tile(np.linalg.solve(Q, spec.drift), (n, 1)))
    horizon = stationary_horizon(Q, spec)
    return simulate_marginal(Q, np.zeros(d), 1.0, spec, horizon, n, dt, rng)


def ou_distance_bound(Q, t: float, p: float, stationary_moment: float) -> float:
    """
    Bound on W_p(O_t, O_inf) from |e^{-Qt}| <= C0 e^{-q* t};
    ``stationary_moment`` is E|O_inf|^p.
    """
    C0, q_star = growth_constants(Q)
    return (C0 * math.exp(-q_star * t)) ** min(1.0, p) * stationary_moment ** min(1.0, 1.0 / p)


def ou_distance_decay(
    Q,
    spec: NoiseSpec,
    t_grid: Sequence[float],
    n: int,
    p: float,
    rng: Optional[np.random.Generator] = None,
    dt: Optional[float] = None,
) -> list:
    """Empirical W_p(O_t, O_inf) for each t in the grid."""
    Q = as_square_matrix(Q)
    rng = np.random.default_rng() if rng is None else rng
    stationary = stationary_sample(Q, spec, n, rng, dt, p)
    zero = np.zeros(Q.shape[0])
    out = []
    for t in t_grid:
        marginal = simulate_marginal(Q, zero, 1.0, spec, float(t), n, dt, rng, p)
        out.append(wasserstein(marginal, stationary, p, rng))
    return out
