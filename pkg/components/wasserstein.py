"""
Empirical Wasserstein distances between equally weighted samples.

W_p = (mean optimal cost)^{min(1, 1/p)} with cost |u - v|^p. One dimension
uses order statistics; higher dimensions solve the assignment problem
exactly with scipy's Hungarian-type solver.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from components.errors import DimensionError, DomainError, SizeMismatch, TooLarge

logger = logging.getLogger(__name__)

EXACT_SOLVER_CAP = 4096
BOOTSTRAP_RESAMPLES = 200
SHIFT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim == 1:
            s = s[:, None]
        if s.ndim != 2 or s.shape[0] < 1:
            raise ValueError("an empirical measure needs at least one sample row")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def d(self) -> int:
        return self.samples.shape[1]

    def subsample(self, n: int, rng: np.random.Generator) -> "EmpiricalMeasure":
        if n >= self.n:
            return self
        idx = rng.choice(self.n, size=n, replace=False)
        return EmpiricalMeasure(self.samples[np.sort(idx)])

    def shifted(self, u) -> "EmpiricalMeasure":
        return EmpiricalMeasure(self.samples + np.asarray(u, dtype=float))

    def scaled(self, c: float) -> "EmpiricalMeasure":
        return EmpiricalMeasure(c * self.samples)


def _as_measure(a) -> EmpiricalMeasure:
    return a if isinstance(a, EmpiricalMeasure) else EmpiricalMeasure(a)


def _exponent(p: float) -> float:
    if not p > 0:
        raise DomainError("Wasserstein order must be positive")
    return min(1.0, 1.0 / p)


def wasserstein_1d(a, b, p: float = 1.0) -> float:
    """
    Order-statistics formula. Unequal sample counts are handled exactly by
    integrating the difference of the two quantile step functions.
    """
    a, b = _as_measure(a), _as_measure(b)
    if a.d != 1 or b.d != 1:
        raise DimensionError(f"1-D formula needs d = 1, got {a.d} and {b.d}")
    xa = np.sort(a.samples[:, 0])
    xb = np.sort(b.samples[:, 0])
    if xa.size == xb.size:
        cost = float(np.mean(np.abs(xa - xb) ** p))
    else:
        cuts = np.union1d(np.arange(1, xa.size + 1) / xa.size, np.arange(1, xb.size + 1) / xb.size)
        widths = np.diff(np.concatenate(([0.0], cuts)))
        mids = cuts - 0.5 * widths
        qa = xa[np.minimum((mids * xa.size).astype(int), xa.size - 1)]
        qb = xb[np.minimum((mids * xb.size).astype(int), xb.size - 1)]
        cost = float(np.sum(widths * np.abs(qa - qb) ** p))
    return cost ** _exponent(p)


def optimal_assignment(a, b, p: float = 1.0):
    """Row/column indices of the optimal coupling and the cost matrix."""
    a, b = _as_measure(a), _as_measure(b)
    if a.n != b.n:
        raise SizeMismatch(f"sample counts differ: {a.n} vs {b.n}")
    if a.d != b.d:
        raise DimensionError(f"dimensions differ: {a.d} vs {b.d}")
    if a.n > EXACT_SOLVER_CAP:
        raise TooLarge(f"exact assignment capped at n = {EXACT_SOLVER_CAP}, got {a.n}")
    cost = cdist(a.samples, b.samples) ** p
    rows, cols = linear_sum_assignment(cost)
    return rows, cols, cost


def wasserstein_nd(a, b, p: float = 1.0) -> float:
    rows, cols, cost = optimal_assignment(a, b, p)
    return float(cost[rows, cols].mean()) ** _exponent(p)


def wasserstein(a, b, p: float = 1.0, rng: Optional[np.random.Generator] = None) -> float:
    """
    Dispatcher: order statistics in 1-D for p >= 1, exact assignment
    otherwise. Larger samples are subsampled to a common size within the
    solver cap.
    """
    a, b = _as_measure(a), _as_measure(b)
    if a.d == 1 and p >= 1.0:
        return wasserstein_1d(a, b, p)
    rng = np.random.default_rng(0) if rng is None else rng
    n = min(a.n, b.n, EXACT_SOLVER_CAP)
    return wasserstein_nd(a.subsample(n, rng), b.subsample(n, rng), p)


def empirical_moment(U, p: float) -> float:
    """Mean of |sample|^p."""
    U = _as_measure(U)
    return float(np.mean(np.linalg.norm(U.samples, axis=1) ** p))


def bootstrap_standard_error(
    statistic: Callable[[np.ndarray], float],
    samples: np.ndarray,
    rng: np.random.Generator,
    resamples: int = BOOTSTRAP_RESAMPLES,
) -> float:
    """Standard deviation of ``statistic`` over row-resampled copies."""
    samples = np.asarray(samples)
    n = samples.shape[0]
    values = [statistic(samples[rng.integers(0, n, size=n)]) for _ in range(resamples)]
    return float(np.std(values, ddof=1))


@dataclass(frozen=True)
class ShiftCheck:
    estimate: float
    predicted: float
    lower: float
    upper: float

    @property
    def inside(self) -> bool:
        return self.lower <= self.estimate <= self.upper


def shift_linearity_check(U, u, p: float = 1.0, rng: Optional[np.random.Generator] = None) -> ShiftCheck:
    """
    Empirical W_p(u + U, U), comparing the shifted sample with itself.

    For p >= 1 the estimate equals |u| up to rounding, so u = 0 gives 0.
    For p < 1 it lies in [max(|u|^p - 2 E|U|^p, 0), |u|^p]. Samples above
    the exact solver cap are subsampled once and the same subsample is used
    on both sides; one-dimensional samples with p >= 1 are never subsampled.
    """
    U = _as_measure(U)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.size != U.d:
        raise DimensionError("shift and samples differ in dimension")
    rng = np.random.default_rng(0) if rng is None else rng
    norm_u = float(np.linalg.norm(u))
    if p >= 1.0:
        base = U if U.d == 1 else U.subsample(EXACT_SOLVER_CAP, rng)
        estimate = wasserstein(base.shifted(u), base, p, rng)
        slack = SHIFT_TOL * (1.0 + norm_u)
        return ShiftCheck(estimate, norm_u, max(norm_u - slack, 0.0), norm_u + slack)
    base = U.subsample(EXACT_SOLVER_CAP, rng)
    estimate = wasserstein_nd(base.shifted(u), base, p)
    upper = norm_u ** p
    lower = max(upper - 2.0 * empirical_moment(base, p), 0.0)
    return ShiftCheck(estimate, upper, lower, upper)


def contraction_check(U1, U2, T: Callable[[np.ndarray], np.ndarray], p: float = 1.0) -> bool:
    """W_p(T U1, T U2) <= W_p(U1, U2) for a 1-Lipschitz map T, up to solver rounding."""
    U1, U2 = _as_measure(U1), _as_measure(U2)
    before = wasserstein_nd(U1, U2, p)
    after = wasserstein_nd(EmpiricalMeasure(T(U1.samples)), EmpiricalMeasure(T(U2.samples)), p)
    scale = max(1.0, before)
    return after <= before + 1e-12 * scale


def coordinate_projection(indices) -> Callable[[np.ndarray], np.ndarray]:
    idx = list(indices)
    return lambda X: X[:, idx]
