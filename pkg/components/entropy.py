"""
Gaussian relative entropy of the Brownian-driven marginal with respect to
its equilibrium, its eps -> 0 dichotomy and the weighted profile.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import linregress

from components.cutoff import cutoff_time
from components.errors import DegenerateNoise, NoProfile, SingularCovariance, ZeroInitialState
from components.linalg import as_square_matrix, check_stability, lyapunov_solve, propagator
from components.spectral import (
    SpectralDecomposition,
    decompose,
    inverse_sqrt,
    omega_envelope,
    weighted_decomposition,
    weighted_normal_growth,
)

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GaussianLaw:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mean, dtype=float).ravel()
        C = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        if C.shape != (m.size, m.size):
            raise ValueError("mean and covariance dimensions differ")
        scale = max(1.0, float(np.abs(C).max()))
        if np.abs(C - C.T).max() > 1e-12 * scale:
            raise SingularCovariance("covariance is not symmetric")
        C = 0.5 * (C + C.T)
        if np.linalg.eigvalsh(C).min() <= 0.0:
            raise SingularCovariance("covariance is not positive definite")
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "covariance", C)

    @property
    def dim(self) -> int:
        return self.mean.size

    def eigh(self):
        return np.linalg.eigh(self.covariance)

    def logdet(self) -> float:
        w, _ = self.eigh()
        return float(np.sum(np.log(w)))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        w, V = self.eigh()
        z = rng.standard_normal((n, self.dim))
        return self.mean + (z * np.sqrt(w)) @ V.T


def relative_entropy(a: GaussianLaw, b: GaussianLaw) -> float:
    """H(a | b) for two Gaussian laws."""
    if a.dim != b.dim:
        raise ValueError("laws live in different dimensions")
    wb, Vb = b.eigh()
    inv_b = (Vb / wb) @ Vb.T
    m = a.mean - b.mean
    value = 0.5 * (
        float(m @ inv_b @ m)
        + float(np.trace(inv_b @ a.covariance))
        - a.dim
        + float(np.sum(np.log(wb))) - a.logdet()
    )
    return max(value, 0.0)


def controllability_rank(Q, sigma) -> int:
    """Rank of [sigma, Q sigma, ..., Q^{d-1} sigma]."""
    Q = as_square_matrix(Q)
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    blocks = [sigma]
    for _ in range(Q.shape[0] - 1):
        blocks.append(Q @ blocks[-1])
    s = np.linalg.svd(np.hstack(blocks), compute_uv=False)
    return int(np.sum(s > RANK_TOL * s[0])) if s.size and s[0] > 0 else 0


def _stationary(Q: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    if controllability_rank(Q, sigma) < Q.shape[0]:
        raise DegenerateNoise("the pair (Q, sigma) is not controllable")
    return lyapunov_solve(Q, sigma @ sigma.T)


def remainder_term(Q, sigma, t: float) -> float:
    """
    1/2 (Tr(S^-1 Sigma_t) - d + ln det S / det Sigma_t) with S = Sigma_inf,
    evaluated from the deficit S - Sigma_t = e^{-Qt} S e^{-Q^T t}.
    """
    Q = as_square_matrix(Q)
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    S = _stationary(Q, sigma)
    E = propagator(Q, t)
    W = inverse_sqrt(S)
    M = W @ E @ S @ E.T @ W
    mu = np.clip(np.linalg.eigvalsh(0.5 * (M + M.T)), 0.0, None)
    if np.any(mu >= 1.0):
        raise SingularCovariance("Sigma_t is singular at this time")
    return float(0.5 * np.sum(-mu - np.log1p(-mu)))


def marginal_entropy(Q, sigma, x, eps: float, t: float) -> float:
    """H(N(e^{-Qt}x, eps^2 Sigma_t) | N(0, eps^2 Sigma_inf))."""
    Q = as_square_matrix(Q)
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    S = _stationary(Q, sigma)
    u = inverse_sqrt(S) @ (propagator(Q, t) @ np.asarray(x, dtype=float))
    return 0.5 * float(u @ u) / eps ** 2 + remainder_term(Q, sigma, t)


@dataclass(frozen=True)
class EntropyDichotomy:
    delta: float
    slope: float
    epsilons: Tuple[float, ...]
    values: Tuple[float, ...]

    @property
    def predicted_slope(self) -> float:
        return 2.0 * (self.delta - 1.0)

    @property
    def diverges(self) -> bool:
        return self.slope < 0.0


def entropy_dichotomy(Q, sigma, x, delta: float, eps_grid: Sequence[float]) -> EntropyDichotomy:
    """
    Entropy at t = delta * t_eps over an eps grid and the slope of
    ln H against ln eps.
    """
    Q = as_square_matrix(Q)
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    x = np.asarray(x, dtype=float).ravel()
    _stationary(Q, sigma)
    try:
        dec = decompose(Q, x)
        rate, ell = dec.rate, dec.ell
    except ZeroInitialState:
        rate, ell = float(np.min(check_stability(Q).real)), 1
    eps = np.asarray(list(eps_grid), dtype=float)
    values = np.array([marginal_entropy(Q, sigma, x, e, delta * cutoff_time(rate, ell, e)) for e in eps])
    positive = values > 0.0
    if positive.sum() >= 2:
        fit = linregress(np.log(eps[positive]), np.log(values[positive]))
        slope = float(fit.slope)
    else:
        slope = math.nan
    logger.debug("entropy dichotomy delta=%g slope=%.4g", delta, slope)
    return EntropyDichotomy(float(delta), slope, tuple(eps.tolist()), tuple(values.tolist()))


def entropy_profile(dec: SpectralDecomposition, sigma_inf, w: float, r: float) -> float:
    """q^{1-ell} e^{-q w r} |Sigma_inf^{-1/2} u|."""
    verdict = weighted_normal_growth(dec, sigma_inf)
    if not verdict.profile_exists:
        raise NoProfile("weighted normal growth fails; no entropy profile")
    return dec.rate ** (1 - dec.ell) * math.exp(-dec.rate * w * r) * verdict.representative_norm


def entropy_envelope(dec: SpectralDecomposition, sigma_inf, w: float, r: float) -> Tuple[float, float]:
    """liminf/limsup pair of the weighted renormalized orbit along t_eps + r w."""
    lo, hi = omega_envelope(weighted_decomposition(dec, sigma_inf))
    scale = dec.rate ** (1 - dec.ell) * math.exp(-dec.rate * w * r)
    return scale * lo, scale * hi


def knn_relative_entropy(samples_p, samples_q, k: int = 1) -> float:
    """k-nearest-neighbour estimate of H(P | Q) from samples of P and Q."""
    P = np.asarray(samples_p, dtype=float)
    Qs = np.asarray(samples_q, dtype=float)
    P = P[:, None] if P.ndim == 1 else P
    Qs = Qs[:, None] if Qs.ndim == 1 else Qs
    n, d = P.shape
    m = Qs.shape[0]
    rho = cKDTree(P).query(P, k=k + 1)[0][:, k]
    nu = cKDTree(Qs).query(P, k=k)[0]
    nu = nu[:, k - 1] if nu.ndim == 2 else nu
    return float(d * np.mean(np.log(nu / rho)) + math.log(m / (n - 1)))
