"""
Spectral module: the rate, multiplicity, angles and vectors that describe the
long-time shape of e^{-Qt}x, and the normal-growth test deciding whether the
renormalized orbit settles on a sphere.

Angles are stored as signed rotation frequencies. A leading conjugate pair
q +/- i*beta contributes e^{i beta t} conj(w) + e^{-i beta t} w, where w is
the coefficient times the eigenvector of q + i*beta.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from components.errors import RealSpectrum, SingularCovariance, ZeroInitialState
from components.linalg import (
    DEFAULT_TOL,
    as_square_matrix,
    check_stability,
    cluster_tolerance,
    eigen_structure,
    eigenvalues,
    propagator,
)

logger = logging.getLogger(__name__)

PROJECTION_THRESHOLD = 1e-10
RESONANCE_HMAX = 20
RESONANCE_TOL = 1e-9
SPHERE_GRID_POINTS = 4096
SPHERE_GRID_PERIODS = 64
VERDICT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    drift: np.ndarray
    initial: np.ndarray
    rate: float
    ell: int
    angles: Tuple[float, ...]
    vectors: Tuple[np.ndarray, ...]
    real_family: Tuple[np.ndarray, ...]
    has_real_term: bool
    pair_frequencies: Tuple[float, ...]
    pair_vectors: Tuple[np.ndarray, ...]
    leading_eigenvalues: Tuple[complex, ...]
    leading_argument: float
    coefficient_max: float

    @property
    def m(self) -> int:
        return len(self.vectors)

    @property
    def dim(self) -> int:
        return int(self.initial.shape[0])

    def leading_pair_vector(self) -> Optional[np.ndarray]:
        """c*v for the leading eigenvalue with positive imaginary part."""
        return self.pair_vectors[0] if self.pair_vectors else None

    def omega_points(self, times) -> np.ndarray:
        """Rows sum_k e^{i t theta_k} v_k for each t (real up to rounding)."""
        t = np.atleast_1d(np.asarray(times, dtype=float))
        phases = np.exp(1j * np.outer(t, np.asarray(self.angles, dtype=float)))
        V = np.vstack(self.vectors)
        return (phases @ V).real

    def representative(self) -> np.ndarray:
        return self.omega_points([0.0])[0]

    def renormalized_orbit(self, t: float) -> np.ndarray:
        """(e^{qt}/t^{ell-1}) e^{-Qt}x."""
        flow = propagator(self.drift, t) @ self.initial
        return math.exp(self.rate * t) / (t ** (self.ell - 1)) * flow

    def convergence_residual(self, t: float) -> float:
        return float(np.linalg.norm(self.renormalized_orbit(t) - self.omega_points([t])[0]))

    def as_dict(self) -> dict:
        w = self.leading_pair_vector()
        return {
            "rate": self.rate,
            "ell": self.ell,
            "m": self.m,
            "angles": list(self.angles),
            "real_family": [v.tolist() for v in self.real_family],
            "has_real_term": self.has_real_term,
            "pair_frequencies": list(self.pair_frequencies),
            "leading_eigenvalues": [[lam.real, lam.imag] for lam in self.leading_eigenvalues],
            "leading_argument": self.leading_argument,
            "leading_pair_vector": None if w is None else {"re": w.real.tolist(), "im": w.imag.tolist()},
            "coefficient_max": self.coefficient_max,
            "representative": self.representative().tolist(),
        }


@dataclass(frozen=True)
class NormalGrowthVerdict:
    resonant: bool
    orthogonal: bool
    equal_norms: bool
    profile_exists: bool
    omega_on_sphere: bool
    representative_norm: float

    def as_dict(self) -> dict:
        return {
            "resonant": self.resonant,
            "orthogonal": self.orthogonal,
            "equal_norms": self.equal_norms,
            "profile_exists": self.profile_exists,
            "omega_on_sphere": self.omega_on_sphere,
            "representative_norm": self.representative_norm,
        }


def _chain_blocks(Q: np.ndarray, x: np.ndarray, tol: float):
    structure = eigen_structure(Q, tol)
    P, _ = structure.basis()
    c = np.linalg.solve(P, x.astype(complex))
    blocks = []
    offset = 0
    for lam, chains in zip(structure.eigenvalues, structure.chains):
        entries = []
        for chain in chains:
            coeffs = c[offset:offset + len(chain)]
            offset += len(chain)
            entries.append((chain, coeffs))
        blocks.append((lam, entries))
    return blocks


def _depth(chain, coeffs, threshold: float) -> int:
    depth = 0
    for i, (vec, ci) in enumerate(zip(chain, coeffs)):
        if abs(ci) * np.linalg.norm(vec) > threshold:
            depth = i + 1
    return depth


def spectral_coefficients(Q, x, tol: float = DEFAULT_TOL) -> List[Tuple[complex, np.ndarray]]:
    """All products c_j(x) v_j in the generalized eigenvector basis."""
    Q = as_square_matrix(Q)
    x = np.asarray(x, dtype=float).ravel()
    out = []
    for lam, entries in _chain_blocks(Q, x, tol):
        for chain, coeffs in entries:
            for vec, ci in zip(chain, coeffs):
                out.append((lam, ci * vec))
    return out


def decompose(Q, x, tol: float = DEFAULT_TOL) -> SpectralDecomposition:
    Q = as_square_matrix(Q)
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != Q.shape[0]:
        raise ValueError(f"initial state has dimension {x.shape[0]}, drift has {Q.shape[0]}")
    if not np.any(x):
        raise ZeroInitialState("x = 0 has no cutoff thermalization")
    check_stability(Q)

    threshold = PROJECTION_THRESHOLD * np.linalg.norm(x)
    blocks = _chain_blocks(Q, x, tol)

    depths = {}
    coefficient_max = 0.0
    for j, (lam, entries) in enumerate(blocks):
        depths[j] = [_depth(chain, coeffs, threshold) for chain, coeffs in entries]
        for chain, coeffs in entries:
            for vec, ci in zip(chain, coeffs):
                coefficient_max = max(coefficient_max, abs(ci) * float(np.linalg.norm(vec)))

    participating = [j for j in depths if max(depths[j], default=0) > 0]
    rate = min(blocks[j][0].real for j in participating)
    cluster = cluster_tolerance(Q)
    leading = [j for j in participating if abs(blocks[j][0].real - rate) <= cluster]
    ell = max(max(depths[j]) for j in leading)

    def top_vector(j: int) -> np.ndarray:
        lam, entries = blocks[j]
        acc = np.zeros(Q.shape[0], dtype=complex)
        scale = (-1.0) ** (ell - 1) / math.factorial(ell - 1)
        for (chain, coeffs), depth in zip(entries, depths[j]):
            if depth == ell:
                acc += scale * coeffs[ell - 1] * chain[0]
        return acc

    angles: List[float] = []
    vectors: List[np.ndarray] = []
    family: List[np.ndarray] = []
    has_real = False
    freqs: List[float] = []
    pairs: List[np.ndarray] = []
    for j in leading:
        lam = blocks[j][0]
        if lam.imag == 0.0:
            v = top_vector(j).real
            if np.linalg.norm(v) > threshold:
                has_real = True
                angles.insert(0, 0.0)
                vectors.insert(0, v.astype(complex))
                family.insert(0, v)
    for j in leading:
        lam = blocks[j][0]
        if lam.imag <= 0.0:
            continue
        w = top_vector(j)
        if np.linalg.norm(w) <= threshold:
            continue
        beta = float(lam.imag)
        angles.extend([beta, -beta])
        vectors.extend([w.conj(), w])
        family.extend([w.real.copy(), -w.imag.copy()])
        freqs.append(beta)
        pairs.append(w)

    uppers = [blocks[j][0] for j in leading if blocks[j][0].imag > 0]
    argument = float(np.angle(uppers[0])) if uppers else 0.0
    dec = SpectralDecomposition(
        drift=Q,
        initial=x,
        rate=float(rate),
        ell=int(ell),
        angles=tuple(angles),
        vectors=tuple(vectors),
        real_family=tuple(family),
        has_real_term=has_real,
        pair_frequencies=tuple(freqs),
        pair_vectors=tuple(pairs),
        leading_eigenvalues=tuple(blocks[j][0] for j in leading),
        leading_argument=argument,
        coefficient_max=coefficient_max,
    )
    logger.debug("decompose: rate=%.6g ell=%d m=%d", dec.rate, dec.ell, dec.m)
    return dec


def resonance_test(angles: Sequence[float], tol: float = RESONANCE_TOL, h_max: int = RESONANCE_HMAX) -> bool:
    """
    True iff some nonzero integer vector h with |h_i| <= h_max puts
    sum h_i*theta_i within ``tol`` of 2*pi*Z.
    """
    theta = np.asarray(list(angles), dtype=float)
    n = theta.size
    if n == 0:
        return False
    span = np.arange(-h_max, h_max + 1)
    two_pi = 2.0 * math.pi

    def hit(partial: np.ndarray, nonzero_prefix: bool) -> bool:
        r = partial - two_pi * np.round(partial / two_pi)
        close = np.abs(r) <= tol
        if not nonzero_prefix:
            close[tuple(np.full(close.ndim, h_max))] = False
        return bool(np.any(close))

    tail = min(n, 2)
    grids = np.meshgrid(*([span] * tail), indexing="ij")
    tail_sum = sum(g * th for g, th in zip(grids, theta[n - tail:]))
    for prefix in itertools.product(span, repeat=n - tail):
        head = float(np.dot(prefix, theta[: n - tail])) if prefix else 0.0
        if hit(head + tail_sum, any(prefix)):
            return True
    return False


def default_time_grid(dec: SpectralDecomposition) -> np.ndarray:
    nonzero = [abs(a) for a in dec.angles if a != 0.0]
    if not nonzero:
        return np.array([0.0])
    period = 2.0 * math.pi / min(nonzero)
    return np.linspace(0.0, SPHERE_GRID_PERIODS * period, SPHERE_GRID_POINTS, endpoint=False)


def omega_envelope(dec: SpectralDecomposition, t_grid=None) -> Tuple[float, float]:
    """Sampled (min, max) of |sum e^{it theta_k} v_k|."""
    grid = default_time_grid(dec) if t_grid is None else np.asarray(t_grid, dtype=float)
    norms = np.linalg.norm(dec.omega_points(grid), axis=1)
    return float(norms.min()), float(norms.max())


def omega_on_sphere(dec: SpectralDecomposition, t_grid=None, tol: float = VERDICT_TOL) -> bool:
    grid = default_time_grid(dec) if t_grid is None else np.asarray(t_grid, dtype=float)
    norms = np.linalg.norm(dec.omega_points(grid), axis=1)
    mean = float(norms.mean())
    if mean == 0.0:
        return True
    return bool(np.max(np.abs(norms - mean)) <= tol * mean)


def _family_tests(dec: SpectralDecomposition, tol: float) -> Tuple[bool, bool]:
    fam = dec.real_family
    orthogonal = True
    for a, b in itertools.combinations(fam, 2):
        if abs(float(np.dot(a, b))) > tol * np.linalg.norm(a) * np.linalg.norm(b):
            orthogonal = False
            break
    start = 1 if dec.has_real_term else 0
    equal = True
    for hat, check in zip(fam[start::2], fam[start + 1::2]):
        nh, nc = np.linalg.norm(hat), np.linalg.norm(check)
        if abs(nh - nc) > tol * max(nh, nc):
            equal = False
            break
    return orthogonal, equal


def normal_growth(dec: SpectralDecomposition, tol: float = VERDICT_TOL) -> NormalGrowthVerdict:
    orthogonal, equal = _family_tests(dec, tol)
    resonant = resonance_test(dec.pair_frequencies)
    on_sphere = omega_on_sphere(dec, tol=tol)
    if resonant:
        exists = on_sphere
        grid = default_time_grid(dec)
        rep = float(np.linalg.norm(dec.omega_points(grid), axis=1).mean())
    else:
        exists = orthogonal and equal
        rep = float(np.linalg.norm(dec.representative()))
    return NormalGrowthVerdict(
        resonant=resonant,
        orthogonal=orthogonal,
        equal_norms=equal,
        profile_exists=exists,
        omega_on_sphere=on_sphere,
        representative_norm=rep,
    )


def inverse_sqrt(Sigma) -> np.ndarray:
    """Sigma^{-1/2} for symmetric positive definite Sigma."""
    S = as_square_matrix(Sigma)
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    if w.min() <= 1e-12 * max(abs(w.max()), 1.0):
        raise SingularCovariance(f"covariance has eigenvalue {w.min():.3g}")
    return (V / np.sqrt(w)) @ V.T


def weighted_decomposition(dec: SpectralDecomposition, Sigma) -> SpectralDecomposition:
    W = inverse_sqrt(Sigma)
    return replace(
        dec,
        vectors=tuple(W @ v for v in dec.vectors),
        real_family=tuple(W @ v for v in dec.real_family),
        pair_vectors=tuple(W @ v for v in dec.pair_vectors),
    )


def weighted_normal_growth(dec: SpectralDecomposition, Sigma, tol: float = VERDICT_TOL) -> NormalGrowthVerdict:
    """Normal growth of the family Sigma^{-1/2} v in the geometry of the stationary law."""
    return normal_growth(weighted_decomposition(dec, Sigma), tol)


def oscillator_vectors(Q, z) -> Tuple[np.ndarray, np.ndarray, complex]:
    """a(z), b(z) = Re, Im of (Q - lambda_+ I) z and lambda_+ itself."""
    Q = as_square_matrix(Q)
    if Q.shape != (2, 2):
        raise ValueError("oscillator check needs a 2x2 drift")
    lam = eigenvalues(Q)
    upper = [l for l in lam if l.imag > cluster_tolerance(Q)]
    if not upper:
        raise RealSpectrum(f"eigenvalues {lam} are real")
    lam_plus = complex(upper[0])
    u = (Q - lam_plus * np.eye(2)) @ np.asarray(z, dtype=float)
    return u.real.copy(), u.imag.copy(), lam_plus


def oscillator_2x2_check(Q, z, tol: float = VERDICT_TOL) -> NormalGrowthVerdict:
    z = np.asarray(z, dtype=float).ravel()
    if not np.any(z):
        raise ZeroInitialState("z = 0 has no cutoff thermalization")
    a, b, lam_plus = oscillator_vectors(Q, z)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    orthogonal = abs(float(np.dot(a, b))) <= tol * na * nb
    equal = abs(na - nb) <= tol * max(na, nb)
    exists = orthogonal and equal
    return NormalGrowthVerdict(
        resonant=resonance_test([lam_plus.imag]),
        orthogonal=bool(orthogonal),
        equal_norms=bool(equal),
        profile_exists=bool(exists),
        omega_on_sphere=bool(exists),
        representative_norm=float(na / lam_plus.imag),
    )
