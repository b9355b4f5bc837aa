"""
Dense linear algebra used by every other component.

Eigen structure with Jordan chains, the matrix exponential, the Lyapunov
solver for the stationary Gaussian covariance, and the exponential growth
constants of e^{-Qt}.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
import scipy.linalg

from components.errors import (
    IllConditioned,
    NonConvergence,
    Overflow,
    UnstableDrift,
)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
# Eigenvalues this close whose eigenvectors are nearly parallel belong to one
# defective eigenvalue; LAPACK splits a Jordan block of size k by ~eps^(1/k).
DEFECTIVE_SPLIT = 1e-5
PARALLEL_COS = 1.0 - 1e-6
# exponent of the between-grid inflation factor in growth_constants
GRID_SLACK = 0.1


def as_square_matrix(A) -> np.ndarray:
    """Return ``A`` as a finite square float array or raise ValueError."""
    M = np.asarray(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def cluster_tolerance(Q: np.ndarray) -> float:
    return 1e-8 * (1.0 + np.linalg.norm(Q, 2))


def eigenvalues(Q) -> np.ndarray:
    Q = as_square_matrix(Q)
    try:
        return scipy.linalg.eigvals(Q)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise NonConvergence(f"eigenvalue iteration failed: {e}") from e


def check_stability(Q) -> np.ndarray:
    """
    Exponential stability of -Q: every eigenvalue of Q has positive real part.

    Returns the eigenvalues; raises UnstableDrift otherwise.
    """
    lam = eigenvalues(Q)
    if np.min(lam.real) <= 0.0:
        raise UnstableDrift(
            f"drift matrix has eigenvalue with real part {np.min(lam.real):.6g} <= 0"
        )
    return lam


@dataclass(frozen=True, eq=False)
class EigenStructure:
    """
    Distinct eigenvalues of Q with their Jordan chains.

    ``chains[j]`` lists the chains of ``eigenvalues[j]``; in each chain
    ``(Q - lambda I) chain[k+1] == chain[k]`` and ``chain[0]`` is an
    eigenvector. Conjugate eigenvalues carry exactly conjugate chains.
    """

    eigenvalues: Tuple[complex, ...]
    chains: Tuple[Tuple[Tuple[np.ndarray, ...], ...], ...]
    algebraic: Tuple[int, ...]
    geometric: Tuple[int, ...]

    @property
    def dim(self) -> int:
        return int(sum(self.algebraic))

    def basis(self) -> Tuple[np.ndarray, np.ndarray]:
        """Generalized eigenvector matrix P and Jordan matrix J with Q = P J P^-1."""
        columns: List[np.ndarray] = []
        diag: List[complex] = []
        superdiag: List[float] = []
        for lam, chains in zip(self.eigenvalues, self.chains):
            for chain in chains:
                for k, vec in enumerate(chain):
                    columns.append(vec)
                    diag.append(lam)
                    superdiag.append(1.0 if k > 0 else 0.0)
        P = np.column_stack(columns).astype(complex)
        J = np.diag(np.asarray(diag, dtype=complex))
        for i in range(1, len(diag)):
            J[i - 1, i] = superdiag[i]
        return P, J

    def reconstruct(self) -> np.ndarray:
        P, J = self.basis()
        return (P @ J @ np.linalg.inv(P)).real

    def coefficients(self, x) -> np.ndarray:
        """Coordinates of ``x`` in the generalized eigenvector basis."""
        P, _ = self.basis()
        return np.linalg.solve(P, np.asarray(x, dtype=complex))


def _cluster_eigenvalues(Q: np.ndarray) -> List[List[complex]]:
    try:
        lam, vecs = scipy.linalg.eig(Q)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise NonConvergence(f"eigenvalue iteration failed: {e}") from e
    tol = cluster_tolerance(Q)
    loose = DEFECTIVE_SPLIT * (1.0 + np.linalg.norm(Q, 2))
    d = len(lam)
    norms = np.linalg.norm(vecs, axis=0)
    unit = vecs / np.where(norms > 0, norms, 1.0)

    # union-find over "same eigenvalue" relation
    parent = list(range(d))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(d):
        for j in range(i + 1, d):
            gap = abs(lam[i] - lam[j])
            if gap <= tol:
                same = True
            elif gap <= loose:
                same = abs(np.vdot(unit[:, i], unit[:, j])) >= PARALLEL_COS
            else:
                same = False
            if same:
                parent[find(i)] = find(j)

    groups: dict = {}
    for i in range(d):
        groups.setdefault(find(i), []).append(complex(lam[i]))
    return list(groups.values())


def _null_basis(M: np.ndarray, rank_tol: float) -> np.ndarray:
    _, s, vh = np.linalg.svd(M)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rank_tol * max(1.0, smax)))
    return vh[rank:].conj().T


def _orth(columns: Sequence[np.ndarray], dim: int) -> np.ndarray:
    if not columns:
        return np.zeros((dim, 0), dtype=complex)
    M = np.column_stack(columns)
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * max(1.0, s[0])))
    return u[:, :rank]


def _jordan_chains(Q: np.ndarray, lam: complex, mult: int, tol: float) -> List[Tuple[np.ndarray, ...]]:
    d = Q.shape[0]
    real = lam.imag == 0.0
    A = Q - lam * np.eye(d)
    if real:
        A = A.real
    rank_tol = max(tol, 1e-7)

    kernels = [np.zeros((d, 0))]
    power = np.eye(d)
    for _ in range(mult):
        power = A @ power
        kernels.append(_null_basis(power, rank_tol))
        if kernels[-1].shape[1] >= mult:
            break
    if kernels[-1].shape[1] != mult:
        raise IllConditioned(
            f"generalized eigenspace of {lam:.6g} has dimension {kernels[-1].shape[1]}, expected {mult}"
        )

    depth = len(kernels) - 1
    chains: List[Tuple[np.ndarray, ...]] = []
    # vectors already produced at each level by longer chains
    produced: List[List[np.ndarray]] = [[] for _ in range(depth + 1)]
    for level in range(depth, 0, -1):
        wanted = kernels[level].shape[1] - kernels[level - 1].shape[1] - len(produced[level])
        if wanted <= 0:
            continue
        span = _orth(list(kernels[level - 1].T) + produced[level], d)
        B = kernels[level]
        residual = B - span @ (span.conj().T @ B)
        u, s, _ = np.linalg.svd(residual, full_matrices=False)
        for top in u[:, :wanted].T:
            if real:
                top = top.real.copy()
            chain = [top]
            for _ in range(level - 1):
                chain.append(A @ chain[-1])
            chain.reverse()
            for k, vec in enumerate(chain[:-1]):
                produced[k + 1].append(vec)
            chains.append(tuple(np.asarray(v) for v in chain))

    scale = np.linalg.norm(Q, 2) + 1.0
    for chain in chains:
        head = chain[0]
        if np.linalg.norm(A @ head) > tol * scale * np.linalg.norm(head) * 1e2:
            raise IllConditioned(f"Jordan chain head for {lam:.6g} is not an eigenvector")
    if sum(len(c) for c in chains) != mult:
        raise IllConditioned(f"could not extract {mult} chain vectors for {lam:.6g}")
    # longest chains first
    chains.sort(key=len, reverse=True)
    return chains


def eigen_structure(Q, tol: float = DEFAULT_TOL) -> EigenStructure:
    """
    Eigenvalues with Jordan chains, sorted by ascending real part and then by
    ascending |imaginary part| (positive imaginary part first).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    Q = as_square_matrix(Q)

    entries = []
    for group in _cluster_eigenvalues(Q):
        mu = complex(np.mean(group))
        if abs(mu.imag) <= cluster_tolerance(Q):
            mu = complex(mu.real, 0.0)
        entries.append((mu, len(group)))

    # enforce exact conjugate pairs; compute chains once per pair
    uppers = [(mu, k) for mu, k in entries if mu.imag > 0]
    reals = [(mu, k) for mu, k in entries if mu.imag == 0]
    lowers = [(mu, k) for mu, k in entries if mu.imag < 0]
    if sum(k for _, k in uppers) != sum(k for _, k in lowers):
        raise IllConditioned("unpaired complex eigenvalues in a real matrix")
    lowers_left = list(lowers)
    resolved = []
    for mu, k in reals:
        resolved.append((mu, _jordan_chains(Q, mu, k, tol)))
    for mu, k in uppers:
        partner = min(lowers_left, key=lambda e: abs(e[0] - mu.conjugate()))
        lowers_left.remove(partner)
        mu = complex(0.5 * (mu.real + partner[0].real), 0.5 * (mu.imag - partner[0].imag))
        chains = _jordan_chains(Q, mu, k, tol)
        resolved.append((mu, chains))
        resolved.append((mu.conjugate(), [tuple(v.conj() for v in c) for c in chains]))

    resolved.sort(key=lambda e: (round(e[0].real, 12), abs(e[0].imag), -np.sign(e[0].imag)))
    structure = EigenStructure(
        eigenvalues=tuple(mu for mu, _ in resolved),
        chains=tuple(tuple(c) for _, c in resolved),
        algebraic=tuple(sum(len(c) for c in chains) for _, chains in resolved),
        geometric=tuple(len(chains) for _, chains in resolved),
    )
    if structure.dim != Q.shape[0]:
        raise IllConditioned("algebraic multiplicities do not add up to the dimension")
    logger.debug("eigen structure: %s", structure.eigenvalues)
    return structure


def matrix_exponential(A) -> np.ndarray:
    """e^A by scaling and squaring with a degree-13 Pade approximant."""
    A = as_square_matrix(A)
    if not A.any():
        return np.eye(A.shape[0])
    with np.errstate(over="raise", invalid="raise"):
        try:
            E = scipy.linalg.expm(A)
        except FloatingPointError as e:
            raise Overflow(f"matrix exponential overflowed: {e}") from e
    if not np.all(np.isfinite(E)):
        raise Overflow("matrix exponential has non-finite entries")
    return E


def propagator(Q, t: float) -> np.ndarray:
    """e^{-Qt}."""
    return matrix_exponential(-as_square_matrix(Q) * float(t))


def lyapunov_solve(Q, S) -> np.ndarray:
    """
    Solve Q X + X Q^T = S for the stationary covariance X (Bartels-Stewart).
    """
    Q = as_square_matrix(Q)
    S = as_square_matrix(S)
    check_stability(Q)
    X = scipy.linalg.solve_continuous_lyapunov(Q, S)
    return 0.5 * (X + X.T)


def growth_constants(Q, grid_points: int = 400) -> Tuple[float, float]:
    """
    Constants (C0, q*) with |e^{-Qt}| <= C0 e^{-q* t} for all t >= 0.

    q* is half the smallest real part of the spectrum. C0 is the larger of the
    Jordan-block supremum  sup_s max_j s^j/j! e^{-(q-q*)s}  and the supremum of
    |e^{-Qt}| e^{q* t} sampled on a time grid, which also absorbs the
    conditioning of the eigenbasis. Between grid points the sampled value is
    inflated by e^{(mu + q*) dt}, mu the logarithmic norm of -Q.
    """
    Q = as_square_matrix(Q)
    q = float(np.min(check_stability(Q).real))
    q_star = 0.5 * q
    a = q - q_star
    d = Q.shape[0]
    jordan_sup = max(
        1.0,
        max(((j / a) ** j) * math.exp(-j) / math.factorial(j) for j in range(1, d)) if d > 1 else 1.0,
    )

    horizon = (2.0 * d + 20.0) / a
    mu = max(0.0, float(np.linalg.eigvalsh(-0.5 * (Q + Q.T)).max()))
    growth = mu + q_star
    steps = max(grid_points, int(math.ceil(horizon * growth / GRID_SLACK)))
    dt = horizon / steps
    step = propagator(Q, dt)
    E = np.eye(d)
    sampled = 1.0
    for k in range(1, steps + 1):
        E = step @ E
        sampled = max(sampled, np.linalg.norm(E, 2) * math.exp(q_star * k * dt))
    return max(jordan_sup, sampled * math.exp(growth * dt)), q_star


def psd_sqrt(S) -> np.ndarray:
    """Symmetric square root of a positive semidefinite matrix."""
    S = as_square_matrix(S)
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.T
