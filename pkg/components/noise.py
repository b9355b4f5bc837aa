"""
Noise module: the Levy drivers L of dX = -QX dt + eps dL.

Each spec knows its dimension, its moment order and how to draw increments
for a batch of independent samples. Red noise wraps another spec and is
stepped as a stationary Ornstein-Uhlenbeck process.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import levy_stable

from components.errors import DomainError
from components.linalg import as_square_matrix, check_stability, lyapunov_solve, psd_sqrt

logger = logging.getLogger(__name__)

BURN_IN_FACTOR = 20.0


class NoiseSpec:
    """Base class for driver specifications."""

    kind = "noise"

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def moment_order(self) -> float:
        """p_max; moments of order p exist for p <= p_max (p < p_max if strict)."""
        return math.inf

    def strict_moment(self) -> bool:
        return False

    def increments(self, dt: float, rng: np.random.Generator, n: int) -> np.ndarray:
        """n independent increments L_{t+dt} - L_t as an (n, d) array."""
        raise NotImplementedError

    def as_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Brownian(NoiseSpec):
    covariance: np.ndarray
    kind = "brownian"

    def __post_init__(self):
        C = as_square_matrix(self.covariance)
        if not np.allclose(C, C.T, atol=1e-12 * max(1.0, np.abs(C).max())):
            raise DomainError("Brownian covariance must be symmetric")
        if np.linalg.eigvalsh(0.5 * (C + C.T)).min() < -1e-10 * max(1.0, np.abs(C).max()):
            raise DomainError("Brownian covariance must be positive semidefinite")
        object.__setattr__(self, "covariance", 0.5 * (C + C.T))
        object.__setattr__(self, "_factor", psd_sqrt(C))

    @property
    def dim(self) -> int:
        return self.covariance.shape[0]

    def increments(self, dt, rng, n):
        z = rng.standard_normal((n, self.dim))
        return math.sqrt(dt) * z @ self._factor.T

    def as_dict(self):
        return {"type": self.kind, "covariance": self.covariance.tolist()}


@dataclass(frozen=True, eq=False)
class CompoundPoisson(NoiseSpec):
    """
    Jumps at rate ``intensity`` with a finite atom law (``atoms`` rows with
    ``weights``) or a Gaussian law (``jump_mean``, ``jump_covariance``).
    """

    intensity: float
    atoms: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    jump_mean: Optional[np.ndarray] = None
    jump_covariance: Optional[np.ndarray] = None
    kind = "compound_poisson"

    def __post_init__(self):
        if not self.intensity > 0:
            raise DomainError("compound Poisson intensity must be positive")
        if self.atoms is not None:
            atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
            k = atoms.shape[0]
            w = np.full(k, 1.0 / k) if self.weights is None else np.asarray(self.weights, dtype=float)
            if w.shape != (k,) or np.any(w < 0) or not math.isclose(w.sum(), 1.0, rel_tol=1e-9):
                raise DomainError("atom weights must be a probability vector")
            object.__setattr__(self, "atoms", atoms)
            object.__setattr__(self, "weights", w)
        elif self.jump_mean is not None:
            m = np.asarray(self.jump_mean, dtype=float).ravel()
            C = np.zeros((m.size, m.size)) if self.jump_covariance is None else as_square_matrix(self.jump_covariance)
            object.__setattr__(self, "jump_mean", m)
            object.__setattr__(self, "jump_covariance", C)
        else:
            raise DomainError("compound Poisson needs atoms or a Gaussian jump law")

    @property
    def dim(self) -> int:
        return self.atoms.shape[1] if self.atoms is not None else self.jump_mean.size

    def moment_order(self) -> float:
        if self.atoms is not None and not np.all(np.isfinite(self.atoms)):
            return 0.0
        return math.inf

    def increments(self, dt, rng, n):
        counts = rng.poisson(self.intensity * dt, size=n)
        if self.atoms is not None:
            picks = rng.multinomial(counts, self.weights)
            return picks @ self.atoms
        z = rng.standard_normal((n, self.dim)) @ psd_sqrt(self.jump_covariance).T
        return counts[:, None] * self.jump_mean + np.sqrt(counts)[:, None] * z

    def as_dict(self):
        out = {"type": self.kind, "intensity": self.intensity}
        if self.atoms is not None:
            out.update(atoms=self.atoms.tolist(), weights=self.weights.tolist())
        else:
            out.update(jump_mean=self.jump_mean.tolist(), jump_covariance=self.jump_covariance.tolist())
        return out


@dataclass(frozen=True, eq=False)
class AlphaStable(NoiseSpec):
    """Symmetric alpha-stable, independent coordinates; ``mask`` zeroes coordinates."""

    alpha: float
    scale: float
    dimension: int
    mask: Optional[np.ndarray] = None
    kind = "alpha_stable"

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise DomainError("alpha must lie in (0, 2)")
        if not self.scale > 0:
            raise DomainError("stable scale must be positive")
        if self.mask is not None:
            object.__setattr__(self, "mask", np.asarray(self.mask, dtype=float).ravel())

    @property
    def dim(self) -> int:
        return int(self.dimension)

    def moment_order(self) -> float:
        return self.alpha

    def strict_moment(self) -> bool:
        return True

    def increments(self, dt, rng, n):
        # Chambers-Mallows-Stuck; beta = 0 makes S0 and S1 agree
        draws = levy_stable.rvs(
            self.alpha, 0.0, loc=0.0, scale=self.scale * dt ** (1.0 / self.alpha),
            size=(n, self.dim), random_state=rng,
        )
        draws = np.asarray(draws, dtype=float).reshape(n, self.dim)
        return draws * self.mask if self.mask is not None else draws

    def levy_density_constant(self) -> float:
        """C in nu(dz) = C |z|^{-1-alpha} dz for each coordinate."""
        a = self.alpha
        return self.scale ** a * math.gamma(1.0 + a) * math.sin(math.pi * a / 2.0) / math.pi

    def as_dict(self):
        out = {"type": self.kind, "alpha": self.alpha, "scale": self.scale, "dimension": self.dim}
        if self.mask is not None:
            out["mask"] = self.mask.tolist()
        return out


@dataclass(frozen=True, eq=False)
class Deterministic(NoiseSpec):
    drift: np.ndarray
    kind = "deterministic"

    def __post_init__(self):
        object.__setattr__(self, "drift", np.asarray(self.drift, dtype=float).ravel())

    @property
    def dim(self) -> int:
        return self.drift.size

    def increments(self, dt, rng, n):
        return np.tile(self.drift * dt, (n, 1))

    def as_dict(self):
        return {"type": self.kind, "drift": self.drift.tolist()}


@dataclass(frozen=True, eq=False)
class RedNoise(NoiseSpec):
    """dU = -Lambda U dt + dL with L the inner spec; the driver is U."""

    damping: np.ndarray
    inner: NoiseSpec
    kind = "red_noise"

    def __post_init__(self):
        L = as_square_matrix(self.damping)
        if L.shape[0] != self.inner.dim:
            raise DomainError("red-noise damping and inner noise dimensions differ")
        object.__setattr__(self, "damping", L)

    @property
    def dim(self) -> int:
        return self.inner.dim

    def moment_order(self) -> float:
        return self.inner.moment_order()

    def strict_moment(self) -> bool:
        return self.inner.strict_moment()

    def increments(self, dt, rng, n):
        raise DomainError("red noise is stateful; use red_noise_state")

    def as_dict(self):
        return {"type": self.kind, "damping": self.damping.tolist(), "inner": self.inner.as_dict()}


def moment_order(spec: NoiseSpec) -> float:
    return spec.moment_order()


def validate_moment(spec: NoiseSpec, p: float) -> bool:
    """Whether the driver has finite moments of order p."""
    if not p > 0:
        raise DomainError("moment order must be positive")
    pmax = spec.moment_order()
    return p < pmax if spec.strict_moment() else p <= pmax


def sample_increment(spec: NoiseSpec, dt: float, rng: np.random.Generator) -> np.ndarray:
    if not dt > 0:
        raise DomainError("dt must be positive")
    return spec.increments(dt, rng, 1)[0]


def default_step(matrix) -> float:
    return min(1e-3, 0.05 / np.linalg.norm(as_square_matrix(matrix), 2))


@dataclass
class RedNoiseStepper:
    """Batch of n red-noise states advanced in lockstep."""

    spec: RedNoise
    state: np.ndarray
    rng: np.random.Generator = field(repr=False)

    def step(self, dt: float) -> np.ndarray:
        """Advance U by dt and return the increments dU."""
        dL = self.spec.inner.increments(dt, self.rng, self.state.shape[0])
        dU = -dt * self.state @ self.spec.damping.T + dL
        self.state = self.state + dU
        return dU


def red_noise_state(spec: RedNoise, rng: np.random.Generator, n: int = 1, dt: Optional[float] = None) -> RedNoiseStepper:
    """
    Stationary initial states for n red-noise copies plus their stepper.

    Brownian inner noise is sampled exactly from N(0, Sigma_U); other inner
    drivers run a burn-in of 20 / min Re lambda(Lambda) from zero.
    """
    lam = check_stability(spec.damping)
    d = spec.dim
    if isinstance(spec.inner, Brownian):
        cov = lyapunov_solve(spec.damping, spec.inner.covariance)
        state = rng.standard_normal((n, d)) @ psd_sqrt(cov).T
        return RedNoiseStepper(spec, state, rng)

    step = default_step(spec.damping) if dt is None else float(dt)
    horizon = BURN_IN_FACTOR / float(np.min(lam.real))
    steps = int(math.ceil(horizon / step))
    logger.debug("red-noise burn-in: %d steps of %.3g", steps, step)
    stepper = RedNoiseStepper(spec, np.zeros((n, d)), rng)
    for _ in range(steps):
        stepper.step(step)
    return stepper


def red_noise_joint_drift(Q, damping, eps: float) -> np.ndarray:
    """
    Drift G of the joint system d(X, U) = -G (X, U) dt + (eps, 1) dL for
    dX = -QX dt + eps dU, dU = -Lambda U dt + dL.
    """
    Q = as_square_matrix(Q)
    L = as_square_matrix(damping)
    d, k = Q.shape[0], L.shape[0]
    G = np.zeros((d + k, d + k))
    G[:d, :d] = Q
    G[:d, d:] = eps * L
    G[d:, d:] = L
    return G


def parse_noise_spec(obj: dict) -> NoiseSpec:
    """Build a NoiseSpec from its tagged JSON object."""
    kind = obj.get("type")
    if kind == "brownian":
        return Brownian(np.asarray(obj["covariance"], dtype=float))
    if kind == "compound_poisson":
        return CompoundPoisson(
            intensity=float(obj["intensity"]),
            atoms=obj.get("atoms"),
            weights=obj.get("weights"),
            jump_mean=obj.get("jump_mean"),
            jump_covariance=obj.get("jump_covariance"),
        )
    if kind == "alpha_stable":
        return AlphaStable(
            alpha=float(obj["alpha"]),
            scale=float(obj.get("scale", 1.0)),
            dimension=int(obj["dimension"]),
            mask=obj.get("mask"),
        )
    if kind == "deterministic":
        return Deterministic(np.asarray(obj["drift"], dtype=float))
    if kind == "red_noise":
        return RedNoise(np.asarray(obj["damping"], dtype=float), parse_noise_spec(obj["inner"]))
    raise DomainError(f"unknown noise type {kind!r}")


def coordinate_mask(dim: int, active: Sequence[int]) -> np.ndarray:
    mask = np.zeros(dim)
    mask[list(active)] = 1.0
    return mask
