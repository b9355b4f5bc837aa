"""
Scenarios module: ready-made systems (oscillator, gradient, Jacobi chain
and three small conceptual systems) addressable by name from the CLI.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from components.errors import ConfigError, DomainError
from components.linalg import check_stability
from components.noise import Brownian, NoiseSpec

logger = logging.getLogger(__name__)


class Regime(str, Enum):
    OVER = "Over"
    CRITICAL = "Critical"
    SUB = "Sub"


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    name: str
    drift: np.ndarray
    initial: np.ndarray
    noise: NoiseSpec
    params: Dict[str, object] = field(default_factory=dict)
    regime: Optional[Regime] = None

    def __post_init__(self):
        check_stability(self.drift)


def _vector(values, dim: int, default_index: int = 0) -> np.ndarray:
    if values is None:
        x = np.zeros(dim)
        x[default_index] = 1.0
        return x
    x = np.asarray(values, dtype=float).ravel()
    if x.size != dim:
        raise DomainError(f"initial state must have {dim} entries, got {x.size}")
    return x


def oscillator_regime(gamma: float, kappa: float) -> Regime:
    discriminant = gamma * gamma - 4.0 * kappa
    if discriminant > 0:
        return Regime.OVER
    if discriminant == 0:
        return Regime.CRITICAL
    return Regime.SUB


def build_oscillator(gamma: float = 1.0, kappa: float = 1.0, z: Optional[Sequence[float]] = None,
                     noise: Optional[NoiseSpec] = None) -> ScenarioSpec:
    """Damped linear oscillator; noise enters the momentum coordinate."""
    if not (gamma > 0 and kappa > 0):
        raise DomainError("oscillator needs gamma > 0 and kappa > 0")
    Q = np.array([[0.0, -1.0], [kappa, gamma]])
    return ScenarioSpec(
        name="oscillator",
        drift=Q,
        initial=_vector(z, 2),
        noise=noise or Brownian(np.diag([0.0, 1.0])),
        params={"gamma": gamma, "kappa": kappa},
        regime=oscillator_regime(gamma, kappa),
    )


def build_gradient(eigs: Sequence[float] = (1.0, 2.0), basis=None, x: Optional[Sequence[float]] = None,
                   noise: Optional[NoiseSpec] = None) -> ScenarioSpec:
    """Symmetric drift basis * diag(eigs) * basis^T."""
    lam = np.asarray(eigs, dtype=float).ravel()
    if np.any(lam <= 0):
        raise DomainError("gradient eigenvalues must be positive")
    d = lam.size
    B = np.eye(d) if basis is None else np.asarray(basis, dtype=float)
    if not np.allclose(B @ B.T, np.eye(d), atol=1e-10):
        raise DomainError("basis must be orthogonal")
    Q = (B * lam) @ B.T
    return ScenarioSpec(
        name="gradient",
        drift=0.5 * (Q + Q.T),
        initial=np.ones(d) if x is None else _vector(x, d),
        noise=noise or Brownian(np.eye(d)),
        params={"eigs": lam.tolist()},
    )


def jacobi_drift(n: int, gamma: float, kappa: float, s1: float, sn: float) -> np.ndarray:
    """2n x 2n drift of a chain of n oscillators coupled to baths at both ends."""
    friction = np.zeros((n, n))
    friction[0, 0] = s1
    friction[n - 1, n - 1] = sn
    coupling = np.diag(np.full(n, 2.0 * kappa + gamma))
    coupling[0, 0] = coupling[n - 1, n - 1] = kappa + gamma
    idx = np.arange(n - 1)
    coupling[idx, idx + 1] = -kappa
    coupling[idx + 1, idx] = -kappa
    Q = np.zeros((2 * n, 2 * n))
    Q[:n, :n] = friction
    Q[:n, n:] = coupling
    Q[n:, :n] = -np.eye(n)
    return Q


def build_jacobi_chain(n: int = 5, gamma: float = 0.01, kappa: float = 1.0, s1: float = 1.0,
                       sn: float = 1.0, x: Optional[Sequence[float]] = None,
                       noise: Optional[NoiseSpec] = None) -> ScenarioSpec:
    if n < 2:
        raise DomainError("a chain needs at least two oscillators")
    if min(gamma, kappa, s1, sn) <= 0:
        raise DomainError("chain parameters must be positive")
    forcing = np.zeros(2 * n)
    forcing[[0, n - 1]] = 1.0
    return ScenarioSpec(
        name="jacobi-chain",
        drift=jacobi_drift(n, gamma, kappa, s1, sn),
        initial=_vector(x, 2 * n),
        noise=noise or Brownian(np.diag(forcing)),
        params={"n": n, "gamma": gamma, "kappa": kappa, "s1": s1, "sn": sn},
    )


def build_conceptual(which: str, lam: float = 1.0, theta: float = 3.0, gamma: float = 1.0,
                     kappa: float = 1.0, dim: int = 3, x: Optional[Sequence[float]] = None,
                     noise: Optional[NoiseSpec] = None) -> ScenarioSpec:
    """
    Rotation51: [[lam, theta], [-theta, lam]].
    Suspension52: blockdiag(lam, oscillator(gamma, kappa)).
    JordanBlock53: lam*I plus ones on the superdiagonal, x defaults to e_dim.
    """
    if which == "Rotation51":
        Q = np.array([[lam, theta], [-theta, lam]])
        params = {"lam": lam, "theta": theta}
        x0 = _vector(x, 2)
    elif which == "Suspension52":
        Q = np.zeros((3, 3))
        Q[0, 0] = lam
        Q[1:, 1:] = [[0.0, -1.0], [kappa, gamma]]
        params = {"lam": lam, "gamma": gamma, "kappa": kappa}
        x0 = _vector(x, 3)
    elif which == "JordanBlock53":
        Q = lam * np.eye(dim) + np.diag(np.ones(dim - 1), 1)
        params = {"lam": lam, "dim": dim}
        x0 = _vector(x, dim, default_index=dim - 1)
    else:
        raise DomainError(f"unknown conceptual system {which!r}")
    return ScenarioSpec(
        name=which,
        drift=Q,
        initial=x0,
        noise=noise or Brownian(np.eye(Q.shape[0])),
        params=params,
    )


SCENARIOS: Dict[str, Callable[..., ScenarioSpec]] = {
    "oscillator": build_oscillator,
    "gradient": build_gradient,
    "jacobi-chain": build_jacobi_chain,
    "rotation51": lambda **kw: build_conceptual("Rotation51", **kw),
    "suspension52": lambda **kw: build_conceptual("Suspension52", **kw),
    "jordan53": lambda **kw: build_conceptual("JordanBlock53", **kw),
}


def build_scenario(name: str, params: Optional[dict] = None) -> ScenarioSpec:
    try:
        builder = SCENARIOS[name]
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
    try:
        return builder(**(params or {}))
    except TypeError as e:
        raise ConfigError(f"bad parameters for scenario {name!r}: {e}") from e
