"""
Cutoff module: time scale, profile, window and error predictions derived
from a spectral decomposition.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from components.errors import DomainError, NoProfile
from components.linalg import as_square_matrix, cluster_tolerance, eigen_structure, growth_constants, propagator
from components.noise import AlphaStable, Brownian, CompoundPoisson, Deterministic, NoiseSpec
from components.spectral import NormalGrowthVerdict, SpectralDecomposition, omega_envelope
from components.wasserstein import EmpiricalMeasure, shift_linearity_check

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 1.0


class Verdict(str, Enum):
    EXPLICIT_PROFILE = "ExplicitProfile"
    ABSTRACT_PROFILE = "AbstractProfile"
    WINDOW_ONLY = "WindowOnly"


class Dichotomy(str, Enum):
    DIVERGES = "Diverges"
    VANISHES = "Vanishes"


@dataclass(frozen=True)
class EpsilonWindow:
    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    def contains(self, eps: float) -> bool:
        return self.lo <= eps <= self.hi


@dataclass(frozen=True)
class CutoffReport:
    verdict: Verdict
    rate: float
    ell: int
    representative_norm: float
    window: float
    C0: float
    q_star: float
    gap: float
    K: float
    stationary_moment: float
    stationary_moment_bound: float
    resonant: bool
    omega_min: float
    omega_max: float
    p: float
    representative: Tuple[float, ...] = field(default=())
    epsilon_interval: Optional[EpsilonWindow] = None

    @property
    def profile_amplitude(self) -> float:
        return self.representative_norm / self.rate ** (self.ell - 1)

    @property
    def gap_exponent(self) -> float:
        return self.gap / self.rate

    def as_dict(self) -> dict:
        out = asdict(self)
        out["verdict"] = self.verdict.value
        out["profile_amplitude"] = self.profile_amplitude
        out["gap_exponent"] = self.gap_exponent
        out["representative"] = list(self.representative)
        if self.epsilon_interval is not None:
            out["epsilon_interval"] = {
                "lo": self.epsilon_interval.lo,
                "hi": self.epsilon_interval.hi,
                "empty": self.epsilon_interval.empty,
            }
        return out


def cutoff_time(rate: float, ell: int, eps: float) -> float:
    """t_eps = |ln eps|/q + (ell - 1)/q * ln|ln eps|."""
    if not rate > 0:
        raise DomainError("rate must be positive")
    if ell < 1:
        raise DomainError("multiplicity must be at least 1")
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps = {eps} outside (0, 1)")
    if ell > 1 and eps >= math.exp(-1.0):
        raise DomainError("eps must be below e^-1 when ell > 1")
    u = -math.log(eps)
    return u / rate + (ell - 1) / rate * math.log(u)


def spectral_gap(Q, dec: SpectralDecomposition) -> float:
    """
    Distance from the rate to the next real part in the spectrum; the
    conjugate partner of the leading eigenvalue is skipped. inf when the
    whole spectrum shares the leading real part.
    """
    Q = as_square_matrix(Q)
    tol = cluster_tolerance(Q)
    reals = [lam.real for lam in eigen_structure(Q).eigenvalues if lam.real > dec.rate + tol]
    return float(min(reals) - dec.rate) if reals else math.inf


def stationary_moment_bound(Q, noise: NoiseSpec) -> float:
    """
    Analytic bound on E|O_inf| from the drift, diffusion and jump parts of
    the Levy triplet. inf when the driver has no first moment or is red noise.
    """
    C0, q_star = growth_constants(Q)
    if isinstance(noise, Deterministic):
        return float(np.linalg.norm(noise.drift)) * C0 / q_star
    if isinstance(noise, Brownian):
        spread = math.sqrt(max(float(np.linalg.eigvalsh(noise.covariance).max()), 0.0))
        return spread * C0 / math.sqrt(2.0 * q_star)
    if isinstance(noise, CompoundPoisson):
        if noise.atoms is not None:
            sizes = np.linalg.norm(noise.atoms, axis=1)
            small = noise.intensity * float(np.sum(noise.weights * np.where(sizes <= 1.0, sizes ** 2, 0.0)))
            large = noise.intensity * float(np.sum(noise.weights * np.where(sizes > 1.0 / C0, sizes, 0.0)))
        else:
            second = float(noise.jump_mean @ noise.jump_mean + np.trace(noise.jump_covariance))
            small = noise.intensity * second
            large = noise.intensity * math.sqrt(second)
        return C0 / q_star * math.sqrt(small) + math.exp(C0 / q_star * large)
    if isinstance(noise, AlphaStable):
        if noise.alpha <= 1.0:
            return math.inf
        a = noise.alpha
        coords = noise.dim if noise.mask is None else int(np.count_nonzero(noise.mask))
        density = noise.levy_density_constant()
        small = coords * 2.0 * density / (2.0 - a)
        large = coords * 2.0 * density * (1.0 / C0) ** (1.0 - a) / (a - 1.0)
        return C0 / q_star * math.sqrt(small) + math.exp(C0 / q_star * large)
    return math.inf


def select_verdict(verdict: NormalGrowthVerdict, p: float) -> Verdict:
    if not verdict.profile_exists:
        return Verdict.WINDOW_ONLY
    return Verdict.EXPLICIT_PROFILE if p >= 1.0 else Verdict.ABSTRACT_PROFILE


def build_report(
    dec: SpectralDecomposition,
    verdict: NormalGrowthVerdict,
    p: float,
    stationary_moment: float,
    stationary_bound: float = math.nan,
    window: float = DEFAULT_WINDOW,
    horizon: Optional[float] = None,
    eta: Optional[float] = None,
) -> CutoffReport:
    C0, q_star = growth_constants(dec.drift)
    lo, hi = omega_envelope(dec)
    report = CutoffReport(
        verdict=select_verdict(verdict, p),
        rate=dec.rate,
        ell=dec.ell,
        representative_norm=verdict.representative_norm,
        window=float(window),
        C0=C0,
        q_star=q_star,
        gap=spectral_gap(dec.drift, dec),
        K=dec.coefficient_max,
        stationary_moment=float(stationary_moment),
        stationary_moment_bound=float(stationary_bound),
        resonant=verdict.resonant,
        omega_min=lo,
        omega_max=hi,
        p=float(p),
        representative=tuple(float(v) for v in dec.representative()),
    )
    if horizon is not None and eta is not None:
        report = replace(report, epsilon_interval=epsilon_window(report, horizon, eta))
    logger.info("cutoff verdict %s (rate %.6g, ell %d)", report.verdict.value, report.rate, report.ell)
    return report


def profile_value(report: CutoffReport, r: float) -> float:
    """(e^{-r q w} / q^{ell-1}) |v|."""
    if report.verdict != Verdict.EXPLICIT_PROFILE:
        raise NoProfile(f"verdict is {report.verdict.value}")
    return math.exp(-r * report.rate * report.window) * report.profile_amplitude


def profile_envelope(report: CutoffReport, r: float) -> Tuple[float, float]:
    """liminf and limsup of the renormalized distance along t_eps + r w."""
    scale = math.exp(-r * report.rate * report.window) / report.rate ** (report.ell - 1)
    return scale * report.omega_min, scale * report.omega_max


def abstract_profile_value(
    report: CutoffReport,
    r: float,
    stationary: EmpiricalMeasure,
    p: float,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """Empirical W_p(c u + O_inf, O_inf) with c = e^{-r q w}/q^{ell-1}."""
    if report.verdict == Verdict.WINDOW_ONLY:
        raise NoProfile("no profile for a window-only system")
    c = math.exp(-r * report.rate * report.window) / report.rate ** (report.ell - 1)
    shift = c * np.asarray(report.representative)
    return shift_linearity_check(stationary, shift, p, rng).estimate


def sandwich_bounds(
    Q,
    x,
    t: float,
    eps: float,
    ou_distance: float,
    p: float = 1.0,
    stationary_moment: Optional[float] = None,
) -> Tuple[float, float]:
    """
    Bracket on W_p(X^eps_t, mu^eps)/eps from the deterministic flow and
    ``ou_distance`` = W_p(O_t, O_inf). For p < 1 ``stationary_moment``
    is E|O_inf|^p.
    """
    if t < 0 or not eps > 0:
        raise DomainError("need t >= 0 and eps > 0")
    center = float(np.linalg.norm(propagator(Q, t) @ np.asarray(x, dtype=float))) / eps
    if p >= 1.0:
        return center - ou_distance, center + ou_distance
    if stationary_moment is None:
        raise DomainError("p < 1 needs E|O_inf|^p")
    top = center ** p
    return max(top - 2.0 * stationary_moment, 0.0) - ou_distance, top + ou_distance


def dichotomy_prediction(rate: float, ell: int, delta: float) -> Dichotomy:
    if not delta > 0:
        raise DomainError("delta must be positive")
    if delta == 1.0:
        raise DomainError("delta = 1 belongs to the window analysis")
    return Dichotomy.DIVERGES if delta < 1.0 else Dichotomy.VANISHES


def error_bound(report: CutoffReport, eps: float, r: float = 0.0) -> float:
    """C0 E|O_inf| eps + K eps^{gap/rate}; uniform in r."""
    spectral = 0.0 if math.isinf(report.gap) else report.K * eps ** (report.gap / report.rate)
    return report.C0 * report.stationary_moment * eps + spectral


def epsilon_window(report: CutoffReport, horizon: float, eta: float) -> EpsilonWindow:
    """
    Noise levels observable within ``horizon`` at accuracy ``eta``: lower end
    from 2 t_eps <= horizon, upper end from the error-bound constants.
    """
    if not horizon > 0 or not eta > 0:
        raise DomainError("horizon and eta must be positive")
    q, ell = report.rate, report.ell
    half = q * horizon / 2.0
    if ell == 1:
        lo = math.exp(-half)
        cap = math.nextafter(1.0, 0.0)
    else:
        cap = math.exp(-1.0) * (1.0 - 1e-12)
        g = lambda u: u + (ell - 1) * math.log(u) - half
        if g(1.0) >= 0.0:
            lo = math.exp(-1.0)
        else:
            lo = math.exp(-brentq(g, 1.0, half)) * (1.0 + 1e-12)

    E = report.stationary_moment
    hi_noise = eta / (2.0 * report.C0 * E) if E > 0 else math.inf
    if math.isinf(report.gap) or report.K == 0.0:
        hi_spec = math.inf
    elif report.gap == 0.0:
        hi_spec = 0.0 if eta / (2.0 * report.K) < 1.0 else math.inf
    else:
        hi_spec = (eta / (2.0 * report.K)) ** (q / report.gap)
    return EpsilonWindow(lo=lo, hi=min(hi_noise, hi_spec, cap))


def moment_cutoff_prediction(p: float, stationary_moment: float, r: float) -> float:
    """Large-r limit E|O_inf|^p of the renormalized moment; inf as r -> -inf."""
    if not p > 0:
        raise DomainError("moment order must be positive")
    if r == -math.inf:
        return math.inf
    return float(stationary_moment)
