import math

import numpy as np
import pytest

from components.entropy import (
    GaussianLaw,
    controllability_rank,
    entropy_dichotomy,
    entropy_envelope,
    entropy_profile,
    knn_relative_entropy,
    marginal_entropy,
    relative_entropy,
    remainder_term,
)
from components.errors import DegenerateNoise, NoProfile, SingularCovariance
from components.linalg import lyapunov_solve
from components.sde import exact_marginal
from components.spectral import decompose

ROTATION = np.array([[1.0, 3.0], [-3.0, 1.0]])
UNDERDAMPED = np.array([[0.0, -1.0], [1.0, 1.0]])
SHEAR = np.array([[1.0, 2.0], [0.0, 1.5]])


def test_relative_entropy_of_scalar_gaussians():
    unit = GaussianLaw([0.0], [[1.0]])
    assert relative_entropy(GaussianLaw([1.0], [[1.0]]), unit) == pytest.approx(0.5)
    assert relative_entropy(GaussianLaw([0.0], [[2.0]]), unit) == pytest.approx(0.5 * (1.0 - math.log(2.0)))
    assert relative_entropy(unit, unit) == 0.0


def test_gaussian_law_rejects_singular_covariance():
    with pytest.raises(SingularCovariance):
        GaussianLaw([0.0, 0.0], np.diag([1.0, 0.0]))


def test_controllability_rank():
    assert controllability_rank(np.eye(2), [[1.0], [0.0]]) == 1
    assert controllability_rank(np.array([[1.0, 1.0], [0.0, 1.0]]), [[0.0], [1.0]]) == 2
    with pytest.raises(DegenerateNoise):
        marginal_entropy(np.eye(2), [[1.0], [0.0]], [1.0, 1.0], 0.1, 1.0)


def test_marginal_entropy_matches_direct_formula():
    eps, t, x = 0.2, 0.7, np.array([1.0, -0.5])
    S = lyapunov_solve(SHEAR, np.eye(2))
    direct = relative_entropy(exact_marginal(SHEAR, np.eye(2), x, eps, t), GaussianLaw(np.zeros(2), eps ** 2 * S))
    assert marginal_entropy(SHEAR, np.eye(2), x, eps, t) == pytest.approx(direct, rel=1e-8)


def test_remainder_vanishes_at_equilibrium():
    assert remainder_term(SHEAR, np.eye(2), 40.0) == pytest.approx(0.0, abs=1e-12)
    assert remainder_term(SHEAR, np.eye(2), 0.5) > remainder_term(SHEAR, np.eye(2), 1.0) > 0.0


@pytest.mark.parametrize("delta", [0.5, 2.0])
def test_entropy_dichotomy_slopes(delta):
    eps_grid = np.logspace(-2, -5, 7)
    result = entropy_dichotomy(np.eye(2), np.eye(2), np.ones(2), delta, eps_grid)
    assert result.slope == pytest.approx(result.predicted_slope, abs=0.05)
    assert result.diverges is (delta < 1.0)
    assert len(result.values) == 7


def test_entropy_profile_of_rotation():
    dec = decompose(ROTATION, [1.0, 0.0])
    sigma_inf = lyapunov_solve(ROTATION, np.eye(2))
    np.testing.assert_allclose(sigma_inf, 0.5 * np.eye(2), atol=1e-12)
    assert entropy_profile(dec, sigma_inf, 1.0, 0.0) == pytest.approx(math.sqrt(2.0))
    assert entropy_profile(dec, sigma_inf, 1.0, math.log(2.0)) == pytest.approx(math.sqrt(2.0) / 2.0)


def test_entropy_envelope_without_profile():
    dec = decompose(UNDERDAMPED, [1.0, 0.0])
    with pytest.raises(NoProfile):
        entropy_profile(dec, np.eye(2), 1.0, 0.0)
    lo, hi = entropy_envelope(dec, np.eye(2), 1.0, 0.0)
    assert 0.0 < lo < hi


def test_knn_relative_entropy():
    rng = np.random.default_rng(0)
    P = rng.standard_normal(5000) + 1.0
    Q = rng.standard_normal(5000)
    assert knn_relative_entropy(P, Q) == pytest.approx(0.5, abs=0.1)
