import math

import numpy as np
import pytest

from components.errors import DimensionError, DomainError, MomentGate, StepTooLarge
from components.linalg import growth_constants, lyapunov_solve
from components.noise import AlphaStable, Brownian, Deterministic, RedNoise
from components.sde import (
    exact_marginal,
    gaussian_covariance,
    ou_distance_bound,
    ou_distance_decay,
    simulate_marginal,
    stationary_sample,
)

SHEAR = np.array([[1.0, 2.0], [0.0, 1.5]])


@pytest.mark.parametrize("t", [0.5, 2.0])
def test_gaussian_covariance_of_scalar_ou(t):
    cov = gaussian_covariance(np.eye(1), np.eye(1), t)
    assert cov[0, 0] == pytest.approx((1.0 - math.exp(-2.0 * t)) / 2.0, rel=1e-10)


def test_gaussian_covariance_is_continuous_across_methods():
    norm = np.linalg.norm(SHEAR, 2)
    t = 1.0 / norm
    below = gaussian_covariance(SHEAR, np.eye(2), t * (1.0 - 1e-9))
    above = gaussian_covariance(SHEAR, np.eye(2), t * (1.0 + 1e-9))
    np.testing.assert_allclose(below, above, atol=1e-7)


def test_gaussian_covariance_tends_to_lyapunov():
    cov = gaussian_covariance(SHEAR, np.eye(2), 60.0)
    np.testing.assert_allclose(cov, lyapunov_solve(SHEAR, np.eye(2)), atol=1e-10)


def test_exact_marginal():
    law = exact_marginal(np.eye(2), np.eye(2), [1.0, 2.0], 0.1, 1.0)
    np.testing.assert_allclose(law.mean, math.exp(-1.0) * np.array([1.0, 2.0]))
    np.testing.assert_allclose(law.covariance, 0.01 * (1.0 - math.exp(-2.0)) / 2.0 * np.eye(2))


def test_exact_marginal_needs_positive_time_and_noise():
    with pytest.raises(DomainError):
        exact_marginal(np.eye(2), np.eye(2), [1.0, 0.0], 0.1, 0.0)
    with pytest.raises(DomainError):
        exact_marginal(np.eye(2), np.eye(2), [1.0, 0.0], 0.0, 1.0)
    # small but positive times still give a proper Gaussian
    law = exact_marginal(np.eye(1), np.eye(1), [1.0], 1.0, 1e-6)
    assert law.covariance[0, 0] == pytest.approx(1e-6, rel=1e-5)


def test_brownian_marginal_covariance():
    rng = np.random.default_rng(0)
    eps, t = 0.5, 1.5
    X = simulate_marginal(SHEAR, [1.0, 0.0], eps, Brownian(np.eye(2)), t, 200_000, rng=rng)
    expected = exact_marginal(SHEAR, np.eye(2), [1.0, 0.0], eps, t)
    np.testing.assert_allclose(X.samples.mean(axis=0), expected.mean, atol=0.01)
    np.testing.assert_allclose(np.cov(X.samples.T), expected.covariance, atol=0.01)


def test_shared_normals_couple_marginals():
    normals = np.random.default_rng(1).standard_normal((100, 1))
    a = simulate_marginal(np.eye(1), [1.0], 0.1, Brownian(np.eye(1)), 1.0, 100, normals=normals)
    b = simulate_marginal(np.eye(1), [1.0], 0.1, Brownian(np.eye(1)), 1.0, 100, normals=normals)
    np.testing.assert_array_equal(a.samples, b.samples)


def test_deterministic_driver_is_exact():
    X = simulate_marginal(np.eye(1), [0.0], 0.5, Deterministic([1.0]), 1.0, 3)
    np.testing.assert_allclose(X.samples, 0.5 * (1.0 - math.exp(-1.0)))


def test_euler_agrees_with_exact_moments():
    rng = np.random.default_rng(2)
    eps, n = 0.1, 20_000
    X = simulate_marginal(np.eye(1), [1.0], eps, Brownian(np.eye(1)), 1.0, n, dt=1e-3, rng=rng, exact=False)
    expected = exact_marginal(np.eye(1), np.eye(1), [1.0], eps, 1.0)
    assert X.samples.mean() == pytest.approx(expected.mean[0], abs=0.005)
    assert X.samples.var() == pytest.approx(expected.covariance[0, 0], rel=0.1)


def test_record_paths():
    rng = np.random.default_rng(3)
    paths = simulate_marginal(np.eye(2), [1.0, 1.0], 0.1, Brownian(np.eye(2)), 1.0, 10, dt=0.01, rng=rng, record_paths=True)
    assert paths.times[0] == 0.0
    assert paths.times[-1] == pytest.approx(1.0)
    assert paths.states.shape == (paths.times.size, 10, 2)
    np.testing.assert_array_equal(paths.marginal(0).samples, 1.0)


def test_time_zero_returns_initial_state():
    X = simulate_marginal(np.eye(2), [1.0, -1.0], 0.3, AlphaStable(1.5, 1.0, 2), 0.0, 4)
    np.testing.assert_array_equal(X.samples, [[1.0, -1.0]] * 4)


def test_simulation_errors():
    with pytest.raises(StepTooLarge):
        simulate_marginal(np.eye(1), [1.0], 0.1, Brownian(np.eye(1)), 1.0, 10, dt=1.0)
    with pytest.raises(MomentGate):
        simulate_marginal(np.eye(1), [1.0], 0.1, AlphaStable(1.5, 1.0, 1), 1.0, 10, p=2.0)
    with pytest.raises(DimensionError):
        simulate_marginal(np.eye(1), [1.0], 0.1, Brownian(np.eye(2)), 1.0, 10)


def test_red_noise_without_forcing_follows_the_flow():
    spec = RedNoise(np.eye(1), Brownian(np.eye(1)))
    X = simulate_marginal(np.eye(1), [2.0], 0.0, spec, 1.0, 5)
    np.testing.assert_allclose(X.samples, 2.0 * math.exp(-1.0))


def test_stationary_samples():
    rng = np.random.default_rng(4)
    O = stationary_sample(SHEAR, Brownian(np.eye(2)), 200_000, rng)
    np.testing.assert_allclose(np.cov(O.samples.T), lyapunov_solve(SHEAR, np.eye(2)), atol=0.01)
    fixed = stationary_sample(np.eye(2) * 2.0, Deterministic([1.0, 2.0]), 3, rng)
    np.testing.assert_allclose(fixed.samples, [[0.5, 1.0]] * 3)


def test_ou_distance_bound():
    C0, q_star = growth_constants(SHEAR)
    bound = ou_distance_bound(SHEAR, 2.0, 2.0, 4.0)
    assert bound == pytest.approx(C0 * math.exp(-2.0 * q_star) * 2.0)
    assert ou_distance_bound(SHEAR, 4.0, 2.0, 4.0) < bound


def test_ou_distance_decays():
    rng = np.random.default_rng(5)
    decay = ou_distance_decay(np.eye(1), Brownian(np.eye(1)), [0.5, 3.0], 2000, 2.0, rng)
    assert decay[0] > decay[1]
    assert decay[1] < 0.1
