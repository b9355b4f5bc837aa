import numpy as np
import pytest

from components.errors import ConfigError, DomainError, UnstableDrift
from components.scenarios import (
    SCENARIOS,
    Regime,
    ScenarioSpec,
    build_conceptual,
    build_gradient,
    build_jacobi_chain,
    build_oscillator,
    build_scenario,
    jacobi_drift,
    oscillator_regime,
)


@pytest.mark.parametrize(
    "gamma, kappa, regime",
    [(3.0, 1.0, Regime.OVER), (2.0, 1.0, Regime.CRITICAL), (1.0, 1.0, Regime.SUB)],
)
def test_oscillator_regime(gamma, kappa, regime):
    assert oscillator_regime(gamma, kappa) == regime
    assert build_oscillator(gamma, kappa).regime == regime


def test_oscillator_drift_and_noise():
    system = build_oscillator(1.0, 2.0)
    np.testing.assert_array_equal(system.drift, [[0.0, -1.0], [2.0, 1.0]])
    np.testing.assert_array_equal(system.initial, [1.0, 0.0])
    np.testing.assert_array_equal(system.noise.covariance, np.diag([0.0, 1.0]))
    with pytest.raises(DomainError):
        build_oscillator(0.0, 1.0)


def test_gradient_is_symmetric():
    theta = 0.3
    basis = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    system = build_gradient([1.0, 3.0], basis=basis)
    np.testing.assert_allclose(system.drift, system.drift.T)
    np.testing.assert_allclose(np.linalg.eigvalsh(system.drift), [1.0, 3.0])
    with pytest.raises(DomainError):
        build_gradient([1.0, -1.0])
    with pytest.raises(DomainError):
        build_gradient([1.0, 2.0], basis=np.ones((2, 2)))


def test_jacobi_drift_structure():
    Q = jacobi_drift(3, 0.1, 1.0, 0.5, 0.7)
    assert Q.shape == (6, 6)
    np.testing.assert_array_equal(Q[3:, :3], -np.eye(3))
    np.testing.assert_array_equal(Q[:3, :3], np.diag([0.5, 0.0, 0.7]))
    np.testing.assert_allclose(Q[:3, 3:], [[1.1, -1.0, 0.0], [-1.0, 2.1, -1.0], [0.0, -1.0, 1.1]])


def test_jacobi_chain_is_stable_and_forced_at_the_ends():
    system = build_jacobi_chain()
    assert system.drift.shape == (10, 10)
    np.testing.assert_array_equal(np.diag(system.noise.covariance), [1, 0, 0, 0, 1, 0, 0, 0, 0, 0])
    with pytest.raises(DomainError):
        build_jacobi_chain(n=1)


def test_conceptual_systems():
    rotation = build_conceptual("Rotation51", lam=0.5, theta=2.0)
    np.testing.assert_array_equal(rotation.drift, [[0.5, 2.0], [-2.0, 0.5]])
    jordan = build_conceptual("JordanBlock53", dim=4)
    np.testing.assert_array_equal(jordan.initial, [0.0, 0.0, 0.0, 1.0])
    suspension = build_conceptual("Suspension52", lam=0.25)
    assert suspension.drift[0, 0] == 0.25
    with pytest.raises(DomainError):
        build_conceptual("Torus")


def test_scenario_spec_rejects_unstable_drift():
    with pytest.raises(UnstableDrift):
        build_conceptual("Rotation51", lam=-1.0)
    with pytest.raises(UnstableDrift):
        ScenarioSpec("bad", np.zeros((1, 1)), np.ones(1), build_gradient([1.0]).noise)


def test_build_scenario_by_name():
    assert set(SCENARIOS) == {"oscillator", "gradient", "jacobi-chain", "rotation51", "suspension52", "jordan53"}
    system = build_scenario("rotation51", {"theta": 1.0})
    assert system.params == {"lam": 1.0, "theta": 1.0}
    with pytest.raises(ConfigError):
        build_scenario("pendulum")
    with pytest.raises(ConfigError):
        build_scenario("oscillator", {"mass": 1.0})
    with pytest.raises(DomainError):
        build_scenario("gradient", {"x": [1.0]})
