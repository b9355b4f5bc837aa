import math

import numpy as np
import pytest

from components.errors import UnstableDrift
from components.linalg import (
    GRID_SLACK,
    check_stability,
    eigen_structure,
    growth_constants,
    lyapunov_solve,
    matrix_exponential,
    propagator,
    psd_sqrt,
)


def random_stable(rng, d):
    A = rng.standard_normal((d, d))
    shift = max(0.0, -np.min(np.linalg.eigvals(A).real)) + rng.uniform(0.1, 1.0)
    return A + shift * np.eye(d)


def test_exponential_of_zero_is_identity():
    assert np.array_equal(matrix_exponential(np.zeros((3, 3))), np.eye(3))


def test_exponential_invariants_on_random_matrices():
    rng = np.random.default_rng(7)
    for _ in range(500):
        d = int(rng.integers(1, 11))
        A = rng.standard_normal((d, d))
        E = matrix_exponential(A)
        assert np.linalg.det(E) == pytest.approx(math.exp(np.trace(A)), rel=1e-8)
        np.testing.assert_allclose(matrix_exponential(A) @ matrix_exponential(-A), np.eye(d), atol=1e-8)


def test_exponential_of_commuting_sum():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((4, 4))
    np.testing.assert_allclose(matrix_exponential(2.0 * A), matrix_exponential(A) @ matrix_exponential(A), rtol=1e-10, atol=1e-10)


def test_check_stability_rejects_nonpositive_spectrum():
    with pytest.raises(UnstableDrift):
        check_stability(np.array([[1.0, 0.0], [0.0, -0.5]]))
    with pytest.raises(UnstableDrift):
        check_stability(np.array([[0.0, 1.0], [-1.0, 0.0]]))


def test_lyapunov_residual_on_random_stable_matrices():
    rng = np.random.default_rng(3)
    for _ in range(500):
        d = int(rng.integers(1, 11))
        Q = random_stable(rng, d)
        B = rng.standard_normal((d, d))
        S = B @ B.T
        X = lyapunov_solve(Q, S)
        residual = Q @ X + X @ Q.T - S
        assert np.linalg.norm(residual) <= 1e-8 * max(1.0, np.linalg.norm(S)) * (1.0 + np.linalg.norm(Q)) ** 2
        np.testing.assert_array_equal(X, X.T)


def test_lyapunov_scalar():
    assert lyapunov_solve(np.array([[1.0]]), np.array([[1.0]]))[0, 0] == pytest.approx(0.5)


def test_eigen_reconstruction_on_random_stable_matrices():
    rng = np.random.default_rng(11)
    for _ in range(500):
        d = int(rng.integers(1, 11))
        Q = random_stable(rng, d)
        structure = eigen_structure(Q)
        assert structure.dim == d
        np.testing.assert_allclose(structure.reconstruct(), Q, atol=1e-6 * (1.0 + np.linalg.norm(Q)))


def test_jordan_block_is_detected():
    Q = 2.0 * np.eye(3) + np.diag([1.0, 1.0], 1)
    structure = eigen_structure(Q)
    assert structure.eigenvalues == (2.0 + 0j,)
    assert structure.algebraic == (3,)
    assert structure.geometric == (1,)
    chain = structure.chains[0][0]
    A = Q - 2.0 * np.eye(3)
    np.testing.assert_allclose(A @ chain[0], 0.0, atol=1e-10)
    for k in range(2):
        np.testing.assert_allclose(A @ chain[k + 1], chain[k], atol=1e-10)


def test_conjugate_chains_are_exact_conjugates():
    Q = np.array([[1.0, 3.0], [-3.0, 1.0]])
    structure = eigen_structure(Q)
    lam0, lam1 = structure.eigenvalues
    assert lam0 == lam1.conjugate()
    assert lam0.imag > 0
    np.testing.assert_array_equal(structure.chains[0][0][0], structure.chains[1][0][0].conj())


def test_eigenvalues_sorted_by_real_part():
    Q = np.diag([3.0, 1.0, 2.0])
    assert [lam.real for lam in eigen_structure(Q).eigenvalues] == [1.0, 2.0, 3.0]


def test_growth_constants_bound_the_propagator():
    rng = np.random.default_rng(5)
    for _ in range(20):
        d = int(rng.integers(2, 6))
        Q = random_stable(rng, d)
        C0, q_star = growth_constants(Q)
        assert q_star == pytest.approx(0.5 * np.min(np.linalg.eigvals(Q).real))
        for t in np.linspace(0.0, 8.0, 33):
            assert np.linalg.norm(propagator(Q, t), 2) <= C0 * math.exp(-q_star * t) * (1.0 + 1e-9)


def test_growth_constants_of_normal_matrix():
    C0, q_star = growth_constants(np.diag([1.0, 2.0]))
    assert 1.0 <= C0 <= math.exp(GRID_SLACK)
    assert q_star == pytest.approx(0.5)


def test_psd_sqrt_squares_back():
    B = np.array([[2.0, 1.0], [0.0, 1.0]])
    S = B @ B.T
    R = psd_sqrt(S)
    np.testing.assert_allclose(R @ R, S, atol=1e-12)
