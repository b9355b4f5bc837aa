import math

import numpy as np
import pytest

from components import reference_data as ref
from components.errors import RealSpectrum, SingularCovariance, UnstableDrift, ZeroInitialState
from components.scenarios import build_conceptual, build_jacobi_chain
from components.spectral import (
    decompose,
    inverse_sqrt,
    normal_growth,
    omega_envelope,
    omega_on_sphere,
    oscillator_2x2_check,
    resonance_test,
    spectral_coefficients,
    weighted_normal_growth,
)

ROTATION = np.array([[1.0, 3.0], [-3.0, 1.0]])
UNDERDAMPED = np.array([[0.0, -1.0], [1.0, 1.0]])
CRITICAL = np.array([[0.0, -1.0], [1.0, 2.0]])


def test_rotation_decomposition():
    dec = decompose(ROTATION, [1.0, 0.0])
    assert dec.rate == pytest.approx(1.0)
    assert dec.ell == 1
    assert dec.m == 2
    assert sorted(dec.angles) == pytest.approx([-3.0, 3.0])
    np.testing.assert_allclose(dec.leading_pair_vector(), [0.5, 0.5j], atol=1e-12)
    np.testing.assert_allclose(dec.representative(), [1.0, 0.0], atol=1e-12)


def test_rotation_orbit_matches_omega_points():
    dec = decompose(ROTATION, [1.0, 0.0])
    for t in (0.3, 1.7, 5.0, 12.5):
        assert dec.convergence_residual(t) < 1e-9


def test_rotation_has_profile():
    verdict = normal_growth(decompose(ROTATION, [1.0, 0.0]))
    assert not verdict.resonant
    assert verdict.orthogonal and verdict.equal_norms
    assert verdict.profile_exists
    assert verdict.omega_on_sphere
    assert verdict.representative_norm == pytest.approx(1.0)


def test_underdamped_oscillator_has_no_profile():
    dec = decompose(UNDERDAMPED, [1.0, 0.0])
    verdict = normal_growth(dec)
    assert not verdict.profile_exists
    assert not omega_on_sphere(dec)
    lo, hi = omega_envelope(dec)
    assert 0.0 < lo < hi


def test_critical_oscillator_has_jordan_depth_two():
    dec = decompose(CRITICAL, [1.0, 0.0])
    assert dec.rate == pytest.approx(1.0)
    assert dec.ell == 2
    assert dec.angles == (0.0,)
    np.testing.assert_allclose(dec.representative(), [1.0, -1.0], atol=1e-6)
    assert normal_growth(dec).profile_exists
    # renormalized orbit approaches the limit like |x|/t
    assert dec.convergence_residual(10.0) == pytest.approx(0.1, rel=1e-6)


def test_eigenvector_initial_state_has_depth_one():
    dec = decompose(CRITICAL, [1.0, -1.0])
    assert dec.ell == 1
    np.testing.assert_allclose(dec.representative(), [1.0, -1.0], atol=1e-6)


def test_slow_mode_invisible_to_x_is_skipped():
    Q = np.diag([0.5, 2.0])
    dec = decompose(Q, [0.0, 1.0])
    assert dec.rate == pytest.approx(2.0)


def test_spectral_coefficients_sum_to_x():
    rng = np.random.default_rng(2)
    Q = rng.standard_normal((4, 4)) + 4.0 * np.eye(4)
    x = rng.standard_normal(4)
    total = sum(v for _, v in spectral_coefficients(Q, x))
    np.testing.assert_allclose(total, x, atol=1e-10)


def test_zero_initial_state_rejected():
    with pytest.raises(ZeroInitialState):
        decompose(ROTATION, [0.0, 0.0])


def test_unstable_drift_rejected():
    with pytest.raises(UnstableDrift):
        decompose(np.array([[-1.0, 0.0], [0.0, 1.0]]), [1.0, 1.0])


@pytest.mark.parametrize(
    "angles, expected",
    [
        ([], False),
        ([2.0 * math.pi / 5.0], True),
        ([math.sqrt(2.0)], False),
        ([1.0, 2.0], True),
        ([1.0, math.sqrt(2.0)], False),
    ],
)
def test_resonance(angles, expected):
    assert resonance_test(angles) is expected


def test_suspension_profile_depends_on_slowest_mode():
    real_slowest = build_conceptual("Suspension52", lam=0.25, gamma=1.0, kappa=1.0, x=[1.0, 1.0, 0.0])
    assert normal_growth(decompose(real_slowest.drift, real_slowest.initial)).profile_exists

    rotation_slowest = build_conceptual("Suspension52", lam=1.0, gamma=1.0, kappa=1.0, x=[1.0, 1.0, 0.0])
    dec = decompose(rotation_slowest.drift, rotation_slowest.initial)
    assert dec.rate == pytest.approx(0.5)
    assert not normal_growth(dec).profile_exists


def test_jordan_block_example():
    system = build_conceptual("JordanBlock53", lam=1.0, dim=3)
    dec = decompose(system.drift, system.initial)
    assert dec.ell == 3
    assert normal_growth(dec).profile_exists


def test_jacobi_chain_leading_pair():
    system = build_jacobi_chain(**ref.JACOBI_PARAMS)
    dec = decompose(system.drift, system.initial)
    assert dec.rate == pytest.approx(ref.JACOBI_RATE, abs=ref.JACOBI_TOLERANCE)
    assert dec.ell == 1
    assert dec.leading_argument == pytest.approx(ref.JACOBI_ARGUMENT, abs=ref.JACOBI_TOLERANCE)
    assert dec.pair_frequencies[0] == pytest.approx(ref.JACOBI_FREQUENCY, abs=ref.JACOBI_TOLERANCE)
    np.testing.assert_allclose(
        dec.leading_pair_vector(), ref.jacobi_leading_pair_vector(), atol=ref.JACOBI_TOLERANCE
    )
    verdict = normal_growth(dec)
    assert not verdict.orthogonal
    assert not verdict.equal_norms
    assert not verdict.profile_exists


def test_oscillator_2x2_check():
    verdict = oscillator_2x2_check(UNDERDAMPED, [1.0, 0.0])
    assert not verdict.profile_exists
    beta = math.sqrt(3.0) / 2.0
    assert verdict.representative_norm == pytest.approx(math.sqrt(1.25) / beta)


def test_oscillator_2x2_check_needs_complex_spectrum():
    with pytest.raises(RealSpectrum):
        oscillator_2x2_check(np.array([[0.0, -1.0], [1.0, 3.0]]), [1.0, 0.0])


def test_weighted_normal_growth_with_identity_weight():
    dec = decompose(ROTATION, [1.0, 0.0])
    weighted = weighted_normal_growth(dec, np.eye(2))
    plain = normal_growth(dec)
    assert weighted.profile_exists == plain.profile_exists
    assert weighted.representative_norm == pytest.approx(plain.representative_norm)


def test_inverse_sqrt():
    S = np.array([[4.0, 0.0], [0.0, 9.0]])
    np.testing.assert_allclose(inverse_sqrt(S), np.diag([0.5, 1.0 / 3.0]), atol=1e-12)
    with pytest.raises(SingularCovariance):
        inverse_sqrt(np.diag([1.0, 0.0]))


def test_as_dict_is_plain():
    out = decompose(ROTATION, [1.0, 0.0]).as_dict()
    assert out["ell"] == 1
    assert out["leading_pair_vector"]["re"] == pytest.approx([0.5, 0.0])
    assert out["leading_pair_vector"]["im"] == pytest.approx([0.0, 0.5])


def rotation_block(q, beta):
    return np.array([[q, beta], [-beta, q]])


def random_orthogonal(rng, d):
    Qm, R = np.linalg.qr(rng.standard_normal((d, d)))
    return Qm * np.sign(np.diag(R))


def test_oscillator_check_agrees_with_normal_growth():
    rng = np.random.default_rng(11)
    checked = {True: 0, False: 0}
    for k in range(1000):
        kind = k % 3
        if kind == 0:
            R = random_orthogonal(rng, 2)
            Q = R @ rotation_block(rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0)) @ R.T
        elif kind == 1:
            kappa = rng.uniform(0.2, 4.0)
            gamma = rng.uniform(0.1, 0.95) * 2.0 * math.sqrt(kappa)
            Q = np.array([[0.0, -1.0], [kappa, gamma]])
        else:
            Q = rng.standard_normal((2, 2))
            Q += (0.5 - min(np.linalg.eigvals(Q).real)) * np.eye(2)
        lam = np.linalg.eigvals(Q)
        if abs(lam[0].imag) < 0.05:
            continue
        z = rng.standard_normal(2)
        direct = oscillator_2x2_check(Q, z)
        general = normal_growth(decompose(Q, z))
        assert direct.profile_exists == general.profile_exists, (Q, z)
        checked[bool(direct.profile_exists)] += 1
    assert checked[True] > 100 and checked[False] > 100


def test_underdamped_oscillators_never_have_a_profile():
    rng = np.random.default_rng(12)
    for _ in range(1000):
        kappa = rng.uniform(0.1, 5.0)
        gamma = rng.uniform(0.05, 0.95) * 2.0 * math.sqrt(kappa)
        z = rng.standard_normal(2)
        assert not oscillator_2x2_check(np.array([[0.0, -1.0], [kappa, gamma]]), z).profile_exists


def test_rotation_check_for_momentum_initial_state():
    verdict = oscillator_2x2_check(ROTATION, [0.0, 1.0])
    assert verdict.orthogonal and verdict.equal_norms
    assert verdict.profile_exists
    assert verdict.representative_norm == pytest.approx(1.0)


def test_unequal_stationary_weights_break_the_profile():
    dec = decompose(ROTATION, [1.0, 0.0])
    verdict = weighted_normal_growth(dec, np.diag([1.0, 4.0]))
    assert verdict.orthogonal
    assert not verdict.equal_norms
    assert not verdict.profile_exists
    assert normal_growth(dec).profile_exists


def test_sphere_check_matches_family_tests_without_resonance():
    rng = np.random.default_rng(13)
    outcomes = set()
    for k in range(200):
        q = rng.uniform(0.5, 2.0)
        beta1, beta2 = rng.uniform(0.5, 1.5), rng.uniform(1.7, 3.0)
        B = np.zeros((4, 4))
        B[:2, :2] = rotation_block(q, beta1)
        B[2:, 2:] = rotation_block(q, beta2)
        if k % 2 == 0:
            P = random_orthogonal(rng, 4)
        else:
            P = random_orthogonal(rng, 4) @ np.diag(rng.uniform(0.5, 2.0, size=4)) @ random_orthogonal(rng, 4)
        Q = P @ B @ np.linalg.inv(P)
        dec = decompose(Q, rng.standard_normal(4))
        assert dec.m == 4
        verdict = normal_growth(dec)
        assert not verdict.resonant
        assert verdict.omega_on_sphere == (verdict.orthogonal and verdict.equal_norms)
        outcomes.add(verdict.omega_on_sphere)
    assert outcomes == {True, False}


@pytest.mark.parametrize(
    "Q, x",
    [
        (CRITICAL, [1.0, 0.0]),
        (np.diag([1.0, 2.0]), [1.0, 1.0]),
        (np.block([[ROTATION, np.zeros((2, 1))], [np.zeros((1, 2)), np.array([[1.5]])]]), [1.0, 0.0, 1.0]),
    ],
)
def test_convergence_residual_shrinks(Q, x):
    dec = decompose(Q, x)
    residuals = [dec.convergence_residual(k / dec.rate) for k in (10.0, 20.0, 40.0)]
    assert residuals[0] > residuals[1] > residuals[2]
    if dec.ell == 1:
        scale = sum(np.linalg.norm(v) for v in dec.vectors)
        assert residuals[2] < 1e-3 * scale
