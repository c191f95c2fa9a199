import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import degenerate, free_sl, zero_weight
from sympkit import (
    CoefficientSequence,
    DimensionError,
    HorizonError,
    SingularCoefficientError,
    SymplecticSystem,
    ToleranceConfig,
    TrajectorySequence,
    build_V,
    from_sturm_liouville,
    make_J,
    s_lambda,
    s_lambda_inverse,
    semi_inner,
    semi_norm,
    validate_hypotheses,
)
from sympkit.random_systems import random_system
from sympkit.system_model import psi_from_V

seeds = st.integers(0, 2**32 - 1)
lams = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def test_make_J_small():
    np.testing.assert_array_equal(make_J(1), [[0, 1], [-1, 0]])
    J = make_J(2)
    np.testing.assert_array_equal(J @ J, -np.eye(4))
    np.testing.assert_array_equal(J.conj().T, -J)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_make_J_orthogonal(n):
    J = make_J(n)
    np.testing.assert_array_equal(J.conj().T @ J, np.eye(2 * n))


@pytest.mark.parametrize("n", [0, -1, 1.5])
def test_make_J_rejects_bad_dimension(n):
    with pytest.raises(DimensionError):
        make_J(n)


def test_tolerance_config_validation():
    with pytest.raises(ValueError):
        ToleranceConfig(structural_tol=-1)
    with pytest.raises(ValueError):
        ToleranceConfig(rank_tol=1.0)
    ToleranceConfig(0, 0, 0)


def test_coefficient_shape_errors():
    with pytest.raises(DimensionError):
        CoefficientSequence(np.zeros((3, 2, 2)), np.zeros((3, 4, 4)))
    with pytest.raises(DimensionError):
        CoefficientSequence(np.zeros((3, 3, 3)), np.zeros((3, 3, 3)))


def test_generator_hook_materialises():
    seq = CoefficientSequence.from_generator(4, lambda k: (np.eye(2), np.diag([k, 0.0])))
    assert seq.horizon == 4 and seq.n == 1
    assert seq.Psi[3, 0, 0] == 3
    assert not seq.S.flags.writeable


def test_build_V_example():
    V = build_V(np.array([[1, -1], [0, 1]]), np.diag([1.0, 0.0]))
    np.testing.assert_allclose(V, [[0, 0], [1, -1]])


def test_build_V_zero_weight():
    np.testing.assert_array_equal(build_V(np.eye(4), np.zeros((4, 4))), 0)


@given(seeds, st.integers(1, 3))
def test_build_V_roundtrip_and_structure(seed, n):
    sys = random_system(n, 3, np.random.default_rng(seed))
    J = sys.J
    for S, V, Psi in zip(sys.S, sys.V, sys.Psi):
        np.testing.assert_allclose(psi_from_V(S, V), Psi, atol=1e-10 * max(1, np.linalg.norm(S)) ** 2)
        VJS = V.conj().T @ J @ S
        np.testing.assert_allclose(VJS, VJS.conj().T, atol=1e-9 * max(1, np.linalg.norm(S)) ** 2)
        np.testing.assert_allclose(V.conj().T @ J @ V, 0, atol=1e-9 * max(1, np.linalg.norm(S)) ** 2)


def test_validate_passes_for_sturm_liouville(rng):
    sys = from_sturm_liouville(rng.uniform(0.5, 2, 31), rng.normal(size=30), rng.uniform(0, 2, 30))
    rep = validate_hypotheses(sys)
    assert rep.passed and rep.passed_by_k.all()


def test_validate_flags_skew_weight():
    sys = SymplecticSystem.constant(np.eye(2), make_J(1), 5)
    rep = validate_hypotheses(sys)
    assert not rep.passed
    assert {"hermitian", "isotropic"} <= set(rep.violations)


def test_validate_flags_negative_weight():
    sys = SymplecticSystem.constant(np.eye(2), np.diag([-1.0, 0.0]), 5)
    rep = validate_hypotheses(sys)
    assert rep.violations == ("semidefinite",)
    assert rep.min_eig.min() == -1.0


def test_validate_flags_non_symplectic():
    sys = SymplecticSystem.constant(2 * np.eye(2), np.zeros((2, 2)), 3)
    assert "symplectic" in validate_hypotheses(sys).violations


def test_s_lambda_free_sl():
    sys = free_sl(5)
    lam = 0.7 - 1.3j
    np.testing.assert_allclose(s_lambda(sys, 2, lam), [[1, -1], [lam, 1 - lam]])
    np.testing.assert_allclose(s_lambda_inverse(sys, 2, lam), [[1 - lam, 1], [-lam, 1]])
    np.testing.assert_array_equal(s_lambda(sys, 0, 0), sys.S[0])


def test_s_lambda_inverse_identity():
    sys = zero_weight(2)
    np.testing.assert_array_equal(s_lambda_inverse(sys, 0, 0), np.eye(4))


def test_s_lambda_range_errors():
    sys = free_sl(5)
    with pytest.raises(HorizonError):
        s_lambda(sys, 6, 1j)
    with pytest.raises(HorizonError):
        s_lambda_inverse(sys, -1, 1j)


@given(seeds, lams, st.integers(1, 4))
def test_s_lambda_conjugate_symplectic(seed, lam, n):
    sys = random_system(n, 2, np.random.default_rng(seed))
    J = sys.J
    for k in range(3):
        A = s_lambda(sys, k, lam)
        B = s_lambda(sys, k, np.conj(lam))
        scale = max(1.0, np.linalg.norm(A) * np.linalg.norm(B))
        assert np.linalg.norm(B.conj().T @ J @ A - J) <= 1e-10 * scale
        assert abs(abs(np.linalg.det(A)) - 1) <= 1e-8 * scale ** n


@given(seeds, lams)
def test_inverse_matches_generic_inverse(seed, lam):
    sys = random_system(2, 1, np.random.default_rng(seed))
    A = s_lambda(sys, 0, lam)
    Ainv = s_lambda_inverse(sys, 0, lam)
    cond = np.linalg.cond(A)
    np.testing.assert_allclose(Ainv, np.linalg.inv(A), atol=1e-12 * cond * np.linalg.norm(Ainv))
    assert np.linalg.norm(Ainv @ A - np.eye(4)) <= 1e-12 * cond


@given(seeds, lams)
def test_weight_factor_inverse_pair(seed, lam):
    sys = random_system(2, 1, np.random.default_rng(seed))
    JPsi = sys.J @ sys.Psi[0]
    prod = (np.eye(4) - lam * JPsi) @ (np.eye(4) + lam * JPsi)
    assert np.linalg.norm(prod - np.eye(4)) <= 1e-10 * max(1, abs(lam) * np.linalg.norm(JPsi)) ** 2


def test_from_sturm_liouville_blocks(rng):
    p = rng.uniform(0.5, 2, 6)
    q = rng.normal(size=5)
    w = rng.uniform(0, 1, 5)
    sys = from_sturm_liouville(p, q, w)
    lam = 0.3 + 0.4j
    for k in range(5):
        expected = [[1, -1 / p[k + 1]], [lam * w[k] - q[k], 1 + (q[k] - lam * w[k]) / p[k + 1]]]
        np.testing.assert_allclose(s_lambda(sys, k, lam), expected, atol=1e-14)
        np.testing.assert_allclose(sys.Psi[k], np.diag([w[k], 0]))


def test_from_sturm_liouville_errors():
    with pytest.raises(SingularCoefficientError):
        from_sturm_liouville([1, 1, 0, 1], [0, 0, 0], [1, 1, 1])
    with pytest.raises(DimensionError):
        from_sturm_liouville([1, 1], [0, 0, 0], [1, 1, 1])
    with pytest.raises(DimensionError):
        from_sturm_liouville(1, 0, 1)
    with pytest.raises(ValueError):
        from_sturm_liouville(1, 0, [-1, 1], horizon=1)


def test_zero_weight_sturm_liouville_valid():
    sys = from_sturm_liouville(1, 0, 0, horizon=4)
    assert validate_hypotheses(sys).passed
    assert not sys.Psi.any()


def test_trajectory_sequence_basics():
    t = TrajectorySequence(np.ones((4, 2)), lam=1j, start=3)
    assert t.values.shape == (4, 2, 1) and t.stop == 6 and t.m == 1
    with pytest.raises(HorizonError):
        t.at(7)
    with pytest.raises(ValueError):
        TrajectorySequence(np.array([[np.inf, 0.0]]))
    with pytest.raises(ValueError):
        t.values[0, 0, 0] = 2


def test_semi_inner_diagonal_weight(rng):
    sys = degenerate(9)
    z = rng.normal(size=(10, 2)) + 1j * rng.normal(size=(10, 2))
    val = semi_inner(sys, z, z, (0, 9))
    assert np.isclose(val, np.sum(np.abs(z[:, 0]) ** 2))
    z[:, 0] = 0
    assert semi_inner(sys, z, z) == 0
    assert semi_norm(sys, z) == 0


def test_semi_inner_empty_interval():
    sys = degenerate(5)
    z = np.ones((6, 2, 2))
    np.testing.assert_array_equal(semi_inner(sys, z, z, (3, 2)), np.zeros((2, 2)))


@given(seeds)
def test_semi_inner_cauchy_schwarz_and_psd(seed):
    r = np.random.default_rng(seed)
    sys = random_system(2, 6, r)
    z = r.normal(size=(7, 4, 2)) + 1j * r.normal(size=(7, 4, 2))
    w = r.normal(size=(7, 4)) + 1j * r.normal(size=(7, 4))
    G = semi_inner(sys, z, z)
    scale = 1 + np.abs(sys.Psi).sum() * np.abs(z).max() ** 2
    np.testing.assert_allclose(G, G.conj().T, atol=1e-12 * scale)
    assert np.linalg.eigvalsh(G).min() >= -1e-10 * scale
    z1 = z[:, :, 0]
    assert abs(semi_inner(sys, z1, w)) <= semi_norm(sys, z1) * semi_norm(sys, w) * (1 + 1e-10) + 1e-12 * scale
