import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import degenerate, free_sl, zero_weight
from sympkit import (
    HorizonError,
    PreconditionError,
    PropagationError,
    SymplecticSystem,
    TrajectorySequence,
    apply_L,
    fundamental_matrix,
    lagrange_residual,
    s_lambda,
    solve_ivp_nonhom,
    transfer,
    wronskian_residual,
)
from sympkit.propagation import fundamental_identity_residuals, nonhom_residual
from sympkit.random_systems import random_symplectic, random_system

seeds = st.integers(0, 2**32 - 1)


def small_lambda(seed):
    r = np.random.default_rng(seed)
    return complex(*r.uniform(-1, 1, 2))


def test_identity_transfer_is_constant():
    sys = zero_weight(2, 10)
    init = np.arange(4.0) + 1j
    z = transfer(sys, 3 + 2j, init, k0=4)
    assert z.start == 0 and z.stop == 10
    np.testing.assert_array_equal(z.values[:, :, 0], np.tile(init, (11, 1)))


def test_free_sl_fixes_first_unit_vector():
    z = transfer(free_sl(20), 0.0, [1, 0])
    np.testing.assert_array_equal(z.values[:, :, 0], np.tile([1, 0], (21, 1)))


def test_transfer_range_and_errors():
    sys = free_sl(10)
    z = transfer(sys, 1j, np.eye(2), k0=7, target=3)
    assert (z.start, z.stop) == (3, 7)
    z = transfer(sys, 1j, np.eye(2), k0=11)
    assert z.stop == 11
    with pytest.raises(HorizonError):
        transfer(sys, 1j, np.eye(2), k0=12)


def test_transfer_overflow_reports_index():
    sys = SymplecticSystem.constant(np.diag([1e200, 1e-200]), np.zeros((2, 2)), 5)
    with pytest.raises(PropagationError) as info:
        transfer(sys, 0.0, [1.0, 0.0], k0=5, target=0)
    assert info.value.index == 3


@given(seeds)
def test_transfer_roundtrip_long_horizon(seed):
    r = np.random.default_rng(seed)
    sys = random_system(2, 500, r, weight_scale=0.02, well_conditioned=True)
    lam = small_lambda(seed)
    init = r.normal(size=(4, 2)) + 1j * r.normal(size=(4, 2))
    there = transfer(sys, lam, init, k0=0, target=500)
    back = transfer(sys, lam, there.at(500), k0=500, target=0)
    np.testing.assert_allclose(back.at(0), init, atol=1e-9)
    again = transfer(sys, lam, init, k0=0, target=500)
    np.testing.assert_allclose(again.values, there.values, atol=1e-12 * np.abs(there.values).max())


def test_transfer_solves_recursion(rng):
    sys = random_system(2, 30, rng)
    z = transfer(sys, 0.2 + 0.1j, np.eye(4), k0=15)
    for k in range(30):
        lhs = z.at(k)
        rhs = s_lambda(sys, k, 0.2 + 0.1j) @ z.at(k + 1)
        assert np.linalg.norm(lhs - rhs) <= 1e-9 * max(1, np.linalg.norm(lhs))


def test_fundamental_single_step():
    Phi = fundamental_matrix(free_sl(5), 0.0)
    np.testing.assert_allclose(Phi.at(1), [[1, 1], [0, 1]])
    np.testing.assert_array_equal(Phi.at(0), np.eye(2))
    assert Phi.Z.shape == (6, 2, 1)


def test_fundamental_rejects_non_symplectic_anchor():
    with pytest.raises(PreconditionError):
        fundamental_matrix(free_sl(5), 1j, C=2 * np.eye(2))


def test_fundamental_matches_matrix_products(rng):
    sys = random_system(2, 8, rng)
    lam = 0.4 - 0.3j
    C = random_symplectic(2, rng)
    Phi = fundamental_matrix(sys, lam, k0=3, C=C)
    expected = C
    for k in range(2, -1, -1):
        expected = s_lambda(sys, k, lam) @ expected
    np.testing.assert_allclose(Phi.at(0), expected, rtol=1e-10, atol=1e-10 * np.abs(expected).max())
    expected = C
    for k in range(3, 8):
        expected = np.linalg.solve(s_lambda(sys, k, lam), expected)
    np.testing.assert_allclose(Phi.at(8), expected, rtol=1e-8, atol=1e-8 * np.abs(expected).max())


@given(seeds)
def test_fundamental_identities(seed):
    r = np.random.default_rng(seed)
    sys = random_system(2, 200, r, weight_scale=0.02, well_conditioned=True)
    lam = small_lambda(seed)
    res = fundamental_identity_residuals(sys, lam, k0=0, C=random_symplectic(2, r, scale=0.2, factors=1))
    for name in ("conjugate_symplectic", "transposed", "inverse"):
        assert res[name].max() <= 1e-10, name
    det = np.abs(np.linalg.det(fundamental_matrix(sys, lam).array))
    np.testing.assert_allclose(det, 1.0, atol=1e-10)


def test_apply_L_on_solution(rng):
    sys = random_system(2, 20, rng)
    lam = 0.1 + 0.2j
    z = transfer(sys, lam, np.eye(4), k0=10)
    Lz = apply_L(sys, z)
    assert (Lz.start, Lz.stop) == (0, 19)
    expected = lam * sys.Psi[:20] @ z.values[:20]
    np.testing.assert_allclose(Lz.values, expected, atol=1e-9 * np.abs(z.values).max() ** 1)


def test_apply_L_constant_identity_system():
    z = np.tile(np.array([1.0, 2.0, 3.0, 4.0]), (6, 1))
    sys = SymplecticSystem.constant(np.eye(4), np.zeros((4, 4)), 5)
    assert not apply_L(sys, z).values.any()


def test_apply_L_difference_form(rng):
    sys = degenerate(10)
    z = rng.normal(size=(11, 2))
    Lz = apply_L(sys, z).values[:, :, 0]
    np.testing.assert_allclose(Lz, (np.diff(z, axis=0)) @ np.array([[0, -1], [1, 0]]).T)


def test_nonhom_zero_forcing_matches_transfer(rng):
    sys = random_system(1, 20, rng, weight_scale=0.1, well_conditioned=True)
    z0 = rng.normal(size=2) + 0j
    f = np.zeros((21, 2, 1))
    z = solve_ivp_nonhom(sys, 0.5j, f, z0)
    np.testing.assert_allclose(z.values, transfer(sys, 0.5j, z0, target=20).values, atol=1e-12)


def test_nonhom_degenerate_closed_form(rng):
    sys = degenerate(12)
    f = rng.normal(size=(13, 2)) + 1j * rng.normal(size=(13, 2))
    z = solve_ivp_nonhom(sys, 0.0, f, np.zeros(2)).values[:, :, 0]
    expected = np.zeros((13, 2), dtype=complex)
    expected[1:, 1] = -np.cumsum(f[:12, 0])
    np.testing.assert_allclose(z, expected, atol=1e-12)


@given(seeds)
def test_nonhom_residual(seed):
    r = np.random.default_rng(seed)
    sys = random_system(2, 100, r, weight_scale=0.02, well_conditioned=True)
    lam = small_lambda(seed)
    f = r.normal(size=(100, 4, 1)) + 1j * r.normal(size=(100, 4, 1))
    z = solve_ivp_nonhom(sys, lam, f, r.normal(size=4))
    assert nonhom_residual(sys, z, f).max() <= 1e-10
    J = sys.J
    for k in (0, 50, 98):
        lhs = z.at(k)
        rhs = s_lambda(sys, k, lam) @ z.at(k + 1) - J @ sys.Psi[k] @ f[k]
        assert np.linalg.norm(lhs - rhs) <= 1e-10


def test_wronskian_zero_for_identity_system():
    sys = zero_weight(1, 10)
    z = transfer(sys, 2j, np.eye(2))
    u = transfer(sys, -2j, np.eye(2))
    assert wronskian_residual(z, u) == 0.0


def test_wronskian_real_lambda_free_sl():
    sys = free_sl(200)
    lam = 1.5
    Phi = fundamental_matrix(sys, lam)
    assert wronskian_residual(Phi.values, Phi.values) <= 1e-10


@given(seeds)
def test_wronskian_random_complex(seed):
    r = np.random.default_rng(seed)
    sys = random_system(2, 200, r, weight_scale=0.02, well_conditioned=True)
    lam = small_lambda(seed)
    z = transfer(sys, lam, r.normal(size=(4, 2)))
    u = transfer(sys, np.conj(lam), r.normal(size=(4, 2)))
    assert wronskian_residual(z, u) <= 1e-8


def test_lagrange_reduces_to_wronskian(rng):
    sys = random_system(1, 50, rng, weight_scale=0.05, well_conditioned=True)
    lam = 0.3 + 0.2j
    z = transfer(sys, lam, np.eye(2))
    u = transfer(sys, np.conj(lam), np.eye(2))
    zero = np.zeros((51, 2, 2))
    rep = lagrange_residual(sys, z, zero, u, zero)
    assert rep.max_abs <= 1e-12


def test_lagrange_symmetric_instance(rng):
    sys = random_system(2, 60, rng, weight_scale=0.05, well_conditioned=True)
    lam = -0.4 + 0.6j
    f = rng.normal(size=(61, 4, 1)) + 1j * rng.normal(size=(61, 4, 1))
    z = solve_ivp_nonhom(sys, lam, f, rng.normal(size=4), stop=61)
    rep = lagrange_residual(sys, z, f, z, f)
    assert rep.max_abs <= 1e-10
    # direct evaluation of the summed right side
    zs = z.values[:61]
    Psi = sys.Psi
    rhs = sum(
        (np.conj(lam) - lam) * zs[k].conj().T @ Psi[k] @ zs[k]
        + f[k].conj().T @ Psi[k] @ zs[k]
        - zs[k].conj().T @ Psi[k] @ f[k]
        for k in range(61)
    )
    J = sys.J
    lhs = z.at(61).conj().T @ J @ z.at(61) - z.at(0).conj().T @ J @ z.at(0)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


@given(seeds)
def test_lagrange_random_pairs(seed):
    r = np.random.default_rng(seed)
    sys = random_system(2, 100, r, weight_scale=0.02, well_conditioned=True)
    lam, nu = small_lambda(seed), small_lambda(seed + 1)
    f = r.normal(size=(100, 4, 2)) + 1j * r.normal(size=(100, 4, 2))
    g = r.normal(size=(100, 4, 2)) + 1j * r.normal(size=(100, 4, 2))
    z = solve_ivp_nonhom(sys, lam, f, r.normal(size=(4, 2)))
    u = solve_ivp_nonhom(sys, nu, g, r.normal(size=(4, 2)))
    rep = lagrange_residual(sys, z, f, u, g)
    assert rep.per_k.shape == (100,)
    assert rep.max_abs <= 1e-8


def test_trajectory_input_accepted():
    sys = free_sl(4)
    z = TrajectorySequence(np.ones((5, 2)), lam=0)
    assert apply_L(sys, z).stop == 3
