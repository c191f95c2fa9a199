import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import degenerate, free_sl, limit_circle_toy, zero_weight
from sympkit import (
    PreconditionError,
    SymplecticSystem,
    deficiency_consistency,
    k_map,
    k_map_range_check,
    multivalued_witness,
    TrajectorySequence,
    preimage_construction,
    semi_norm,
)
from sympkit.propagation import apply_L
from sympkit.random_systems import random_system
from sympkit.relations import project_to_kernel

seeds = st.integers(0, 2**32 - 1)


def dense_compact_preimage(sys, lam, g, scale=None):
    """Least-squares fit of L(z) - lam Psi z = Psi g with z_0 = 0 and z_k = 0 beyond the support of g.

    Built column by column from unit sequences; returns the residual relative
    to ``scale`` (default: the norm of the right-hand side).
    """
    d = 2 * sys.n
    Np = g.shape[0] - 1
    N = sys.horizon
    cols = []
    for k in range(1, Np + 1):
        for i in range(d):
            e = np.zeros((N + 1, d, 1), dtype=complex)
            e[k, i, 0] = 1.0
            Le = apply_L(sys, e).values[:, :, 0] - lam * (sys.Psi[:N] @ e[:N])[:, :, 0]
            cols.append(Le.ravel())
    A = np.array(cols).T
    rhs = np.zeros((N, d), dtype=complex)
    rhs[: Np + 1] = (sys.Psi[: Np + 1] @ g)[:, :, 0]
    rhs = rhs.ravel()
    scale = np.linalg.norm(rhs) if scale is None else scale
    x = np.linalg.lstsq(A, rhs, rcond=None)[0]
    return np.linalg.norm(A @ x - rhs) / scale


@pytest.mark.parametrize(
    "system, interval, rank",
    [(free_sl(20), (0, 5), 2), (free_sl(20), (0, 0), 1), (degenerate(20), (0, 5), 1), (zero_weight(1, 20), (0, 5), 0)],
)
def test_k_map_range_examples(system, interval, rank):
    out = k_map_range_check(system, 0.7j, interval)
    assert out["rank_K"] == out["rank_phi"] == rank
    assert out["consistent"]
    assert out["codim_kernel"] == rank
    assert out["kernel_dim"] == out["quotient_dim"] - rank


def test_quotient_dimension_counts_weight_ranks():
    a, b = 2, 9
    out = k_map_range_check(free_sl(20), 1j, (a, b))
    assert out["quotient_dim"] == b - a + 1


@given(seeds, st.integers(1, 2))
def test_k_map_range_random(seed, n):
    r = np.random.default_rng(seed)
    sys = random_system(n, 12, r, well_conditioned=True)
    lam = complex(r.normal(), r.normal())
    out = k_map_range_check(sys, lam, (0, int(r.integers(0, 12))))
    assert out["consistent"]


def test_k_map_apply_matches_matrix(rng):
    sys = random_system(2, 10, rng, well_conditioned=True)
    km = k_map(sys, 0.3 + 1j, (2, 7))
    g = rng.normal(size=(6, 4, 1)) + 1j * rng.normal(size=(6, 4, 1))
    np.testing.assert_allclose(km.apply(TrajectorySequence(g, start=2)), km.matrix @ g.reshape(-1, 1))


@given(seeds, st.integers(1, 2), st.integers(2, 10))
def test_preimage_of_projected_sequence(seed, n, Np):
    r = np.random.default_rng(seed)
    sys = random_system(n, 12, r, well_conditioned=True)
    lam = complex(r.uniform(-1, 1), r.uniform(-1, 1))
    g = r.normal(size=(Np + 1, 2 * n, 1)) + 1j * r.normal(size=(Np + 1, 2 * n, 1))
    g0 = project_to_kernel(k_map(sys, lam, (0, Np)), g)
    res = preimage_construction(sys, lam, g0)
    scale = max(1.0, np.abs(res.z.values).max())
    assert res.max_residual <= 1e-9 * scale
    assert res.z0_norm == 0.0
    assert not res.z.values[Np + 1 :].any()
    # independent route: a dense compact fit agrees on solvability
    scale = max(1.0, np.linalg.norm(sys.Psi[: Np + 1] @ g))
    assert dense_compact_preimage(sys, lam, g0.values, scale) <= 1e-8


def test_preimage_rejects_nonzero_K(rng):
    sys = free_sl(20)
    g = rng.normal(size=(6, 2, 1)) + 0j
    assert np.linalg.norm(k_map(sys, 1j, (0, 5)).apply(g)) > 1e-3
    with pytest.raises(PreconditionError):
        preimage_construction(sys, 1j, g)
    # the dense route also finds no compactly supported solution
    assert dense_compact_preimage(sys, 1j, g) > 1e-3


def test_preimage_residual_definition(rng):
    sys = free_sl(30)
    lam = 2 - 0.5j
    g = project_to_kernel(k_map(sys, lam, (0, 8)), rng.normal(size=(9, 2, 1)) + 0j)
    res = preimage_construction(sys, lam, g)
    z = res.z.values
    Lz = apply_L(sys, z).values
    gfull = np.zeros_like(z)
    gfull[:9] = g.values
    r = Lz - lam * sys.Psi[:30] @ z[:30] - sys.Psi[:30] @ gfull[:30]
    assert np.abs(r).max() <= 1e-10
    assert np.linalg.norm(sys.Psi[:9] @ g.values) > 0.1
    assert dense_compact_preimage(sys, lam, g.values) <= 1e-10


@pytest.mark.parametrize("system", [degenerate(20), free_sl(20), limit_circle_toy(30, K=10)])
def test_multivalued_witness(system):
    w = multivalued_witness(system)
    assert w is not None
    z, f = w.z.values, w.f.values
    N = system.horizon
    assert np.abs(system.Psi @ z).max() <= 1e-12
    assert np.linalg.norm(apply_L(system, z).values - system.Psi[:N] @ f[:N]) <= 1e-10
    assert w.f_norm > 1e-6
    assert np.isclose(w.f_norm, semi_norm(system, w.f, (0, N)))
    assert not z[w.support_end + 1 :].any()


def test_degenerate_witness_shape():
    w = multivalued_witness(degenerate(20))
    assert w.support_end == 1
    np.testing.assert_allclose(w.z.values[1, :, 0], [0, 1])
    np.testing.assert_allclose(w.f.values[0, 0, 0], -1)
    np.testing.assert_allclose(w.f.values[1, 0, 0], 1)


def test_no_witness_without_weight():
    assert multivalued_witness(zero_weight(1, 10)) is None


def test_no_witness_for_full_rank_weight(rng):
    sys = SymplecticSystem.constant(np.eye(2), np.eye(2), 10)
    assert multivalued_witness(sys) is None


SAMPLES = [1j, -1j, 2j, -0.5j, 1 + 1j, -1 - 2j]


def test_deficiency_free_sl():
    rep = deficiency_consistency(free_sl(200), SAMPLES, N_list=[100, 200])
    assert rep.passed
    assert rep.d_lambda == [1] * 6 and rep.d_tilde == rep.d_lambda
    assert rep.rank_phi == 2 and rep.interval == (0, 1)


def test_deficiency_degenerate():
    rep = deficiency_consistency(degenerate(100), SAMPLES, N_list=[50, 100])
    assert rep.passed
    assert rep.d_lambda == [1] * 6 and rep.d_tilde == [0] * 6 and rep.rank_phi == 1


def test_deficiency_limit_circle_and_zero_weight():
    rep = deficiency_consistency(limit_circle_toy(60, K=10), SAMPLES[:4], N_list=[30, 60])
    assert rep.passed and rep.d_lambda == [2] * 4 and rep.d_tilde == [2] * 4
    rep = deficiency_consistency(zero_weight(1, 30), SAMPLES[:2], N_list=[10, 30])
    assert rep.passed and rep.d_lambda == [2, 2] and rep.d_tilde == [0, 0]


def test_deficiency_threads_match():
    sys = free_sl(100)
    a = deficiency_consistency(sys, SAMPLES, N_list=[50, 100])
    b = deficiency_consistency(sys, SAMPLES, N_list=[50, 100], max_workers=4)
    assert a.d_lambda == b.d_lambda and a.checks == b.checks
    assert [c.ratios.tolist() for c in a.counts] == [c.ratios.tolist() for c in b.counts]


def test_deficiency_explicit_interval():
    rep = deficiency_consistency(degenerate(50), [1j, -1j], interval=(0, 5), N_list=[25, 50])
    assert rep.passed
    with pytest.raises(ValueError):
        deficiency_consistency(degenerate(50), [])


def test_free_sl_witness_shape():
    w = multivalued_witness(free_sl(20))
    z, f = w.z.values[:, :, 0], w.f.values[:, :, 0]
    np.testing.assert_array_equal(z[0], [0, 1])
    assert not z[1:].any()
    np.testing.assert_allclose(f[0], [1, 0])
    # only the weighted component of f is determined
    assert not f[1:, 0].any()
