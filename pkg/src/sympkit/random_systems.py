"""Random generators for valid coefficient sequences, used by tests and demos."""

import numpy as np

from .system_model import SymplecticSystem, ToleranceConfig


def _hermitian(n, rng, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (a + a.conj().T)


def _unitary(n, rng):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_symplectic(n, rng, scale=0.5, factors=3):
    """Product of shear and dilation generators of the symplectic group."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    out = np.eye(2 * n, dtype=complex)
    for _ in range(factors):
        H = _hermitian(n, rng, scale)
        upper = np.block([[eye, H], [zero, eye]])
        H = _hermitian(n, rng, scale)
        lower = np.block([[eye, zero], [H, eye]])
        A = eye + scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)
        dil = np.block([[A, zero], [zero, np.linalg.inv(A).conj().T]])
        out = out @ upper @ lower @ dil
    return out


def random_unitary_symplectic(n, rng):
    """A matrix that is both unitary and symplectic.

    Such matrices are exactly ``[[A, B], [-B, A]]`` with ``A + iB`` unitary.
    """
    U = _unitary(n, rng)
    A, B = U.real, U.imag
    base = np.block([[A, B], [-B, A]]).astype(complex)
    # a phase rotation diag(W, W) with W unitary keeps both properties only
    # when W is real orthogonal; use a real orthogonal factor
    Q = np.linalg.qr(rng.standard_normal((n, n)))[0]
    rot = np.block([[Q, np.zeros((n, n))], [np.zeros((n, n)), Q]])
    return rot @ base


def random_weight(n, rng, rank=None, scale=1.0, frame=None):
    """Hermitian PSD ``Psi`` with ``Psi J Psi = 0``.

    The range of ``Psi`` is spanned by the first ``rank`` columns of a
    symplectic ``frame``; such columns span an isotropic subspace, which
    forces ``Psi J Psi = 0``.
    """
    if rank is None:
        rank = int(rng.integers(0, n + 1))
    if frame is None:
        frame = random_unitary_symplectic(n, rng)
    P = frame[:, :rank]
    L = rng.standard_normal((rank, rank)) + 1j * rng.standard_normal((rank, rank))
    core = scale * (L @ L.conj().T) / max(rank, 1)
    return P @ core @ P.conj().T


def random_system(n, horizon, rng, weight_scale=1.0, well_conditioned=False, tolerances=None):
    """A random system satisfying all structural hypotheses.

    With ``well_conditioned`` the ``S_k`` are unitary symplectic and the
    weights are small, so that solutions grow slowly and long-range
    residual checks remain meaningful.
    """
    S = np.empty((horizon + 1, 2 * n, 2 * n), dtype=complex)
    Psi = np.empty_like(S)
    for k in range(horizon + 1):
        if well_conditioned:
            S[k] = random_unitary_symplectic(n, rng)
        else:
            S[k] = random_symplectic(n, rng)
        Psi[k] = random_weight(n, rng, scale=weight_scale)
    return SymplecticSystem.from_arrays(S, Psi, tolerances or ToleranceConfig())


def random_definite_weight(n, rng, scale=1.0):
    """Weight ``diag(W, 0)`` with ``W`` Hermitian positive definite."""
    L = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    W = scale * (L @ L.conj().T / n + np.eye(n))
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, :n] = W
    return out
