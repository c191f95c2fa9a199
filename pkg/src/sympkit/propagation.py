"""Solution propagation, fundamental matrices and Wronskian/Lagrange residuals.

Solutions of ``z_k = S_k(lam) z_{k+1}`` live on ``[0, N + 1]``: the last
coefficient ``S_N(lam)`` links ``z_N`` and ``z_{N+1}``.  Decreasing-index
steps multiply by ``S_k(lam)``; increasing-index steps use the closed-form
inverse ``-J S_k(conj(lam))^* J``.  Growing solutions are not rescaled.
"""

from dataclasses import dataclass

import numpy as np

from ._linalg import adjoint, fro
from .errors import DimensionError, HorizonError, PreconditionError, PropagationError
from .system_model import (
    TrajectorySequence,
    as_trajectory,
    make_J,
    s_lambda_all,
    s_lambda_inverse_all,
)


def _check_solution_index(sys, k, name):
    if not 0 <= k <= sys.horizon + 1:
        raise HorizonError(f"{name}={k} outside solution range [0, {sys.horizon + 1}]")


def _as_block(init, dim):
    a = np.asarray(init, dtype=complex)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] != dim:
        raise DimensionError(f"initial value must have {dim} rows, got shape {a.shape}")
    return a


def transfer(sys, lam, init, k0=0, target=None):
    """Solution of the homogeneous system taking value ``init`` at ``k0``.

    Parameters
    ----------
    sys : SymplecticSystem
    lam : complex
    init : (2n,) or (2n, m) array_like
    k0 : int
        Anchor index in ``[0, N + 1]``.
    target : int, optional
        Other end of the returned range.  By default the solution is
        returned on all of ``[0, N]`` (and on ``[0, N + 1]`` if ``k0 = N + 1``).

    Returns
    -------
    TrajectorySequence
        Values on ``[min(k0, target), max(k0, target)]``; the full range
        ``[0, max(N, k0)]`` when ``target`` is omitted.
    """
    lam = complex(lam)
    init = _as_block(init, 2 * sys.n)
    _check_solution_index(sys, k0, "k0")
    if target is None:
        lo, hi = 0, max(sys.horizon, k0)
    else:
        _check_solution_index(sys, target, "target")
        lo, hi = min(k0, target), max(k0, target)
    out = np.empty((hi - lo + 1,) + init.shape, dtype=complex)
    out[k0 - lo] = init
    fwd = s_lambda_all(sys, lam)
    inv = s_lambda_inverse_all(sys, lam)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(k0 - 1, lo - 1, -1):
            out[k - lo] = fwd[k] @ out[k + 1 - lo]
            if not np.all(np.isfinite(out[k - lo])):
                raise PropagationError(f"non-finite solution value at k={k}", k)
        for k in range(k0 + 1, hi + 1):
            out[k - lo] = inv[k - 1] @ out[k - 1 - lo]
            if not np.all(np.isfinite(out[k - lo])):
                raise PropagationError(f"non-finite solution value at k={k}", k)
    return TrajectorySequence(out, lam=lam, start=lo)


@dataclass(frozen=True)
class FundamentalMatrix:
    """Fundamental matrix ``Phi_k(lam)`` with ``Phi_{k0} = C``."""

    values: TrajectorySequence
    lam: complex
    anchor_k0: int
    anchor_value: np.ndarray

    def at(self, k):
        return self.values.at(k)

    @property
    def start(self):
        return self.values.start

    @property
    def stop(self):
        return self.values.stop

    @property
    def array(self):
        return self.values.values

    @property
    def Z(self):
        """First ``n`` columns at every index, shape ``(K, 2n, n)``."""
        n = self.array.shape[1] // 2
        return self.array[:, :, :n]

    @property
    def Z_tilde(self):
        """Last ``n`` columns at every index, shape ``(K, 2n, n)``."""
        n = self.array.shape[1] // 2
        return self.array[:, :, n:]


def is_symplectic(C, J, tol):
    C = np.asarray(C, dtype=complex)
    scale = max(1.0, fro(C) ** 2)
    return fro(C.conj().T @ J @ C - J) <= tol * scale


def fundamental_matrix(sys, lam, k0=0, C=None, stop=None):
    """Fundamental matrix anchored at ``k0`` with symplectic value ``C``.

    ``C`` defaults to the identity.  Values are returned on ``[0, stop]``
    where ``stop`` defaults to ``max(N, k0)``.
    """
    dim = 2 * sys.n
    C = np.eye(dim, dtype=complex) if C is None else np.asarray(C, dtype=complex)
    if C.shape != (dim, dim):
        raise DimensionError(f"anchor value must be {dim}x{dim}, got {C.shape}")
    if not is_symplectic(C, sys.J, sys.tolerances.structural_tol):
        raise PreconditionError("anchor value C is not symplectic (C*JC != J)")
    stop = max(sys.horizon, k0) if stop is None else stop
    traj = transfer(sys, lam, C, k0=k0, target=0)
    if stop > k0:
        tail = transfer(sys, lam, C, k0=k0, target=stop)
        vals = np.concatenate([traj.values, tail.values[1:]])
    else:
        vals = traj.values[: stop + 1]
    values = TrajectorySequence(vals, lam=lam, start=0)
    return FundamentalMatrix(values, complex(lam), int(k0), C)


def fundamental_identity_residuals(sys, lam, k0=0, C=None, stop=None):
    """Per-index residuals of the three fundamental-matrix identities.

    With ``P = Phi(lam)`` and ``Q = Phi(conj(lam))`` both anchored at
    ``C``, returns a dict of arrays for ``||P*JQ - J||``,
    ``||P^{-1} + J Q* J||`` (checked as ``||P (-J Q* J) - I||``) and
    ``||P J Q* - J||``.
    """
    P = fundamental_matrix(sys, lam, k0, C, stop).array
    Q = fundamental_matrix(sys, np.conj(lam), k0, C, stop).array
    J = sys.J
    eye = np.eye(J.shape[0])
    norm = lambda a: np.linalg.norm(a, axis=(1, 2))  # noqa: E731
    return {
        "conjugate_symplectic": norm(adjoint(P) @ J @ Q - J),
        "inverse": norm(P @ (-J @ adjoint(Q) @ J) - eye),
        "transposed": norm(P @ J @ adjoint(Q) - J),
    }


def apply_L(sys, z):
    """``L(z)_k = J (z_k - S_k z_{k+1})`` for every ``k`` where both values exist."""
    z = as_trajectory(z)
    a = z.start
    b = min(z.stop - 1, sys.horizon)
    if b < a:
        raise DimensionError("apply_L needs at least two consecutive values")
    zk = z.window(a, b)
    zk1 = z.window(a + 1, b + 1)
    out = sys.J @ (zk - sys.S[a : b + 1] @ zk1)
    return TrajectorySequence(out, lam=z.lam, start=a)


def solve_ivp_nonhom(sys, lam, f, z0, stop=None):
    """Solve ``z_k = S_k(lam) z_{k+1} - J Psi_k f_k`` forward from ``z_0``.

    The forward step is
    ``z_{k+1} = S_k^{-1} [(I + lam J Psi_k) z_k + J Psi_k f_k]``
    with ``S_k^{-1} = -J S_k^* J``.  ``f`` must cover ``[0, stop - 1]``;
    ``stop`` defaults to ``min(N, f.stop + 1)``.
    """
    lam = complex(lam)
    f = as_trajectory(f, lam=lam)
    if f.start != 0:
        raise DimensionError("forcing term must start at index 0")
    z0 = _as_block(z0, 2 * sys.n)
    if f.m != z0.shape[1]:
        raise DimensionError("forcing term and initial value have different widths")
    if stop is None:
        stop = min(sys.horizon, f.stop + 1)
    if not 1 <= stop <= sys.horizon + 1 or stop - 1 > f.stop:
        raise HorizonError(f"stop={stop} incompatible with forcing range [0, {f.stop}]")
    J = sys.J
    eye = np.eye(J.shape[0])
    S_inv = -J @ adjoint(sys.S) @ J
    JPsi = J @ sys.Psi
    out = np.empty((stop + 1,) + z0.shape, dtype=complex)
    out[0] = z0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(stop):
            rhs = (eye + lam * JPsi[k]) @ out[k] + JPsi[k] @ f.values[k]
            out[k + 1] = S_inv[k] @ rhs
            if not np.all(np.isfinite(out[k + 1])):
                raise PropagationError(f"non-finite solution value at k={k + 1}", k + 1)
    return TrajectorySequence(out, lam=lam, start=0)


def nonhom_residual(sys, z, f, lam=None):
    """Per-index ``||J(z_k - S_k z_{k+1}) - lam Psi_k z_k - Psi_k f_k||``."""
    z = as_trajectory(z)
    lam = z.lam if lam is None else complex(lam)
    Lz = apply_L(sys, z)
    a, b = Lz.start, Lz.stop
    f = as_trajectory(f)
    fk = f.window(a, b)
    Psi = sys.Psi[a : b + 1]
    r = Lz.values - lam * Psi @ z.window(a, b) - Psi @ fk
    return np.linalg.norm(r, axis=(1, 2))


def wronskian_residual(z, u):
    """``max_k ||z_k^* J u_k - z_0^* J u_0||`` over the common index range."""
    z = as_trajectory(z)
    u = as_trajectory(u)
    if z.dim != u.dim:
        raise DimensionError("trajectories have different state dimensions")
    a, b = max(z.start, u.start), min(z.stop, u.stop)
    if a > b:
        raise HorizonError("trajectories do not overlap")
    J = make_J(z.dim // 2)
    W = adjoint(z.window(a, b)) @ J @ u.window(a, b)
    return float(np.max(np.linalg.norm(W - W[0], axis=(1, 2))))


@dataclass(frozen=True)
class LagrangeReport:
    """Residuals of the local and summed Lagrange identities.

    ``per_k[j]`` is the residual of the one-step identity at index
    ``start + j``; ``cumulative[j]`` that of the identity summed over
    ``[start, start + j]``.
    """

    per_k: np.ndarray
    cumulative: np.ndarray
    max_abs: float
    start: int = 0


def lagrange_residual(sys, z, f, u, g):
    """Check the extended Lagrange identity for ``z`` at ``lam`` and ``u`` at ``nu``.

    ``z`` solves the system with forcing ``f`` at ``z.lam`` and ``u`` the
    one with forcing ``g`` at ``u.lam``.  The one-step identity is

    ``Delta[z_k^* J u_k] = (conj(lam) - nu) z_k^* Psi_k u_k
    + f_k^* Psi_k u_k - z_k^* Psi_k g_k``.
    """
    z = as_trajectory(z)
    u = as_trajectory(u)
    f = as_trajectory(f)
    g = as_trajectory(g)
    lam, nu = z.lam, u.lam
    a = max(z.start, u.start, f.start, g.start)
    b = min(z.stop - 1, u.stop - 1, f.stop, g.stop, sys.horizon)
    if b < a:
        raise HorizonError("no common index range for the Lagrange identity")
    J = sys.J
    Psi = sys.Psi[a : b + 1]
    zk, uk = z.window(a, b + 1), u.window(a, b + 1)
    zs = adjoint(zk)
    W = zs @ J @ uk
    lhs = W[1:] - W[:-1]
    zs = zs[:-1]
    uk = uk[:-1]
    rhs = (
        (np.conj(lam) - nu) * zs @ Psi @ uk
        + adjoint(f.window(a, b)) @ Psi @ uk
        - zs @ Psi @ g.window(a, b)
    )
    diff = lhs - rhs
    per_k = np.linalg.norm(diff, axis=(1, 2))
    # summed form: boundary term W_{k+1} - W_a against cumulative sums of rhs
    cum = np.linalg.norm((W[1:] - W[0]) - np.cumsum(rhs, axis=0), axis=(1, 2))
    return LagrangeReport(per_k, cum, float(max(per_k.max(), cum.max())), a)
