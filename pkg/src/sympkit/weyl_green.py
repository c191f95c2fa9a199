"""Weyl solutions, Weyl disks, half-line M approximations and the Green function.

Notation: ``alpha`` is an ``n x 2n`` matrix with ``alpha alpha^* = I`` and
``alpha J alpha^* = 0``.  The natural fundamental matrix starts from
``Phi_0 = (alpha^*, -J alpha^*)``; its column halves are ``Z`` and
``Z_tilde``.  For an ``n x n`` matrix ``M`` the Weyl solution is
``X_k = Z_k + Z_tilde_k M``, so that ``alpha X_0 = I`` and
``M = alpha J X_0``.  With ``delta = sign(Im lam)`` the disk indicator is
``E_k(M) = i delta X_k^* J X_k`` and ``M`` lies in the disk ``D_k`` when
``E_k(M) <= 0``.  One step of the recursion gives
``E_{k+1} - E_k = 2 |Im lam| X_k^* Psi_k X_k``, so the disks shrink with
``k``.

Solutions that decay with increasing ``k`` cannot be computed stably by
forward propagation.  Boundary-condition solutions are therefore built by
propagating from the boundary index towards ``0`` with a QR
re-orthonormalisation at every step.
"""

from dataclasses import dataclass, field

import numpy as np

from ._linalg import adjoint, fro, hermitian_part
from .errors import (
    BoundaryConditionError,
    DimensionError,
    DomainError,
    HorizonError,
    PreconditionError,
)
from .propagation import fundamental_matrix, is_symplectic
from .system_model import (
    TrajectorySequence,
    as_trajectory,
    make_J,
    s_lambda_all,
    s_lambda_inverse_all,
    semi_norm,
)


@dataclass(frozen=True)
class AlphaMatrix:
    """An ``n x 2n`` matrix with ``alpha alpha^* = I`` and ``alpha J alpha^* = 0``."""

    value: np.ndarray
    tol: float = 1e-10

    def __post_init__(self):
        a = np.array(self.value, dtype=complex)
        if a.ndim != 2 or a.shape[1] != 2 * a.shape[0]:
            raise DimensionError(f"alpha must be n x 2n, got shape {a.shape}")
        n = a.shape[0]
        J = make_J(n)
        if fro(a @ a.conj().T - np.eye(n)) > self.tol:
            raise PreconditionError("alpha alpha^* != I")
        if fro(a @ J @ a.conj().T) > self.tol:
            raise PreconditionError("alpha J alpha^* != 0")
        a.flags.writeable = False
        object.__setattr__(self, "value", a)

    @property
    def n(self):
        return self.value.shape[0]

    @classmethod
    def default(cls, n):
        """``(I, 0)``."""
        return cls(np.hstack([np.eye(n), np.zeros((n, n))]))


def _alpha(alpha, n):
    if alpha is None:
        return AlphaMatrix.default(n)
    if not isinstance(alpha, AlphaMatrix):
        alpha = AlphaMatrix(alpha)
    if alpha.n != n:
        raise DimensionError(f"alpha has n={alpha.n}, system has n={n}")
    return alpha


def delta(lam):
    """``sign(Im lam)``; real ``lam`` raises :class:`DomainError`."""
    im = complex(lam).imag
    if im == 0:
        raise DomainError("disk quantities are defined only for nonreal lambda")
    return 1.0 if im > 0 else -1.0


def initial_frame(alpha):
    """``(alpha^*, -J alpha^*)``, a unitary symplectic matrix."""
    a = alpha.value
    return np.hstack([a.conj().T, -make_J(alpha.n) @ a.conj().T])


def natural_fundamental(sys, lam, alpha=None, stop=None):
    """Fundamental matrix with ``Phi_0 = (alpha^*, -J alpha^*)``.

    The ``Z`` and ``Z_tilde`` properties of the result give the two column
    halves.
    """
    alpha = _alpha(alpha, sys.n)
    C = initial_frame(alpha)
    if not is_symplectic(C, sys.J, sys.tolerances.structural_tol):
        raise PreconditionError("initial frame is not symplectic")
    return fundamental_matrix(sys, lam, k0=0, C=C, stop=stop)


def weyl_solution(sys, lam, alpha, M, stop=None):
    """``X_k = Z_k + Z_tilde_k M`` by forward propagation from index 0.

    Forward propagation is accurate only while ``X`` does not decay much
    relative to the dominant solutions; see :func:`approx_half_line_M` for
    the stable boundary-value construction.
    """
    alpha = _alpha(alpha, sys.n)
    M = np.asarray(M, dtype=complex)
    if M.shape != (sys.n, sys.n):
        raise DimensionError(f"M must be {sys.n}x{sys.n}, got {M.shape}")
    Phi = natural_fundamental(sys, lam, alpha, stop)
    return TrajectorySequence(Phi.Z + Phi.Z_tilde @ M, lam=lam, start=0)


def _disk_values(X, lam):
    J = make_J(X.shape[1] // 2)
    E = 1j * delta(lam) * (adjoint(X) @ J @ X)
    return 0.5 * (E + adjoint(E))


def disk_indicator(sys, k, lam, M, alpha=None):
    """``E_k(M) = i delta X_k^* J X_k`` (Hermitian ``n x n``).

    ``M`` belongs to the Weyl disk ``D_k(lam)`` when the largest
    eigenvalue of the result is at most ``psd_tol``.
    """
    delta(lam)
    if not 0 <= k <= sys.horizon + 1:
        raise HorizonError(f"k={k} outside [0, {sys.horizon + 1}]")
    X = weyl_solution(sys, lam, alpha, M, stop=max(k, 1)).at(k)
    return _disk_values(X[None], lam)[0]


def in_disk(E, tol):
    return bool(np.linalg.eigvalsh(E)[-1] <= tol * max(1.0, fro(E)))


@dataclass(frozen=True)
class WeylState:
    """A Weyl solution together with its disk indicators ``E_k(M)``."""

    alpha: AlphaMatrix
    lam: complex
    M: np.ndarray
    X: TrajectorySequence
    Ek_trace: np.ndarray
    delta: float

    def max_eigenvalues(self):
        return np.linalg.eigvalsh(self.Ek_trace)[:, -1]


def weyl_state(sys, lam, alpha, M, X=None):
    """Assemble a :class:`WeylState`; ``X`` defaults to forward propagation."""
    alpha = _alpha(alpha, sys.n)
    d = delta(lam)
    if X is None:
        X = weyl_solution(sys, lam, alpha, M)
    X = as_trajectory(X, lam=lam)
    return WeylState(alpha, complex(lam), np.asarray(M, dtype=complex), X, _disk_values(X.values, lam), d)


def _backward_boundary_solution(sys, lam, N, beta, alpha):
    """Solution with ``beta X_N = 0`` and ``alpha X_0 = I`` on ``[0, N]``.

    Propagates a basis of ``ker beta`` from ``N`` down to ``0`` with QR
    re-orthonormalisation, then rescales forward using the stored
    triangular factors.  Returns ``(X, M, smallest singular value of
    alpha Q_0 relative to 1)``.
    """
    Smat = s_lambda_all(sys, lam)
    Q = np.empty((N + 1, 2 * sys.n, sys.n), dtype=complex)
    R = np.empty((N, sys.n, sys.n), dtype=complex)
    Q[N] = np.linalg.qr(make_J(sys.n) @ beta.value.conj().T)[0]
    for j in range(N - 1, -1, -1):
        Q[j], R[j] = np.linalg.qr(Smat[j] @ Q[j + 1])
    aQ0 = alpha.value @ Q[0]
    smin = np.linalg.svd(aQ0, compute_uv=False)[-1]
    if smin <= sys.tolerances.rank_tol:
        return None, None, smin
    A = np.linalg.inv(aQ0)
    X = np.empty_like(Q)
    X[0] = Q[0] @ A
    for j in range(1, N + 1):
        A = np.linalg.solve(R[j - 1], A)
        X[j] = Q[j] @ A
    M = alpha.value @ make_J(sys.n) @ X[0]
    return X, M, smin


def boundary_M_explicit(sys, lam, N, beta=None, alpha=None):
    """``M_N = -(beta Z_tilde_N)^{-1} beta Z_N`` from the natural fundamental matrix.

    Direct formula; accurate only for moderate ``N``.
    """
    alpha = _alpha(alpha, sys.n)
    beta = _alpha(beta, sys.n)
    Phi = natural_fundamental(sys, lam, alpha, stop=N)
    b = beta.value
    return -np.linalg.solve(b @ Phi.Z_tilde[N], b @ Phi.Z[N])


@dataclass(frozen=True)
class HalfLineApproximation:
    """Result of :func:`approx_half_line_M`.

    ``trace`` holds one record per requested boundary index with keys
    ``N``, ``ok``, ``M``, ``drift`` (distance to the previous accepted
    ``M``), ``E_N_max`` (largest eigenvalue of ``E_N(M_N)``, zero in exact
    arithmetic), ``E_0`` eigenvalues and ``alpha_conditioning``.
    """

    lam: complex
    M_plus: np.ndarray
    X_plus: TrajectorySequence
    trace: tuple
    alpha: AlphaMatrix
    beta: AlphaMatrix

    @property
    def N_final(self):
        return [t for t in self.trace if t["ok"]][-1]["N"]

    @property
    def drifts(self):
        return [t["drift"] for t in self.trace if t["ok"] and t["drift"] is not None]

    @property
    def last_drift(self):
        d = self.drifts
        return d[-1] if d else None

    def state(self):
        """The :class:`WeylState` of ``M_plus`` along ``X_plus``."""
        X = self.X_plus
        return WeylState(self.alpha, self.lam, self.M_plus, X, _disk_values(X.values, self.lam), delta(self.lam))


def approx_half_line_M(sys, lam, N_list=None, beta=None, alpha=None):
    """Approximate the half-line Weyl matrix by boundary conditions ``beta X_N = 0``.

    Parameters
    ----------
    sys : SymplecticSystem
    lam : complex
        Must be nonreal.
    N_list : sequence of int, optional
        Increasing boundary indices in ``[1, N + 1]``.  Defaults to
        ``(ceil((N + 1) / 2), N + 1)``.
    beta, alpha : AlphaMatrix or array_like, optional
        Both default to ``(I, 0)``.

    Returns
    -------
    HalfLineApproximation
        ``M_plus`` is the estimate at the last usable ``N``; ``X_plus`` the
        corresponding Weyl solution on ``[0, N]`` (extended by forward
        propagation when ``N`` is smaller than the horizon).

    Raises
    ------
    BoundaryConditionError
        If ``alpha X_0`` is singular for every requested ``N``.
    """
    delta(lam)
    alpha = _alpha(alpha, sys.n)
    beta = _alpha(beta, sys.n)
    lam = complex(lam)
    if N_list is None:
        N_list = (-(-(sys.horizon + 1) // 2), sys.horizon + 1)
    N_list = [int(N) for N in N_list]
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be strictly increasing")
    if N_list[0] < 1 or N_list[-1] > sys.horizon + 1:
        raise HorizonError(f"boundary indices must lie in [1, {sys.horizon + 1}]")
    trace = []
    best = None
    prev_M = None
    for N in N_list:
        X, M, smin = _backward_boundary_solution(sys, lam, N, beta, alpha)
        if X is None:
            trace.append({"N": N, "ok": False, "alpha_conditioning": float(smin),
                          "reason": "alpha X_0 singular for this boundary index"})
            continue
        E = _disk_values(X[[0, N]], lam)
        drift = None if prev_M is None else fro(M - prev_M)
        trace.append({
            "N": N,
            "ok": True,
            "M": M,
            "drift": drift,
            "E_N_max": float(np.linalg.eigvalsh(E[1])[-1]),
            "E_0": np.linalg.eigvalsh(E[0]),
            "alpha_conditioning": float(smin),
        })
        prev_M = M
        best = (N, X, M)
    if best is None:
        raise BoundaryConditionError("boundary condition singular for every N in N_list", N_list[-1])
    N, X, M = best
    if N < sys.horizon:
        # continue past the boundary index by forward steps
        inv = s_lambda_inverse_all(sys, lam)
        ext = [X[-1]]
        for k in range(N, sys.horizon):
            ext.append(inv[k] @ ext[-1])
        X = np.concatenate([X, np.array(ext[1:])])
    return HalfLineApproximation(lam, M, TrajectorySequence(X, lam=lam), tuple(trace), alpha, beta)


def nevanlinna_eigenvalues(M, lam):
    """Eigenvalues of ``Im(M) / Im(lam)``; nonnegative for disk points."""
    M = np.asarray(M)
    return np.linalg.eigvalsh((M - M.conj().T) / (2j * complex(lam).imag))


@dataclass(frozen=True)
class GreenTable:
    """Ingredients of the Green function at ``lam`` and ``conj(lam)``.

    Entries are formed on demand:
    ``G_{k,l} = Z_tilde_k(lam) X_l(conj lam)^*`` for ``k <= l`` and
    ``X_k(lam) Z_tilde_l(conj lam)^*`` for ``k > l``.
    """

    sys: object = field(repr=False)
    lam: complex
    alpha: AlphaMatrix
    M_plus: np.ndarray
    M_plus_conj: np.ndarray
    Z_tilde: np.ndarray = field(repr=False)
    Z_tilde_conj: np.ndarray = field(repr=False)
    X_plus: np.ndarray = field(repr=False)
    X_plus_conj: np.ndarray = field(repr=False)
    drift: float = None

    @property
    def stop(self):
        """Last index covered by the table."""
        return self.X_plus.shape[0] - 1

    def _check(self, k):
        if not 0 <= k <= self.stop:
            raise HorizonError(f"index {k} outside Green table range [0, {self.stop}]")

    def entry(self, k, l):
        self._check(k)
        self._check(l)
        if k <= l:
            return self.Z_tilde[k] @ self.X_plus_conj[l].conj().T
        return self.X_plus[k] @ self.Z_tilde_conj[l].conj().T

    def conjugate(self):
        """The table at ``conj(lam)``."""
        return GreenTable(
            self.sys, np.conj(self.lam), self.alpha, self.M_plus_conj, self.M_plus,
            self.Z_tilde_conj, self.Z_tilde, self.X_plus_conj, self.X_plus, self.drift,
        )

    def block(self, ks, ls):
        """Entries for a grid, shape ``(len(ks), len(ls), 2n, 2n)``."""
        return np.array([[self.entry(k, l) for l in ls] for k in ks])


def build_green_table(sys, lam, alpha=None, N_list=None, beta=None):
    """Green table with ``M`` approximated independently at ``lam`` and ``conj(lam)``.

    The adjoint relation between the two ``M`` estimates is not imposed; the
    residual of the crossed Wronskian identity measures it.
    """
    alpha = _alpha(alpha, sys.n)
    lam = complex(lam)
    up = approx_half_line_M(sys, lam, N_list, beta, alpha)
    dn = approx_half_line_M(sys, np.conj(lam), N_list, beta, alpha)
    stop = min(up.X_plus.stop, dn.X_plus.stop, sys.horizon)
    Pu = natural_fundamental(sys, lam, alpha, stop=stop)
    Pd = natural_fundamental(sys, np.conj(lam), alpha, stop=stop)
    drifts = [d for d in (up.last_drift, dn.last_drift) if d is not None]
    return GreenTable(
        sys, lam, alpha, up.M_plus, dn.M_plus,
        Pu.Z_tilde[: stop + 1], Pd.Z_tilde[: stop + 1],
        up.X_plus.values[: stop + 1], dn.X_plus.values[: stop + 1],
        max(drifts) if drifts else None,
    )


def green_table_from_M(sys, lam, M, M_conj=None, alpha=None, stop=None):
    """Green table from given ``M`` at ``lam`` and ``M_conj`` at ``conj(lam)``.

    ``M_conj`` defaults to ``M^*``.  Weyl solutions are propagated forward,
    so this is intended for short horizons or non-decaying solutions.
    """
    alpha = _alpha(alpha, sys.n)
    lam = complex(lam)
    M = np.asarray(M, dtype=complex)
    M_conj = M.conj().T if M_conj is None else np.asarray(M_conj, dtype=complex)
    stop = sys.horizon if stop is None else stop
    Pu = natural_fundamental(sys, lam, alpha, stop=stop)
    Pd = natural_fundamental(sys, np.conj(lam), alpha, stop=stop)
    return GreenTable(
        sys, lam, alpha, M, M_conj, Pu.Z_tilde, Pd.Z_tilde,
        Pu.Z + Pu.Z_tilde @ M, Pd.Z + Pd.Z_tilde @ M_conj, None,
    )


def green(table, k, l):
    """Green function entry ``G_{k,l}(lam)``."""
    return table.entry(k, l)


def crossed_wronskian_residual(table, k):
    """``||X_k(lam) Z_tilde_k(conj lam)^* - Z_tilde_k(lam) X_k(conj lam)^* - J||``.

    Zero when the two ``M`` matrices are adjoint to each other; in general
    the defect equals ``Z_tilde_k (M - M_conj^*) Z_tilde_k(conj lam)^*``.
    """
    table._check(k)
    J = make_J(table.alpha.n)
    A = table.X_plus[k] @ table.Z_tilde_conj[k].conj().T
    B = table.Z_tilde[k] @ table.X_plus_conj[k].conj().T
    return fro(A - B - J)


def green_property_residuals(table, ks, ls):
    """Maximal residuals of the Green-function properties over a grid.

    Returns a dict with

    ``adjoint_offdiag``
        ``||G_{k,l}(lam)^* - G_{l,k}(conj lam)||`` over ``k != l``.
    ``adjoint_diag``
        ``||G_{k,k}(lam)^* - G_{k,k}(conj lam) - J||``.
    ``recursion``
        ``||G_{k,l} - S_k(lam) G_{k+1,l}||`` over ``k != l``, measured
        relative to ``max(1, ||G_{k,l}||)``.
    ``jump``
        ``||G_{k,k} - S_k(lam) G_{k+1,k} + J||``.
    """
    conj = table.conjugate()
    J = make_J(table.alpha.n)
    S = s_lambda_all(table.sys, table.lam)
    ks = list(ks)
    ls = list(ls)
    off = diag = rec = jump = 0.0
    for k in ks:
        for l in ls:
            G = table.entry(k, l)
            if k != l:
                off = max(off, fro(G.conj().T - conj.entry(l, k)))
                if k + 1 <= table.stop:
                    r = fro(G - S[k] @ table.entry(k + 1, l)) / max(1.0, fro(G))
                    rec = max(rec, r)
            else:
                diag = max(diag, fro(G.conj().T - conj.entry(k, k) - J))
                if k + 1 <= table.stop:
                    jump = max(jump, fro(G - S[k] @ table.entry(k + 1, k) + J))
    return {"adjoint_offdiag": off, "adjoint_diag": diag, "recursion": rec, "jump": jump}


@dataclass(frozen=True)
class NonhomSolution:
    """A nonhomogeneous solution with its verification data.

    ``recursion_residual`` is the per-index residual of
    ``z_k - S_k(lam) z_{k+1} + J Psi_k f_k``; ``initial_residual`` is
    ``||alpha z_0 - v||``; ``bound`` is the certified upper bound on
    ``norm`` and ``margin = bound - norm``.
    """

    z: TrajectorySequence
    recursion_residual: np.ndarray
    initial_residual: float
    norm: float
    f_norm: float
    bound: float

    @property
    def margin(self):
        return self.bound - self.norm

    @property
    def bound_holds(self):
        return self.norm <= self.bound * (1 + 1e-12) + 1e-300

    @property
    def max_recursion_residual(self):
        return float(self.recursion_residual.max()) if self.recursion_residual.size else 0.0


def _prepare_forcing(table, f):
    K = table.stop
    f = as_trajectory(f, lam=table.lam)
    if f.start != 0 or f.stop < K:
        raise HorizonError(f"forcing term must cover [0, {K}], got [{f.start}, {f.stop}]")
    return f.window(0, K)


def _recursion_residual(table, z, f):
    S = s_lambda_all(table.sys, table.lam)
    J = make_J(table.alpha.n)
    K = table.stop
    Psi = table.sys.Psi[:K]
    r = z[:-1] - S[:K] @ z[1:] + J @ Psi @ f[:K]
    scale = np.maximum(1.0, np.linalg.norm(z[:-1], axis=(1, 2)))
    return np.linalg.norm(r, axis=(1, 2)) / scale


def _zhat_values(table, fk):
    K = table.stop
    Psi = table.sys.Psi[: K + 1]
    Pf = Psi @ fk
    head = adjoint(table.Z_tilde_conj) @ Pf  # Z_tilde_l(conj lam)^* Psi_l f_l
    tail = adjoint(table.X_plus_conj) @ Pf  # X_l(conj lam)^* Psi_l f_l
    before = np.concatenate([np.zeros_like(head[:1]), np.cumsum(head, axis=0)[:-1]])
    from_k = np.cumsum(tail[::-1], axis=0)[::-1]
    return table.X_plus @ before + table.Z_tilde @ from_k


def zhat(table, f):
    """Weighted solution ``zhat_k = sum_l G_{k,l} Psi_l f_l`` on ``[0, K]``.

    Split at ``k``:
    ``zhat_k = X_k sum_{l<k} Z_tilde_l(conj)^* Psi_l f_l
    + Z_tilde_k sum_{l>=k} X_l(conj)^* Psi_l f_l``
    with sums truncated at the table end ``K``.  The returned record
    carries the recursion residual, ``||alpha zhat_0||`` and the bound
    ``||f|| / |Im lam|``.
    """
    lam = table.lam
    if lam.imag == 0:
        raise DomainError("zhat requires nonreal lambda")
    fk = _prepare_forcing(table, f)
    z = _zhat_values(table, fk)
    traj = TrajectorySequence(z, lam=lam)
    K = table.stop
    sys = table.sys
    zn = semi_norm(sys, traj, (0, K))
    fn = semi_norm(sys, TrajectorySequence(fk), (0, K))
    init = fro(table.alpha.value @ z[0])
    return NonhomSolution(traj, _recursion_residual(table, z, fk), init, zn, fn, fn / abs(lam.imag))


def yhat(table, v, f):
    """``yhat = X v + zhat``, the weighted solution with ``alpha yhat_0 = v``.

    The bound is ``||f|| / |Im lam| + ||X v||``.
    """
    lam = table.lam
    if lam.imag == 0:
        raise DomainError("yhat requires nonreal lambda")
    v = np.asarray(v, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape[0] != table.alpha.n:
        raise DimensionError(f"v must have {table.alpha.n} rows")
    fk = _prepare_forcing(table, f)
    if fk.shape[2] != v.shape[1]:
        raise DimensionError("v and f have different widths")
    Xv = table.X_plus @ v
    y = Xv + _zhat_values(table, fk)
    traj = TrajectorySequence(y, lam=lam)
    K = table.stop
    sys = table.sys
    yn = semi_norm(sys, traj, (0, K))
    fn = semi_norm(sys, TrajectorySequence(fk), (0, K))
    xn = semi_norm(sys, TrajectorySequence(Xv), (0, K))
    init = fro(table.alpha.value @ y[0] - v)
    return NonhomSolution(traj, _recursion_residual(table, y, fk), init, yn, fn, fn / abs(lam.imag) + xn)


def _scaled_forward(sys, lam, init, stop):
    """Forward solution rescaled by powers of ``2**-400`` to avoid overflow.

    Only directions and relative sizes are meaningful.
    """
    inv = s_lambda_inverse_all(sys, lam)
    out = np.empty((stop + 1,) + init.shape, dtype=complex)
    out[0] = init
    big = 2.0 ** 400
    for k in range(stop):
        out[k + 1] = inv[k] @ out[k]
        if np.abs(out[k + 1]).max() > big:
            out[: k + 2] /= big
    return out


def _weighted_gram(Psi, B, N):
    return hermitian_part(np.einsum("kji,kjl,klm->im", B[: N + 1].conj(), Psi[: N + 1], B[: N + 1]))


def _pencil_ratios(Ga, Gb, floor):
    """Generalized eigenvalues of ``(Gb, Ga + floor I)`` in ascending order."""
    d = Ga.shape[0]
    if d == 0:
        return np.zeros(0)
    w, V = np.linalg.eigh(hermitian_part(Ga) + floor * np.eye(d))
    # clipping only matters for indefinite weights, which validation reports separately
    W = V / np.sqrt(np.maximum(w, max(floor, np.finfo(float).tiny)))
    return np.linalg.eigvalsh(hermitian_part(W.conj().T @ Gb @ W))


def _schur(G, n):
    G11, G12, G21, G22 = G[:n, :n], G[:n, n:], G[n:, :n], G[n:, n:]
    return hermitian_part(G22 - G21 @ np.linalg.pinv(G11, rcond=1e-13, hermitian=True) @ G12)


@dataclass(frozen=True)
class SquareSummableCount:
    """Estimate of the number of square-summable solutions.

    ``norms`` maps each ``N`` to the per-direction squared norms
    (eigenvalues) used; ``ratios`` are per-step growth factors between the
    last two ``N``; ``mask`` marks directions classified summable;
    ``basis`` names the basis used (``"weyl"`` or ``"fundamental"``).
    """

    d: int
    N_list: tuple
    norms: dict
    ratios: np.ndarray
    mask: np.ndarray
    basis: str
    threshold: float


def count_square_summable(sys, lam, N_list=None, growth_ratio_threshold=1 + 1e-6, alpha=None, beta=None):
    """Classify solution directions as square summable from norm growth.

    For nonreal ``lam`` the basis consists of the Weyl solution with a
    boundary condition at ``N + 1`` and the ``Z_tilde`` half of the
    natural fundamental matrix; the second half is measured modulo the
    first through a Schur complement.  For real ``lam``, or when the
    boundary condition is singular, the natural fundamental matrix is used.

    A direction counts as summable when its squared weighted norm grows
    by at most ``growth_ratio_threshold`` per step between the last two
    entries of ``N_list`` (default ``(N // 2, N)``).  Directions of zero
    norm count as summable.
    """
    n = sys.n
    lam = complex(lam)
    alpha = _alpha(alpha, n)
    if N_list is None:
        N_list = (sys.horizon // 2, sys.horizon)
    N_list = tuple(int(N) for N in N_list)
    if len(N_list) < 2 or any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list needs at least two strictly increasing entries")
    if N_list[0] < 0 or N_list[-1] > sys.horizon:
        raise HorizonError(f"N_list entries must lie in [0, {sys.horizon}]")
    Psi = sys.Psi
    top = N_list[-1]
    floor = sys.tolerances.psd_tol * (1.0 + float(np.linalg.norm(Psi, axis=(1, 2)).sum()))

    X = None
    if lam.imag != 0:
        beta = _alpha(beta, n)
        X, _, _ = _backward_boundary_solution(sys, lam, sys.horizon + 1, beta, alpha)
    if X is not None:
        Zt = _scaled_forward(sys, lam, -make_J(n) @ alpha.value.conj().T, top)
        B = np.concatenate([X[: top + 1], Zt], axis=2)
        basis = "weyl"
    else:
        B = _scaled_forward(sys, lam, initial_frame(alpha), top)
        basis = "fundamental"

    def split(G):
        if basis == "weyl":
            return [G[:n, :n], _schur(G, n)]
        return [G]

    grams = {N: split(_weighted_gram(Psi, B, N)) for N in N_list}
    norms = {N: np.concatenate([np.linalg.eigvalsh(g) for g in gs]) for N, gs in grams.items()}
    Na, Nb = N_list[-2], N_list[-1]
    ratios = []
    for Ga, Gb in zip(grams[Na], grams[Nb]):
        scale = max(1.0, float(np.abs(Gb).max())) if basis == "fundamental" else 1.0
        r = _pencil_ratios(Ga, Gb, floor * scale)
        ratios.append(np.maximum(r, 0.0) ** (1.0 / (Nb - Na)))
    ratios = np.concatenate(ratios)
    mask = ratios <= growth_ratio_threshold
    return SquareSummableCount(int(mask.sum()), N_list, norms, ratios, mask, basis, float(growth_ratio_threshold))
