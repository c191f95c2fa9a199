"""Coefficient sequences, structural validation and the weighted semi-inner product.

A time-reversed discrete symplectic system on the finite horizon ``[0, N]`` is

.. math::

    z_k = (S_k + \\lambda V_k) z_{k+1}, \\qquad V_k = -J \\Psi_k S_k,

where ``S_k`` is symplectic and the weight ``Psi_k`` is Hermitian, positive
semi-definite and satisfies ``Psi_k J Psi_k = 0``.  Coefficients are stored
eagerly as stacked ``(N + 1, 2n, 2n)`` complex arrays.
"""

from dataclasses import dataclass, field

import numpy as np

from ._linalg import adjoint, fro
from .errors import (
    DimensionError,
    HorizonError,
    SingularCoefficientError,
)


@dataclass(frozen=True)
class ToleranceConfig:
    """Thresholds for numerical decisions.

    Attributes
    ----------
    structural_tol : float
        Residual threshold for matrix identities, relative to the squared
        norm of the matrices involved (floored at 1).
    rank_tol : float
        Singular-value cutoff relative to the largest singular value.
    psd_tol : float
        Eigenvalue floor for semi-definiteness, relative to the matrix norm
        (floored at 1).
    """

    structural_tol: float = 1e-10
    rank_tol: float = 1e-10
    psd_tol: float = 1e-10

    def __post_init__(self):
        for name in ("structural_tol", "rank_tol", "psd_tol"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")
        if not self.rank_tol < 1:
            raise ValueError("rank_tol must be < 1")


def make_J(n):
    """The ``2n x 2n`` skew-symmetric matrix ``[[0, I], [-I, 0]]``."""
    if int(n) != n or n < 1:
        raise DimensionError(f"half-dimension must be a positive integer, got {n!r}")
    n = int(n)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]]).astype(complex)


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class CoefficientSequence:
    """Stacked coefficients ``S_k`` and ``Psi_k`` for ``k`` in ``[0, N]``."""

    S: np.ndarray
    Psi: np.ndarray

    def __post_init__(self):
        S = np.asarray(self.S, dtype=complex)
        Psi = np.asarray(self.Psi, dtype=complex)
        if S.ndim != 3 or S.shape[1] != S.shape[2] or S.shape[1] % 2:
            raise DimensionError(f"S must have shape (N+1, 2n, 2n), got {S.shape}")
        if Psi.shape != S.shape:
            raise DimensionError(
                f"Psi shape {Psi.shape} does not match S shape {S.shape}"
            )
        if S.shape[0] < 2:
            raise DimensionError("horizon N must be at least 1")
        object.__setattr__(self, "S", _frozen(S))
        object.__setattr__(self, "Psi", _frozen(Psi))

    @property
    def n(self):
        return self.S.shape[1] // 2

    @property
    def horizon(self):
        return self.S.shape[0] - 1

    @classmethod
    def from_generator(cls, horizon, generator):
        """Materialise ``generator(k) -> (S_k, Psi_k)`` on ``[0, horizon]``."""
        pairs = [generator(k) for k in range(horizon + 1)]
        return cls(np.stack([p[0] for p in pairs]), np.stack([p[1] for p in pairs]))


def build_V(S_k, Psi_k):
    """``V = -J Psi S``."""
    S_k = np.asarray(S_k, dtype=complex)
    Psi_k = np.asarray(Psi_k, dtype=complex)
    if S_k.shape != Psi_k.shape or S_k.shape[-1] != S_k.shape[-2]:
        raise DimensionError(f"shape mismatch: S {S_k.shape}, Psi {Psi_k.shape}")
    J = make_J(S_k.shape[-1] // 2)
    return -J @ Psi_k @ S_k


def psi_from_V(S_k, V_k):
    """Recover the weight from a pair ``(S, V)``: ``Psi = J S J V* J``."""
    J = make_J(np.shape(S_k)[-1] // 2)
    return J @ S_k @ J @ adjoint(V_k) @ J


@dataclass(frozen=True)
class SymplecticSystem:
    """A coefficient sequence together with its derived ``V_k`` and tolerances."""

    coefficients: CoefficientSequence
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    V: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "V", _frozen(build_V(self.coefficients.S, self.coefficients.Psi))
        )

    @classmethod
    def from_arrays(cls, S, Psi, tolerances=None):
        return cls(CoefficientSequence(S, Psi), tolerances or ToleranceConfig())

    @classmethod
    def constant(cls, S, Psi, horizon, tolerances=None):
        """The same ``(S, Psi)`` pair repeated on ``[0, horizon]``."""
        S = np.asarray(S, dtype=complex)
        Psi = np.asarray(Psi, dtype=complex)
        reps = (horizon + 1, 1, 1)
        return cls.from_arrays(np.tile(S, reps), np.tile(Psi, reps), tolerances)

    @property
    def n(self):
        return self.coefficients.n

    @property
    def horizon(self):
        return self.coefficients.horizon

    @property
    def S(self):
        return self.coefficients.S

    @property
    def Psi(self):
        return self.coefficients.Psi

    @property
    def J(self):
        return make_J(self.n)

    def with_tolerances(self, tolerances):
        return SymplecticSystem(self.coefficients, tolerances)

    def check_index(self, k):
        if not 0 <= k <= self.horizon:
            raise HorizonError(f"index {k} outside horizon [0, {self.horizon}]")


@dataclass(frozen=True)
class TrajectorySequence:
    """Values ``z_k`` (each ``2n x m``) for consecutive ``k`` starting at ``start``.

    A ``(K, 2n)`` array is promoted to ``(K, 2n, 1)``.
    """

    values: np.ndarray
    lam: complex = 0j
    start: int = 0

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.ndim == 2:
            v = v[:, :, None]
        if v.ndim != 3 or v.shape[0] < 1:
            raise DimensionError(f"trajectory values must be (K, 2n, m), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("trajectory contains non-finite entries")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "lam", complex(self.lam))
        object.__setattr__(self, "start", int(self.start))

    def __len__(self):
        return self.values.shape[0]

    @property
    def stop(self):
        """Last index covered (inclusive)."""
        return self.start + len(self) - 1

    @property
    def m(self):
        return self.values.shape[2]

    @property
    def dim(self):
        return self.values.shape[1]

    @property
    def indices(self):
        return range(self.start, self.stop + 1)

    def at(self, k):
        if not self.start <= k <= self.stop:
            raise HorizonError(f"index {k} outside trajectory [{self.start}, {self.stop}]")
        return self.values[k - self.start]

    def window(self, a, b):
        """Values for ``k`` in ``[a, b]`` as a ``(b - a + 1, 2n, m)`` array."""
        if a < self.start or b > self.stop:
            raise HorizonError(
                f"window [{a}, {b}] outside trajectory [{self.start}, {self.stop}]"
            )
        return self.values[a - self.start : b - self.start + 1]


def as_trajectory(z, lam=0j, start=0):
    if isinstance(z, TrajectorySequence):
        return z
    return TrajectorySequence(z, lam=lam, start=start)


def s_lambda_all(sys, lam):
    """Stack of ``S_k + lam V_k`` for all ``k`` in ``[0, N]``."""
    return sys.S + complex(lam) * sys.V


def s_lambda_inverse_all(sys, lam):
    """Stack of ``-J S_k(conj(lam))^* J``, the exact inverses of ``s_lambda_all``."""
    J = sys.J
    return -J @ adjoint(s_lambda_all(sys, np.conj(lam))) @ J


def s_lambda(sys, k, lam):
    """Transfer matrix ``S_k + lam V_k``."""
    sys.check_index(k)
    return sys.S[k] + complex(lam) * sys.V[k]


def s_lambda_inverse(sys, k, lam):
    """Inverse transfer matrix via ``-J S_k(conj(lam))^* J``."""
    sys.check_index(k)
    J = sys.J
    return -J @ s_lambda(sys, k, np.conj(lam)).conj().T @ J


@dataclass(frozen=True)
class ValidationReport:
    """Per-index residuals of the standing hypotheses.

    All arrays have length ``N + 1``.  ``symplectic`` is
    ``||S*JS - J||_F``, ``hermitian`` is ``||Psi - Psi*||_F``, ``isotropic``
    is ``||Psi J Psi||_F``, ``min_eig`` the smallest eigenvalue of the
    Hermitian part of ``Psi`` and ``roundtrip`` is ``||J S J V* J - Psi||_F``.
    """

    symplectic: np.ndarray
    hermitian: np.ndarray
    isotropic: np.ndarray
    min_eig: np.ndarray
    roundtrip: np.ndarray
    passed_by_k: np.ndarray
    violations: tuple

    @property
    def passed(self):
        return not self.violations

    def max_residuals(self):
        return {
            "symplectic": float(self.symplectic.max()),
            "hermitian": float(self.hermitian.max()),
            "isotropic": float(self.isotropic.max()),
            "min_eig": float(self.min_eig.min()),
            "roundtrip": float(self.roundtrip.max()),
        }


def validate_hypotheses(sys):
    """Check symplecticity of ``S_k`` and the weight conditions on ``Psi_k``."""
    S, Psi, V, J = sys.S, sys.Psi, sys.V, sys.J
    tol = sys.tolerances
    norm = lambda a: np.linalg.norm(a, axis=(1, 2))  # noqa: E731
    symp = norm(adjoint(S) @ J @ S - J)
    herm = norm(Psi - adjoint(Psi))
    iso = norm(Psi @ J @ Psi)
    min_eig = np.array([np.linalg.eigvalsh(0.5 * (p + p.conj().T))[0] for p in Psi])
    roundtrip = norm(psi_from_V(S, V) - Psi)

    s_scale = np.maximum(1.0, norm(S) ** 2)
    p_norm = norm(Psi)
    p_scale = np.maximum(1.0, p_norm)
    checks = {
        "symplectic": symp <= tol.structural_tol * s_scale,
        "hermitian": herm <= tol.structural_tol * p_scale,
        "isotropic": iso <= tol.structural_tol * p_scale**2,
        "semidefinite": min_eig >= -tol.psd_tol * p_scale,
        "roundtrip": roundtrip <= tol.structural_tol * p_scale * s_scale,
    }
    ok = np.logical_and.reduce(list(checks.values()))
    violations = tuple(name for name, c in checks.items() if not c.all())
    return ValidationReport(symp, herm, iso, min_eig, roundtrip, ok, violations)


def semi_inner(sys, z, w, interval=None):
    """``sum_{k in [a, b]} z_k^* Psi_k w_k``.

    ``interval`` is an inclusive pair ``(a, b)`` defaulting to the overlap
    of both trajectories.  An empty interval (``a > b``) yields zeros.  When
    both arguments have a single column the result is a complex scalar.
    """
    z = as_trajectory(z)
    w = as_trajectory(w)
    if z.dim != 2 * sys.n or w.dim != 2 * sys.n:
        raise DimensionError("trajectory dimension does not match the system")
    if interval is None:
        interval = (max(z.start, w.start), min(z.stop, w.stop))
    a, b = interval
    if a > b:
        out = np.zeros((z.m, w.m), dtype=complex)
    else:
        sys.check_index(a)
        sys.check_index(b)
        zk = z.window(a, b)
        wk = w.window(a, b)
        out = np.einsum("kim,kij,kjp->mp", zk.conj(), sys.Psi[a : b + 1], wk)
    if out.shape == (1, 1):
        return complex(out[0, 0])
    return out


def semi_norm(sys, z, interval=None):
    """``sqrt(trace <z, z>)``; the Psi-semi-norm for a single column."""
    g = semi_inner(sys, z, z, interval)
    return float(np.sqrt(max(np.real(np.trace(np.atleast_2d(g))), 0.0)))


def from_sturm_liouville(p, q, w, horizon=None, tolerances=None):
    """System equivalent to ``Delta(p_k Delta y_{k-1}) + q_k y_k = lam w_k y_k``.

    ``q`` and ``w`` are indexed on ``[0, N]``; ``p`` is indexed on
    ``[0, N + 1]`` (``p_0`` is unused, ``p_{k+1}`` enters ``S_k``).  Scalars
    are broadcast, in which case ``horizon`` must be given.

    The resulting coefficients are

    .. math::

        S_k = \\begin{pmatrix} 1 & -1/p_{k+1} \\\\ -q_k & 1 + q_k/p_{k+1}
        \\end{pmatrix}, \\qquad \\Psi_k = \\mathrm{diag}(w_k, 0).
    """
    if horizon is None:
        arrays = [np.ndim(x) for x in (q, w)]
        if not any(arrays):
            raise DimensionError("horizon is required when q and w are scalars")
        horizon = len(q) - 1 if np.ndim(q) else len(w) - 1
    N = int(horizon)
    q = np.broadcast_to(np.asarray(q, dtype=float), (N + 1,)) if np.ndim(q) == 0 else np.asarray(q, dtype=float)
    w = np.broadcast_to(np.asarray(w, dtype=float), (N + 1,)) if np.ndim(w) == 0 else np.asarray(w, dtype=float)
    p = np.broadcast_to(np.asarray(p, dtype=float), (N + 2,)) if np.ndim(p) == 0 else np.asarray(p, dtype=float)
    if q.shape != (N + 1,) or w.shape != (N + 1,) or p.shape != (N + 2,):
        raise DimensionError(
            f"expected len(q) = len(w) = N+1 = {N + 1} and len(p) = N+2 = {N + 2}; "
            f"got {len(q)}, {len(w)}, {len(p)}"
        )
    if np.any(w < 0):
        raise ValueError("weights w_k must be non-negative")
    p_next = p[1:]
    bad = np.flatnonzero(p_next == 0)
    if bad.size:
        raise SingularCoefficientError(f"p_{bad[0] + 1} = 0 (coefficient S_{bad[0]} undefined)")
    S = np.zeros((N + 1, 2, 2), dtype=complex)
    S[:, 0, 0] = 1.0
    S[:, 0, 1] = -1.0 / p_next
    S[:, 1, 0] = -q
    S[:, 1, 1] = 1.0 + q / p_next
    Psi = np.zeros((N + 1, 2, 2), dtype=complex)
    Psi[:, 0, 0] = w
    return SymplecticSystem.from_arrays(S, Psi, tolerances)


def residual(a, b):
    return fro(np.asarray(a) - np.asarray(b))
