"""Gram matrices of the fundamental system and definiteness decisions.

For a fundamental matrix normalised by ``Phi_0(lam) = I`` the Gram matrix
over an index interval ``I`` is ``phi(lam, I) = sum_{k in I} Phi_k^* Psi_k Phi_k``.
Its kernel consists of initial values whose solutions have zero weighted
norm on ``I``, so the system is definite on ``I`` exactly when the Gram
matrix has full rank ``2n``.  Kernel and rank do not depend on ``lam``.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from ._linalg import adjoint, hermitian_part, max_principal_angle, normalize_phase
from .errors import HorizonError, NumericalWarning, StructureError
from .propagation import fundamental_matrix


def _check_interval(sys, interval):
    a, b = (int(x) for x in interval)
    if not 0 <= a <= b <= sys.horizon:
        raise HorizonError(f"interval [{a}, {b}] not inside horizon [0, {sys.horizon}]")
    return a, b


@dataclass(frozen=True)
class GramMatrix:
    """``phi(lam, I)`` together with its numerical rank and kernel."""

    value: np.ndarray
    interval: tuple
    lam: complex
    rank: int
    kernel_basis: np.ndarray
    eigenvalues: np.ndarray

    @property
    def condition(self):
        """Ratio of largest to smallest eigenvalue (``inf`` when singular)."""
        ev = self.eigenvalues
        if ev.size == 0 or ev[-1] <= 0:
            return float("inf")
        return float(ev[-1] / ev[0]) if ev[0] > 0 else float("inf")


def weight_roots(Psi, floor=0.0):
    """Factors ``F_k`` with ``F_k^* F_k = Psi_k`` (shape ``(K, 2n, 2n)``).

    Eigenvalues of ``Psi_k`` at or below ``floor`` times its largest one
    are treated as zero, so rounding noise in a singular weight does not
    create spurious directions.
    """
    w, U = np.linalg.eigh(hermitian_part(Psi))
    top = np.max(np.abs(w), axis=-1, keepdims=True)
    w = np.where(w > floor * top, w, 0.0)
    return np.sqrt(w)[..., :, None] * adjoint(U)


def _triangular_factor(rows):
    """Upper-triangular ``R`` with ``R^* R = rows^* rows``."""
    return np.linalg.qr(rows, mode="r")


def _factor_rank(R, d, rank_tol):
    """Rank, orthonormal kernel basis and squared singular values (ascending)."""
    if R.shape[0] < d:
        R = np.vstack([R, np.zeros((d - R.shape[0], d), dtype=complex)])
    _, s, Vh = np.linalg.svd(R)
    smax = s[0] if s.size else 0.0
    rank = int((s > rank_tol * smax).sum()) if smax > 0 else 0
    return rank, Vh[rank:].conj().T, (s**2)[::-1]


def _stacked_rows(Phi, Psi, floor):
    F = weight_roots(Psi, floor)
    return (F @ Phi).reshape(-1, Phi.shape[2])


def gram_phi(sys, lam, interval, k0=0):
    """Gram matrix of the fundamental system anchored by ``Phi_{k0} = I``.

    Rank and kernel come from the singular values of the stacked factor
    ``[F_k Phi_k]`` with ``F_k^* F_k = Psi_k``, which keeps the full working
    precision where the eigenvalues of the Gram matrix itself would lose
    half of it.

    Parameters
    ----------
    sys : SymplecticSystem
    lam : complex
    interval : (int, int)
        Inclusive index range inside ``[0, N]``.
    k0 : int
        Anchor index.  The rank and kernel dimension do not depend on it.
    """
    a, b = _check_interval(sys, interval)
    Phi = fundamental_matrix(sys, lam, k0=k0, stop=max(b, k0)).array[a : b + 1]
    R = _triangular_factor(_stacked_rows(Phi, sys.Psi[a : b + 1], sys.tolerances.psd_tol))
    value = hermitian_part(adjoint(R) @ R)
    rank, kernel, ev = _factor_rank(R, 2 * sys.n, sys.tolerances.rank_tol)
    return GramMatrix(value, (a, b), complex(lam), rank, kernel, ev)


def prefix_ranks(sys, lam=0.0, N_max=None):
    """Ranks of ``phi(lam, [0, m])`` for ``m = 0 .. N_max``."""
    N_max = sys.horizon if N_max is None else int(N_max)
    _check_interval(sys, (0, N_max))
    d = 2 * sys.n
    Phi = fundamental_matrix(sys, lam, stop=max(N_max, 0)).array[: N_max + 1]
    F = weight_roots(sys.Psi[: N_max + 1], sys.tolerances.psd_tol) @ Phi
    R = np.zeros((0, d), dtype=complex)
    ranks = []
    for block in F:
        R = _triangular_factor(np.vstack([R, block]))
        ranks.append(_factor_rank(R, d, sys.tolerances.rank_tol)[0])
    return np.array(ranks)


def maximal_rank_interval(sys, N_max=None, lam=0.0):
    """Shortest prefix ``[0, m]`` attaining the rank of ``[0, N_max]``.

    Prefix ranks are nondecreasing in exact arithmetic; a numerical drop is
    reported with a :class:`NumericalWarning` and the running maximum is
    used.

    Returns
    -------
    interval : (int, int)
    rank : int
    """
    ranks = prefix_ranks(sys, lam, N_max)
    drops = np.flatnonzero(np.diff(ranks) < 0)
    if drops.size:
        warnings.warn(
            f"prefix rank decreased at m={drops[0] + 1}; using running maximum",
            NumericalWarning,
            stacklevel=2,
        )
    running = np.maximum.accumulate(ranks)
    top = int(running[-1])
    m = int(np.argmax(running == top))
    return (0, m), top


def kernel_lambda_independence(sys, interval, lambdas):
    """Compare ``Ker phi(lam, I)`` across several ``lam``.

    Returns
    -------
    dict
        ``ranks`` per sample, ``kernel_dims``, ``max_angle`` (largest
        principal angle between any kernel and the first one) and
        ``consistent``.
    """
    lambdas = [complex(x) for x in lambdas]
    if len(lambdas) < 2:
        raise ValueError("at least two lambda samples are required")
    grams = [gram_phi(sys, lam, interval) for lam in lambdas]
    ref = grams[0].kernel_basis
    angles = [max_principal_angle(ref, g.kernel_basis) for g in grams[1:]]
    max_angle = float(max(angles))
    tol = max(sys.tolerances.structural_tol, 1e-6)
    dims = [g.kernel_basis.shape[1] for g in grams]
    return {
        "lambdas": lambdas,
        "ranks": [g.rank for g in grams],
        "kernel_dims": dims,
        "max_angle": max_angle,
        "consistent": len(set(dims)) == 1 and max_angle <= tol,
    }


@dataclass(frozen=True)
class DefinitenessCertificate:
    """Outcome of :func:`is_definite`.

    A definite verdict carries the Gram eigenvalues; a non-definite one
    carries a unit kernel vector ``xi`` and the weighted norm of the
    solution it generates, which is zero up to rounding.
    """

    definite: bool
    rank: int
    gram: GramMatrix
    eigenvalues: np.ndarray
    kernel_vector: np.ndarray = None
    kernel_norm: float = 0.0

    def __bool__(self):
        return self.definite


def is_definite(sys, interval, lambda_probe=0.0):
    """Decide definiteness on ``interval`` from a single probe ``lam``."""
    g = gram_phi(sys, lambda_probe, interval)
    full = 2 * sys.n
    if g.rank == full:
        return DefinitenessCertificate(True, g.rank, g, g.eigenvalues)
    xi = normalize_phase(g.kernel_basis[:, 0])
    norm = float(np.sqrt(max(np.real(xi.conj() @ g.value @ xi), 0.0)))
    return DefinitenessCertificate(False, g.rank, g, g.eigenvalues, xi, norm)


def block_coefficients(sys):
    """Split into ``A, B`` (top blocks of ``S_k``) and weights ``W_k``.

    Raises :class:`StructureError` unless every ``Psi_k`` vanishes outside
    its upper-left ``n x n`` block.
    """
    n = sys.n
    Psi = sys.Psi
    outside = Psi.copy()
    outside[:, :n, :n] = 0
    scale = np.maximum(1.0, np.linalg.norm(Psi, axis=(1, 2)))
    bad = np.flatnonzero(np.linalg.norm(outside, axis=(1, 2)) > sys.tolerances.structural_tol * scale)
    if bad.size:
        raise StructureError(
            f"weight at k={bad[0]} is not of the form diag(W, 0); block form unavailable"
        )
    return sys.S[:, :n, :n], sys.S[:, :n, n:], Psi[:, :n, :n]


def check_block_sufficient_condition(sys, l):
    """Sufficient condition for definiteness on any interval containing ``l - 1, l``.

    For weights ``diag(W_k, 0)`` the system is definite there when the
    upper-right block ``B_{l-1}`` of ``S_{l-1}`` is invertible and
    ``W_{l-1}``, ``W_l`` are positive definite.  A positive answer is
    cross-checked against :func:`is_definite` on ``[l - 1, l]``.
    """
    if not 1 <= l <= sys.horizon:
        raise HorizonError(f"l={l} must lie in [1, {sys.horizon}]")
    _, B, W = block_coefficients(sys)
    tol = sys.tolerances
    s = np.linalg.svd(B[l - 1], compute_uv=False)
    b_ok = s[-1] > tol.rank_tol * max(s[0], 1.0)

    def pd(w):
        ev = np.linalg.eigvalsh(hermitian_part(w))
        return ev[0] > tol.psd_tol * max(1.0, abs(ev[-1]))

    verdict = bool(b_ok and pd(W[l - 1]) and pd(W[l]))
    if verdict and not is_definite(sys, (l - 1, l)):
        warnings.warn(
            f"block condition holds at l={l} but the Gram matrix on [{l - 1}, {l}] is "
            "numerically rank deficient",
            NumericalWarning,
            stacklevel=2,
        )
    return verdict


def range_basis(gram):
    """Orthonormal basis of ``Ran phi``, the orthogonal complement of its kernel."""
    d = gram.value.shape[0]
    K = gram.kernel_basis
    P = np.eye(d) - K @ adjoint(K)
    u, s, _ = np.linalg.svd(P)
    return u[:, : d - K.shape[1]]
