"""Finite-section diagnostics for the maximal and minimal relations.

The map ``K_{lam, I}(z) = sum_{k in I} Phi_k(conj lam)^* Psi_k z_k`` acts on
finitely supported sequences; its range is ``Ran phi(I)``.  Sequences in
its kernel have explicit compactly supported preimages under
``z -> L(z) - lam Psi z``.  Pairs ``(z, f)`` with ``Psi z = 0`` and
``L(z) = Psi f`` but ``||f||_Psi > 0`` show that the maximal relation is
multivalued.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from ._linalg import column_span, max_principal_angle, normalize_phase, psd_rank
from .definiteness import gram_phi, maximal_rank_interval, range_basis
from .errors import DimensionError, HorizonError, PreconditionError
from .propagation import apply_L, fundamental_matrix
from .system_model import TrajectorySequence, as_trajectory, semi_norm
from .weyl_green import count_square_summable


@dataclass(frozen=True)
class KMap:
    """``K_{lam, I}`` as the matrix ``[Phi_a(conj lam)^* Psi_a, ..., Phi_b(conj lam)^* Psi_b]``."""

    lam: complex
    interval: tuple
    blocks: np.ndarray = field(repr=False)

    @property
    def matrix(self):
        """``2n x 2n (b - a + 1)`` matrix acting on stacked ``z_a, ..., z_b``."""
        return np.concatenate(list(self.blocks), axis=1)

    def apply(self, g):
        """``sum_k Phi_k(conj lam)^* Psi_k g_k`` over the interval."""
        g = as_trajectory(g)
        a, b = self.interval
        lo, hi = max(a, g.start), min(b, g.stop)
        if lo > hi:
            return np.zeros((self.blocks.shape[1], g.m), dtype=complex)
        return np.einsum("kij,kjm->im", self.blocks[lo - a : hi - a + 1], g.window(lo, hi))


def k_map(sys, lam, interval):
    a, b = (int(x) for x in interval)
    if not 0 <= a <= b <= sys.horizon:
        raise HorizonError(f"interval [{a}, {b}] not inside horizon [0, {sys.horizon}]")
    Phi = fundamental_matrix(sys, np.conj(lam), stop=b).array[a : b + 1]
    blocks = np.conj(np.swapaxes(Phi, 1, 2)) @ sys.Psi[a : b + 1]
    return KMap(complex(lam), (a, b), blocks)


def _equilibrated_span(mat, rank_tol):
    norms = np.linalg.norm(mat, axis=0)
    live = norms > 0
    return column_span(mat[:, live] / norms[live], rank_tol)


def k_map_range_check(sys, lam, interval):
    """Compare ``ran K_{lam, I}`` with ``Ran phi(I)`` and count dimensions.

    Returns
    -------
    dict
        ``rank_K``, ``rank_phi``, ``max_angle`` between the two ranges,
        ``quotient_dim`` (``sum_k rank Psi_k``, the dimension of the
        supported sequences modulo weighted-null ones), ``kernel_dim``
        (dimension of ``ker K`` in that quotient), ``codim_kernel`` and
        ``consistent``.
    """
    tol = sys.tolerances
    km = k_map(sys, lam, interval)
    ran_K = _equilibrated_span(km.matrix, tol.rank_tol)
    g = gram_phi(sys, lam, interval)
    ran_phi = range_basis(g)
    a, b = km.interval
    quotient = int(sum(psd_rank(p, tol.rank_tol)[0] for p in sys.Psi[a : b + 1]))
    rank_K = ran_K.shape[1]
    kernel_dim = quotient - rank_K
    angle = max_principal_angle(ran_K, ran_phi)
    return {
        "lambda": complex(lam),
        "interval": (a, b),
        "rank_K": rank_K,
        "rank_phi": g.rank,
        "max_angle": angle,
        "quotient_dim": quotient,
        "kernel_dim": kernel_dim,
        "codim_kernel": quotient - kernel_dim,
        "consistent": rank_K == g.rank and angle <= max(tol.structural_tol, 1e-6),
    }


def project_to_kernel(kmap, g):
    """Subtract from ``g`` a least-norm correction so that ``K(g) = 0``."""
    g = as_trajectory(g)
    a, b = kmap.interval
    if g.start != a or g.stop != b:
        raise DimensionError("g must be defined exactly on the K-map interval")
    A = kmap.matrix
    rhs = kmap.apply(g)
    corr = np.linalg.lstsq(A, rhs, rcond=None)[0]
    c = corr.reshape(b - a + 1, A.shape[0], g.m)
    return TrajectorySequence(g.values - c, lam=g.lam, start=a)


@dataclass(frozen=True)
class PreimageResult:
    """Output of :func:`preimage_construction`.

    ``z`` covers ``[0, N]``; ``residual`` is the per-index norm of
    ``L(z)_k - lam Psi_k z_k - Psi_k g_k`` on ``[0, N - 1]``.
    """

    z: TrajectorySequence
    residual: np.ndarray
    support_end: int
    K_of_g: np.ndarray

    @property
    def max_residual(self):
        return float(self.residual.max())

    @property
    def z0_norm(self):
        return float(np.linalg.norm(self.z.values[0]))


def preimage_construction(sys, lam, g, tol=None):
    """Compactly supported ``z`` with ``L(z) - lam Psi z = Psi g``.

    ``g`` is given on ``[0, N']`` (zero beyond) and must satisfy
    ``K_lam(g) = 0``.  The construction is
    ``z_k = -Phi_k(lam) J sum_{j >= k} Phi_j(conj lam)^* Psi_j g_j`` for
    ``k <= N'`` and ``z_k = 0`` beyond.

    Raises
    ------
    PreconditionError
        If ``||K_lam(g)||`` exceeds ``tol`` relative to the size of the
        individual terms (``z_0`` would then be ``-J K_lam(g) != 0``).
    """
    lam = complex(lam)
    g = as_trajectory(g, lam=lam)
    if g.start != 0:
        raise DimensionError("g must start at index 0")
    Np = g.stop
    if Np > sys.horizon - 1:
        raise HorizonError(f"support of g must end before the horizon ({sys.horizon})")
    tol = sys.tolerances.structural_tol if tol is None else tol
    km = k_map(sys, lam, (0, Np))
    terms = km.blocks @ g.values
    Kg = terms.sum(axis=0)
    scale = max(1.0, float(np.linalg.norm(terms, axis=(1, 2)).max()))
    if np.linalg.norm(Kg) > tol * scale:
        raise PreconditionError(
            f"K_lambda(g) = {np.linalg.norm(Kg):.3e} is not zero; no compactly supported preimage"
        )
    Phi = fundamental_matrix(sys, lam, stop=Np).array
    J = sys.J
    tails = np.cumsum(terms[::-1], axis=0)[::-1]
    z = np.zeros((sys.horizon + 1, 2 * sys.n, g.m), dtype=complex)
    z[: Np + 1] = -Phi @ J @ tails
    # the closed form gives -J K(g) at index 0; it vanishes exactly by hypothesis
    z[0] = 0.0
    zt = TrajectorySequence(z, lam=lam)
    gfull = np.zeros_like(z)
    gfull[: Np + 1] = g.values
    Lz = apply_L(sys, zt).values
    Psi = sys.Psi[: sys.horizon]
    r = Lz - lam * Psi @ z[:-1] - Psi @ gfull[:-1]
    return PreimageResult(zt, np.linalg.norm(r, axis=(1, 2)), Np, Kg)


@dataclass(frozen=True)
class MultivaluedWitness:
    """``(z, f)`` with ``Psi z = 0``, ``L(z) = Psi f`` and ``||f||_Psi > 0``."""

    z: TrajectorySequence
    f: TrajectorySequence
    support_end: int
    residual: float
    f_norm: float


def _kernel_basis(psi, rank_tol):
    return psd_rank(psi, rank_tol)[1]


def _witness_nullspace(sys, m, fix_start, rank_tol):
    """Coefficients ``c_k`` with ``z_k = K_k c_k`` on ``[0, m]``, ``z_{m+1} = 0``."""
    J = sys.J
    bases = [_kernel_basis(sys.Psi[k], rank_tol) for k in range(m + 1)]
    first = 1 if fix_start else 0
    dims = [bases[k].shape[1] if k >= first else 0 for k in range(m + 1)]
    offsets = np.concatenate([[0], np.cumsum(dims)])
    total = int(offsets[-1])
    if total == 0:
        return bases, offsets, np.zeros((0, 0))
    rows = []
    for k in range(m + 1):
        Kk = _kernel_basis(sys.Psi[k], rank_tol)
        if Kk.shape[1] == 0:
            continue
        row = np.zeros((Kk.shape[1], total), dtype=complex)
        if dims[k]:
            row[:, offsets[k] : offsets[k + 1]] = Kk.conj().T @ J @ bases[k]
        if k + 1 <= m and dims[k + 1]:
            row[:, offsets[k + 1] : offsets[k + 2]] = -Kk.conj().T @ J @ sys.S[k] @ bases[k + 1]
        rows.append(row)
    A = np.vstack(rows) if rows else np.zeros((0, total))
    null = la.null_space(A, rcond=rank_tol) if A.shape[0] else np.eye(total)
    return bases, offsets, null


def multivalued_witness(sys, max_support=None):
    """Search for a compactly supported multivalued-part witness.

    Candidates ``z`` take values in ``ker Psi_k`` on ``[0, m]`` and vanish
    from ``m + 1`` on; the conditions ``L(z)_k in Ran Psi_k`` are linear.
    Witnesses with ``z_0 = 0`` are tried first (for increasing ``m``), then
    unrestricted ``z_0``.  The returned ``z`` is scaled so that its largest
    entry is ``1``; ``f_k = Psi_k^+ L(z)_k``.

    Returns ``None`` when no witness with support ending at or before
    ``max_support`` (default ``min(N - 1, 64)``) exists.
    """
    N = sys.horizon
    max_support = min(N - 1, 64) if max_support is None else min(int(max_support), N - 1)
    rank_tol = sys.tolerances.rank_tol
    for fix_start in (True, False):
        for m in range(0, max_support + 1):
            bases, offsets, null = _witness_nullspace(sys, m, fix_start, rank_tol)
            if null.shape[1] == 0:
                continue
            c = normalize_phase(null[:, 0])
            z = np.zeros((N + 1, 2 * sys.n, 1), dtype=complex)
            for k in range(m + 1):
                lo, hi = offsets[k], offsets[k + 1]
                if hi > lo:
                    z[k, :, 0] = bases[k] @ c[lo:hi]
            z /= z.flat[np.argmax(np.abs(z))]
            z.real[np.abs(z.real) < 1e-15] = 0.0
            z.imag[np.abs(z.imag) < 1e-15] = 0.0
            zt = TrajectorySequence(z)
            Lz = apply_L(sys, zt).values
            f = np.zeros_like(z)
            f[:N] = np.linalg.pinv(sys.Psi[:N], rcond=rank_tol, hermitian=True) @ Lz
            ft = TrajectorySequence(f)
            res = float(np.linalg.norm(Lz - sys.Psi[:N] @ f[:N]))
            fn = semi_norm(sys, ft, (0, N))
            if fn > sys.tolerances.structural_tol and res <= 1e-8 * max(1.0, fn):
                return MultivaluedWitness(zt, ft, m, res, fn)
    return None


@dataclass(frozen=True)
class DeficiencyReport:
    """Deficiency numbers at sample points and the consistency checks.

    ``d_lambda`` and ``d_tilde`` are lists aligned with
    ``lambda_samples``; ``rank_phi`` is the rank on ``interval`` at the
    first sample and ``rank_phi_samples`` the rank at each sample.
    ``checks`` maps check names to booleans; ``warnings`` describes every
    failed check.
    """

    lambda_samples: list
    d_lambda: list
    d_tilde: list
    rank_phi: int
    rank_phi_samples: list
    interval: tuple
    n: int
    checks: dict
    warnings: list
    counts: list = field(repr=False, default=None)

    @property
    def passed(self):
        return all(self.checks.values())


def deficiency_consistency(sys, lambda_samples, interval=None, N_list=None,
                           growth_ratio_threshold=1 + 1e-6, max_workers=None):
    """Estimate ``d_lam`` at samples and check the deficiency relations.

    ``d_tilde = d_lam - (2n - rank phi(lam, I))`` with ``I`` a maximal-rank
    prefix interval (found automatically when omitted).  Checks:

    ``d_tilde_nonnegative``
        ``d_tilde >= 0`` at every sample.
    ``difference_constant``
        ``d_lam - d_tilde`` is the same at every sample.
    ``constant_upper`` / ``constant_lower``
        ``d_lam`` is constant over the samples in each open half-plane.
    ``definite_equal``
        For definite systems ``d_tilde == d_lam``.
    ``bounds``
        ``n <= d_lam <= 2n`` at nonreal samples.
    """
    samples = [complex(x) for x in lambda_samples]
    if not samples:
        raise ValueError("at least one lambda sample is required")
    n = sys.n
    if interval is None:
        interval, _ = maximal_rank_interval(sys)
    interval = tuple(int(x) for x in interval)

    def one(lam):
        count = count_square_summable(sys, lam, N_list, growth_ratio_threshold)
        return count, gram_phi(sys, lam, interval).rank

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(one, samples))
    else:
        results = [one(lam) for lam in samples]
    counts = [r[0] for r in results]
    ranks = [r[1] for r in results]
    d = [c.d for c in counts]
    dt = [di - (2 * n - r) for di, r in zip(d, ranks)]
    diffs = {di - ti for di, ti in zip(d, dt)}
    upper = {di for di, lam in zip(d, samples) if lam.imag > 0}
    lower = {di for di, lam in zip(d, samples) if lam.imag < 0}
    nonreal = [di for di, lam in zip(d, samples) if lam.imag != 0]
    definite = ranks[0] == 2 * n
    checks = {
        "d_tilde_nonnegative": all(t >= 0 for t in dt),
        "difference_constant": len(diffs) == 1 and len(set(ranks)) == 1,
        "constant_upper": len(upper) <= 1,
        "constant_lower": len(lower) <= 1,
        "definite_equal": (not definite) or d == dt,
        "bounds": all(n <= di <= 2 * n for di in nonreal),
    }
    messages = {
        "d_tilde_nonnegative": "negative d_tilde at some sample",
        "difference_constant": "d_lambda - d_tilde varies across samples (rank of phi not lambda independent)",
        "constant_upper": "d_lambda varies within the upper half-plane",
        "constant_lower": "d_lambda varies within the lower half-plane",
        "definite_equal": "definite system with d_tilde != d_lambda",
        "bounds": "d_lambda outside [n, 2n] at a nonreal sample",
    }
    warnings = [f"numerical classification: {messages[k]}" for k, ok in checks.items() if not ok]
    return DeficiencyReport(samples, d, dt, ranks[0], ranks, interval, n, checks, warnings, counts)
