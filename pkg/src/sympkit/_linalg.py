"""Small dense linear-algebra helpers shared by the analysis modules."""

import numpy as np
import scipy.linalg as la


def fro(a):
    return float(np.linalg.norm(np.asarray(a)))


def hermitian_part(a):
    a = np.asarray(a)
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def adjoint(a):
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def psd_rank(h, rank_tol):
    """Numerical rank and kernel basis of a Hermitian PSD matrix.

    The matrix is first equilibrated by its diagonal so that graded Gram
    matrices (columns of very different size) are not misjudged.  An
    eigenvalue of the equilibrated matrix counts towards the rank when it
    exceeds ``rank_tol`` times the largest one.

    Returns
    -------
    rank : int
    kernel : (d, d - rank) ndarray
        Orthonormal basis of the numerical kernel.
    eigvals : (d,) ndarray
        Eigenvalues of the original (non-equilibrated) matrix, ascending.
    """
    h = hermitian_part(h)
    d = h.shape[0]
    eigvals = la.eigvalsh(h) if d else np.zeros(0)
    diag = np.real(np.diag(h)).copy()
    live = diag > 0
    if not live.any():
        return 0, np.eye(d, dtype=complex), eigvals
    scale = np.ones(d)
    scale[live] = 1.0 / np.sqrt(diag[live])
    c = h * np.outer(scale, scale)
    sub = c[np.ix_(live, live)]
    w, v = la.eigh(sub)
    cutoff = rank_tol * max(w[-1], 0.0)
    keep = w > cutoff
    rank = int(keep.sum())
    # kernel of the live block, mapped back through the scaling
    kern_live = v[:, ~keep] * scale[live][:, None]
    kern = np.zeros((d, d - rank), dtype=complex)
    n_dead = int((~live).sum())
    kern[np.flatnonzero(live), : kern_live.shape[1]] = kern_live
    kern[np.flatnonzero(~live), kern_live.shape[1]:] = np.eye(n_dead)
    if kern.shape[1]:
        kern = np.linalg.qr(kern)[0]
    return rank, kern, eigvals


def normalize_phase(v):
    """Scale a vector so its largest-modulus entry is real and positive."""
    v = np.asarray(v, dtype=complex)
    i = int(np.argmax(np.abs(v)))
    if v[i] == 0:
        return v
    return v * (np.abs(v[i]) / v[i]) / np.linalg.norm(v)


def max_principal_angle(a, b):
    """Largest principal angle between the column spans of ``a`` and ``b``.

    Two zero-dimensional spans are equal (angle 0); spans of different
    dimension are reported as pi/2.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[1] != b.shape[1]:
        return float(np.pi / 2)
    if a.shape[1] == 0:
        return 0.0
    return float(np.max(la.subspace_angles(a, b)))


def column_span(a, rank_tol):
    """Orthonormal basis of the numerical column span of ``a``."""
    a = np.asarray(a)
    if a.size == 0 or not np.any(a):
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = la.svd(a, full_matrices=False)
    r = int((s > rank_tol * s[0]).sum())
    return u[:, :r]
