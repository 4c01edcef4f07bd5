"""Small dense linear-algebra helpers shared by all modules.

Every rank decision in the package goes through :data:`RANK_TOL`, a cutoff
relative to the largest eigen/singular value.
"""

import numpy as np
import scipy.linalg

RANK_TOL = 1e-10
EQ_TOL = 1e-10


def dagger(x):
    return np.conj(np.swapaxes(x, -1, -2))


def hermitian_part(x):
    return 0.5 * (x + dagger(x))


def fro(x):
    return float(np.linalg.norm(x))


def op_norm(x):
    """Spectral norm (largest singular value)."""
    if x.size == 0:
        return 0.0
    return float(np.linalg.norm(x, 2))


def relative_defect(x, y):
    """||x - y||_F / max(||y||_F, 1)."""
    return fro(x - y) / max(fro(y), 1.0)


def is_hermitian(x, tol=EQ_TOL):
    return fro(x - dagger(x)) <= tol * max(fro(x), 1.0)


def fix_phases(vectors, rel_tol=1e-8):
    """Rotate each column so its first non-negligible entry is real positive.

    "Non-negligible" means larger than ``rel_tol`` times the column's largest
    entry, so round-off in would-be zeros cannot flip the convention.
    """
    vectors = np.array(vectors, dtype=complex, copy=True)
    for k in range(vectors.shape[1]):
        col = vectors[:, k]
        mags = np.abs(col)
        scale = mags.max() if col.size else 0.0
        if scale == 0.0:
            continue
        idx = int(np.argmax(mags > rel_tol * scale))
        vectors[:, k] = col * (np.conj(col[idx]) / mags[idx])
    return vectors


def psd_eigh(g, tol=RANK_TOL):
    """Eigenpairs of a Hermitian PSD matrix kept above ``tol * max eigenvalue``.

    Returns ``(values, vectors)`` with values in decreasing order and
    deterministic column phases.
    """
    g = hermitian_part(np.asarray(g, dtype=complex))
    w, v = np.linalg.eigh(g)
    w, v = w[::-1], v[:, ::-1]
    top = w[0] if w.size else 0.0
    if top <= 0.0:
        return np.zeros(0), np.zeros((g.shape[0], 0), dtype=complex)
    keep = w > tol * top
    return w[keep], fix_phases(v[:, keep])


def min_relative_eigenvalue(g):
    """Smallest eigenvalue of a Hermitian matrix over max(|eigenvalue|)."""
    w = np.linalg.eigvalsh(hermitian_part(g))
    scale = np.max(np.abs(w)) if w.size else 0.0
    if scale == 0.0:
        return 0.0, 0.0
    return float(w[0]), float(w[0] / scale)


def psd_sqrt(a, tol=RANK_TOL):
    """Principal square root of a Hermitian PSD matrix.

    Eigenvalues below ``tol * max eigenvalue`` are treated as zero: the square
    root would otherwise lift round-off (~1e-17) to ~1e-9 and make a
    rank-deficient input look full rank.
    """
    w, v = np.linalg.eigh(hermitian_part(a))
    top = np.max(w) if w.size else 0.0
    w = np.where(w > tol * max(top, 0.0), w, 0.0)
    return (v * np.sqrt(w)) @ dagger(v)


def psd_inv_sqrt(a, tol=RANK_TOL):
    """Inverse square root on the range of ``a``; zero on its kernel."""
    w, v = np.linalg.eigh(hermitian_part(a))
    top = np.max(w) if w.size else 0.0
    inv = np.where(w > tol * max(top, 0.0), 1.0 / np.sqrt(np.where(w > 0, w, 1.0)), 0.0)
    return (v * inv) @ dagger(v)


def svd(a, full_matrices=False, compute_uv=True):
    """SVD via the divide-and-conquer driver, falling back to the QR-iteration
    driver when it fails to converge (it can on highly degenerate spectra)."""
    try:
        return np.linalg.svd(a, full_matrices=full_matrices, compute_uv=compute_uv)
    except np.linalg.LinAlgError:
        return scipy.linalg.svd(a, full_matrices=full_matrices, compute_uv=compute_uv, lapack_driver="gesvd")


def orth(vectors, tol=RANK_TOL):
    """Orthonormal basis of the column span, rank decided relative to s_max."""
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.size == 0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    u, s, _ = svd(vectors)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    r = int(np.sum(s > tol * s[0]))
    return fix_phases(u[:, :r])


def null_space(k, tol=RANK_TOL, scale=0.0):
    """Orthonormal basis of ker(k); cutoff relative to the largest singular value.

    ``scale`` is the magnitude of the data ``k`` was assembled from; singular
    values below ``1e-12 * scale`` count as zero even when they are the
    largest, so a system made only of round-off has a full kernel.
    """
    k = np.asarray(k, dtype=complex)
    if k.shape[0] == 0:
        return np.eye(k.shape[1], dtype=complex)
    # the economy SVD already returns all right singular vectors when tall
    _, s, vh = svd(k, full_matrices=k.shape[0] < k.shape[1])
    if s.size == 0 or s[0] <= 1e-12 * scale:
        return np.eye(k.shape[1], dtype=complex)
    r = int(np.sum(s > tol * s[0]))
    return fix_phases(dagger(vh[r:]))


def span_residual(basis, vectors):
    """Largest relative distance of the columns of ``vectors`` from span(basis).

    ``basis`` must have orthonormal columns.
    """
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    if vectors.shape[1] == 0:
        return 0.0
    proj = basis @ (dagger(basis) @ vectors) if basis.shape[1] else np.zeros_like(vectors)
    norms = np.maximum(np.linalg.norm(vectors, axis=0), 1.0)
    return float(np.max(np.linalg.norm(vectors - proj, axis=0) / norms))


def expm_hermitian(h, t):
    """exp(i h t) for Hermitian h via its eigendecomposition."""
    w, v = np.linalg.eigh(hermitian_part(h))
    return (v * np.exp(1j * w * t)) @ dagger(v)


def is_unitary(u, tol=EQ_TOL):
    n = u.shape[0]
    return u.shape[0] == u.shape[1] and fro(dagger(u) @ u - np.eye(n)) <= tol * max(n, 1)


def lstsq(a, b):
    return scipy.linalg.lstsq(a, b, lapack_driver="gelsd")[0]
