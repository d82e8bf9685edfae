"""Dense Hermitian linear algebra used by the solvers.

All routines are thin, deterministic wrappers over LAPACK (via numpy) with the
conventions the rest of the package relies on: eigenvalues in descending
order, a fixed eigenvector phase, and eigenvalue-thresholded pseudoinverses.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InputError, PreconditionError, RankError

__all__ = [
    "EigenDecomposition",
    "hermitize",
    "hermitian_eig",
    "dominant_eigpair",
    "pinv",
    "is_psd",
    "min_eig",
    "spectral_radius",
    "null_space_basis",
    "psd_dominance_check",
    "fix_phase",
    "outer",
]


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray  # real, descending
    vectors: np.ndarray  # orthonormal columns

    def reconstruct(self):
        v = self.vectors
        return (v * self.values) @ v.conj().T


def _as_matrix(a):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    return a


def hermitize(a):
    """Return ``(A + A^H)/2``; the construction-time symmetrization."""
    a = np.asarray(a)
    return 0.5 * (a + a.conj().T)


def outer(row):
    """``x^H x`` for a channel row vector ``x`` (so ``w^H outer(x) w = |x w|^2``)."""
    row = np.asarray(row)
    return np.outer(row.conj(), row)


def fix_phase(v):
    """Rotate ``v`` so its largest-magnitude entry is real and positive.

    Ties in magnitude go to the lowest index.
    """
    v = np.asarray(v)
    mags = np.abs(v)
    if not mags.any():
        return v.copy()
    k = int(np.argmax(mags >= mags.max() * (1.0 - 1e-12)))
    ph = v[k] / mags[k]
    return v / ph


def hermitian_eig(a):
    a = hermitize(_as_matrix(a))
    w, v = np.linalg.eigh(a)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    v = np.column_stack([fix_phase(v[:, k]) for k in range(v.shape[1])]) if v.size else v
    return EigenDecomposition(values=w, vectors=v)


def dominant_eigpair(g, rtol=1e-12):
    """Largest eigenvalue and a unit eigenvector of a Hermitian PSD matrix.

    When the top eigenvalue is repeated, the vector returned is the
    normalised projection of the lowest-index standard basis vector onto the
    dominant eigenspace, so e.g. ``G = I`` yields ``e1``.
    """
    g = hermitize(_as_matrix(g))
    w, v = np.linalg.eigh(g)
    top = w[-1]
    scale = max(abs(w[0]), abs(top), np.finfo(float).tiny)
    tied = w >= top - rtol * scale * g.shape[0]
    basis = v[:, tied]
    if basis.shape[1] == 1:
        vec = basis[:, 0]
    else:
        proj = basis @ basis.conj().T
        for k in range(g.shape[0]):
            col = proj[:, k]
            nrm = np.linalg.norm(col)
            if nrm > 1e-8:
                vec = col / nrm
                break
    return float(top), fix_phase(vec)


def pinv(a, tol=None):
    """Moore-Penrose pseudoinverse of a Hermitian matrix.

    Eigenvalues with ``|lambda| <= tol * max|lambda|`` are treated as zero;
    the default ``tol`` is ``1e-10 * n``.
    """
    a = hermitize(_as_matrix(a))
    n = a.shape[0]
    if tol is None:
        tol = 1e-10 * n
    if tol < 0:
        raise InputError("tol must be non-negative")
    w, v = np.linalg.eigh(a)
    cut = tol * np.max(np.abs(w)) if w.size else 0.0
    keep = np.abs(w) > cut
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    return (v * inv) @ v.conj().T


def min_eig(a):
    return float(np.linalg.eigvalsh(hermitize(_as_matrix(a)))[0])


def is_psd(a, tol=0.0):
    return min_eig(a) >= -tol


def spectral_radius(b):
    b = _as_matrix(b)
    if b.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(b))))


def null_space_basis(h, rank_tol=1e-10):
    """Orthonormal basis of the null space of a full-row-rank ``K x M`` matrix."""
    h = np.atleast_2d(np.asarray(h))
    if not np.all(np.isfinite(h)):
        raise InputError("matrix has non-finite entries")
    k, m = h.shape
    if k >= m:
        raise DimensionError(f"need K < M for a nontrivial null space, got {k}x{m}")
    _, s, vh = np.linalg.svd(h)
    if s[-1] <= rank_tol * s[0] * max(k, m):
        raise RankError("H is rank deficient")
    return vh[k:].conj().T


def psd_dominance_check(a, b, tol=1e-9):
    """Decide whether ``A - b b^H`` is PSD for PSD ``A``.

    Uses the quadratic form ``b^H A^+ b <= 1`` together with the range
    condition ``b in range(A)``, which is needed once ``A`` is singular.
    ``tol`` is relative: PSD-ness of ``A`` is judged against ``tol*||A||``.
    """
    a = hermitize(_as_matrix(a))
    b = np.asarray(b).reshape(-1)
    w, v = np.linalg.eigh(a)
    scale = max(np.max(np.abs(w)), np.finfo(float).tiny)
    if w[0] < -tol * scale:
        raise PreconditionError(f"A is not PSD (min eigenvalue {w[0]:.3e})")
    nb = np.linalg.norm(b)
    if nb == 0.0:
        return True
    coef = v.conj().T @ b
    cut = 1e-10 * a.shape[0] * scale
    keep = w > cut
    outside = np.linalg.norm(coef[~keep])
    if outside > tol * nb:
        return False
    quad = float(np.sum(np.abs(coef[keep]) ** 2 / w[keep]))
    return quad <= 1.0 + tol
