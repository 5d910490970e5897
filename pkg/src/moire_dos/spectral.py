"""Hermitian eigendecomposition and matrix elements of g(H)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from . import kernels
from .errors import EigenSolverError
from .hamiltonian import HamiltonianFamily, ShiftedHamiltonian
from .lattice import DEFAULT_MAX_PAIRS, enumerate_pairs


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Ascending eigenvalues and orthonormal eigenvector columns.

    Rows of ``vectors`` follow the ordering of the WaveVectorSet the matrix
    was built on.
    """

    values: np.ndarray
    vectors: np.ndarray
    residual: float

    def __len__(self):
        return self.values.shape[0]


def _as_matrix(h):
    if isinstance(h, ShiftedHamiltonian):
        return h.matrix, tuple(h.xi)
    return np.asarray(h), ()


def _eigh(m, xi, vectors=True):
    try:
        if vectors:
            return np.linalg.eigh(m)
        return np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(m.shape[0], xi, exc) from exc


def eig_hermitian(h):
    """Full eigendecomposition of a Hermitian matrix (or ShiftedHamiltonian)."""
    m, xi = _as_matrix(h)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(m)):
        raise EigenSolverError(m.shape[0], xi, "non-finite matrix entries")
    w, v = _eigh(m, xi)
    resid = np.linalg.norm(m @ v - v * w, axis=0)
    return EigenDecomposition(w, v, float(resid.max()) if resid.size else 0.0)


def matrix_function_element(dec, g, row, col):
    """``[g(H)]_{row,col} = sum_j g(lam_j) psi_j[row] conj(psi_j[col])``.

    Diagonal elements come back as a float (the imaginary part is rounding).
    """
    n = len(dec)
    if not (0 <= row < n and 0 <= col < n):
        raise IndexError(f"index ({row}, {col}) out of range for N={n}")
    gv = g(dec.values)
    if row == col:
        return float(np.sum(gv * np.abs(dec.vectors[row]) ** 2))
    return complex(np.sum(gv * dec.vectors[row] * np.conj(dec.vectors[col])))


def function_row(dec, g, row):
    """The whole row ``[g(H)]_{row, :}``."""
    weights = g(dec.values) * dec.vectors[row]
    return np.conj(dec.vectors) @ weights


def _tridiagonalize(a, xi):
    """Householder reduction ``Q^H a Q = T`` with ``Q e_0 = e_0``.

    LAPACK's lower-triangle reflectors never touch index 0, so the first
    row of the eigenvectors of ``T`` equals the first row of those of ``a``.
    """
    n = a.shape[0]
    if n == 1:
        return np.array([a[0, 0].real]), np.zeros(0)
    if np.iscomplexobj(a):
        trd, query = lapack.zhetrd, lapack.zhetrd_lwork
    else:
        trd, query = lapack.dsytrd, lapack.dsytrd_lwork
    lwork, info = query(n, lower=1)
    # without the workspace query the routine falls back to its unblocked, much slower path
    _, d, e, _, info = trd(a, lower=1, lwork=max(1, int(np.real(lwork))), overwrite_a=1)
    if info != 0:
        raise EigenSolverError(n, xi, f"tridiagonal reduction failed (info={info})")
    return np.asarray(d, dtype=float), np.asarray(e, dtype=float)


def spectral_weights(m, index, xi=()):
    """Eigenvalues of ``m`` and the squared ``index`` components of its eigenvectors.

    Everything needed for a diagonal element of g(m), for any g.  The row
    ``index`` is moved first, the matrix is reduced to tridiagonal form,
    and an implicit QL sweep tracks only the first row of the eigenvectors.
    """
    m = np.asarray(m)
    n = m.shape[0]
    if not 0 <= index < n:
        raise IndexError(f"index {index} out of range for N={n}")
    if not np.all(np.isfinite(m)):
        raise EigenSolverError(n, xi, "non-finite matrix entries")
    perm = np.r_[index, np.arange(index), np.arange(index + 1, n)]
    a = np.asfortranarray(m[np.ix_(perm, perm)])
    d, e = _tridiagonalize(a, xi)
    w, wt, ok = kernels.tridiagonal_first_row(np.ascontiguousarray(d), np.ascontiguousarray(e))
    if not ok:
        raise EigenSolverError(n, xi, "QL iteration did not converge")
    return w, wt


def eigenvalues(m, xi=()):
    return _eigh(m, xi, vectors=False)


def parity_partner(pairs):
    """Index of ``-(n, m)`` for each entry, or None if the set is not symmetric."""
    ent = pairs.entries
    order = np.lexsort(ent.T[::-1])
    neg_order = np.lexsort((-ent).T[::-1])
    partner = np.empty(len(ent), dtype=np.int64)
    partner[order] = neg_order
    if not np.array_equal(ent[partner], -ent):
        return None
    return partner


def parity_eigenvalues(m, partner, xi=()):
    """Eigenvalues of ``m`` that commutes with the involution ``partner``.

    Splits into even/odd blocks in the basis ``(|i> +- |partner(i)>)/sqrt 2``;
    the spectrum is the union of both blocks, sorted.
    """
    n = m.shape[0]
    idx = np.arange(n)
    fixed = idx[partner == idx]
    reps = idx[partner > idx]
    mates = partner[reps]
    s2 = np.sqrt(2.0)
    ee = m[np.ix_(reps, reps)] + m[np.ix_(reps, mates)]
    oo = m[np.ix_(reps, reps)] - m[np.ix_(reps, mates)]
    ef = s2 * m[np.ix_(reps, fixed)]
    even = np.block([[m[np.ix_(fixed, fixed)], ef.conj().T], [ef, ee]])
    w = np.concatenate([_eigh(even, xi, vectors=False), _eigh(oo, xi, vectors=False)])
    return np.sort(w)


def reciprocal_ldos(xi, W, L, v1, v2, g, max_entries=DEFAULT_MAX_PAIRS):
    """``[g(H(xi))]_{0,0}`` on the pairs D_{W,L} around the origin."""
    pairs = enumerate_pairs(v1.lattice, v2.lattice, W, L, max_entries=max_entries)
    fam = HamiltonianFamily(pairs, v1, v2)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    w, wt = spectral_weights(fam.matrix(xi), pairs.index_of_center, tuple(xi))
    return float(np.sum(g(w) * wt))
