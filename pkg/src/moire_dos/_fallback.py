"""Pure numpy versions of the routines in ``_kernels.pyx``.

scan_box, fill_couplings and compensated_sum reproduce the compiled results
bit for bit; lattice_phase_sum agrees to rounding (vectorized cos/sin and
pairwise summation), and tridiagonal_first_row goes through LAPACK instead
of the compiled QL sweep, so it too agrees only to rounding.
"""

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal


def _box(r):
    axes = [np.arange(-int(k), int(k) + 1, dtype=np.int64) for k in r]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _apply(b, pts):
    # explicit component sums, same operation order as the compiled loop
    d = b.shape[0]
    if d == 1:
        return [b[0, 0] * pts[:, 0]]
    return [b[0, 0] * pts[:, 0] + b[0, 1] * pts[:, 1],
            b[1, 0] * pts[:, 0] + b[1, 1] * pts[:, 1]]


def scan_box(b1, b2, r1, r2, w, l, tol):
    d = b1.shape[0]
    w2 = (w * (1.0 + tol)) * (w * (1.0 + tol))
    l2 = (l * (1.0 + tol)) * (l * (1.0 + tol))
    ns = _box(r1)
    ms = _box(r2)
    g1 = _apply(b1, ns)
    g2 = _apply(b2, ms)
    out = []
    for i in range(ns.shape[0]):
        u2 = 0.0
        v2 = 0.0
        for k in range(d):
            u = g1[k][i] + g2[k]
            v = g1[k][i] - g2[k]
            u2 = u2 + u * u
            v2 = v2 + v * v
        keep = np.nonzero((u2 <= w2) & (v2 <= l2))[0]
        if keep.size:
            block = np.empty((keep.size, 2 * d), dtype=np.int64)
            block[:, :d] = ns[i]
            block[:, d:] = ms[keep]
            out.append(block)
    if not out:
        return np.zeros((0, 2 * d), dtype=np.int64)
    return np.concatenate(out, axis=0)


def fill_couplings(h, ncode, mcode, tab1, tab2, off1, off2):
    for codes, other, tab, off in ((mcode, ncode, tab1, off1), (ncode, mcode, tab2, off2)):
        order = np.argsort(codes, kind="stable")
        bounds = np.flatnonzero(np.diff(codes[order])) + 1
        for idx in np.split(order, bounds):
            idx = np.sort(idx)
            diff = other[idx][:, None] - other[idx][None, :] + off
            h[np.ix_(idx, idx)] += tab[diff]


def compensated_sum(x):
    s = 0.0
    c = 0.0
    for xi in np.asarray(x, dtype=np.float64).tolist():
        t = s + xi
        if abs(s) >= abs(xi):
            c += (s - t) + xi
        else:
            c += (xi - t) + s
        s = t
    return s + c


def lattice_phase_sum(a, r, s, radius):
    pts = _box(r)
    ell = _apply(a, pts)
    r2 = sum(c * c for c in ell)
    inside = r2 <= radius * radius
    ph = sum(c[inside] * s[k] for k, c in enumerate(ell))
    return float(np.cos(ph).sum()), float(np.sin(ph).sum()), int(inside.sum())


def tridiagonal_first_row(diag, offdiag, max_iter=30):
    """Same contract as the compiled routine, through LAPACK (stemr).

    Values and weights agree with the compiled QL sweep to rounding, not
    bit for bit.
    """
    diag = np.asarray(diag, dtype=np.float64)
    if diag.size == 0:
        return diag.copy(), diag.copy(), True
    if diag.size == 1:
        return diag.copy(), np.ones(1), True
    try:
        w, v = eigh_tridiagonal(diag, np.asarray(offdiag, dtype=np.float64))
    except LinAlgError:
        return diag.copy(), np.zeros_like(diag), False
    order = np.argsort(w, kind="stable")
    return w[order], v[0, order] ** 2, True
