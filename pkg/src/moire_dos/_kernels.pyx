# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.

Every routine here has a numpy twin in ``_fallback.py`` that produces the
same numbers; ``moire_dos.kernels`` picks one at import time.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs, sqrt, copysign

cnp.import_array()

ctypedef fused scalar_t:
    double
    double complex


def scan_box(const double[:, ::1] b1, const double[:, ::1] b2,
             const cnp.int64_t[::1] r1, const cnp.int64_t[::1] r2,
             double w, double l, double tol):
    """Integer offsets (dn, dm) in the box with |u| <= w and |v| <= l.

    u = B1 dn + B2 dm, v = B1 dn - B2 dm.  Rows come out in lexicographic
    order of the concatenated tuple (dn, dm).
    """
    cdef Py_ssize_t d = b1.shape[0]
    cdef double w2 = (w * (1.0 + tol)) * (w * (1.0 + tol))
    cdef double l2 = (l * (1.0 + tol)) * (l * (1.0 + tol))
    cdef long n0, n1, m0, m1
    cdef double g1x, g1y, g2x, g2y, ux, uy, vx, vy
    out = []
    if d == 1:
        for n0 in range(-r1[0], r1[0] + 1):
            g1x = b1[0, 0] * n0
            for m0 in range(-r2[0], r2[0] + 1):
                g2x = b2[0, 0] * m0
                ux = g1x + g2x
                vx = g1x - g2x
                if ux * ux <= w2 and vx * vx <= l2:
                    out.append((n0, m0))
        return np.array(out, dtype=np.int64).reshape(-1, 2)
    for n0 in range(-r1[0], r1[0] + 1):
        for n1 in range(-r1[1], r1[1] + 1):
            g1x = b1[0, 0] * n0 + b1[0, 1] * n1
            g1y = b1[1, 0] * n0 + b1[1, 1] * n1
            for m0 in range(-r2[0], r2[0] + 1):
                for m1 in range(-r2[1], r2[1] + 1):
                    g2x = b2[0, 0] * m0 + b2[0, 1] * m1
                    g2y = b2[1, 0] * m0 + b2[1, 1] * m1
                    ux = g1x + g2x
                    uy = g1y + g2y
                    vx = g1x - g2x
                    vy = g1y - g2y
                    if ux * ux + uy * uy <= w2 and vx * vx + vy * vy <= l2:
                        out.append((n0, n1, m0, m1))
    return np.array(out, dtype=np.int64).reshape(-1, 4)


def fill_couplings(scalar_t[:, ::1] h, const cnp.int64_t[::1] ncode, const cnp.int64_t[::1] mcode,
                   const scalar_t[::1] tab1, const scalar_t[::1] tab2,
                   long off1, long off2):
    """Add V1 couplings between pairs sharing m, then V2 between pairs sharing n."""
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(n):
            if mcode[i] == mcode[j]:
                h[i, j] = h[i, j] + tab1[ncode[i] - ncode[j] + off1]
    for i in range(n):
        for j in range(n):
            if ncode[i] == ncode[j]:
                h[i, j] = h[i, j] + tab2[mcode[i] - mcode[j] + off2]


def compensated_sum(const double[::1] x):
    """Neumaier-compensated sum in index order."""
    cdef double s = 0.0, c = 0.0, t, xi
    cdef Py_ssize_t i
    for i in range(x.shape[0]):
        xi = x[i]
        t = s + xi
        if fabs(s) >= fabs(xi):
            c += (s - t) + xi
        else:
            c += (xi - t) + s
        s = t
    return s + c


def lattice_phase_sum(const double[:, ::1] a, const cnp.int64_t[::1] r, const double[::1] s, double radius):
    """Sum of exp(i l.s) over lattice points l = A n with |l| <= radius."""
    cdef Py_ssize_t d = a.shape[0]
    cdef double r2 = radius * radius
    cdef double re = 0.0, im = 0.0, lx, ly, ph
    cdef long count = 0
    cdef long n0, n1
    if d == 1:
        for n0 in range(-r[0], r[0] + 1):
            lx = a[0, 0] * n0
            if lx * lx <= r2:
                ph = lx * s[0]
                re += cos(ph)
                im += sin(ph)
                count += 1
        return re, im, count
    for n0 in range(-r[0], r[0] + 1):
        for n1 in range(-r[1], r[1] + 1):
            lx = a[0, 0] * n0 + a[0, 1] * n1
            ly = a[1, 0] * n0 + a[1, 1] * n1
            if lx * lx + ly * ly <= r2:
                ph = lx * s[0] + ly * s[1]
                re += cos(ph)
                im += sin(ph)
                count += 1
    return re, im, count


def tridiagonal_first_row(const double[::1] diag, const double[::1] offdiag, int max_iter=30):
    """Eigenvalues of a symmetric tridiagonal matrix and the squared first
    components of its eigenvectors, by implicit QL with Wilkinson shifts
    that rotates only the first row (the Golub-Welsch variant of imtql2).

    Returns ``(values, weights, ok)`` sorted by value; ``ok`` is False if an
    eigenvalue needed more than ``max_iter`` sweeps.
    """
    cdef Py_ssize_t n = diag.shape[0]
    d_arr = np.array(diag, dtype=np.float64)
    e_arr = np.zeros(n, dtype=np.float64)
    z_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] d = d_arr
    cdef double[::1] e = e_arr
    cdef double[::1] z = z_arr
    cdef Py_ssize_t i, l, m
    cdef int it
    cdef double b, c, f, g, p, r, s, eps = 2.220446049250313e-16
    if n == 0:
        return d_arr, z_arr, True
    for i in range(n - 1):
        e[i] = offdiag[i]
    z[0] = 1.0
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                if fabs(e[m]) <= eps * (fabs(d[m]) + fabs(d[m + 1])):
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                order = np.argsort(d_arr, kind="stable")
                return d_arr[order], z_arr[order] ** 2, False
            it += 1
            p = d[l]
            g = (d[l + 1] - p) / (2.0 * e[l])
            r = sqrt(g * g + 1.0)
            g = d[m] - p + e[l] / (g + copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                if fabs(f) >= fabs(g):
                    c = g / f
                    r = sqrt(c * c + 1.0)
                    e[i + 1] = f * r
                    s = 1.0 / r
                    c = c * s
                else:
                    s = f / g
                    r = sqrt(s * s + 1.0)
                    e[i + 1] = g * r
                    c = 1.0 / r
                    s = s * c
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                f = z[i + 1]
                z[i + 1] = s * z[i] + c * f
                z[i] = c * z[i] - s * f
                i -= 1
            d[l] = d[l] - p
            e[l] = g
            e[m] = 0.0
    order = np.argsort(d_arr, kind="stable")
    return d_arr[order], z_arr[order] ** 2, True
