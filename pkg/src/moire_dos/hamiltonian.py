"""Dense assembly of the truncated shifted Hamiltonian.

Matrix elements over the pairs (G1, G2) of a WaveVectorSet::

    H[G, G'] = 1/2 |xi + G1 + G2|^2 delta_{GG'}
               + V1(G1 - G1') delta_{G2 G2'} + V2(G2 - G2') delta_{G1 G1'}

The potential part depends on integer differences only and is assembled
once; each shift ``xi`` then adds the kinetic diagonal.  Diagonal entries
are ``(V1(0) + V2(0)) + kinetic`` in that order of additions.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import LatticeMismatchError

MAGIC = b"IHAM"
FLAG_COMPLEX = 1


def _difference_table(pot, coords, drop_tol):
    """Codes for ``coords`` and the coefficient at every difference in their box.

    Returns ``(codes, table, offset)`` with ``table[codes[i] - codes[j] +
    offset] == pot(coords[i] - coords[j])``.
    """
    lo = coords.min(axis=0)
    span = coords.max(axis=0) - lo
    radix = 2 * span + 1
    strides = np.ones_like(radix)
    for k in range(len(radix) - 2, -1, -1):
        strides[k] = strides[k + 1] * radix[k + 1]
    codes = np.ascontiguousarray((coords - lo) @ strides, dtype=np.int64)
    offset = int(span @ strides)
    axes = [np.arange(-s, s + 1, dtype=np.int64) for s in span]
    diffs = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=1)
    table = np.ascontiguousarray(pot(diffs))
    if drop_tol > 0:
        small = np.abs(table) < drop_tol
        small[offset] = False
        table[small] = 0
    return codes, table, offset


def center_momentum(pairs):
    """``G1 + G2`` of the center pair of ``pairs``."""
    d = pairs.dimension
    c = np.asarray(pairs.center, dtype=np.int64)
    return pairs.lat1.reciprocal_points(c[None, :d])[0] + pairs.lat2.reciprocal_points(c[None, d:])[0]


class HamiltonianFamily:
    """The potential part over a fixed WaveVectorSet, shifted on demand."""

    def __init__(self, pairs, v1, v2, drop_tol=0.0):
        if len(pairs) == 0:
            raise ValueError("empty planewave set")
        if drop_tol < 0:
            raise ValueError("drop_tol must be non-negative")
        if v1.lattice != pairs.lat1 or v2.lattice != pairs.lat2:
            raise LatticeMismatchError("potential lattices do not match the planewave set")
        if not (v1.real and v2.real):
            raise ValueError("potentials must be real-valued for a Hermitian Hamiltonian")
        self.pairs = pairs
        self.v1 = v1
        self.v2 = v2
        self.drop_tol = float(drop_tol)
        self.is_real = v1.real_coefficients and v2.real_coefficients
        dtype = float if self.is_real else complex
        ncode, tab1, off1 = _difference_table(v1, pairs.n, drop_tol)
        mcode, tab2, off2 = _difference_table(v2, pairs.m, drop_tol)
        n = len(pairs)
        base = np.zeros((n, n), dtype=dtype)
        kernels.fill_couplings(base, ncode, mcode, tab1.astype(dtype), tab2.astype(dtype), off1, off2)
        base.setflags(write=False)
        self.potential = base
        d = pairs.dimension
        c = np.asarray(pairs.center, dtype=np.int64)
        offsets = pairs.lat1.reciprocal_points(pairs.n - c[:d]) + pairs.lat2.reciprocal_points(pairs.m - c[d:])
        self.offsets = offsets
        self.center_momentum = center_momentum(pairs)

    def __len__(self):
        return len(self.pairs)

    def kinetic(self, xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        q = (xi + self.center_momentum) + self.offsets
        return 0.5 * np.einsum("ij,ij->i", q, q)

    def matrix(self, xi):
        h = self.potential.copy()
        idx = np.arange(h.shape[0])
        h[idx, idx] += self.kinetic(xi)
        return h

    def at(self, xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        return ShiftedHamiltonian(xi, self.pairs, self.matrix(xi))


@dataclass(frozen=True, eq=False)
class ShiftedHamiltonian:
    xi: np.ndarray
    pairs: object
    matrix: np.ndarray

    @property
    def dimension(self):
        return self.matrix.shape[0]

    @property
    def is_real(self):
        return not np.iscomplexobj(self.matrix)


def assemble(xi, pairs, v1, v2, drop_tol=0.0):
    """Assemble the shifted Hamiltonian at ``xi`` over ``pairs``."""
    return HamiltonianFamily(pairs, v1, v2, drop_tol).at(xi)


def dump_matrix(h, path):
    """Write a Hermitian matrix as IHAM: 16-byte header then the lower triangle.

    Header: ``b"IHAM"``, u32 N, u32 flags (bit 0: complex), u32 reserved=0,
    all little-endian.  Body: entries ``(i, j)`` for ``i`` in 0..N-1 and
    ``j`` in 0..i, row-major, as float64 LE (``re, im`` pairs when complex).
    """
    m = h.matrix if isinstance(h, ShiftedHamiltonian) else np.asarray(h)
    n = m.shape[0]
    cplx = np.iscomplexobj(m)
    rows, cols = np.tril_indices(n)
    body = m[rows, cols]
    if cplx:
        body = np.stack([body.real, body.imag], axis=1).ravel()
    with open(path, "wb") as fh:
        fh.write(MAGIC + struct.pack("<III", n, FLAG_COMPLEX if cplx else 0, 0))
        fh.write(np.ascontiguousarray(body, dtype="<f8").tobytes())


def load_matrix(path):
    """Read an IHAM file back into a full Hermitian matrix."""
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) != 16 or head[:4] != MAGIC:
            raise ValueError(f"{path}: not an IHAM file")
        n, flags, _ = struct.unpack("<III", head[4:])
        body = np.frombuffer(fh.read(), dtype="<f8")
    cplx = bool(flags & FLAG_COMPLEX)
    count = n * (n + 1) // 2
    if body.size != count * (2 if cplx else 1):
        raise ValueError(f"{path}: truncated body")
    vals = body[0::2] + 1j * body[1::2] if cplx else body.copy()
    m = np.zeros((n, n), dtype=complex if cplx else float)
    rows, cols = np.tril_indices(n)
    m[rows, cols] = vals
    m[cols, rows] = np.conj(vals) if cplx else vals
    return m
