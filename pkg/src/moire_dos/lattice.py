"""Bravais lattices, planewave-pair truncation and configuration folding."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InvalidLatticeError, LatticeMismatchError, ResourceLimitError

log = logging.getLogger(__name__)

DEFAULT_MAX_PAIRS = 2_000_000
BOUNDARY_RTOL = 1e-12


def reciprocal_basis(a):
    """Return ``2*pi*inv(A).T`` for a square, invertible basis matrix ``A``."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidLatticeError(f"basis must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidLatticeError("basis has non-finite entries")
    det = np.linalg.det(a)
    if not np.isfinite(det) or abs(det) <= 1e-300 or np.linalg.cond(a) > 1e14:
        raise InvalidLatticeError(f"basis is singular (det={det})")
    return 2.0 * np.pi * np.linalg.inv(a).T


@dataclass(frozen=True, eq=False)
class Lattice:
    """A Bravais lattice ``A Z^d``; columns of ``basis`` are lattice vectors."""

    basis: np.ndarray
    reciprocal: np.ndarray = field(init=False)
    inverse: np.ndarray = field(init=False)
    cell_volume: float = field(init=False)
    reciprocal_cell_volume: float = field(init=False)

    def __post_init__(self):
        a = np.array(np.atleast_2d(np.asarray(self.basis, dtype=float)), order="C")
        if a.shape[0] not in (1, 2):
            raise InvalidLatticeError(f"only d=1 and d=2 are supported, got d={a.shape[0]}")
        b = np.ascontiguousarray(reciprocal_basis(a))
        a.setflags(write=False)
        b.setflags(write=False)
        inv = np.linalg.inv(a)
        inv.setflags(write=False)
        object.__setattr__(self, "basis", a)
        object.__setattr__(self, "reciprocal", b)
        object.__setattr__(self, "inverse", inv)
        object.__setattr__(self, "cell_volume", float(abs(np.linalg.det(a))))
        object.__setattr__(self, "reciprocal_cell_volume", float(abs(np.linalg.det(b))))

    @property
    def dimension(self):
        return self.basis.shape[0]

    @property
    def key(self):
        return ("lattice", tuple(self.basis.ravel().tolist()))

    def __eq__(self, other):
        return isinstance(other, Lattice) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"Lattice(basis={self.basis.tolist()})"

    def points(self, n):
        """Real-space lattice vectors ``A n`` for integer rows ``n``."""
        return np.asarray(n, dtype=float) @ self.basis.T

    def reciprocal_points(self, n):
        return np.asarray(n, dtype=float) @ self.reciprocal.T


def square_lattice(a=1.0, angle=0.0):
    """Square lattice of spacing ``a`` rotated by ``angle`` radians."""
    c, s = math.cos(angle), math.sin(angle)
    return Lattice(a * np.array([[c, -s], [s, c]]))


@dataclass(frozen=True, eq=False)
class WaveVectorSet:
    """The planewave pairs of D_{W,L} around ``center``.

    ``entries`` holds integer coordinates ``(n, m)`` row-wise (first ``d``
    columns index lattice 1, the rest lattice 2), sorted lexicographically.
    """

    lat1: Lattice
    lat2: Lattice
    W: float
    L: float
    center: tuple
    entries: np.ndarray
    index_of_center: int

    @property
    def dimension(self):
        return self.lat1.dimension

    def __len__(self):
        return self.entries.shape[0]

    @property
    def n(self):
        return self.entries[:, : self.dimension]

    @property
    def m(self):
        return self.entries[:, self.dimension:]

    @property
    def g1(self):
        return self.lat1.reciprocal_points(self.n)

    @property
    def g2(self):
        return self.lat2.reciprocal_points(self.m)

    def momenta(self):
        """``G1 + G2`` for every entry, shape (N, d)."""
        return self.g1 + self.g2

    def index(self, pair):
        """Position of an integer pair ``(n1.., m1..)`` or ``-1`` when absent."""
        key = tuple(int(v) for v in np.ravel(pair))
        lookup = self.__dict__.get("_lookup")
        if lookup is None:
            lookup = {tuple(row): i for i, row in enumerate(self.entries.tolist())}
            object.__setattr__(self, "_lookup", lookup)
        return lookup.get(key, -1)

    def as_set(self):
        return {tuple(row) for row in self.entries.tolist()}


def ball_volume(d, L):
    """Volume of the d-ball of diameter ``L`` (length for d=1, disk area for d=2)."""
    if L <= 0:
        raise ValueError("L must be positive")
    if d == 1:
        return float(L)
    if d == 2:
        return math.pi * (L / 2.0) ** 2
    raise ValueError(f"unsupported dimension {d}")


def projected_pair_count(lat1, lat2, W, L):
    """Volume estimate of |D_{W,L}|: vol(B_W) vol(B_L) / (2^d |G1*| |G2*|)."""
    d = lat1.dimension
    vol = ball_volume(d, 2 * W) * ball_volume(d, 2 * L) / 2 ** d
    return vol / (lat1.reciprocal_cell_volume * lat2.reciprocal_cell_volume)


def _box_radius(lat, radius):
    rows = np.linalg.norm(np.linalg.inv(lat.reciprocal), axis=1)
    return np.array([int(math.floor(radius * r)) + 1 for r in rows], dtype=np.int64)


def _normalize_center(center, d):
    if center is None:
        return (0,) * (2 * d)
    flat = tuple(int(v) for v in np.ravel(np.asarray(center, dtype=object)))
    if len(flat) != 2 * d:
        raise ValueError(f"center needs {2 * d} integer coordinates, got {len(flat)}")
    return flat


def enumerate_pairs(lat1, lat2, W, L, center=None, max_entries=DEFAULT_MAX_PAIRS):
    """Enumerate D_{W,L}(center) in lexicographic order of ``(n, m)``.

    Membership is decided on offsets from the center, so the result for a
    shifted center is the origin-centred set translated exactly.
    """
    if lat1.dimension != lat2.dimension:
        raise LatticeMismatchError("lattices have different dimensions")
    if not (W > 0 and L > 0):
        raise ValueError("W and L must be positive")
    d = lat1.dimension
    center = _normalize_center(center, d)
    projected = projected_pair_count(lat1, lat2, W, L)
    if projected > max_entries:
        raise ResourceLimitError(int(math.ceil(projected)), max_entries)
    radius = 0.5 * (W + L) * (1.0 + BOUNDARY_RTOL)
    offsets = kernels.scan_box(
        np.ascontiguousarray(lat1.reciprocal), np.ascontiguousarray(lat2.reciprocal),
        _box_radius(lat1, radius), _box_radius(lat2, radius),
        float(W), float(L), BOUNDARY_RTOL,
    )
    if offsets.shape[0] > max_entries:
        raise ResourceLimitError(offsets.shape[0], max_entries)
    entries = offsets + np.asarray(center, dtype=np.int64)
    entries.setflags(write=False)
    zero = np.flatnonzero(~offsets.any(axis=1))
    return WaveVectorSet(lat1, lat2, float(W), float(L), center, entries, int(zero[0]))


def fold_to_cell(x, lat):
    """Representative of ``x`` modulo the lattice with fractional coords in [0, 1)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    k = np.floor(lat.inverse @ x)
    for _ in range(2):
        b = x - lat.basis @ k
        frac = lat.inverse @ b
        if np.all((frac >= 0.0) & (frac < 1.0)):
            return b
        k = k + np.floor(frac)
    # rounding pins a coordinate on the cell boundary; snap it to 0
    frac = np.where((frac >= 1.0) | (frac < 0.0), 0.0, frac)
    return lat.basis @ frac


@dataclass
class IncommensurabilityReport:
    """Best small-integer relations between two lattices.

    ``reciprocal_relation`` / ``real_relation`` are ``(m, n, residual)``
    with ``M m ~ n``; ``M`` is ``inv(B1) B2`` (reciprocal) or ``inv(A1) A2``
    (real space).  ``entries`` lists the best rational approximation
    ``(i, j, value, p, q, residual)`` of each entry of the reciprocal ``M``.
    """

    denominator_bound: int
    tolerance: float
    reciprocal_relation: tuple
    real_relation: tuple
    entries: list

    @property
    def relation_found(self):
        return (self.reciprocal_relation[2] < self.tolerance
                or self.real_relation[2] < self.tolerance)


def _best_relation(mat, bound):
    d = mat.shape[0]
    best = (None, None, math.inf)
    for m in itertools.product(range(-bound, bound + 1), repeat=d):
        if not any(m) or next(v for v in m if v) < 0:
            continue
        img = mat @ np.array(m, dtype=float)
        n = np.rint(img)
        res = float(np.max(np.abs(img - n)))
        if res < best[2] - 1e-15:
            best = (m, tuple(int(v) for v in n), res)
    return best


def _best_rational(x, bound):
    best = (0, 1, math.inf)
    for q in range(1, bound + 1):
        p = round(q * x)
        res = abs(q * x - p)
        if res < best[2] - 1e-15:
            best = (int(p), q, res)
    return best


def incommensurability_diagnostic(lat1, lat2, denominator_bound=50, tol=1e-3):
    """Search for commensurate directions with integer coordinates up to a bound.

    This is a heuristic: finding nothing does not prove incommensurability.
    A relation found is logged as a warning and reported; it never blocks a
    computation.
    """
    if lat1.dimension != lat2.dimension:
        raise LatticeMismatchError("lattices have different dimensions")
    recip = np.linalg.solve(lat1.reciprocal, lat2.reciprocal)
    real = np.linalg.solve(lat1.basis, lat2.basis)
    entries = []
    for i, j in itertools.product(range(recip.shape[0]), repeat=2):
        p, q, res = _best_rational(float(recip[i, j]), denominator_bound)
        entries.append((i, j, float(recip[i, j]), p, q, res))
    report = IncommensurabilityReport(
        denominator_bound, tol,
        _best_relation(recip, denominator_bound),
        _best_relation(real, denominator_bound),
        entries,
    )
    if report.relation_found:
        log.warning("lattices look commensurate: reciprocal %s, real %s",
                    report.reciprocal_relation, report.real_relation)
    return report
