"""Density of states by the two planewave schemes, and the local densities.

Scheme A integrates the reciprocal-space LDoS ``[g(H(xi))]_{0,0}`` with the
uniform rule ``h^d sum_{xi in mesh}`` over ``[-W, W)^d``.  Scheme B takes
the volume-normalized trace of ``g`` on the unshifted truncated matrix.

Per-node work fans out over a process pool; results are buffered and
reduced in mesh order, so values do not depend on the worker count.
"""

from __future__ import annotations

import itertools
import logging
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import multiprocessing
import numpy as np
from threadpoolctl import threadpool_limits

from . import kernels
from .cache import DEFAULT_CACHE, EigenCache
from .errors import EigenSolverError, LatticeMismatchError, MoireDosError, NodeEvaluationError
from .hamiltonian import HamiltonianFamily
from .lattice import DEFAULT_MAX_PAIRS, ball_volume, enumerate_pairs
from .spectral import (eigenvalues, function_row, parity_eigenvalues, parity_partner,
                       spectral_weights)

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class System:
    """Two stacked layers: their potentials carry the lattices."""

    v1: object
    v2: object
    max_pairs: int = DEFAULT_MAX_PAIRS
    drop_tol: float = 0.0
    _families: EigenCache = field(default_factory=lambda: EigenCache(256 * 2**20), repr=False)

    def __post_init__(self):
        if self.v1.lattice.dimension != self.v2.lattice.dimension:
            raise LatticeMismatchError("layers have different dimensions")

    @property
    def lat1(self):
        return self.v1.lattice

    @property
    def lat2(self):
        return self.v2.lattice

    @property
    def dimension(self):
        return self.lat1.dimension

    @property
    def key(self):
        return (self.v1.key, self.v2.key, self.drop_tol)

    @property
    def inversion_symmetric(self):
        """True when ``H(-xi)`` is ``H(xi)`` with pairs negated."""
        return (self.v1.real_coefficients and self.v2.real_coefficients)

    def pairs(self, W, L, center=None):
        return enumerate_pairs(self.lat1, self.lat2, W, L, center, self.max_pairs)

    def family(self, W, L):
        key = ("family", float(W), float(L))
        fam = self._families.get(key)
        if fam is None:
            fam = HamiltonianFamily(self.pairs(W, L), self.v1, self.v2, self.drop_tol)
            self._families.put(key, (fam, fam.potential))
        else:
            fam = fam[0]
        return fam


@dataclass(frozen=True)
class QuadratureMesh:
    """Nodes ``h k`` for integer ``k`` in ``[-K, K)^d``, ``h = W / K``."""

    W: float
    K: int
    dimension: int = 1

    def __post_init__(self):
        if not self.W > 0:
            raise ValueError("W must be positive")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError("K must be a positive integer")

    @property
    def h(self):
        return self.W / self.K

    @property
    def indices(self):
        ks = range(-self.K, self.K)
        return np.array(list(itertools.product(ks, repeat=self.dimension)), dtype=np.int64)

    @property
    def nodes(self):
        return self.indices * self.h

    def __len__(self):
        return (2 * self.K) ** self.dimension


@dataclass(frozen=True)
class DosResult:
    value: float
    scheme: str
    W: float
    L: float
    K: int | None
    matrix_dimension: int
    node_count: int
    wall_time: float


# ---------------------------------------------------------------------------
# per-node spectral data, serial or pooled

_WORKER = {}


class _Shifter:
    """Plain-array copy of a HamiltonianFamily that pickles cheaply."""

    def __init__(self, fam):
        self.potential = fam.potential
        self.offsets = fam.offsets
        self.center_momentum = fam.center_momentum
        self.center = fam.pairs.index_of_center

    def matrix(self, xi):
        q = (xi + self.center_momentum) + self.offsets
        h = self.potential.copy()
        idx = np.arange(h.shape[0])
        h[idx, idx] += 0.5 * np.einsum("ij,ij->i", q, q)
        return h

    def evaluate(self, xi, mode):
        """``(values, weights)`` for the reciprocal LDoS, or the full
        ``(values, vectors)`` when whole kernel rows are needed."""
        m = self.matrix(xi)
        try:
            if mode == "weights":
                return spectral_weights(m, self.center, tuple(xi.tolist()))
            return np.linalg.eigh(m)
        except (np.linalg.LinAlgError, EigenSolverError) as exc:
            raise NodeEvaluationError(xi.tolist(), f"eigensolver failed for N={m.shape[0]}: {exc}") from exc


def _worker_init(shifter):
    _WORKER["shifter"] = shifter
    _WORKER["limits"] = threadpool_limits(1)


def _worker_run(args):
    xis, mode = args
    sh = _WORKER["shifter"]
    return [sh.evaluate(xi, mode) for xi in xis]


def default_workers():
    return os.cpu_count() or 1


def _node_data(system, W, L, xis, mode, workers, cache):
    """Spectral data at each shift in ``xis`` (rows), cached per node."""
    cache = DEFAULT_CACHE if cache is None else cache
    fam = system.family(W, L)
    base = (system.key, float(W), float(L), mode)
    out = [None] * len(xis)
    todo = []
    for i, xi in enumerate(xis):
        hit = cache.get(base + (tuple(xi.tolist()),))
        if hit is None:
            todo.append(i)
        else:
            out[i] = hit
    if todo:
        shifter = _Shifter(fam)
        workers = default_workers() if workers is None else int(workers)
        if workers <= 1 or len(todo) < 2 * workers:
            with threadpool_limits(1):
                results = [shifter.evaluate(xis[i], mode) for i in todo]
        else:
            chunks = np.array_split(np.array(todo), min(len(todo), 4 * workers))
            ctx = multiprocessing.get_context("fork")
            with ProcessPoolExecutor(workers, mp_context=ctx, initializer=_worker_init,
                                     initargs=(shifter,)) as pool:
                parts = pool.map(_worker_run, [(xis[c], mode) for c in chunks])
                results = [r for part in parts for r in part]
        for i, res in zip(todo, results):
            out[i] = res
            cache.put(base + (tuple(xis[i].tolist()),), res)
    return fam, out


def _canonical_nodes(mesh, symmetric):
    """Map each mesh index to the node actually evaluated.

    With inversion symmetry the value at ``-xi`` equals the value at ``xi``,
    so each pair ``{k, -k}`` inside the mesh is evaluated once at the
    lexicographically larger index.
    """
    ks = mesh.indices
    if not symmetric:
        return ks, np.arange(len(ks))
    lookup = {tuple(k): i for i, k in enumerate(ks.tolist())}
    rep = np.empty(len(ks), dtype=np.int64)
    for i, k in enumerate(ks.tolist()):
        neg = tuple(-v for v in k)
        j = lookup.get(neg)
        rep[i] = i if j is None or tuple(k) >= neg else j
    uniq = np.unique(rep)
    pos = np.searchsorted(uniq, rep)
    return ks[uniq], pos


# ---------------------------------------------------------------------------
# scheme A / scheme B

def node_values(system, g, W, L, K, workers=None, cache=None):
    """Reciprocal LDoS at every mesh node, in mesh order."""
    mesh = QuadratureMesh(float(W), int(K), system.dimension)
    ks, pos = _canonical_nodes(mesh, system.inversion_symmetric)
    xis = ks * mesh.h
    fam, data = _node_data(system, W, L, xis, "weights", workers, cache)
    vals = np.array([np.sum(g(w) * wt) for w, wt in data])
    return mesh, fam, vals[pos]


def dos_scheme_a(system, g, W, L, K, workers=None, cache=None):
    """``h^d sum_{xi in mesh} [g(H(xi))]_{0,0}`` with compensated summation."""
    if not (W > 0 and L > 0):
        raise ValueError("W and L must be positive")
    if int(K) != K or K < 1:
        raise ValueError("K must be a positive integer")
    t0 = time.perf_counter()
    mesh, fam, vals = node_values(system, g, W, L, K, workers, cache)
    total = kernels.compensated_sum(np.ascontiguousarray(vals, dtype=float))
    value = mesh.h ** system.dimension * total
    return DosResult(float(value), "A", float(W), float(L), int(K), len(fam),
                     len(mesh), time.perf_counter() - t0)


def scheme_b_spectrum(system, W, L, cache=None):
    """Eigenvalues of the unshifted truncated Hamiltonian (cached)."""
    cache = DEFAULT_CACHE if cache is None else cache
    key = (system.key, float(W), float(L), "trace")
    w = cache.get(key)
    if w is not None:
        return w
    pairs = system.pairs(W, L)
    fam = HamiltonianFamily(pairs, system.v1, system.v2, system.drop_tol)
    m = fam.matrix(np.zeros(system.dimension))
    del fam
    partner = parity_partner(pairs) if system.inversion_symmetric else None
    if partner is not None:
        w = parity_eigenvalues(m, partner, (0.0,) * system.dimension)
    else:
        w = eigenvalues(m, (0.0,) * system.dimension)
    cache.put(key, w)
    return w


def dos_scheme_b(system, g, W, L, cache=None):
    """``|G1*| |G2*| / S_{d,L} * Tr g(H^{D_{W,L}})``."""
    if not (W > 0 and L > 0):
        raise ValueError("W and L must be positive")
    t0 = time.perf_counter()
    w = scheme_b_spectrum(system, W, L, cache)
    pref = system.lat1.reciprocal_cell_volume * system.lat2.reciprocal_cell_volume
    pref /= ball_volume(system.dimension, L)
    trace = kernels.compensated_sum(np.ascontiguousarray(g(w), dtype=float))
    return DosResult(float(pref * trace), "B", float(W), float(L), None, len(w), 1,
                     time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# local densities

def _neumaier_rows(rows):
    s = np.zeros_like(rows[0])
    c = np.zeros_like(rows[0])
    for x in rows:
        t = s + x
        big = np.abs(s) >= np.abs(x)
        c += np.where(big, (s - t) + x, (x - t) + s)
        s = t
    return s + c


def kernel_row(system, g, W, L, K, workers=None, cache=None):
    """``h^d sum_xi [g(H(xi))]_{0,G}`` for every pair G of D_{W,L}.

    Returns ``(pairs, row)``.  Every local density below is a phase sum of
    this row.
    """
    cache = DEFAULT_CACHE if cache is None else cache
    key = (system.key, g.key, float(W), float(L), int(K), "row")
    hit = cache.get(key)
    pairs = system.pairs(W, L)
    if hit is not None:
        return pairs, hit
    mesh = QuadratureMesh(float(W), int(K), system.dimension)
    _, data = _node_data(system, W, L, mesh.nodes, "full", workers, cache)
    c = pairs.index_of_center
    rows = [function_row(_Dec(w, v), g, c) for w, v in data]
    row = mesh.h ** system.dimension * _neumaier_rows(rows)
    cache.put(key, row)
    return pairs, row


class _Dec:
    def __init__(self, values, vectors):
        self.values = values
        self.vectors = vectors


def _real_part(z, what):
    if abs(z.imag) > 1e-8:
        warnings.warn(f"{what}: discarding imaginary part {z.imag:.3e}", RuntimeWarning, stacklevel=3)
    return float(z.real)


def spatial_ldos(system, g, x, W, L, K, workers=None, cache=None):
    """``(2 pi)^-d sum_G exp(-i (G1 + G2).x) h^d sum_xi [g(H(xi))]_{0,G}``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    pairs, row = kernel_row(system, g, W, L, K, workers, cache)
    phase = np.exp(-1j * ((pairs.g1 + pairs.g2) @ x))
    z = complex(np.sum(phase * row)) / (2.0 * math.pi) ** system.dimension
    return _real_part(z, "spatial LDoS")


def _check_in_cell(b, lat, name):
    frac = lat.inverse @ b
    if np.any(frac < -1e-12) or np.any(frac >= 1.0 + 1e-12):
        raise ValueError(f"{name} is outside its unit cell (fractional coords {frac.tolist()})")


def config_ldos(system, g, b1, b2, W, L, K, workers=None, cache=None):
    """``sum_G exp(-i (b1.G1 + b2.G2)) h^d sum_xi [g(H(xi))]_{0,G}``.

    No ``(2 pi)^-d`` prefactor: ``spatial_ldos(x) * (2 pi)^d`` equals this at
    ``(fold(x, lat1), fold(x, lat2))``.
    """
    b1 = np.atleast_1d(np.asarray(b1, dtype=float))
    b2 = np.atleast_1d(np.asarray(b2, dtype=float))
    _check_in_cell(b1, system.lat1, "b1")
    _check_in_cell(b2, system.lat2, "b2")
    pairs, row = kernel_row(system, g, W, L, K, workers, cache)
    phase = np.exp(-1j * (pairs.g1 @ b1 + pairs.g2 @ b2))
    return _real_part(complex(np.sum(phase * row)), "configuration LDoS")


def config_grid(lat, nb):
    """Uniform ``nb^d`` grid ``A (i / nb)`` over the unit cell."""
    idx = np.array(list(itertools.product(range(nb), repeat=lat.dimension)), dtype=float)
    return (idx / nb) @ lat.basis.T


def dos_config_average(system, g, W, L, K, Nb, workers=None, cache=None):
    """Average of ``config_ldos`` over an ``Nb^d x Nb^d`` grid on the two cells.

    A uniform-grid average realizes ``(|G1||G2|)^-1`` times the double cell
    integral.  config_ldos already carries no ``(2 pi)^-d``, so the average
    targets the scheme-A value directly; the reconciliation constant with
    the spatial LDoS is ``(2 pi)^d`` and is applied there, not here.
    """
    if int(Nb) != Nb or Nb < 1:
        raise ValueError("Nb must be a positive integer")
    pairs, row = kernel_row(system, g, W, L, K, workers, cache)
    grid1 = config_grid(system.lat1, int(Nb))
    grid2 = config_grid(system.lat2, int(Nb))
    ph1 = np.exp(-1j * (grid1 @ pairs.g1.T))   # (nb^d, N)
    ph2 = np.exp(-1j * (grid2 @ pairs.g2.T))
    vals = []
    worst = 0.0
    for p1 in ph1:
        z = (p1[None, :] * ph2) @ row
        vals.extend(z.real.tolist())
        worst = max(worst, float(np.max(np.abs(z.imag))))
    if worst > 1e-8:
        warnings.warn(f"configuration LDoS: discarding imaginary parts up to {worst:.3e}",
                      RuntimeWarning, stacklevel=2)
    return kernels.compensated_sum(np.array(vals)) / len(vals)


__all__ = [
    "System", "QuadratureMesh", "DosResult", "dos_scheme_a", "dos_scheme_b",
    "spatial_ldos", "config_ldos", "dos_config_average", "kernel_row", "node_values",
    "MoireDosError",
]
