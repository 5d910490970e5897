"""Periodic potentials given by their Fourier coefficients on a reciprocal lattice."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .lattice import Lattice, _box_radius


@dataclass(frozen=True, eq=False)
class FourierPotential:
    """``v(x) = sum_G coefficient(n) exp(i G.x)`` with ``G = B n``.

    ``coefficient`` maps an integer array of shape (k, d) to k values and is
    called lazily during assembly.  ``real`` marks a real-valued potential
    (Hermitian coefficients); ``even`` marks ``coefficient(-n) ==
    coefficient(n)``.  ``decay_gamma`` documents the claimed envelope
    ``|V_G| <= C exp(-gamma |G|)`` and is never used in computations.
    """

    lattice: Lattice
    coefficient: Callable[[np.ndarray], np.ndarray]
    decay_gamma: float
    real: bool = True
    even: bool = True
    label: str = "custom"

    @property
    def key(self):
        return ("potential", self.label, self.lattice.key)

    @property
    def real_coefficients(self):
        return self.real and self.even

    def __call__(self, n):
        n = np.asarray(n, dtype=np.int64).reshape(-1, self.lattice.dimension)
        out = np.asarray(self.coefficient(n))
        return out.astype(float if self.real_coefficients else complex)

    def decay_ratio(self, radius=10.0):
        """max of |V_G| exp(gamma |G|) over lattice points with radius <= |G| <= 3 radius."""
        n = _lattice_box(self.lattice, 3 * radius)
        g = np.linalg.norm(self.lattice.reciprocal_points(n), axis=1)
        sel = (g >= radius) & (g <= 3 * radius)
        return float(np.max(np.abs(self(n[sel])) * np.exp(self.decay_gamma * g[sel])))


def _lattice_box(lattice, radius):
    r = _box_radius(lattice, radius)
    axes = [np.arange(-k, k + 1) for k in r]
    return np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=1)


def gaussian_model(lattice, gamma):
    """Coefficients ``exp(-gamma |G|^2)``: a real, even, positive potential."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    b = lattice.reciprocal.copy()

    def coefficient(n):
        g = n.astype(float) @ b.T
        return np.exp(-gamma * np.einsum("ij,ij->i", g, g))

    return FourierPotential(lattice, coefficient, float(gamma), True, True,
                            label=f"gaussian(gamma={gamma!r})")


def zero_potential(lattice):
    return FourierPotential(lattice, lambda n: np.zeros(n.shape[0]), np.inf, True, True,
                            label="zero")


def table_model(lattice, rows, real=None, decay_gamma=1.0):
    """Potential from explicit ``(n_1..n_d, re, im)`` rows; unlisted modes are 0.

    With ``real=True`` the table must satisfy ``V(-n) == conj(V(n))``; with
    ``real=None`` the flag is inferred from the data.
    """
    d = lattice.dimension
    table = {}
    for row in rows:
        if len(row) != d + 2:
            raise ValueError(f"table rows need {d + 2} entries, got {row!r}")
        key = tuple(int(v) for v in row[:d])
        table[key] = complex(float(row[d]), float(row[d + 1]))

    def lookup(k):
        return table.get(tuple(-v for v in k), 0.0)

    hermitian = all(np.isclose(lookup(k), np.conj(v), rtol=0, atol=1e-14) for k, v in table.items())
    even = all(np.isclose(lookup(k), v, rtol=0, atol=1e-14) for k, v in table.items())
    if real is None:
        real = hermitian
    elif real and not hermitian:
        raise ValueError("table flagged real but V(-n) != conj(V(n))")
    realvals = real and even

    def coefficient(n):
        vals = [table.get(tuple(row), 0.0) for row in n.tolist()]
        arr = np.array(vals, dtype=complex).reshape(-1)
        return arr.real if realvals else arr

    digest = hashlib.sha1(repr(sorted(table.items())).encode()).hexdigest()[:12]
    return FourierPotential(lattice, coefficient, float(decay_gamma), bool(real), bool(even),
                            label=f"table({digest})")


def eval_real(pot, x, radius):
    """Evaluate the truncated Fourier series ``sum_{|G| <= radius} V_G exp(iG.x)``."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = _lattice_box(pot.lattice, radius)
    g = pot.lattice.reciprocal_points(n)
    keep = np.einsum("ij,ij->i", g, g) <= radius * radius
    n, g = n[keep], g[keep]
    # sort by |G| so truncations at different radii share their leading terms
    order = np.lexsort((*n.T[::-1], np.einsum("ij,ij->i", g, g)))
    terms = np.asarray(pot(n[order]), dtype=complex) * np.exp(1j * (g[order] @ x))
    return complex(np.sum(terms))
