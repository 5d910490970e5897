"""Ergodic averages of a Fourier mode over the other layer's lattice points."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from .fitting import fit_rate

RESONANCE_LEVEL = 0.5


@dataclass(frozen=True)
class ErgodicityResult:
    """``values[i] = |mean of exp(i l.s) over l in R_other with |l| <= R[i]|``.

    ``resonant`` is set when the average at the largest radius is still
    above ``RESONANCE_LEVEL``: the mode is (nearly) constant on the other
    lattice, as for commensurate layers.
    """

    s: np.ndarray
    R: np.ndarray
    values: np.ndarray
    counts: np.ndarray
    fit: object
    resonant: bool


def ergodic_average(lat, s, R):
    """Mean of ``exp(i l.s)`` over lattice points ``l`` of ``lat`` with ``|l| <= R``."""
    s = np.ascontiguousarray(np.atleast_1d(np.asarray(s, dtype=float)))
    a = np.ascontiguousarray(lat.basis)
    r = _box_radius_real(lat, R)
    re, im, count = kernels.lattice_phase_sum(a, r, s, float(R))
    return complex(re, im) / count, int(count)


def _box_radius_real(lat, R):
    # |n_i| <= R * |row i of inv(A)|, the real-space twin of _box_radius
    rows = np.linalg.norm(lat.inverse, axis=1)
    return np.array([int(np.floor(R * v)) + 1 for v in rows], dtype=np.int64)


def ergodicity_diagnostic(lat1, lat2, s, R_grid, layer=1):
    """Decay of the ergodic average of ``exp(i l.s)`` with radius.

    ``s`` is given by integer coordinates in the reciprocal lattice of
    ``layer``; the average runs over the real lattice of the other layer.
    The cell average of a nonzero mode is 0, so the values are errors; for
    incommensurate layers they decay like ``1/R`` (power slope near -1).
    """
    s_int = np.atleast_1d(np.asarray(s, dtype=np.int64))
    if not s_int.any():
        raise ValueError("s = 0 is the constant mode; its average is 1, not a test of ergodicity")
    own, other = (lat1, lat2) if layer == 1 else (lat2, lat1)
    svec = own.reciprocal_points(s_int[None, :])[0]
    R = np.asarray(R_grid, dtype=float)
    vals, counts = [], []
    for radius in R:
        z, c = ergodic_average(other, svec, radius)
        vals.append(abs(z))
        counts.append(c)
    vals = np.array(vals)
    resonant = bool(vals.size and vals[np.argmax(R)] > RESONANCE_LEVEL)
    fit = fit_rate(R, vals, "power") if R.size >= 3 else None
    return ErgodicityResult(svec, R, vals, np.array(counts), fit, resonant)


__all__ = ["ErgodicityResult", "ergodic_average", "ergodicity_diagnostic"]
