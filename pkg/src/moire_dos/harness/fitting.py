"""Least-squares convergence-rate fits.

``exponential``: ``log(err) = intercept + slope * x``
``power``:       ``log(err) = intercept + slope * log(x)``

``x`` is the swept parameter, or its reciprocal with ``inverse=True`` (for
mesh sizes, where the quadrature error behaves like ``exp(-c / h)``).
Errors at or below the floor are dropped before fitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import MoireDosError

ERROR_FLOOR = 1e-12


class InsufficientPointsError(MoireDosError, ValueError):
    pass


@dataclass(frozen=True)
class RateFit:
    model: str
    slope: float
    intercept: float
    r_squared: float
    points_used: int
    inverse: bool = False
    envelope: bool = False

    def predict(self, x):
        """Fitted error at parameter value(s) ``x``."""
        x = np.asarray(x, dtype=float)
        if self.inverse:
            x = 1.0 / x
        t = np.log(x) if self.model == "power" else x
        return np.exp(self.intercept + self.slope * t)

    def as_dict(self):
        return {"model": self.model, "slope": self.slope, "intercept": self.intercept,
                "r_squared": self.r_squared, "points_used": self.points_used,
                "inverse": self.inverse, "envelope": self.envelope}


def suffix_envelope(x, err):
    """Smallest non-increasing majorant of ``err`` along increasing ``x``.

    ``env[i] = max(err[j] for x[j] >= x[i])``.  Oscillating errors with a
    decaying bound are fitted through this envelope.
    """
    order = np.argsort(x, kind="stable")
    e = np.asarray(err, dtype=float)[order]
    env = np.maximum.accumulate(e[::-1])[::-1]
    out = np.empty_like(env)
    out[order] = env
    return out


def fit_rate(x, err, model, inverse=False, envelope=False, floor=ERROR_FLOOR):
    """Fit ``model`` to errors ``err`` at parameters ``x``."""
    if model not in ("exponential", "power"):
        raise ValueError(f"unknown model {model!r}")
    x = np.asarray(x, dtype=float)
    err = np.abs(np.asarray(err, dtype=float))
    if x.shape != err.shape:
        raise ValueError("x and err must have the same length")
    ok = np.isfinite(err) & np.isfinite(x)
    x, err = x[ok], err[ok]
    if envelope and x.size:
        # majorant along the direction of convergence
        err = suffix_envelope(1.0 / x if inverse else x, err)
    keep = err > floor
    x, err = x[keep], err[keep]
    if x.size < 3:
        raise InsufficientPointsError(
            f"need at least 3 errors above {floor:g} for a fit, have {x.size}")
    t = 1.0 / x if inverse else x
    if model == "power":
        if np.any(t <= 0):
            raise ValueError("power fits need positive parameters")
        t = np.log(t)
    y = np.log(err)
    A = np.column_stack([t, np.ones_like(t)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * t + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(model, float(slope), float(intercept), r2, int(x.size), inverse, envelope)


def fit_records(records, model, inverse=False, envelope=False, floor=ERROR_FLOOR):
    """Fit the absolute errors of successful records against their swept value."""
    good = [r for r in records if r.status == "ok"]
    x = [r.value for r in good]
    err = [r.abs_error for r in good]
    return fit_rate(x, err, model, inverse=inverse, envelope=envelope, floor=floor)


def is_monotone(err, jitter=0.10, floor=ERROR_FLOOR):
    """Errors non-increasing along the sweep, allowing ``jitter`` relative
    increases; steps between values at or below the floor are ignored."""
    err = np.abs(np.asarray(err, dtype=float))
    for a, b in zip(err[:-1], err[1:]):
        if b <= floor or (a <= floor and b <= floor):
            continue
        if b > a * (1.0 + jitter) and not math.isclose(a, b):
            return False
    return True
