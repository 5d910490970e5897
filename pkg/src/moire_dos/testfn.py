"""Test functions g applied to the spectrum."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

_EXP_CUT = 40.0


@dataclass(frozen=True)
class TestFunction:
    """A real weight ``g`` with the strip half-width ``delta`` of its analytic
    continuation and its decay rate ``zeta``.

    ``delta`` and ``zeta`` only label convergence regimes; nothing is
    corrected with them.
    """

    __test__ = False  # keep pytest from collecting this class

    func: Callable[[np.ndarray], np.ndarray]
    kind: str
    delta: float
    zeta: float
    params: tuple = ()
    lower_bound_ok: bool = False
    zeta_nominal: bool = False

    def __call__(self, lam):
        return self.func(np.asarray(lam, dtype=float))

    @property
    def label(self):
        if not self.params:
            return self.kind
        return self.kind + "(" + ",".join(f"{k}={v!r}" for k, v in self.params) + ")"

    @property
    def key(self):
        return ("g", self.kind, self.params)


def gaussian(E, eps):
    """Normalized Gaussian of width ``eps`` centred at ``E``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    norm = 1.0 / (math.sqrt(2.0 * math.pi) * eps)

    def func(lam):
        return norm * np.exp(-((lam - E) ** 2) / (2.0 * eps * eps))

    # entire function; the Gaussian stays bounded by a constant only in a strip ~ eps wide
    return TestFunction(func, "gaussian", delta=float(eps), zeta=1.0 / float(eps),
                        params=(("center", float(E)), ("eps", float(eps))))


def fermi_energy(beta, mu):
    """``lam / (1 + exp(beta (lam - mu)))``, the energy-weighted occupation."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    beta = float(beta)
    mu = float(mu)

    def func(lam):
        t = beta * (lam - mu)
        hi = t > _EXP_CUT
        lo = t < -_EXP_CUT
        mid = ~(hi | lo)
        out = np.empty(np.shape(lam), dtype=float)
        out[hi] = lam[hi] * np.exp(-t[hi])
        out[lo] = lam[lo]
        out[mid] = lam[mid] / (1.0 + np.exp(t[mid]))
        return out

    # nearest pole of the Fermi factor sits at Im(lam) = pi / beta
    return TestFunction(func, "fermi_energy", delta=math.pi / beta, zeta=beta,
                        params=(("beta", beta), ("mu", mu)),
                        lower_bound_ok=True, zeta_nominal=True)


def custom(func, delta, zeta, name="custom"):
    """Wrap a user callable; ``delta``/``zeta`` are taken on trust."""
    if not (delta > 0 and zeta > 0):
        raise ValueError("delta and zeta must be positive")
    return TestFunction(lambda lam: np.asarray(func(lam), dtype=float), "custom",
                        float(delta), float(zeta), params=(("name", name),))


def zero():
    return custom(lambda lam: np.zeros_like(lam), 1.0, 1.0, name="zero")


def combine(alpha, g1, g2):
    """``alpha * g1 + g2`` (used for linearity checks)."""
    return custom(lambda lam: alpha * g1(lam) + g2(lam), min(g1.delta, g2.delta),
                  min(g1.zeta, g2.zeta), name=f"{alpha!r}*{g1.label}+{g2.label}")
