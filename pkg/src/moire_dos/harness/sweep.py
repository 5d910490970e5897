"""Self-convergence sweeps: one reference per (sweep, g), then every point."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, fields

import numpy as np

from ..cache import EigenCache
from ..dos import dos_config_average, dos_scheme_a, dos_scheme_b
from ..errors import MoireDosError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConvergenceRecord:
    sweep: str
    scheme: str
    g: str
    parameter: str
    value: float
    W: float | None
    L: float | None
    K: int | None
    Nb: int | None
    dos: float | None
    reference: float | None
    abs_error: float | None
    rel_error: float | None
    N: int | None
    nodes: int | None
    ref_scheme: str
    ref_W: float
    ref_L: float
    ref_K: int | None
    ref_Nb: int | None
    status: str
    message: str | None = None
    wall_time: float | None = None


RECORD_FIELDS = tuple(f.name for f in fields(ConvergenceRecord) if f.name != "wall_time")

_NUMERICAL = (MoireDosError, np.linalg.LinAlgError, ArithmeticError)


def compute_point(system, scheme, g, W, L, K=None, Nb=None, workers=None, cache=None):
    """``(value, N, node_count)`` for one scheme at one discretization."""
    if scheme == "A":
        r = dos_scheme_a(system, g, W, L, K, workers=workers, cache=cache)
        return r.value, r.matrix_dimension, r.node_count
    if scheme == "B":
        r = dos_scheme_b(system, g, W, L, cache=cache)
        return r.value, r.matrix_dimension, r.node_count
    if scheme == "average":
        v = dos_config_average(system, g, W, L, K, Nb, workers=workers, cache=cache)
        n = len(system.pairs(W, L))
        return v, n, (2 * K) ** system.dimension
    raise ValueError(f"unknown scheme {scheme!r}")


class _Memo:
    """Values already computed in this run, keyed by the full discretization."""

    def __init__(self, system, workers, cache):
        self.system = system
        self.workers = workers
        self.cache = cache
        self.values = {}

    def __call__(self, scheme, g, W, L, K=None, Nb=None):
        key = (scheme, g.key, W, L, K, Nb)
        if key not in self.values:
            self.values[key] = compute_point(self.system, scheme, g, W, L, K, Nb,
                                             self.workers, self.cache)
        return self.values[key]


def run_sweep(config, workers=None, cache=None, sweeps=None):
    """Run the sweeps of ``config`` (all, or those named in ``sweeps``).

    Returns records in sweep order, then g order, then value order.  A
    failing point becomes a record with ``status="failed"``; a failing
    reference propagates.
    """
    workers = config.workers if workers is None else workers
    if cache is None:
        cache = EigenCache(int(config.cache_mb * 2**20))
    system = config.system()
    memo = _Memo(system, workers, cache)
    records = []
    for sweep in config.sweeps:
        if sweeps is not None and sweep.name not in sweeps:
            continue
        ref = sweep.reference
        for g in sweep.tests:
            log.info("sweep %s, %s: reference %s", sweep.name, g.label, ref)
            ref_val = memo(ref.scheme, g, ref.W, ref.L, ref.K, ref.Nb)[0]
            base = dict(sweep=sweep.name, scheme=sweep.scheme, g=g.label,
                        parameter=sweep.parameter, reference=ref_val,
                        ref_scheme=ref.scheme, ref_W=ref.W, ref_L=ref.L,
                        ref_K=ref.K, ref_Nb=ref.Nb)
            for v in sweep.values:
                p = sweep.point(v)
                where = dict(value=float(v), W=p.get("W"), L=p.get("L"),
                             K=p.get("K") if sweep.scheme != "B" else None,
                             Nb=p.get("Nb") if sweep.scheme == "average" else None)
                t0 = time.perf_counter()
                try:
                    val, n, nodes = memo(sweep.scheme, g, where["W"], where["L"],
                                         where["K"], where["Nb"])
                except _NUMERICAL as exc:
                    log.warning("sweep %s point %r failed: %s", sweep.name, v, exc)
                    records.append(ConvergenceRecord(
                        **base, **where, dos=None, abs_error=None, rel_error=None,
                        N=None, nodes=None, status="failed", message=str(exc),
                        wall_time=time.perf_counter() - t0))
                    continue
                err = abs(val - ref_val)
                rel = err / abs(ref_val) if ref_val != 0 else math.inf
                records.append(ConvergenceRecord(
                    **base, **where, dos=val, abs_error=err, rel_error=rel, N=n,
                    nodes=nodes, status="ok", wall_time=time.perf_counter() - t0))
    return records
