"""Compiled kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints the best-of-N time of each kernel in both backends, their ratio,
and whether the outputs agree (bit-identical, or to rounding for the phase
sum, which vectorizes its reduction differently, and for the tridiagonal
eigensolver, whose fallback is LAPACK).
"""

import argparse
import math
import timeit

import numpy as np

from moire_dos import _fallback
from moire_dos.hamiltonian import _difference_table
from moire_dos.harness.diagnostics import _box_radius_real
from moire_dos.lattice import Lattice, _box_radius, enumerate_pairs, square_lattice
from moire_dos.potential import gaussian_model

try:
    from moire_dos import _kernels
except ImportError:  # pure install
    _kernels = None


def cases():
    lat1 = Lattice([[math.sqrt(5) - 1]])
    lat2 = Lattice([[2.0]])
    sq1 = square_lattice(2.0)
    sq2 = square_lattice(2.0, math.pi / 10)
    out = []
    for name, a, b, W, L in [("scan_box 1D W=25 L=3000", lat1, lat2, 25.0, 3000.0),
                             ("scan_box 2D W=8 L=40", sq1, sq2, 8.0, 40.0)]:
        r = 0.5 * (W + L) * (1 + 1e-12)
        args = (np.ascontiguousarray(a.reciprocal), np.ascontiguousarray(b.reciprocal),
                _box_radius(a, r), _box_radius(b, r), W, L, 1e-12)
        out.append((name, "scan_box", args, None))
    for name, a, b, W, L in [("fill_couplings 1D N~1250", lat1, lat2, 25.0, 400.0),
                             ("fill_couplings 2D W=5 L=30", sq1, sq2, 5.0, 30.0)]:
        pairs = enumerate_pairs(a, b, W, L)
        v1, v2 = gaussian_model(a, 0.01), gaussian_model(b, 0.01)
        nc, t1, o1 = _difference_table(v1, pairs.n, 0.0)
        mc, t2, o2 = _difference_table(v2, pairs.m, 0.0)
        n = len(pairs)
        out.append((name, "fill_couplings", (nc, mc, t1, t2, o1, o2), n))
    x = np.random.default_rng(0).standard_normal(1_000_000)
    out.append(("compensated_sum 1e6", "compensated_sum", (x,), None))
    s = np.ascontiguousarray(sq1.reciprocal[:, 0])
    out.append(("lattice_phase_sum 2D R=400", "lattice_phase_sum",
                (np.ascontiguousarray(sq2.basis), _box_radius_real(sq2, 400.0), s, 400.0),
                None))
    # a scheme-A node at (W, L) = (25, 400): tridiagonal form of H(0.3)
    from moire_dos.hamiltonian import HamiltonianFamily
    from moire_dos.spectral import _tridiagonalize
    pairs = enumerate_pairs(lat1, lat2, 25.0, 400.0)
    fam = HamiltonianFamily(pairs, gaussian_model(lat1, 0.01), gaussian_model(lat2, 0.01))
    d, e = _tridiagonalize(np.asfortranarray(fam.matrix([0.3])), (0.3,))
    out.append((f"tridiagonal_first_row N={len(d)}", "tridiagonal_first_row",
                (np.ascontiguousarray(d), np.ascontiguousarray(e)), None))
    return out


def run(mod, fn, args, n):
    if fn == "fill_couplings":
        h = np.zeros((n, n))
        nc, mc, t1, t2, o1, o2 = args
        getattr(mod, fn)(h, nc, mc, t1, t2, o1, o2)
        return h
    return getattr(mod, fn)(*args)


def same(a, b, fn):
    if fn == "lattice_phase_sum":
        return a[2] == b[2] and abs(complex(a[0], a[1]) - complex(b[0], b[1])) <= 1e-12 * max(1, a[2])
    if fn == "tridiagonal_first_row":
        # QL sweep against LAPACK: same eigenpairs to rounding, not the same bits
        return (a[2] and b[2] and np.allclose(a[0], b[0], rtol=0, atol=1e-11)
                and np.allclose(a[1], b[1], rtol=0, atol=1e-12))
    if isinstance(a, np.ndarray):
        return a.shape == b.shape and np.array_equal(a, b)
    return a == b


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; nothing to compare")
        return 1
    print(f"{'kernel':34s} {'cython [s]':>11s} {'numpy [s]':>11s} {'speedup':>8s}  agree")
    for name, fn, a, n in cases():
        tc = min(timeit.repeat(lambda: run(_kernels, fn, a, n), number=1, repeat=args.repeat))
        tp = min(timeit.repeat(lambda: run(_fallback, fn, a, n), number=1, repeat=args.repeat))
        ok = same(run(_kernels, fn, a, n), run(_fallback, fn, a, n), fn)
        print(f"{name:34s} {tc:11.4g} {tp:11.4g} {tp / tc:8.1f}  {ok}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
