"""``moire-dos`` command line.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from ..cache import EigenCache
from ..dos import config_ldos, dos_config_average, dos_scheme_a, dos_scheme_b, spatial_ldos
from ..errors import ConfigError, MoireDosError
from ..lattice import fold_to_cell, incommensurability_diagnostic
from .config import load_config
from .diagnostics import ergodicity_diagnostic
from .fitting import InsufficientPointsError, fit_records
from .output import emit_outputs, fmt_float
from .sweep import run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("moire_dos")


def _floats(text):
    return [float(v) for v in text.replace(",", " ").split()]


def build_parser():
    p = argparse.ArgumentParser(prog="moire-dos", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", help="override output.dir")
    common.add_argument("--workers", type=int, help="worker processes for mesh nodes")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized points")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run every sweep and write outputs")
    run.add_argument("config")
    run.add_argument("--sweep", action="append", help="only run the named sweep(s)")

    dos = sub.add_parser("dos", parents=[common], help="print one DoS value per test function")
    dos.add_argument("config")
    dos.add_argument("--scheme", choices=["a", "b", "average"], required=True)

    ld = sub.add_parser("ldos", parents=[common], help="print local densities")
    ld.add_argument("config")
    ld.add_argument("--x", type=_floats, action="append", help="spatial point (d numbers)")
    ld.add_argument("--b1", type=_floats, help="layer-1 configuration (d numbers)")
    ld.add_argument("--b2", type=_floats, help="layer-2 configuration (d numbers)")
    ld.add_argument("--random", type=int, default=0,
                    help="also evaluate at this many random points drawn with --seed")

    dg = sub.add_parser("diag", parents=[common], help="lattice diagnostics")
    dg.add_argument("which", choices=["ergodicity", "incommensurability"])
    dg.add_argument("config")
    return p


def _dos_point(cfg):
    for k in ("W", "L"):
        if k not in cfg.dos:
            raise ConfigError(f"dos.{k}", "missing required key for this command")
    return cfg.dos


def cmd_run(cfg, args, out):
    records = run_sweep(cfg, workers=args.workers, sweeps=args.sweep)
    fits = {}
    for sweep in cfg.sweeps:
        if sweep.fit is None or (args.sweep and sweep.name not in args.sweep):
            continue
        for g in sweep.tests:
            recs = [r for r in records if r.sweep == sweep.name and r.g == g.label]
            key = f"{sweep.name} / {g.label}"
            try:
                fits[key] = fit_records(recs, sweep.fit.model, sweep.fit.inverse, sweep.fit.envelope)
            except InsufficientPointsError as exc:
                fits[key] = f"no fit: {exc}"
    outdir = Path(args.output_dir or cfg.output_dir)
    emit_outputs(outdir, records, fits, cfg.raw)
    failed = sum(r.status != "ok" for r in records)
    print(f"{len(records)} records ({failed} failed) written to {outdir}", file=out)
    for key, f in fits.items():
        if isinstance(f, str):
            print(f"{key}: {f}", file=out)
        else:
            print(f"{key}: {f.model} slope {f.slope:.6g} r2 {f.r_squared:.6f} "
                  f"({f.points_used} points)", file=out)
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_dos(cfg, args, out):
    p = _dos_point(cfg)
    system = cfg.system()
    cache = EigenCache(int(cfg.cache_mb * 2**20))
    workers = args.workers if args.workers is not None else cfg.workers
    for g in cfg.tests:
        if args.scheme == "b":
            val = dos_scheme_b(system, g, p["W"], p["L"], cache=cache).value
        elif "K" not in p:
            raise ConfigError("dos.K", "scheme A needs K (or h)")
        elif args.scheme == "a":
            val = dos_scheme_a(system, g, p["W"], p["L"], p["K"], workers, cache).value
        else:
            if "Nb" not in p:
                raise ConfigError("dos.Nb", "the configuration average needs Nb")
            val = dos_config_average(system, g, p["W"], p["L"], p["K"], p["Nb"], workers, cache)
        print(f"{g.label}\t{fmt_float(val)}", file=out)
    return EXIT_OK


def cmd_ldos(cfg, args, out):
    p = _dos_point(cfg)
    if "K" not in p:
        raise ConfigError("dos.K", "local densities need K (or h)")
    d = cfg.dimension
    xs = list(args.x or [])
    if args.random:
        rng = np.random.default_rng(args.seed)
        span = 4.0 * max(np.abs(cfg.lattice1.basis).max(), np.abs(cfg.lattice2.basis).max())
        xs += [list(v) for v in rng.uniform(-span, span, size=(args.random, d))]
    if (args.b1 is None) != (args.b2 is None):
        raise ConfigError("--b1/--b2", "give both configurations or neither")
    if not xs and args.b1 is None:
        raise ConfigError("--x", "nothing to evaluate: pass --x, --b1/--b2 or --random")
    for v in xs + ([args.b1, args.b2] if args.b1 is not None else []):
        if len(v) != d:
            raise ConfigError("--x", f"points need {d} coordinates, got {v}")
    system = cfg.system()
    cache = EigenCache(int(cfg.cache_mb * 2**20))
    workers = args.workers if args.workers is not None else cfg.workers
    for g in cfg.tests:
        for x in xs:
            val = spatial_ldos(system, g, x, p["W"], p["L"], p["K"], workers, cache)
            b1 = fold_to_cell(x, cfg.lattice1)
            b2 = fold_to_cell(x, cfg.lattice2)
            print(f"{g.label}\tx={' '.join(fmt_float(c) for c in x)}\t{fmt_float(val)}\t"
                  f"b1={' '.join(fmt_float(c) for c in b1)}\tb2={' '.join(fmt_float(c) for c in b2)}",
                  file=out)
        if args.b1 is not None:
            try:
                val = config_ldos(system, g, args.b1, args.b2, p["W"], p["L"], p["K"], workers, cache)
            except ValueError as exc:
                if isinstance(exc, MoireDosError):
                    raise
                raise ConfigError("--b1/--b2", str(exc)) from exc
            print(f"{g.label}\tb1={' '.join(fmt_float(c) for c in args.b1)}\t"
                  f"b2={' '.join(fmt_float(c) for c in args.b2)}\t{fmt_float(val)}", file=out)
    return EXIT_OK


def cmd_diag(cfg, args, out):
    if args.which == "incommensurability":
        rep = incommensurability_diagnostic(cfg.lattice1, cfg.lattice2,
                                            cfg.diag["denominator_bound"])
        status = "relation found" if rep.relation_found else "no relation found"
        print(f"{status} (denominators <= {rep.denominator_bound}, tolerance {rep.tolerance:g})",
              file=out)
        print(f"reciprocal: m={rep.reciprocal_relation[0]} n={rep.reciprocal_relation[1]} "
              f"residual={rep.reciprocal_relation[2]:.3e}", file=out)
        print(f"real:       m={rep.real_relation[0]} n={rep.real_relation[1]} "
              f"residual={rep.real_relation[2]:.3e}", file=out)
        return EXIT_OK
    if not cfg.diag["R"]:
        raise ConfigError("diag.R", "the ergodicity diagnostic needs a radius grid")
    try:
        res = ergodicity_diagnostic(cfg.lattice1, cfg.lattice2, cfg.diag["s"], cfg.diag["R"],
                                    cfg.diag["layer"])
    except ValueError as exc:
        if isinstance(exc, MoireDosError):
            raise
        raise ConfigError("diag.s", str(exc)) from exc
    for R, v, c in zip(res.R, res.values, res.counts):
        print(f"{fmt_float(R)}\t{fmt_float(v)}\t{c}", file=out)
    if res.fit is not None:
        print(f"power slope {res.fit.slope:.6g} r2 {res.fit.r_squared:.6f}", file=out)
    if res.resonant:
        print("resonant: the average does not decay (commensurate direction)", file=out)
    return EXIT_OK


_COMMANDS = {"run": cmd_run, "dos": cmd_dos, "ldos": cmd_ldos, "diag": cmd_diag}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.workers is not None and args.workers < 1:
            raise ConfigError("--workers", "must be at least 1")
        return _COMMANDS[args.command](cfg, args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (MoireDosError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
