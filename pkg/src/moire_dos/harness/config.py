"""Experiment configuration: TOML with dotted keys, validated into dataclasses.

Schema (every key is optional unless marked)::

    [system]
    dimension = 1                      # required, 1 or 2
    lattice1 = [["sqrt(5) - 1"]]       # required, row-major basis matrix A
    lattice2 = [[2.0]]                 # entries: numbers or arithmetic strings
    potential1.model = "gaussian"      # "gaussian" | "table" | "zero"
    potential1.gamma = 0.01
    potential2.model = "table"
    potential2.rows = [[1, 0.5, 0.0], [-1, 0.5, 0.0]]   # (n..., re, im)

    [g]
    kind = "fermi_energy"              # "fermi_energy" | "gaussian"
    beta = [1.0, 5.0]                  # scalar or list; one run per value
    mu = 10.0
    # gaussian: center = 0.0, eps = 1.0 (eps may be a list)

    [[sweep]]
    name = "A-L"                       # required, unique
    scheme = "A"                       # "A" | "B" | "average"
    parameter = "L"                    # "L" | "W" | "h" | "K" | "Nb"
    values = [6, 12, 18]
    W = 25.0                           # fixed values of the other parameters
    K = 250
    fit.model = "exponential"          # optional: "exponential" | "power"
    fit.inverse = false                # regress on 1/parameter
    fit.envelope = false               # fit the suffix-max envelope
    reference.scheme = "A"             # required
    reference.W = 25.0
    reference.L = 120.0
    reference.K = 250
    g.beta = [1.0]                     # optional per-sweep override of [g]

    [dos]                              # point used by the dos/ldos commands
    W = 10.0
    L = 60.0
    K = 100

    [diag]
    layer = 1                          # s lives in the reciprocal lattice of this layer
    s = [1]                            # integer coordinates of s
    R = [50, 100, 200, 400, 800]
    denominator_bound = 50

    [output]
    dir = "out"

    [compute]
    workers = 1
    cache_mb = 512
    max_pairs = 2000000
    drop_tol = 0.0

An ``h`` sweep lists mesh sizes; each must divide ``W`` into an integer
``K = W / h`` (to 1e-9), since the mesh is always ``k h`` for integer ``k``.
"""

from __future__ import annotations

import ast
import math
import operator
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..lattice import Lattice
from ..potential import gaussian_model, table_model, zero_potential
from ..testfn import fermi_energy, gaussian

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMES = ("A", "B", "average")
PARAMETERS = ("L", "W", "h", "K", "Nb")
FIT_MODELS = ("exponential", "power")

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {"sqrt": math.sqrt, "sin": math.sin, "cos": math.cos, "tan": math.tan,
          "exp": math.exp, "log": math.log}
_CONSTS = {"pi": math.pi, "e": math.e}


def eval_number(text, key="value"):
    """Evaluate a number or a small arithmetic expression such as ``"2*cos(pi/10)"``."""
    if isinstance(text, bool):
        raise ConfigError(key, "expected a number, got a boolean")
    if isinstance(text, (int, float)):
        return float(text)
    if not isinstance(text, str):
        raise ConfigError(key, f"expected a number or expression, got {text!r}")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(key, f"cannot parse {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name) and node.id in _CONSTS:
            return _CONSTS[node.id]
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ConfigError(key, f"unsupported expression element in {text!r}")

    try:
        val = ev(tree)
    except (ArithmeticError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(key, f"cannot evaluate {text!r}: {exc}") from exc
    if not math.isfinite(val):
        raise ConfigError(key, f"{text!r} is not finite")
    return val


@dataclass(frozen=True)
class Reference:
    scheme: str
    W: float
    L: float
    K: int | None = None
    Nb: int | None = None


@dataclass(frozen=True)
class FitSpec:
    model: str
    inverse: bool = False
    envelope: bool = False


@dataclass(frozen=True)
class SweepSpec:
    name: str
    scheme: str
    parameter: str
    values: tuple
    fixed: dict
    reference: Reference
    tests: tuple                 # TestFunctions, one run each
    fit: FitSpec | None = None

    def point(self, value):
        """Full (W, L, K, Nb) for one sweep value."""
        p = dict(self.fixed)
        if self.parameter == "h":
            p["K"] = mesh_count(p["W"], value, f"sweep.{self.name}.values")
        elif self.parameter == "W" and "h" in p:
            p["W"] = float(value)
            p["K"] = mesh_count(value, p["h"], f"sweep.{self.name}.h")
        else:
            p[self.parameter] = int(value) if self.parameter in ("K", "Nb") else float(value)
        p.pop("h", None)
        return p


@dataclass(frozen=True)
class ExperimentConfig:
    dimension: int
    lattice1: Lattice
    lattice2: Lattice
    potential1: object
    potential2: object
    tests: tuple
    sweeps: tuple
    dos: dict
    diag: dict
    output_dir: str
    workers: int | None
    cache_mb: float
    max_pairs: int
    drop_tol: float
    raw: dict = field(repr=False, default_factory=dict)

    def system(self):
        from ..dos import System
        return System(self.potential1, self.potential2, self.max_pairs, self.drop_tol)


def mesh_count(W, h, key):
    k = W / h
    if not (h > 0) or abs(k - round(k)) > 1e-9 * max(1.0, k) or round(k) < 1:
        raise ConfigError(key, f"h={h!r} does not divide W={W!r} into an integer K")
    return int(round(k))


def _get(table, key, prefix, kind=None, default=ConfigError):
    full = f"{prefix}.{key}" if prefix else key
    if key not in table:
        if default is ConfigError:
            raise ConfigError(full, "missing required key")
        return default
    val = table[key]
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(full, f"expected {getattr(kind, '__name__', kind)}, got {val!r}")
    return val


def _positive(val, key, integer=False):
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(key, f"expected a number, got {val!r}")
    if integer and int(val) != val:
        raise ConfigError(key, f"expected an integer, got {val!r}")
    if not val > 0:
        raise ConfigError(key, f"must be positive, got {val!r}")
    return int(val) if integer else float(val)


def _lattice(rows, d, key):
    if not isinstance(rows, list) or len(rows) != d:
        raise ConfigError(key, f"expected {d} rows")
    mat = np.empty((d, d))
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != d:
            raise ConfigError(f"{key}[{i}]", f"expected {d} entries")
        for j, v in enumerate(row):
            mat[i, j] = eval_number(v, f"{key}[{i}][{j}]")
    try:
        return Lattice(mat)
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from exc


def _potential(spec, lat, key):
    if not isinstance(spec, dict):
        raise ConfigError(key, "expected a table")
    model = _get(spec, "model", key, str, "gaussian")
    try:
        if model == "gaussian":
            return gaussian_model(lat, _positive(_get(spec, "gamma", key), f"{key}.gamma"))
        if model == "zero":
            return zero_potential(lat)
        if model == "table":
            rows = _get(spec, "rows", key, list)
            return table_model(lat, rows, real=spec.get("real"),
                               decay_gamma=float(spec.get("gamma", 1.0)))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(key, str(exc)) from exc
    raise ConfigError(f"{key}.model", f"unknown model {model!r}")


def _as_list(val):
    return val if isinstance(val, list) else [val]


def _tests(spec, key):
    if not isinstance(spec, dict):
        raise ConfigError(key, "expected a table")
    kind = _get(spec, "kind", key, str)
    out = []
    if kind == "fermi_energy":
        mu = eval_number(_get(spec, "mu", key), f"{key}.mu")
        for beta in _as_list(_get(spec, "beta", key)):
            out.append(fermi_energy(_positive(beta, f"{key}.beta"), mu))
    elif kind == "gaussian":
        center = eval_number(spec.get("center", 0.0), f"{key}.center")
        for eps in _as_list(_get(spec, "eps", key)):
            out.append(gaussian(center, _positive(eps, f"{key}.eps")))
    else:
        raise ConfigError(f"{key}.kind", f"unknown test function kind {kind!r}")
    if not out:
        raise ConfigError(key, "no test functions configured")
    return tuple(out)


def _reference(spec, key):
    if not isinstance(spec, dict):
        raise ConfigError(key, "expected a table")
    scheme = _get(spec, "scheme", key, str)
    if scheme not in SCHEMES:
        raise ConfigError(f"{key}.scheme", f"unknown scheme {scheme!r}")
    W = _positive(_get(spec, "W", key), f"{key}.W")
    L = _positive(_get(spec, "L", key), f"{key}.L")
    K = Nb = None
    if scheme in ("A", "average"):
        if "h" in spec:
            K = mesh_count(W, _positive(spec["h"], f"{key}.h"), f"{key}.h")
        else:
            K = _positive(_get(spec, "K", key), f"{key}.K", integer=True)
    if scheme == "average":
        Nb = _positive(_get(spec, "Nb", key), f"{key}.Nb", integer=True)
    return Reference(scheme, W, L, K, Nb)


def _needed(scheme):
    return {"A": ("W", "L", "K"), "B": ("W", "L"), "average": ("W", "L", "K", "Nb")}[scheme]


def _sweep(spec, base_g, i):
    key = f"sweep[{i}]"
    if not isinstance(spec, dict):
        raise ConfigError(key, "expected a table")
    name = _get(spec, "name", key, str)
    key = f"sweep.{name}"
    scheme = _get(spec, "scheme", key, str)
    if scheme not in SCHEMES:
        raise ConfigError(f"{key}.scheme", f"unknown scheme {scheme!r}")
    param = _get(spec, "parameter", key, str)
    if param not in PARAMETERS:
        raise ConfigError(f"{key}.parameter", f"unknown parameter {param!r}")
    if param in ("h", "K") and scheme == "B":
        raise ConfigError(f"{key}.parameter", "scheme B has no quadrature mesh")
    if param == "Nb" and scheme != "average":
        raise ConfigError(f"{key}.parameter", "Nb sweeps need scheme = \"average\"")
    values = _get(spec, "values", key, list)
    integer = param in ("K", "Nb")
    values = tuple(_positive(v, f"{key}.values", integer) for v in values)
    fixed = {}
    for p in ("W", "L", "K", "Nb", "h"):
        if p in spec:
            if p == param:
                raise ConfigError(f"{key}.{p}", "the swept parameter cannot also be fixed")
            fixed[p] = _positive(spec[p], f"{key}.{p}", p in ("K", "Nb"))
    if "h" in fixed and "K" in fixed:
        raise ConfigError(f"{key}.h", "give either h or K, not both")
    if "h" in fixed and param != "W":
        if "W" not in fixed:
            raise ConfigError(f"{key}.W", "a fixed h needs a fixed W")
        fixed["K"] = mesh_count(fixed["W"], fixed.pop("h"), f"{key}.h")
    swept = "K" if param == "h" else param
    for p in _needed(scheme):
        if p == swept or p in fixed or (p == "K" and "h" in fixed):
            continue
        raise ConfigError(f"{key}.{p}", f"scheme {scheme} needs a fixed {p}")
    ref = _reference(_get(spec, "reference", key), f"{key}.reference")
    gspec = dict(base_g)
    if "g" in spec:
        if not isinstance(spec["g"], dict):
            raise ConfigError(f"{key}.g", "expected a table")
        gspec.update(spec["g"])
    tests = _tests(gspec, f"{key}.g" if "g" in spec else "g")
    fit = None
    if "fit" in spec:
        f = spec["fit"]
        if not isinstance(f, dict):
            raise ConfigError(f"{key}.fit", "expected a table")
        model = _get(f, "model", f"{key}.fit", str)
        if model not in FIT_MODELS:
            raise ConfigError(f"{key}.fit.model", f"unknown model {model!r}")
        fit = FitSpec(model, bool(f.get("inverse", False)), bool(f.get("envelope", False)))
    sweep = SweepSpec(name, scheme, param, values, fixed, ref, tests, fit)
    _check_dominance(sweep, key)
    return sweep


def _mesh_size(W, K):
    return None if K is None else W / K


def _check_dominance(sweep, key):
    """The reference must be at least as fine as every sweep point, and
    strictly finer along the swept parameter.

    A reference from another scheme is compared on ``W`` only: ``L`` does
    not mean the same truncation error in the two schemes, and scheme B
    has no mesh.
    """
    ref = sweep.reference
    rkey = f"{key}.reference"
    same = ref.scheme == sweep.scheme
    swept = "K" if sweep.parameter == "h" else sweep.parameter
    rh = _mesh_size(ref.W, ref.K)
    for v in sweep.values:
        p = sweep.point(v)
        ph = _mesh_size(p["W"], p.get("K"))
        # (name, reference is at least as fine, reference is strictly finer)
        checks = [("W", ref.W >= p["W"], ref.W > p["W"])]
        if same:
            checks.append(("L", ref.L >= p["L"], ref.L > p["L"]))
            if rh is not None and ph is not None:
                checks.append(("K", rh <= ph, rh < ph))
            if ref.Nb is not None and "Nb" in p:
                checks.append(("Nb", ref.Nb >= p["Nb"], ref.Nb > p["Nb"]))
        for name, ok, strict in checks:
            if not ok:
                raise ConfigError(f"{rkey}.{name}", f"reference is coarser than sweep point {v!r}")
            if name == swept and not strict:
                raise ConfigError(f"{rkey}.{name}",
                                  f"reference must be strictly finer than sweep point {v!r}")


def load_config(path):
    """Read and validate a TOML experiment file."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"invalid TOML: {exc}") from exc
    return parse_config(raw)


def parse_config(raw):
    sysb = _get(raw, "system", "", dict)
    d = _get(sysb, "dimension", "system", int)
    if d not in (1, 2):
        raise ConfigError("system.dimension", f"must be 1 or 2, got {d}")
    lat1 = _lattice(_get(sysb, "lattice1", "system"), d, "system.lattice1")
    lat2 = _lattice(_get(sysb, "lattice2", "system"), d, "system.lattice2")
    v1 = _potential(sysb.get("potential1", {"model": "zero"}), lat1, "system.potential1")
    v2 = _potential(sysb.get("potential2", {"model": "zero"}), lat2, "system.potential2")
    gb = _get(raw, "g", "", dict)
    tests = _tests(gb, "g")
    sweeps = tuple(_sweep(s, gb, i) for i, s in enumerate(raw.get("sweep", [])))
    names = [s.name for s in sweeps]
    if len(set(names)) != len(names):
        raise ConfigError("sweep.name", "sweep names must be unique")

    dosb = raw.get("dos", {})
    dos = {}
    for p in ("W", "L"):
        if p in dosb:
            dos[p] = _positive(dosb[p], f"dos.{p}")
    if "K" in dosb:
        dos["K"] = _positive(dosb["K"], "dos.K", integer=True)
    if "h" in dosb:
        if "W" not in dos:
            raise ConfigError("dos.W", "h needs W")
        dos["K"] = mesh_count(dos["W"], _positive(dosb["h"], "dos.h"), "dos.h")
    if "Nb" in dosb:
        dos["Nb"] = _positive(dosb["Nb"], "dos.Nb", integer=True)

    diagb = raw.get("diag", {})
    diag = {"layer": int(diagb.get("layer", 1)),
            "s": tuple(int(v) for v in _as_list(diagb.get("s", [1] * d))),
            "R": tuple(_positive(v, "diag.R") for v in diagb.get("R", [])),
            "denominator_bound": _positive(diagb.get("denominator_bound", 50),
                                           "diag.denominator_bound", integer=True)}
    if diag["layer"] not in (1, 2):
        raise ConfigError("diag.layer", "must be 1 or 2")
    if len(diag["s"]) != d:
        raise ConfigError("diag.s", f"expected {d} integer coordinates")

    outb = raw.get("output", {})
    comp = raw.get("compute", {})
    workers = comp.get("workers")
    if workers is not None:
        workers = _positive(workers, "compute.workers", integer=True)
    return ExperimentConfig(
        dimension=d, lattice1=lat1, lattice2=lat2, potential1=v1, potential2=v2,
        tests=tests, sweeps=sweeps, dos=dos, diag=diag,
        output_dir=str(_get(outb, "dir", "output", str, "out")),
        workers=workers,
        cache_mb=_positive(comp.get("cache_mb", 512), "compute.cache_mb"),
        max_pairs=_positive(comp.get("max_pairs", 2_000_000), "compute.max_pairs", integer=True),
        drop_tol=float(comp.get("drop_tol", 0.0)),
        raw=raw,
    )
