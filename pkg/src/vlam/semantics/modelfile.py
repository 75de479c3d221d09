"""JSON model files: a backend, objects for ground types, morphisms for operations.

Rationals are written as strings ("3/10", "-2", "inf") and complex numbers as
"re+im i" strings.  Matrices are row-major lists of rows.  See the README for
the full schema.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .. import numeric_q as nq
from .. import quantale as Q
from ..syntax.theory import Theory
from .core import Interpretation, SemanticsError, interpret_type
from .measl1 import MeasL1, Support, deterministic, kernel_from_fn
from .qchan import QChan, QDim
from .vcat import Explicit, Map, Product, VCat, discrete, nat_trunc

SCHEMA_VERSION = 1
BACKENDS = ("finmet", "finpos", "measl1", "qchan")


class ModelError(SemanticsError):
    pass


# --- scalars ------------------------------------------------------------------


def rational(x) -> Fraction:
    if isinstance(x, bool):
        raise ModelError(f"expected a rational, got {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError:
            pass
    raise ModelError(f"expected a rational written as an integer or string, got {x!r}")


def distance_entry(x):
    if isinstance(x, str) and x.strip() in ("inf", "oo"):
        return Q.INF
    return rational(x)


def complex_entry(x) -> complex:
    """Parse "re+im i", "re-im i", "im i" or a plain real."""
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if not isinstance(x, str):
        raise ModelError(f"expected a complex number string, got {x!r}")
    s = x.replace(" ", "")
    if s.endswith("i"):
        s = s[:-1] + "j"
    try:
        return complex(s)
    except ValueError:
        raise ModelError(f"bad complex number {x!r}") from None


def format_complex(z: complex) -> str:
    return f"{z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}i"


def complex_matrix(rows) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ModelError("a matrix must be a non-empty list of rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ModelError("matrix rows have different lengths")
    return np.array([[complex_entry(v) for v in r] for r in rows], dtype=complex)


def point(x):
    """JSON point: lists become tuples, rational strings become Fractions."""
    if isinstance(x, list):
        return tuple(point(v) for v in x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            return x
    return x


# --- objects ------------------------------------------------------------------


def _vcat_object(q: Q.Quantale, spec: dict, name: str):
    kind = spec.get("kind", "explicit")
    if kind == "nat":
        n = nat_trunc(q, int(spec.get("bound", 1024)))
        tags = spec.get("tags")
        if tags is None:
            return n
        return Product(q, n, discrete(q, [point(t) for t in tags]))
    if kind == "grid":
        lo, hi, step = (rational(spec[k]) for k in ("lo", "hi", "step"))
        if step <= 0 or hi < lo:
            raise ModelError(f"type {name}: bad grid")
        pts, x = [], lo
        while x <= hi:
            pts.append(x)
            x += step
        if q.kind == "boolean":
            return Explicit(q, pts, lambda a, b: 1 if a <= b else 0, name)
        return Explicit(q, pts, lambda a, b: abs(a - b), name)
    if kind == "explicit":
        pts = [point(p) for p in spec["points"]]
        index = {p: k for k, p in enumerate(pts)}
        if len(index) != len(pts):
            raise ModelError(f"type {name}: repeated points")
        if q.kind == "boolean":
            table = spec.get("leq")
            if table is None:
                raise ModelError(f"type {name}: a poset needs a 'leq' matrix")
            conv = lambda v: 1 if v in (1, True, "1") else 0
        else:
            table = spec.get("dist")
            if table is None:
                raise ModelError(f"type {name}: a metric space needs a 'dist' matrix")
            conv = distance_entry
        if len(table) != len(pts) or any(len(r) != len(pts) for r in table):
            raise ModelError(f"type {name}: table must be {len(pts)}x{len(pts)}")
        mat = [[conv(v) for v in r] for r in table]
        return Explicit(q, pts, lambda a, b: mat[index[a]][index[b]], name)
    raise ModelError(f"type {name}: unknown kind {kind!r}")


def _support(spec: dict, name: str) -> Support:
    if "support" not in spec:
        raise ModelError(f"type {name}: a MeasL1 object needs a 'support' list")
    pts = tuple(point(p) for p in spec["support"])
    if len(set(pts)) != len(pts):
        raise ModelError(f"type {name}: repeated support points")
    return Support(pts, name)


# --- morphisms ----------------------------------------------------------------


def _args(i: Interpretation, theory: Theory, name: str):
    decl = theory.ops[name]
    b = i.backend
    objs = [interpret_type(i, a) for a in decl.args]
    dom = objs[0]
    for o in objs[1:]:
        dom = b.tensor_obj(dom, o)
    return decl, dom, interpret_type(i, decl.result), len(decl.args)


def _unpack(x, n: int) -> list:
    """Left-nested tensor element to its n components."""
    out = []
    for _ in range(n - 1):
        x, last = x
        out.append(last)
    out.append(x)
    return out[::-1]


def _clip(x, lo, hi):
    return min(max(x, lo), hi)


def _vcat_op(i, theory, name, spec):
    decl, dom, cod, n = _args(i, theory, name)
    kind = spec.get("kind")
    cod_pts = set(cod.points) if not isinstance(cod, Product) else None

    def check(y):
        if cod_pts is not None and y not in cod_pts:
            raise ModelError(f"operation {name}: {y!r} is not a point of its codomain")
        return y

    if kind == "nat_shift":
        bound = cod.left.size() - 1 if isinstance(cod, Product) else cod.size() - 1

        def family(k):
            k = int(k)

            def fn(x):
                if isinstance(x, tuple):
                    return (min(x[0] + k, bound), x[1])
                return min(x + k, bound)

            return Map(dom, cod, fn)

        return family, True
    if kind == "identity":
        return Map(dom, cod, lambda x: x), False
    if kind == "const":
        v = point(spec["value"])
        check(v)
        return Map(dom, cod, lambda _: v), False
    if kind == "add":
        lo, hi = rational(spec["clip"][0]), rational(spec["clip"][1])
        return Map(dom, cod, lambda x: check(_clip(sum(_unpack(x, n)), lo, hi))), False
    if kind == "table":
        table = {}
        for row in spec["map"]:
            key = point(row[0])
            table[key] = check(point(row[1]))

        def fn(x):
            if x not in table:
                raise ModelError(f"operation {name} is undefined at {x!r}")
            return table[x]

        return Map(dom, cod, fn), False
    raise ModelError(f"operation {name}: unknown kind {kind!r} for this backend")


def _measl1_op(i, theory, name, spec):
    decl, dom, cod, n = _args(i, theory, name)
    kind = spec.get("kind")
    if kind == "dirac_family":
        def family(q):
            return deterministic(dom, cod, lambda _: Fraction(q))
        return family, True
    if kind == "dirac":
        v = rational(spec["value"])
        return deterministic(dom, cod, lambda _: v), False
    if kind == "identity":
        return deterministic(dom, cod, lambda x: x), False
    if kind == "add":
        lo, hi = rational(spec["clip"][0]), rational(spec["clip"][1])
        return deterministic(dom, cod, lambda x: _clip(sum(_unpack(x, n)), lo, hi)), False
    if kind == "bernoulli":
        if n != 3:
            raise ModelError(f"operation {name}: bernoulli needs three arguments")

        def fn(x):
            u, v, p = _unpack(x, 3)
            out: dict = {}
            out[u] = out.get(u, 0) + p
            out[v] = out.get(v, 0) + (1 - p)
            return out

        return kernel_from_fn(dom, cod, fn), False
    if kind == "kernel":
        cols = {}
        for entry in spec["columns"]:
            key = point(entry["in"])
            cols[key] = {rational(y): rational(w) for y, w in entry["out"].items()}

        def fn(x):
            if x not in cols:
                raise ModelError(f"operation {name}: no kernel column for input {x!r}")
            return cols[x]

        return kernel_from_fn(dom, cod, fn), False
    raise ModelError(f"operation {name}: unknown kind {kind!r} for this backend")


def _qchan_op(i, theory, name, spec):
    decl, dom, cod, n = _args(i, theory, name)
    kind = spec.get("kind")
    if kind == "isometry":
        t = complex_matrix(spec["matrix"])
        if t.shape != (cod.n, dom.n):
            raise ModelError(f"operation {name}: matrix is {t.shape[0]}x{t.shape[1]}, expected {cod.n}x{dom.n}")
        try:
            return nq.isometry(t), False
        except nq.QuantumError as e:
            raise ModelError(f"operation {name}: {e}") from None
    if kind == "gate":
        t = np.eye(2, dtype=complex)
        for g in spec["product"]:
            if g[0] == "ry":
                t = t @ nq.ry(float(rational(g[1])) if isinstance(g[1], str) else float(g[1]))
            elif g[0] == "phase":
                t = t @ nq.phase(float(rational(g[1])) if isinstance(g[1], str) else float(g[1]))
            else:
                raise ModelError(f"operation {name}: unknown gate {g[0]!r}")
        return nq.isometry(t), False
    if kind == "shift":
        t = nq.shift(int(spec["n"]))
        if t.shape != (cod.n, dom.n):
            raise ModelError(f"operation {name}: shift has the wrong dimension")
        return nq.isometry(t), False
    raise ModelError(f"operation {name}: unknown kind {kind!r} for this backend")


# --- loading ------------------------------------------------------------------


def build_model(data: dict, theory: Theory, tol: Optional[float] = None, seed: Optional[int] = None) -> Interpretation:
    if not isinstance(data, dict):
        raise ModelError("a model file must hold a JSON object")
    ver = data.get("schema_version", SCHEMA_VERSION)
    if ver != SCHEMA_VERSION:
        raise ModelError(f"unsupported model schema_version {ver}")
    kind = data.get("backend")
    if kind not in BACKENDS:
        raise ModelError(f"backend must be one of {', '.join(BACKENDS)}")
    opts = data.get("options", {})
    if kind in ("finmet", "finpos"):
        q = Q.LAWVERE if kind == "finmet" else Q.BOOLEAN
        backend: Any = VCat(q)
        backend.tol = 0.0 if tol is None else tol
    elif kind == "measl1":
        backend = MeasL1(tol=opts.get("tol", 1e-9) if tol is None else tol)
    else:
        backend = QChan(tol=opts.get("tol", 1e-6) if tol is None else tol,
                        starts=int(opts.get("starts", 32)), seed=int(opts.get("seed", 0) if seed is None else seed))
    if backend.quantale != theory.quantale:
        raise ModelError(f"backend {kind} works over {backend.quantale.kind}, the theory over {theory.quantale.kind}")
    types = data.get("types", {})
    objs = {}
    for t in theory.types:
        if t not in types:
            raise ModelError(f"ground type {t} is not interpreted")
        spec = types[t]
        if kind in ("finmet", "finpos"):
            objs[t] = _vcat_object(backend.quantale, spec, t)
        elif kind == "measl1":
            objs[t] = _support(spec, t)
        else:
            if "dim" not in spec:
                raise ModelError(f"type {t}: a QChan object needs 'dim'")
            objs[t] = QDim(int(spec["dim"]))
    i = Interpretation(backend, objs, {}, set())
    make = {"finmet": _vcat_op, "finpos": _vcat_op, "measl1": _measl1_op, "qchan": _qchan_op}[kind]
    ops = data.get("ops", {})
    for name, decl in theory.ops.items():
        if name not in ops:
            raise ModelError(f"operation {name} is not interpreted")
        m, fam = make(i, theory, name, ops[name])
        if fam != (decl.sort is not None):
            raise ModelError(f"operation {name}: family/non-family mismatch with the signature")
        i.ops[name] = m
        if fam:
            i.families.add(name)
    i.samples = {k: [rational(v) for v in vs] for k, vs in data.get("samples", {}).items()}
    return i


def load_model(path, theory: Theory, tol: Optional[float] = None, seed: Optional[int] = None) -> Interpretation:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ModelError(f"{path}: invalid JSON ({e})") from None
    return build_model(data, theory, tol, seed)
