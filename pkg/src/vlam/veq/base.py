"""The structural equation schemas, each valid at the top label.

Every schema is built left-to-right from an instantiation dictionary.  A
proof node may use a schema in either orientation.
"""
from __future__ import annotations

from ..syntax.terms import (
    STAR, App, Dis, Lambda, OpApp, PmTo, TensorIntro, Term, UnitTo, Var, abstract,
    free_vars, mk_lambda, mk_pm, subst, var_occurrences,
)

LINEAR_SCHEMAS = (
    "pm_beta", "pm_eta", "unit_beta", "unit_eta", "lam_beta", "lam_eta", "cc_unit", "cc_pm",
)
AFFINE_SCHEMAS = ("dis_vars", "dis_unit")
SCHEMAS = LINEAR_SCHEMAS + AFFINE_SCHEMAS

# instantiation keys; names are variable names, the rest are terms or types
KEYS = {
    "pm_beta": ("v", "w", "x", "y", "u"),
    "pm_eta": ("v", "x", "y", "z", "u"),
    "unit_beta": ("v",),
    "unit_eta": ("v", "z", "w"),
    "lam_beta": ("x", "A", "v", "w"),
    "lam_eta": ("x", "A", "v"),
    "cc_unit": ("u", "z", "v", "w"),
    "cc_pm": ("u", "z", "v", "x", "y", "w"),
    "dis_vars": ("v", "vars"),
    "dis_unit": ("v",),
}


class SchemaError(ValueError):
    pass


def _once(t: Term, name: str, what: str):
    n = var_occurrences(t).get(name, 0)
    if n != 1:
        raise SchemaError(f"{what} must mention {name} exactly once (found {n})")


def _absent(t: Term, names, what: str):
    fv = set(free_vars(t))
    hit = [n for n in names if n in fv]
    if hit:
        raise SchemaError(f"{what} must not mention {', '.join(hit)}")


def discard_chain(names) -> Term:
    """dis(x1) to *. dis(x2) to *. ... *"""
    t: Term = STAR
    for n in reversed(list(names)):
        t = UnitTo(Dis(Var(n)), t)
    return t


def build(name: str, inst: dict) -> tuple[Term, Term]:
    """Left and right side of schema ``name`` under ``inst``."""
    if name not in KEYS:
        raise SchemaError(f"unknown base equation {name!r}")
    missing = [k for k in KEYS[name] if k not in inst]
    if missing:
        raise SchemaError(f"{name} instantiation lacks {', '.join(missing)}")
    g = inst.get
    if name == "pm_beta":
        x, y = g("x"), g("y")
        if x == y:
            raise SchemaError("pm binds two distinct variables")
        lhs = mk_pm(TensorIntro(g("v"), g("w")), x, y, g("u"))
        return lhs, subst(g("u"), {x: g("v"), y: g("w")})
    if name == "pm_eta":
        x, y, z, u = g("x"), g("y"), g("z"), g("u")
        if len({x, y, z}) < 3:
            raise SchemaError("pm_eta needs distinct x, y, z")
        _once(u, z, "u")
        _absent(u, (x, y), "u")
        body = subst(u, {z: TensorIntro(Var(x), Var(y))})
        return mk_pm(g("v"), x, y, body), subst(u, {z: g("v")})
    if name == "unit_beta":
        return UnitTo(STAR, g("v")), g("v")
    if name == "unit_eta":
        z, w = g("z"), g("w")
        _once(w, z, "w")
        return UnitTo(g("v"), subst(w, {z: STAR})), subst(w, {z: g("v")})
    if name == "lam_beta":
        x = g("x")
        return App(mk_lambda(x, g("A"), g("v")), g("w")), subst(g("v"), {x: g("w")})
    if name == "lam_eta":
        x, v = g("x"), g("v")
        _absent(v, (x,), "v")
        return mk_lambda(x, g("A"), App(v, Var(x))), v
    if name == "cc_unit":
        z, u = g("z"), g("u")
        _once(u, z, "u")
        return subst(u, {z: UnitTo(g("v"), g("w"))}), UnitTo(g("v"), subst(u, {z: g("w")}))
    if name == "cc_pm":
        z, u, x, y = g("z"), g("u"), g("x"), g("y")
        if len({x, y, z}) < 3:
            raise SchemaError("cc_pm needs distinct x, y, z")
        _once(u, z, "u")
        _absent(u, (x, y), "u")
        _absent(g("v"), (x, y), "v")
        inner = mk_pm(g("v"), x, y, g("w"))
        return subst(u, {z: inner}), mk_pm(g("v"), x, y, subst(u, {z: g("w")}))
    if name == "dis_vars":
        return Dis(g("v")), discard_chain(g("vars"))
    if name == "dis_unit":
        v = g("v")
        return UnitTo(v, STAR), UnitTo(Dis(v), STAR)
    raise SchemaError(name)


def oriented(name: str, inst: dict, orientation: str = "lr") -> tuple[Term, Term]:
    lhs, rhs = build(name, inst)
    if orientation == "lr":
        return lhs, rhs
    if orientation == "rl":
        return rhs, lhs
    raise SchemaError(f"orientation must be 'lr' or 'rl', not {orientation!r}")
