from __future__ import annotations

from fractions import Fraction

from .index import format_fraction
from .terms import (
    App, BVar, Dis, Lambda, OpApp, PmTo, Star, TensorIntro, Term, UnitTo, Var,
    fresh_name, free_vars, pretty_type,
)


def _index(ix) -> str:
    if ix is None:
        return ""
    if isinstance(ix, Fraction):
        return "{" + format_fraction(ix) + "}"
    return "{" + str(ix) + "}"


def pretty(t: Term) -> str:
    avoid = set(free_vars(t))
    return _pp(t, 0, [], avoid)


def _pp(t: Term, prec: int, scope: list, avoid: set) -> str:
    def wrap(s: str, level: int) -> str:
        return f"({s})" if prec > level else s

    if isinstance(t, Var):
        return t.name
    if isinstance(t, BVar):
        if t.index < len(scope):
            return scope[-1 - t.index]
        return f"#{t.index}"
    if isinstance(t, Star):
        return "*"
    if isinstance(t, OpApp):
        args = ", ".join(_pp(a, 0, scope, avoid) for a in t.args)
        return f"{t.op}{_index(t.index)}({args})"
    if isinstance(t, Dis):
        return f"dis({_pp(t.body, 0, scope, avoid)})"
    if isinstance(t, TensorIntro):
        s = f"{_pp(t.left, 1, scope, avoid)} * {_pp(t.right, 2, scope, avoid)}"
        return wrap(s, 1)
    if isinstance(t, App):
        # a bare * after a term would read as a tensor
        arg = "(*)" if isinstance(t.arg, Star) else _pp(t.arg, 3, scope, avoid)
        return wrap(f"{_pp(t.fn, 2, scope, avoid)} {arg}", 2)
    if isinstance(t, Lambda):
        x = fresh_name(t.hint, avoid | set(scope))
        body = _pp(t.body, 0, scope + [x], avoid)
        return wrap(f"\\{x}:{pretty_type(t.ty)}. {body}", 0)
    if isinstance(t, PmTo):
        taken = avoid | set(scope)
        x = fresh_name(t.hx, taken)
        y = fresh_name(t.hy, taken | {x})
        scrut = _pp(t.scrut, 1, scope, avoid)
        body = _pp(t.body, 0, scope + [x, y], avoid)
        return wrap(f"pm {scrut} to {x} * {y}. {body}", 0)
    if isinstance(t, UnitTo):
        s = f"{_pp(t.scrut, 1, scope, avoid)} to *. {_pp(t.body, 0, scope, avoid)}"
        return wrap(s, 0)
    raise TypeError(t)
