"""Finite V-categories: posets (boolean quantale) and metric spaces (lawvere).

Spaces are lazy: tensor products and function spaces are described by
their factors and enumerated on demand.  Morphisms are Python functions
wrapped in ``Map``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional, Sequence

from .. import quantale as Q
from .core import Backend, SemanticsError, SLeaf, STensor, SUnit

HOM_CAP = 50_000


class Space:
    """A finite set with a quantale-valued distance."""

    q: Q.Quantale

    @property
    def points(self) -> list:
        raise NotImplementedError

    def dist(self, a, b) -> Q.QValue:
        raise NotImplementedError

    def size(self) -> int:
        return len(self.points)


@dataclass(eq=False)
class Explicit(Space):
    q: Q.Quantale
    pts: list
    fn: Callable  # (a, b) -> payload
    name: str = ""

    @property
    def points(self) -> list:
        return self.pts

    def dist(self, a, b):
        return self.q.value(self.fn(a, b))

    def __repr__(self):
        return f"Explicit({self.name or len(self.pts)})"


@dataclass(eq=False)
class UnitSpace(Space):
    q: Q.Quantale

    @property
    def points(self):
        return [()]

    def dist(self, a, b):
        return self.q.top()


@dataclass(eq=False)
class Product(Space):
    q: Q.Quantale
    left: Space
    right: Space
    _pts: Optional[list] = field(default=None, repr=False)

    @property
    def points(self):
        if self._pts is None:
            self._pts = [(a, b) for a in self.left.points for b in self.right.points]
        return self._pts

    def size(self) -> int:
        return self.left.size() * self.right.size()

    def dist(self, a, b):
        return self.q.tensor(self.left.dist(a[0], b[0]), self.right.dist(a[1], b[1]))


@dataclass(eq=False)
class Map:
    dom: Space
    cod: Space
    fn: Callable

    def __call__(self, x):
        return self.fn(x)


def sup_distance(q: Q.Quantale, dom: Space, cod: Space, f: Callable, g: Callable) -> Q.QValue:
    acc = q.top()
    bottom = q.bottom()
    for x in dom.points:
        acc = q.meet([acc, cod.dist(f(x), g(x))])
        if acc == bottom:
            break
    return acc


@dataclass(eq=False)
class Hom(Space):
    """All V-functors dom -> cod with the pointwise meet distance."""

    q: Q.Quantale
    dom: Space
    cod: Space
    _pts: Optional[list] = field(default=None, repr=False)

    @property
    def points(self):
        if self._pts is None:
            self._pts = self._enumerate()
        return self._pts

    def dist(self, f, g):
        return sup_distance(self.q, self.dom, self.cod, f, g)

    def _enumerate(self) -> list:
        xs, ys = self.dom.points, self.cod.points
        if len(xs) > 64 and len(ys) > 1:
            raise SemanticsError(f"function space too large to enumerate ({len(ys)}^{len(xs)})")
        q = self.q
        out: list = []
        choice: list = []

        def ok(k, y):
            for j in range(k):
                if not q.leq(self.dom.dist(xs[j], xs[k]), self.cod.dist(choice[j], y)):
                    return False
                if not q.leq(self.dom.dist(xs[k], xs[j]), self.cod.dist(y, choice[j])):
                    return False
            return True

        def rec(k):
            if len(out) > HOM_CAP:
                raise SemanticsError("function space exceeds the enumeration cap")
            if k == len(xs):
                table = {x: y for x, y in zip(xs, choice)}
                out.append(Map(self.dom, self.cod, table.__getitem__))
                return
            for y in ys:
                if ok(k, y):
                    choice.append(y)
                    rec(k + 1)
                    choice.pop()

        rec(0)
        return out


# --- shapes on elements -----------------------------------------------------


def flatten(shape, e) -> list:
    if isinstance(shape, SUnit):
        return []
    if isinstance(shape, SLeaf):
        return [e]
    return flatten(shape.left, e[0]) + flatten(shape.right, e[1])


def build(shape, items: list):
    it = iter(items)

    def rec(s):
        if isinstance(s, SUnit):
            return ()
        if isinstance(s, SLeaf):
            return next(it)
        left = rec(s.left)
        return (left, rec(s.right))

    return rec(shape)


class VCat(Backend):
    has_hom = True
    has_bang = True

    def __init__(self, quantale: Q.Quantale, name: str = ""):
        self.quantale = quantale
        self.name = name or {"boolean": "FinPos", "lawvere": "FinMet"}.get(quantale.kind, "VCat")
        self._unit = UnitSpace(quantale)

    def unit(self):
        return self._unit

    def tensor_obj(self, a, b):
        return Product(self.quantale, a, b)

    def hom_obj(self, a, b):
        return Hom(self.quantale, a, b)

    def dom(self, f):
        return f.dom

    def cod(self, f):
        return f.cod

    def id(self, a):
        return Map(a, a, lambda x: x)

    def compose(self, g, f):
        gf, ff = g.fn, f.fn
        return Map(f.dom, g.cod, lambda x: gf(ff(x)))

    def tensor(self, f, g):
        ff, gf = f.fn, g.fn
        return Map(self.tensor_obj(f.dom, g.dom), self.tensor_obj(f.cod, g.cod), lambda p: (ff(p[0]), gf(p[1])))

    def rearrange(self, src, dst, perm):
        perm = list(perm)

        def fn(e):
            items = flatten(src, e)
            return build(dst, [items[k] for k in perm])

        return Map(self.shape_obj(src), self.shape_obj(dst), fn)

    def curry(self, f, a, b):
        hom = Hom(self.quantale, a, b)
        ff = f.fn

        def fn(g):
            return Map(a, b, lambda x: ff((g, x)))

        gamma = f.dom.left if isinstance(f.dom, Product) else self.unit()
        return Map(gamma, hom, fn)

    def app(self, a, b):
        hom = Hom(self.quantale, a, b)
        return Map(Product(self.quantale, hom, a), b, lambda p: p[0](p[1]))

    def bang(self, a):
        return Map(a, self._unit, lambda x: ())

    def hom_distance(self, f, g):
        return sup_distance(self.quantale, f.dom, f.cod, f.fn, g.fn)

    def is_monotone(self, f) -> bool:
        """V-functor check: a(x, y) <= b(f x, f y) for all pairs."""
        q = self.quantale
        pts = f.dom.points
        return all(q.leq(f.dom.dist(x, y), f.cod.dist(f(x), f(y))) for x in pts for y in pts)


# --- common spaces ----------------------------------------------------------


def metric_space(points: Sequence, fn: Callable, name: str = "") -> Explicit:
    return Explicit(Q.LAWVERE, list(points), fn, name)


def poset(points: Sequence, leq: Callable, name: str = "") -> Explicit:
    return Explicit(Q.BOOLEAN, list(points), lambda a, b: 1 if leq(a, b) else 0, name)


def nat_trunc(q: Q.Quantale, bound: int) -> Explicit:
    """{0, ..., bound} with |i - j| (metric) or the usual order (poset)."""
    pts = list(range(bound + 1))
    if q.kind == "boolean":
        return poset(pts, lambda a, b: a <= b, f"N<={bound}")
    return metric_space(pts, lambda a, b: Fraction(abs(a - b)), f"N<={bound}")


def discrete(q: Q.Quantale, points: Sequence) -> Explicit:
    """Points at infinite distance from each other (or incomparable)."""
    if q.kind == "boolean":
        return poset(points, lambda a, b: a == b)
    return Explicit(q, list(points), lambda a, b: Fraction(0) if a == b else Q.INF)
