"""Free signed-measure spaces over finite supports, maps as matrices.

An object is a finite support; a morphism ``A -> B`` is a real matrix with
one column per point of ``A`` (the image of the Dirac measure there).  The
norm of a signed measure is ``sup_S |mu(S)|``, the larger of its positive
and negative mass, and the distance between two maps is the largest norm of
a column difference.  Internal homs are those of finite-dimensional vector
spaces; distances of maps into a hom object are taken after uncurrying.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .. import quantale as Q
from .core import Backend, SemanticsError, SLeaf, STensor, SUnit
from .vcat import build, flatten


@dataclass(frozen=True, eq=False)
class Support:
    points: tuple
    name: str = ""
    hom: tuple = ()  # (dom, cod) for hom objects
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._index.update({p: k for k, p in enumerate(self.points)})

    def __len__(self) -> int:
        return len(self.points)

    def index(self, p) -> int:
        try:
            return self._index[p]
        except KeyError:
            raise SemanticsError(f"{p!r} is not in the support {self.name or ''}") from None

    def __eq__(self, other) -> bool:
        return isinstance(other, Support) and self.points == other.points and self.hom == other.hom

    def __hash__(self) -> int:
        return hash((self.points, self.hom))


@dataclass(frozen=True, eq=False)
class Kernel:
    dom: Support
    cod: Support
    m: np.ndarray  # shape (len(cod), len(dom))

    def column(self, p) -> np.ndarray:
        return self.m[:, self.dom.index(p)]


def measure_norm(mu: np.ndarray) -> float:
    """sup over subsets S of |mu(S)|."""
    mu = np.asarray(mu, dtype=float)
    return float(max(mu[mu > 0].sum(), -mu[mu < 0].sum(), 0.0))


def kernel_from_fn(dom: Support, cod: Support, fn) -> Kernel:
    """``fn(point)`` returns a dict from codomain points to weights."""
    m = np.zeros((len(cod), len(dom)))
    for j, p in enumerate(dom.points):
        for y, w in fn(p).items():
            m[cod.index(y), j] += float(w)
    return Kernel(dom, cod, m)


def deterministic(dom: Support, cod: Support, fn) -> Kernel:
    return kernel_from_fn(dom, cod, lambda p: {fn(p): 1})


class MeasL1(Backend):
    name = "MeasL1"
    has_hom = True
    has_bang = True

    def __init__(self, tol: float = 1e-9):
        self.quantale = Q.LAWVERE
        self.tol = tol
        self._unit = Support(((),), "I")

    def unit(self):
        return self._unit

    def tensor_obj(self, a, b):
        return Support(tuple((x, y) for x in a.points for y in b.points), f"{a.name}*{b.name}")

    def hom_obj(self, a, b):
        pts = tuple((x, y) for x in a.points for y in b.points)
        return Support(pts, f"[{a.name},{b.name}]", (a, b))

    def dom(self, f):
        return f.dom

    def cod(self, f):
        return f.cod

    def id(self, a):
        return Kernel(a, a, np.eye(len(a)))

    def compose(self, g, f):
        if len(g.dom) != len(f.cod):
            raise SemanticsError("kernels do not compose")
        return Kernel(f.dom, g.cod, g.m @ f.m)

    def tensor(self, f, g):
        return Kernel(self.tensor_obj(f.dom, g.dom), self.tensor_obj(f.cod, g.cod), np.kron(f.m, g.m))

    def rearrange(self, src, dst, perm):
        a, b = self.shape_obj(src), self.shape_obj(dst)
        perm = list(perm)

        def fn(e):
            items = flatten(src, e)
            return build(dst, [items[k] for k in perm])

        return deterministic(a, b, fn)

    def curry(self, f, a, b):
        gamma_pts = []
        seen = set()
        for p in f.dom.points:
            if p[0] not in seen:
                seen.add(p[0])
                gamma_pts.append(p[0])
        gamma = Support(tuple(gamma_pts))
        hom = self.hom_obj(a, b)
        m = np.zeros((len(hom), len(gamma)))
        for j, g in enumerate(gamma.points):
            for x in a.points:
                col = f.column((g, x))
                for k, y in enumerate(b.points):
                    m[hom.index((x, y)), j] = col[k]
        return Kernel(gamma, hom, m)

    def app(self, a, b):
        hom = self.hom_obj(a, b)
        dom = self.tensor_obj(hom, a)
        m = np.zeros((len(b), len(dom)))
        for j, ((x, y), x2) in enumerate(dom.points):
            if x == x2:
                m[b.index(y), j] = 1.0
        return Kernel(dom, b, m)

    def bang(self, a):
        return Kernel(a, self._unit, np.ones((1, len(a))))

    def uncurry(self, f):
        a, b = f.cod.hom
        return self.compose(self.app(a, b), self.tensor(f, self.id(a)))

    def hom_distance(self, f, g):
        while f.cod.hom:
            f, g = self.uncurry(f), self.uncurry(g)
        diff = f.m - g.m
        d = max((measure_norm(diff[:, j]) for j in range(diff.shape[1])), default=0.0)
        return self.quantale.value(Fraction(d))

    def distance_float(self, f, g) -> float:
        while f.cod.hom:
            f, g = self.uncurry(f), self.uncurry(g)
        diff = f.m - g.m
        return max((measure_norm(diff[:, j]) for j in range(diff.shape[1])), default=0.0)

    def is_substochastic(self, f, tol: float = 1e-12) -> bool:
        return bool(np.all(f.m >= -tol) and np.all(f.m.sum(axis=0) <= 1 + tol))


def real_support(points: Sequence, name: str = "") -> Support:
    return Support(tuple(points), name)
