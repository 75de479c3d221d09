"""Quantum channels generated by isometries, compared by diamond distance."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import numeric_q as nq
from .. import quantale as Q
from .core import Backend, SemanticsError, leaves


@dataclass(frozen=True)
class QDim:
    n: int


class QChan(Backend):
    """No internal hom: higher-order equations are uncurried before interpretation."""

    name = "QChan"
    has_hom = False
    has_bang = True

    def __init__(self, tol: float = 1e-6, starts: int = 32, seed: int = 0):
        self.quantale = Q.LAWVERE
        self.tol = tol
        self.starts = starts
        self.seed = seed

    def unit(self):
        return QDim(1)

    def tensor_obj(self, a, b):
        return QDim(a.n * b.n)

    def dom(self, f):
        return QDim(f.n_in)

    def cod(self, f):
        return QDim(f.n_out)

    def id(self, a):
        return nq.Isometry(np.eye(a.n, dtype=complex))

    def compose(self, g, f):
        return nq.compose(f, g)

    def tensor(self, f, g):
        return nq.TensorPair(f, g)

    def rearrange(self, src, dst, perm):
        dims = [leaf.obj.n for leaf in leaves(src)]
        if len(perm) != len(dims):
            raise SemanticsError("rearrangement does not match the shape")
        return nq.Isometry(nq.permutation_isometry(dims, list(perm)))

    def bang(self, a):
        return nq.Discard(a.n)

    def distance_float(self, f, g) -> float:
        return nq.channel_distance(f, g, self.starts, self.seed)

    def hom_distance(self, f, g):
        return self.quantale.value(Fraction(self.distance_float(f, g)))
