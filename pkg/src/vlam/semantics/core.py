"""Backend-independent interpretation of typing derivations.

Contexts are interpreted left-nested, ``[[-]] = I``, ``[[x:A]] = [[A]]`` and
``[[G, x:A]] = [[G]] (x) [[A]]``.  Structural isomorphisms are described by
*shapes* (trees of tensor products over leaf objects) and a permutation of
leaves; every backend realizes such a rearrangement directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

from ..quantale import QValue, Quantale
from ..syntax.terms import (
    App, Ground, Lambda, Lollipop, Tensor, TypeExpr, Unit, Var, ctx_names, fresh_name, free_vars,
    pretty_type,
)
from ..syntax.theory import Theory
from ..typecheck import Derivation, derive


class SemanticsError(Exception):
    pass


class MissingCapability(SemanticsError):
    pass


# --- shapes ---------------------------------------------------------------


@dataclass(frozen=True)
class SUnit:
    pass


@dataclass(frozen=True)
class SLeaf:
    obj: Any = field(compare=False)
    key: int = 0  # leaves are told apart by position only


@dataclass(frozen=True)
class STensor:
    left: Any
    right: Any


def leaves(s) -> list:
    if isinstance(s, SLeaf):
        return [s]
    if isinstance(s, STensor):
        return leaves(s.left) + leaves(s.right)
    return []


def tensor_shapes(shapes: Sequence) -> Any:
    """Left-nested tensor of shapes; the empty list is the unit."""
    if not shapes:
        return SUnit()
    out = shapes[0]
    for s in shapes[1:]:
        out = STensor(out, s)
    return out


# --- backend interface ------------------------------------------------------


class Backend:
    """Capabilities a semantic category offers to the interpreter."""

    name = "abstract"
    quantale: Quantale
    has_hom = False
    has_bang = False
    tol = 0.0

    # objects
    def unit(self):
        raise NotImplementedError

    def tensor_obj(self, a, b):
        raise NotImplementedError

    def hom_obj(self, a, b):
        raise MissingCapability(f"{self.name} has no internal hom")

    # morphisms
    def dom(self, f):
        raise NotImplementedError

    def cod(self, f):
        raise NotImplementedError

    def id(self, a):
        raise NotImplementedError

    def compose(self, g, f):
        """``g . f``"""
        raise NotImplementedError

    def tensor(self, f, g):
        raise NotImplementedError

    def rearrange(self, src, dst, perm: Sequence[int]):
        """Iso from shape ``src`` to ``dst``; output leaf j is input leaf ``perm[j]``."""
        raise NotImplementedError

    def curry(self, f, a, b):
        raise MissingCapability(f"{self.name} has no internal hom")

    def app(self, a, b):
        raise MissingCapability(f"{self.name} has no internal hom")

    def bang(self, a):
        raise MissingCapability(f"{self.name} has no terminal map")

    def hom_distance(self, f, g) -> QValue:
        raise NotImplementedError

    def equal_objects(self, a, b) -> bool:
        return a == b

    # structural isomorphisms, derived from ``rearrange``

    def shape_obj(self, s):
        if isinstance(s, SUnit):
            return self.unit()
        if isinstance(s, SLeaf):
            return s.obj
        return self.tensor_obj(self.shape_obj(s.left), self.shape_obj(s.right))

    def lam(self, a):
        """I (x) A -> A"""
        return self.rearrange(STensor(SUnit(), SLeaf(a)), SLeaf(a), [0])

    def lam_inv(self, a):
        return self.rearrange(SLeaf(a), STensor(SUnit(), SLeaf(a)), [0])

    def rho(self, a):
        """A (x) I -> A"""
        return self.rearrange(STensor(SLeaf(a), SUnit()), SLeaf(a), [0])

    def rho_inv(self, a):
        return self.rearrange(SLeaf(a), STensor(SLeaf(a), SUnit()), [0])

    def alpha(self, a, b, c):
        """(A (x) B) (x) C -> A (x) (B (x) C)"""
        la, lb, lc = SLeaf(a, 0), SLeaf(b, 1), SLeaf(c, 2)
        return self.rearrange(STensor(STensor(la, lb), lc), STensor(la, STensor(lb, lc)), [0, 1, 2])

    def alpha_inv(self, a, b, c):
        la, lb, lc = SLeaf(a, 0), SLeaf(b, 1), SLeaf(c, 2)
        return self.rearrange(STensor(la, STensor(lb, lc)), STensor(STensor(la, lb), lc), [0, 1, 2])

    def sw(self, a, b):
        """A (x) B -> B (x) A"""
        return self.rearrange(STensor(SLeaf(a), SLeaf(b)), STensor(SLeaf(b), SLeaf(a)), [1, 0])


# --- interpretations --------------------------------------------------------


@dataclass
class Interpretation:
    """Objects for ground types and morphisms for operations.

    ``ops`` maps a name to a morphism, or for operation families to a
    callable from the index to a morphism.
    """

    backend: Backend
    types: dict
    ops: dict
    families: set = field(default_factory=set)
    samples: dict = field(default_factory=dict)  # index values for checking schemas

    def op(self, name: str, index=None):
        if name not in self.ops:
            raise SemanticsError(f"operation {name} is not interpreted")
        m = self.ops[name]
        if name in self.families:
            return m(index)
        return m


def interpret_type(i: Interpretation, t: TypeExpr):
    b = i.backend
    if isinstance(t, Ground):
        if t.name not in i.types:
            raise SemanticsError(f"ground type {t.name} is not interpreted")
        return i.types[t.name]
    if isinstance(t, Unit):
        return b.unit()
    if isinstance(t, Tensor):
        return b.tensor_obj(interpret_type(i, t.left), interpret_type(i, t.right))
    if isinstance(t, Lollipop):
        return b.hom_obj(interpret_type(i, t.dom), interpret_type(i, t.cod))
    raise SemanticsError(f"not a type: {t!r}")


def ctx_shape(i: Interpretation, ctx) -> Any:
    return tensor_shapes([SLeaf(interpret_type(i, ty), k) for k, (_, ty) in enumerate(ctx)])


def interpret_ctx(i: Interpretation, ctx):
    return i.backend.shape_obj(ctx_shape(i, ctx))


def _type_shape(i: Interpretation, t: TypeExpr, key: int = 0):
    return SLeaf(interpret_type(i, t), key)


# --- housekeeping -------------------------------------------------------------


@dataclass(frozen=True)
class Plan:
    """A structural iso between two context shapes, given as a leaf permutation."""

    src: Any
    dst: Any
    perm: tuple

    def then(self, other: "Plan") -> "Plan":
        if leaves(self.dst) != leaves(other.src) and len(leaves(self.dst)) != len(leaves(other.src)):
            raise SemanticsError("plans do not compose")
        return Plan(self.src, other.dst, tuple(self.perm[k] for k in other.perm))

    def morphism(self, backend: Backend):
        return backend.rearrange(self.src, self.dst, list(self.perm))

    @property
    def is_identity(self) -> bool:
        return self.src == self.dst and list(self.perm) == list(range(len(self.perm)))


def _block_shapes(i: Interpretation, blocks):
    shapes, k = [], 0
    for blk in blocks:
        leafs = [SLeaf(interpret_type(i, ty), k + j) for j, (_, ty) in enumerate(blk)]
        shapes.append(tensor_shapes(leafs))
        k += len(blk)
    return shapes


def Spl(i: Interpretation, blocks) -> Plan:
    """[[G1, ..., Gn]] -> [[G1]] (x) ... (x) [[Gn]]"""
    flat = [e for b in blocks for e in b]
    src = ctx_shape(i, flat)
    dst = tensor_shapes(_block_shapes(i, blocks))
    return Plan(src, dst, tuple(range(len(flat))))


def Join(i: Interpretation, blocks) -> Plan:
    p = Spl(i, blocks)
    return Plan(p.dst, p.src, p.perm)


def Sh(i: Interpretation, ctx, blocks) -> Plan:
    """[[E]] -> [[G1, ..., Gn]] for a shuffle E of the blocks."""
    flat = [e for b in blocks for e in b]
    names = ctx_names(ctx)
    if sorted(names) != sorted(n for n, _ in flat):
        raise SemanticsError("blocks do not partition the context")
    perm = tuple(names.index(n) for n, _ in flat)
    return Plan(ctx_shape(i, ctx), ctx_shape(i, flat), perm)


def Exch(i: Interpretation, ctx, k: int) -> Plan:
    """[[G, x, y, D]] -> [[G, y, x, D]] swapping positions k and k+1."""
    ctx = list(ctx)
    if not 0 <= k < len(ctx) - 1:
        raise SemanticsError("exchange position out of range")
    new = ctx[:k] + [ctx[k + 1], ctx[k]] + ctx[k + 2:]
    perm = list(range(len(ctx)))
    perm[k], perm[k + 1] = k + 1, k
    return Plan(ctx_shape(i, ctx), ctx_shape(i, new), tuple(perm))


def Compose(*plans: Plan) -> Plan:
    out = plans[0]
    for p in plans[1:]:
        out = out.then(p)
    return out


# --- the interpreter ------------------------------------------------------


def _spl_sh(i: Interpretation, d: Derivation):
    """[[E]] -> [[G1]] (x) ... (x) [[Gn]] for the premise contexts of ``d``."""
    b = i.backend
    plan = Compose(Sh(i, d.ctx, d.blocks), Spl(i, d.blocks))
    return plan.morphism(b)


def _tensor_all(b: Backend, ms: list):
    out = ms[0]
    for m in ms[1:]:
        out = b.tensor(out, m)
    return out


def interpret(i: Interpretation, d: Derivation):
    b = i.backend
    r = d.rule
    if r == "hyp":
        return b.id(interpret_type(i, d.type))
    if r == "unit_i":
        return b.id(b.unit())
    if r == "ax":
        args = [interpret(i, p) for p in d.premises]
        f = i.op(d.term.op, d.term.index)
        return b.compose(f, b.compose(_tensor_all(b, args), _spl_sh(i, d)))
    if r in ("tensor_i", "lolli_e"):
        v, w = (interpret(i, p) for p in d.premises)
        m = b.compose(b.tensor(v, w), _spl_sh(i, d))
        if r == "lolli_e":
            fty = d.premises[0].type
            m = b.compose(b.app(interpret_type(i, fty.dom), interpret_type(i, fty.cod)), m)
        return m
    if r == "unit_e":
        v, w = (interpret(i, p) for p in d.premises)
        delta = d.blocks[1]
        dsh = ctx_shape(i, delta)
        # I (x) [[D]] -> [[D]]
        lam = b.rearrange(STensor(SUnit(), dsh), dsh, list(range(len(leaves(dsh)))))
        m = b.compose(b.tensor(v, b.id(b.shape_obj(dsh))), _spl_sh(i, d))
        return b.compose(w, b.compose(lam, m))
    if r == "tensor_e":
        pv, pw = d.premises
        v, w = interpret(i, pv), interpret(i, pw)
        gamma, delta = d.blocks
        a, bt = pv.type.left, pv.type.right
        dsh = ctx_shape(i, delta)
        nd = len(delta)
        la, lb = SLeaf(interpret_type(i, a), nd), SLeaf(interpret_type(i, bt), nd + 1)
        # [[G]] (x) [[D]]  ->  [[D]] (x) [[G]]
        gsh = ctx_shape(i, gamma)
        swap = b.rearrange(STensor(gsh, dsh), STensor(dsh, gsh),
                           list(range(len(gamma), len(gamma) + nd)) + list(range(len(gamma))))
        m = b.compose(swap, _spl_sh(i, d))
        m = b.compose(b.tensor(b.id(b.shape_obj(dsh)), v), m)
        # [[D]] (x) (A (x) B) -> [[D, x:A, y:B]]
        inner = ctx_shape(i, tuple(delta) + ((d.binders[0], a), (d.binders[1], bt)))
        src = STensor(dsh, STensor(la, lb))
        m = b.compose(b.rearrange(src, inner, list(range(nd + 2))), m)
        return b.compose(w, m)
    if r == "lolli_i":
        (p,) = d.premises
        body = interpret(i, p)
        x, a = p.ctx[-1]
        gsh = ctx_shape(i, d.ctx)
        la = SLeaf(interpret_type(i, a), len(d.ctx))
        fix = b.rearrange(STensor(gsh, la), ctx_shape(i, p.ctx), list(range(len(d.ctx) + 1)))
        return b.curry(b.compose(body, fix), interpret_type(i, a), interpret_type(i, p.type))
    if r == "dis":
        (p,) = d.premises
        v = interpret(i, p)
        return b.compose(b.bang(interpret_type(i, p.type)), v)
    raise SemanticsError(f"unknown rule {r}")


def denote(i: Interpretation, theory: Theory, ctx, term):
    return interpret(i, derive(theory, tuple(ctx), term))
