"""Types, terms and contexts.

Terms are locally nameless: free variables are named, bound occurrences
are de Bruijn indices.  Binder names survive only as display hints and do
not take part in equality, so alpha-equivalent terms compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Optional, Sequence, Union


class SyntaxUsageError(ValueError):
    pass


# --- types -----------------------------------------------------------------


class TypeExpr:
    __slots__ = ()


@dataclass(frozen=True)
class Ground(TypeExpr):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Unit(TypeExpr):
    def __str__(self) -> str:
        return "I"


@dataclass(frozen=True)
class Tensor(TypeExpr):
    left: TypeExpr
    right: TypeExpr

    def __str__(self) -> str:
        return pretty_type(self)


@dataclass(frozen=True)
class Lollipop(TypeExpr):
    dom: TypeExpr
    cod: TypeExpr

    def __str__(self) -> str:
        return pretty_type(self)


UNIT = Unit()


def pretty_type(t: TypeExpr) -> str:
    if isinstance(t, Ground):
        return t.name
    if isinstance(t, Unit):
        return "I"
    if isinstance(t, Tensor):
        left = pretty_type(t.left)
        if isinstance(t.left, Lollipop):
            left = f"({left})"
        right = pretty_type(t.right)
        if isinstance(t.right, (Lollipop, Tensor)):
            right = f"({right})"
        return f"{left} * {right}"
    if isinstance(t, Lollipop):
        dom = pretty_type(t.dom)
        if isinstance(t.dom, Lollipop):
            dom = f"({dom})"
        return f"{dom} ->o {pretty_type(t.cod)}"
    raise TypeError(t)


def ground_names(t: TypeExpr) -> set[str]:
    if isinstance(t, Ground):
        return {t.name}
    if isinstance(t, (Tensor,)):
        return ground_names(t.left) | ground_names(t.right)
    if isinstance(t, Lollipop):
        return ground_names(t.dom) | ground_names(t.cod)
    return set()


def has_lollipop(t: TypeExpr) -> bool:
    if isinstance(t, Lollipop):
        return True
    if isinstance(t, Tensor):
        return has_lollipop(t.left) or has_lollipop(t.right)
    return False


# --- terms -----------------------------------------------------------------


class Term:
    __slots__ = ()

    def __str__(self) -> str:
        from .pretty import pretty

        return pretty(self)


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class BVar(Term):
    index: int


@dataclass(frozen=True)
class OpApp(Term):
    op: str
    args: tuple
    # Fraction for a family instance, an index expression inside axiom schemas
    index: object = None


@dataclass(frozen=True)
class Star(Term):
    pass


@dataclass(frozen=True)
class TensorIntro(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class PmTo(Term):
    """``pm scrut to x * y. body``; in body BVar(1) is x and BVar(0) is y."""

    scrut: Term
    body: Term
    hx: str = field(default="x", compare=False)
    hy: str = field(default="y", compare=False)


@dataclass(frozen=True)
class UnitTo(Term):
    scrut: Term
    body: Term


@dataclass(frozen=True)
class Lambda(Term):
    ty: TypeExpr
    body: Term
    hint: str = field(default="x", compare=False)


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class Dis(Term):
    body: Term


STAR = Star()


def children(t: Term) -> tuple:
    if isinstance(t, OpApp):
        return t.args
    if isinstance(t, TensorIntro):
        return (t.left, t.right)
    if isinstance(t, (PmTo, UnitTo)):
        return (t.scrut, t.body)
    if isinstance(t, Lambda):
        return (t.body,)
    if isinstance(t, App):
        return (t.fn, t.arg)
    if isinstance(t, Dis):
        return (t.body,)
    return ()


def binder_arity(t: Term, i: int) -> int:
    """How many variables child ``i`` of ``t`` has bound over it."""
    if isinstance(t, PmTo) and i == 1:
        return 2
    if isinstance(t, Lambda):
        return 1
    return 0


def replace_children(t: Term, new: Sequence[Term]) -> Term:
    if isinstance(t, OpApp):
        return OpApp(t.op, tuple(new), t.index)
    if isinstance(t, TensorIntro):
        return TensorIntro(new[0], new[1])
    if isinstance(t, PmTo):
        return PmTo(new[0], new[1], t.hx, t.hy)
    if isinstance(t, UnitTo):
        return UnitTo(new[0], new[1])
    if isinstance(t, Lambda):
        return Lambda(t.ty, new[0], t.hint)
    if isinstance(t, App):
        return App(new[0], new[1])
    if isinstance(t, Dis):
        return Dis(new[0])
    return t


def size(t: Term) -> int:
    return 1 + sum(size(c) for c in children(t))


def _map_vars(t: Term, fn, depth: int = 0) -> Term:
    """Rebuild ``t`` with ``fn(node, depth)`` applied at Var/BVar leaves."""
    if isinstance(t, (Var, BVar)):
        return fn(t, depth)
    cs = children(t)
    if not cs:
        return t
    new = [_map_vars(c, fn, depth + binder_arity(t, i)) for i, c in enumerate(cs)]
    if all(a is b for a, b in zip(new, cs)):
        return t
    return replace_children(t, new)


def instantiate(body: Term, values: Sequence[Term]) -> Term:
    """Replace BVar(i) (relative to the binder) by ``values[i]``.

    The values must be locally closed.
    """
    k = len(values)

    def fn(node, depth):
        if isinstance(node, BVar) and depth <= node.index < depth + k:
            return values[node.index - depth]
        return node

    return _map_vars(body, fn)


def abstract(body: Term, names: Sequence[str]) -> Term:
    """Inverse of ``instantiate`` with variables: ``names[i]`` becomes BVar(i)."""
    pos = {n: i for i, n in enumerate(names)}

    def fn(node, depth):
        if isinstance(node, Var) and node.name in pos:
            return BVar(depth + pos[node.name])
        return node

    return _map_vars(body, fn)


def open_lambda(t: Lambda, name: str) -> Term:
    return instantiate(t.body, [Var(name)])


def open_pm(t: PmTo, x: str, y: str) -> Term:
    return instantiate(t.body, [Var(y), Var(x)])


def mk_lambda(name: str, ty: TypeExpr, body: Term) -> Lambda:
    return Lambda(ty, abstract(body, [name]), name)


def mk_pm(scrut: Term, x: str, y: str, body: Term) -> PmTo:
    return PmTo(scrut, abstract(body, [y, x]), x, y)


def free_vars(t: Term) -> list[str]:
    """Free variables in left-to-right order of first occurrence."""
    out: list[str] = []
    seen: set[str] = set()

    def walk(u):
        if isinstance(u, Var):
            if u.name not in seen:
                seen.add(u.name)
                out.append(u.name)
            return
        for c in children(u):
            walk(c)

    walk(t)
    return out


def var_occurrences(t: Term) -> dict[str, int]:
    counts: dict[str, int] = {}

    def walk(u):
        if isinstance(u, Var):
            counts[u.name] = counts.get(u.name, 0) + 1
            return
        for c in children(u):
            walk(c)

    walk(t)
    return counts


def is_locally_closed(t: Term, depth: int = 0) -> bool:
    if isinstance(t, BVar):
        return t.index < depth
    return all(is_locally_closed(c, depth + binder_arity(t, i)) for i, c in enumerate(children(t)))


def subst(t: Term, mapping: dict) -> Term:
    """Capture-free simultaneous substitution of free variables."""
    if not mapping:
        return t

    def fn(node, depth):
        if isinstance(node, Var) and node.name in mapping:
            return mapping[node.name]
        return node

    return _map_vars(t, fn)


def rename(t: Term, mapping: dict) -> Term:
    return subst(t, {a: Var(b) for a, b in mapping.items()})


def fresh_name(base: str, avoid) -> str:
    if base and base not in avoid:
        return base
    base = base.rstrip("0123456789'") or "v"
    if base not in avoid:
        return base
    k = 1
    while f"{base}{k}" in avoid:
        k += 1
    return f"{base}{k}"


def all_names(t: Term) -> set[str]:
    """Free variable names plus binder hints; handy for picking fresh names."""
    names: set[str] = set()

    def walk(u):
        if isinstance(u, Var):
            names.add(u.name)
        elif isinstance(u, Lambda):
            names.add(u.hint)
        elif isinstance(u, PmTo):
            names.update((u.hx, u.hy))
        for c in children(u):
            walk(c)

    walk(t)
    return names


def alpha_eq(a: Term, b: Term) -> bool:
    return a == b


def contains_dis(t: Term) -> bool:
    if isinstance(t, Dis):
        return True
    return any(contains_dis(c) for c in children(t))


def contains_higher_order(t: Term) -> bool:
    if isinstance(t, (Lambda, App)):
        return True
    return any(contains_higher_order(c) for c in children(t))


# --- positions -------------------------------------------------------------


def subterm(t: Term, path: Sequence[int]) -> Term:
    for i in path:
        t = children(t)[i]
    return t


def positions(t: Term) -> Iterator[tuple]:
    """All paths into ``t`` in pre-order."""
    yield ()
    for i, c in enumerate(children(t)):
        for p in positions(c):
            yield (i,) + p


# --- contexts --------------------------------------------------------------

Context = tuple  # tuple of (name, TypeExpr)


def make_context(pairs: Iterable) -> Context:
    ctx = tuple((str(n), ty) for n, ty in pairs)
    names = [n for n, _ in ctx]
    if len(set(names)) != len(names):
        dup = next(n for n in names if names.count(n) > 1)
        raise SyntaxUsageError(f"variable {dup} occurs twice in the context")
    return ctx


def ctx_names(ctx: Context) -> list[str]:
    return [n for n, _ in ctx]


def ctx_lookup(ctx: Context, name: str) -> Optional[TypeExpr]:
    for n, ty in ctx:
        if n == name:
            return ty
    return None


def restrict(ctx: Context, names) -> Context:
    keep = set(names)
    return tuple(p for p in ctx if p[0] in keep)


def pretty_context(ctx: Context) -> str:
    if not ctx:
        return "-"
    return ", ".join(f"{n}:{pretty_type(ty)}" for n, ty in ctx)


def shuffles(blocks: Sequence[Context]) -> list[Context]:
    """All interleavings of ``blocks`` that keep each block's internal order.

    Enumeration is deterministic: positions for earlier blocks are chosen
    first, in lexicographic order.
    """
    seen: set[str] = set()
    for b in blocks:
        for n, _ in b:
            if n in seen:
                raise SyntaxUsageError(f"blocks overlap on variable {n}")
            seen.add(n)
    blocks = [tuple(b) for b in blocks]
    total = sum(len(b) for b in blocks)
    out: list[Context] = []

    def rec(i: int, free: list[int], slots: list):
        if i == len(blocks):
            out.append(tuple(slots))
            return
        b = blocks[i]
        for chosen in combinations(free, len(b)):
            new_slots = list(slots)
            for pos, item in zip(chosen, b):
                new_slots[pos] = item
            rest = [p for p in free if p not in chosen]
            rec(i + 1, rest, new_slots)

    rec(0, list(range(total)), [None] * total)
    return out


def is_shuffle(ctx: Context, blocks: Sequence[Context]) -> bool:
    """Membership test without enumerating every interleaving."""
    where: dict[str, int] = {}
    for i, b in enumerate(blocks):
        for n, _ in b:
            if n in where:
                return False
            where[n] = i
    if sorted(where) != sorted(ctx_names(ctx)) or len(ctx) != len(where):
        return False
    cursor = [0] * len(blocks)
    for item in ctx:
        i = where[item[0]]
        if cursor[i] >= len(blocks[i]) or blocks[i][cursor[i]] != item:
            return False
        cursor[i] += 1
    return True


Index = Union[Fraction, None, object]
