"""Theories: signature, definitions, axioms, quantale and flags.

A theory file is line oriented.  Headers end with a colon; anything after
the colon on the same line counts as the first item::

    quantale: lawvere
    flags: symmetric
    types: X
    ops:
      wait{n:nat} : X -> X
      zero : I -> X
    defs:
      w1 := \\x:X. wait1(x)
    axioms:
      forall n m : nat. x:X |- wait{n}(x) =[abs(m-n)] wait{m}(x) : X

``#`` starts a comment and a trailing backslash joins a line with the next.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .. import quantale as Q
from .index import SORTS, Cmp, IExpr, IInf, INum, in_sort
from .lexer import ParseError, tokenize
from .parser import Parser
from .terms import (
    Lambda, OpApp, Term, TypeExpr, Var, children, ground_names, pretty_context,
    pretty_type, replace_children, free_vars,
)


class TheoryError(ValueError):
    pass


@dataclass(frozen=True)
class OpDecl:
    name: str
    args: tuple
    result: TypeExpr
    sort: Optional[str] = None  # index sort for operation families

    def __str__(self) -> str:
        head = f"{self.name}{{i:{self.sort}}}" if self.sort else self.name
        return f"{head} : {', '.join(pretty_type(a) for a in self.args)} -> {pretty_type(self.result)}"


@dataclass(frozen=True)
class Axiom:
    ctx: tuple
    lhs: Term
    rhs: Term
    type: TypeExpr
    label: IExpr
    params: tuple = ()  # ((name, sort), ...)
    conditions: tuple = ()
    source: str = ""

    @property
    def is_schema(self) -> bool:
        return bool(self.params)

    def admits(self, env: dict) -> bool:
        for name, sort in self.params:
            if name not in env or not in_sort(env[name], sort):
                return False
        return all(c.holds(env) for c in self.conditions)

    def label_value(self, quantale: Q.Quantale, env: Optional[dict] = None):
        return quantale.value(self.label.eval(env or {}))

    def instance(self, env: dict):
        """Concrete (lhs, rhs) for a parameter assignment."""
        return instantiate_indices(self.lhs, env), instantiate_indices(self.rhs, env)

    def __str__(self) -> str:
        if self.source:
            return self.source
        from .pretty import pretty

        return f"{pretty_context(self.ctx)} |- {pretty(self.lhs)} =[{self.label}] {pretty(self.rhs)} : {pretty_type(self.type)}"


def instantiate_indices(t: Term, env: dict) -> Term:
    if isinstance(t, OpApp):
        args = tuple(instantiate_indices(a, env) for a in t.args)
        ix = t.index
        if isinstance(ix, IExpr):
            ix = ix.eval(env)
        return OpApp(t.op, args, ix)
    cs = children(t)
    if not cs:
        return t
    return replace_children(t, [instantiate_indices(c, env) for c in cs])


def has_index_params(t: Term) -> bool:
    if isinstance(t, OpApp) and isinstance(t.index, IExpr):
        return True
    return any(has_index_params(c) for c in children(t))


@dataclass
class Theory:
    quantale: Q.Quantale
    types: tuple = ()
    ops: dict = field(default_factory=dict)
    defs: dict = field(default_factory=dict)
    axioms: list = field(default_factory=list)
    symmetric: bool = False
    affine: bool = False
    name: str = ""

    # signature lookups

    def op(self, name: str, index=None) -> OpDecl:
        decl = self.ops.get(name)
        if decl is None:
            raise TheoryError(f"unknown operation {name}")
        if decl.sort is None and index is not None:
            raise TheoryError(f"operation {name} takes no index")
        if decl.sort is not None:
            if index is None:
                raise TheoryError(f"operation family {name} needs an index")
            if isinstance(index, Fraction) and not in_sort(index, decl.sort):
                raise TheoryError(f"index {index} of {name} is not a {decl.sort}")
        return decl

    def _family_split(self, name: str):
        m = re.fullmatch(r"(.*?)(\d+)", name)
        if not m:
            return None
        base, digits = m.groups()
        decl = self.ops.get(base)
        if decl is not None and decl.sort in ("nat", "int", "rat", "nnrat", "prob"):
            return base, Fraction(int(digits))
        return None

    def resolve(self, t: Term, bound=frozenset()) -> Term:
        """Canonicalize family names (``wait1`` -> ``wait{1}``) and expand definitions."""
        if isinstance(t, Var):
            if t.name not in bound and t.name in self.defs:
                return self.defs[t.name]
            return t
        if isinstance(t, OpApp):
            args = tuple(self.resolve(a, bound) for a in t.args)
            if t.index is None and t.op not in self.ops:
                split = self._family_split(t.op)
                if split:
                    return OpApp(split[0], args, split[1])
            return OpApp(t.op, args, t.index)
        cs = children(t)
        if not cs:
            return t
        return replace_children(t, [self.resolve(c, bound) for c in cs])

    def parse_term(self, text: str, ctx=None) -> Term:
        from .parser import parse_term

        return parse_term(text, self, ctx)

    def axiom_label(self, i: int, env=None):
        return self.axioms[i].label_value(self.quantale, env)

    def summary(self) -> str:
        lines = [f"quantale: {self.quantale.kind}"]
        flags = [f for f, on in (("symmetric", self.symmetric), ("affine", self.affine)) if on]
        if flags:
            lines.append("flags: " + " ".join(flags))
        lines.append("types: " + " ".join(self.types))
        lines.append("ops:")
        lines += [f"  {d}" for d in self.ops.values()]
        lines.append("axioms:")
        lines += [f"  [{i}] {a}" for i, a in enumerate(self.axioms)]
        return "\n".join(lines)


_HEADER = re.compile(r"^(quantale|flags|types|ops|defs|axioms)\s*:(.*)$")


def _logical_lines(text: str):
    """Yield (line number, content) with comments stripped and continuations joined."""
    buf, start = "", 0
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not buf:
            start = no
        if line.endswith("\\") and not line.endswith("\\\\"):
            buf += line[:-1] + " "
            continue
        buf += line
        if buf.strip():
            yield start, buf
        buf = ""
    if buf.strip():
        yield start, buf


def _tokens(text: str, line: int):
    col = len(text) - len(text.lstrip()) + 1
    return tokenize(text.strip(), line, col)


def parse_op_decl(text: str, line: int = 1) -> OpDecl:
    p = Parser(_tokens(text, line))
    name = p.ident("an operation name")
    sort = None
    if p.accept("{"):
        p.ident("an index parameter")
        p.expect(":")
        sort = p.ident("an index sort")
        if sort not in SORTS:
            p.error(f"unknown index sort {sort!r}; expected one of {', '.join(SORTS)}")
        p.expect("}")
    p.expect(":")
    args = [p.type_()]
    while p.accept(","):
        args.append(p.type_())
    p.expect("->")
    result = p.type_()
    p.done()
    return OpDecl(name, tuple(args), result, sort)


def parse_axiom(text: str, line: int = 1) -> Axiom:
    p = Parser(_tokens(text, line))
    params: list = []
    conds: list = []
    if p.accept("forall"):
        while True:
            names = [p.ident("a parameter")]
            while p.tok.kind == "IDENT" and not p.at(":"):
                names.append(p.ident("a parameter"))
            p.expect(":")
            sort = p.ident("an index sort")
            if sort not in SORTS:
                p.error(f"unknown index sort {sort!r}")
            params += [(n, sort) for n in names]
            if not p.accept(","):
                break
        if p.accept("|"):
            conds = p.condition()
        p.expect(".")
    ctx = p.context()
    p.expect("|-")
    lhs = p.term()
    p.expect("=")
    p.expect("[")
    label = p.iexpr()
    p.expect("]")
    rhs = p.term()
    p.expect(":")
    ty = p.type_()
    p.done()
    declared = {n for n, _ in params}
    used = set().union(label.vars(), *(c.vars() for c in conds))
    used |= _index_vars(lhs) | _index_vars(rhs)
    if used - declared:
        raise ParseError(f"undeclared index parameter(s) {', '.join(sorted(used - declared))}", line, 1)
    return Axiom(ctx, lhs, rhs, ty, label, tuple(params), tuple(conds), text.strip())


def _index_vars(t: Term) -> set:
    out = set()
    if isinstance(t, OpApp) and isinstance(t.index, IExpr):
        out |= t.index.vars()
    for c in children(t):
        out |= _index_vars(c)
    return out


def parse_theory(text: str, name: str = "", check: bool = True) -> Theory:
    section = None
    kind = None
    flags: set = set()
    types: list = []
    ops: dict = {}
    raw_defs: list = []
    raw_axioms: list = []
    for no, line in _logical_lines(text):
        m = _HEADER.match(line.strip())
        if m:
            section, rest = m.group(1), m.group(2).strip()
            if not rest:
                continue
            line = rest
        if section is None:
            raise ParseError("content before the first section header", no, 1)
        item = line.strip()
        if section == "quantale":
            if kind is not None:
                raise ParseError("quantale declared twice", no, 1)
            kind = item
        elif section == "flags":
            for f in re.split(r"[\s,]+", item):
                if f not in ("symmetric", "affine", "linear"):
                    raise ParseError(f"unknown flag {f!r}", no, 1)
                flags.add(f)
        elif section == "types":
            for t in re.split(r"[\s,]+", item):
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", t) or t == "I":
                    raise ParseError(f"bad ground type name {t!r}", no, 1)
                types.append(t)
        elif section == "ops":
            decl = parse_op_decl(item, no)
            if decl.name in ops:
                raise ParseError(f"operation {decl.name} declared twice", no, 1)
            ops[decl.name] = decl
        elif section == "defs":
            m2 = re.match(r"^\s*([A-Za-z_][A-Za-z0-9_']*)\s*:=(.*)$", item)
            if not m2:
                raise ParseError("definitions look like 'name := term'", no, 1)
            raw_defs.append((no, m2.group(1), m2.group(2)))
        elif section == "axioms":
            raw_axioms.append((no, item))
    if kind is None:
        raise ParseError("missing 'quantale:' section", 1, 1)
    try:
        q = Q.get(kind)
    except Q.QuantaleError as exc:
        raise ParseError(str(exc), 1, 1) from None
    th = Theory(q, tuple(types), ops, {}, [], "symmetric" in flags, "affine" in flags, name)
    for decl in ops.values():
        for ty in decl.args + (decl.result,):
            missing = ground_names(ty) - set(types)
            if missing:
                raise TheoryError(f"operation {decl.name} mentions undeclared type(s) {', '.join(sorted(missing))}")
    for no, dname, body in raw_defs:
        p = Parser(_tokens(body, no))
        t = p.term()
        p.done()
        t = th.resolve(t)
        if free_vars(t):
            raise TheoryError(f"definition {dname} is not closed (free: {', '.join(free_vars(t))})")
        th.defs[dname] = t
    for no, item in raw_axioms:
        ax = parse_axiom(item, no)
        names = {n for n, _ in ax.ctx}
        ax = Axiom(ax.ctx, th.resolve(ax.lhs, names), th.resolve(ax.rhs, names), ax.type,
                   ax.label, ax.params, ax.conditions, ax.source)
        th.axioms.append(ax)
    if check:
        validate_theory(th)
    return th


def validate_theory(th: Theory) -> None:
    """Check that axiom sides typecheck and concrete labels lie in the quantale."""
    from ..typecheck import TypingError, derive

    for i, ax in enumerate(th.axioms):
        if not isinstance(ax.label, IExpr):
            raise TheoryError(f"axiom {i}: bad label")
        if not ax.label.vars():
            value = ax.label.eval({})
            if not th.quantale.contains(value if not isinstance(ax.label, IInf) else value):
                raise TheoryError(f"axiom {i}: label {ax.label} is not a {th.quantale.kind} value")
        for side in (ax.lhs, ax.rhs):
            try:
                d = derive(th, ax.ctx, side)
            except TypingError as exc:
                raise TheoryError(f"axiom {i} ({ax}): {exc}") from None
            if d.type != ax.type:
                raise TheoryError(
                    f"axiom {i}: side has type {pretty_type(d.type)}, declared {pretty_type(ax.type)}"
                )


def load_theory(path) -> Theory:
    from pathlib import Path

    p = Path(path)
    return parse_theory(p.read_text(encoding="utf-8"), name=p.stem)
