"""Typing derivations for the linear (and affine) calculus.

``derive`` builds the unique derivation of a judgement.  The head
constructor picks the rule and free variables decide how the context is
split between premises, so no search is needed.  ``subst`` and
``exchange`` transform existing derivations structurally.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .syntax.index import IExpr
from .syntax.terms import (
    App, BVar, Dis, Lambda, Lollipop, OpApp, PmTo, Star, Tensor, TensorIntro, Term,
    TypeExpr, UNIT, UnitTo, Unit, Var, Context, ctx_names, free_vars, fresh_name,
    is_shuffle, make_context, open_lambda, open_pm, pretty_context, pretty_type,
    rename, restrict, subst as term_subst, var_occurrences, SyntaxUsageError,
)
from .syntax.theory import Theory, TheoryError

RULE_SYMBOLS = {
    "ax": "ax", "hyp": "hyp", "unit_i": "I_i", "unit_e": "I_e", "tensor_i": "⊗_i",
    "tensor_e": "⊗_e", "lolli_i": "⊸_i", "lolli_e": "⊸_e", "dis": "discardable",
}


class TypingError(Exception):
    pass


class UnknownVariable(TypingError):
    pass


class DuplicateVariable(TypingError):
    pass


class UnusedVariable(TypingError):
    pass


class UnknownOperation(TypingError):
    pass


class ArityMismatch(TypingError):
    pass


class SortMismatch(TypingError):
    pass


class ShuffleError(TypingError):
    pass


class AffineError(TypingError):
    pass


class ContextError(TypingError):
    pass


@dataclass(frozen=True)
class Derivation:
    ctx: Context
    term: Term
    type: TypeExpr
    rule: str
    premises: tuple = ()
    # premise contexts for rules that split the context (the conclusion
    # context is the recorded shuffle of these blocks)
    blocks: tuple = ()
    # names chosen for variables bound by the rule
    binders: tuple = ()

    @property
    def shuffle(self) -> Context:
        return self.ctx

    def render(self, indent: int = 0) -> str:
        from .syntax.pretty import pretty

        pad = "  " * indent
        line = f"{pad}{RULE_SYMBOLS[self.rule]}: {pretty_context(self.ctx)} |- {pretty(self.term)} : {pretty_type(self.type)}"
        return "\n".join([line] + [p.render(indent + 1) for p in self.premises])

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)


def _usage_check(theory: Theory, ctx: Context, term: Term) -> None:
    occ = var_occurrences(term)
    names = ctx_names(ctx)
    for name, n in occ.items():
        if name not in names:
            raise UnknownVariable(f"unknown variable {name}")
        if n > 1:
            raise DuplicateVariable(f"variable {name} used {n} times (linear variables are used exactly once)")
    for name in names:
        if name not in occ:
            if theory.affine:
                raise UnusedVariable(
                    f"variable {name} is never consumed; discard it explicitly with dis({name}) to *. ..."
                )
            raise UnusedVariable(f"unused variable {name}")


def derive(theory: Theory, ctx, term: Term) -> Derivation:
    try:
        ctx = make_context(ctx)
    except SyntaxUsageError as exc:
        raise ContextError(str(exc)) from None
    _usage_check(theory, ctx, term)
    return _derive(theory, ctx, term)


def type_of(theory: Theory, ctx, term: Term) -> TypeExpr:
    return derive(theory, ctx, term).type


def _binder_names(ctx: Context, hints) -> list[str]:
    taken = set(ctx_names(ctx))
    out = []
    for h in hints:
        n = fresh_name(h, taken)
        taken.add(n)
        out.append(n)
    return out


def _check_bound_use(theory: Theory, name: str, body: Term) -> None:
    n = var_occurrences(body).get(name, 0)
    if n > 1:
        raise DuplicateVariable(f"bound variable {name} used {n} times")
    if n == 0:
        if theory.affine:
            raise UnusedVariable(f"bound variable {name} is never consumed; discard it with dis({name}) to *. ...")
        raise UnusedVariable(f"unused bound variable {name}")


def _derive(theory: Theory, ctx: Context, t: Term) -> Derivation:
    if isinstance(t, Var):
        if len(ctx) != 1 or ctx[0][0] != t.name:
            raise ShuffleError(f"context {pretty_context(ctx)} does not match variable {t.name}")
        return Derivation(ctx, t, ctx[0][1], "hyp")
    if isinstance(t, BVar):
        raise TypingError("term is not locally closed (dangling bound index)")
    if isinstance(t, Star):
        if ctx:
            raise UnusedVariable(f"unused variable(s) {', '.join(ctx_names(ctx))}")
        return Derivation(ctx, t, UNIT, "unit_i")
    if isinstance(t, OpApp):
        try:
            decl = theory.op(t.op, t.index)
        except TheoryError as exc:
            if t.op not in theory.ops:
                raise UnknownOperation(str(exc)) from None
            raise SortMismatch(str(exc)) from None
        if len(decl.args) != len(t.args):
            raise ArityMismatch(f"{t.op} expects {len(decl.args)} argument(s), got {len(t.args)}")
        blocks = tuple(restrict(ctx, free_vars(a)) for a in t.args)
        prems = tuple(_derive(theory, b, a) for b, a in zip(blocks, t.args))
        for i, (p, want) in enumerate(zip(prems, decl.args)):
            if p.type != want:
                raise SortMismatch(
                    f"argument {i + 1} of {t.op} has type {pretty_type(p.type)}, expected {pretty_type(want)}"
                )
        return Derivation(ctx, t, decl.result, "ax", prems, blocks)
    if isinstance(t, TensorIntro):
        blocks = (restrict(ctx, free_vars(t.left)), restrict(ctx, free_vars(t.right)))
        a = _derive(theory, blocks[0], t.left)
        b = _derive(theory, blocks[1], t.right)
        return Derivation(ctx, t, Tensor(a.type, b.type), "tensor_i", (a, b), blocks)
    if isinstance(t, UnitTo):
        blocks = (restrict(ctx, free_vars(t.scrut)), restrict(ctx, free_vars(t.body)))
        a = _derive(theory, blocks[0], t.scrut)
        if not isinstance(a.type, Unit):
            raise SortMismatch(f"'to *.' eliminates I, but the scrutinee has type {pretty_type(a.type)}")
        b = _derive(theory, blocks[1], t.body)
        return Derivation(ctx, t, b.type, "unit_e", (a, b), blocks)
    if isinstance(t, PmTo):
        gamma = restrict(ctx, free_vars(t.scrut))
        delta = restrict(ctx, free_vars(t.body))
        a = _derive(theory, gamma, t.scrut)
        if not isinstance(a.type, Tensor):
            raise SortMismatch(f"pm eliminates a tensor, but the scrutinee has type {pretty_type(a.type)}")
        x, y = _binder_names(ctx, (t.hx, t.hy))
        body = open_pm(t, x, y)
        _check_bound_use(theory, x, body)
        _check_bound_use(theory, y, body)
        inner = delta + ((x, a.type.left), (y, a.type.right))
        b = _derive(theory, inner, body)
        return Derivation(ctx, t, b.type, "tensor_e", (a, b), (gamma, delta), (x, y))
    if isinstance(t, Lambda):
        (x,) = _binder_names(ctx, (t.hint,))
        body = open_lambda(t, x)
        _check_bound_use(theory, x, body)
        b = _derive(theory, ctx + ((x, t.ty),), body)
        return Derivation(ctx, t, Lollipop(t.ty, b.type), "lolli_i", (b,), (), (x,))
    if isinstance(t, App):
        blocks = (restrict(ctx, free_vars(t.fn)), restrict(ctx, free_vars(t.arg)))
        f = _derive(theory, blocks[0], t.fn)
        if not isinstance(f.type, Lollipop):
            raise SortMismatch(f"applying a term of non-function type {pretty_type(f.type)}")
        a = _derive(theory, blocks[1], t.arg)
        if a.type != f.type.dom:
            raise SortMismatch(
                f"function expects {pretty_type(f.type.dom)} but the argument has type {pretty_type(a.type)}"
            )
        return Derivation(ctx, t, f.type.cod, "lolli_e", (f, a), blocks)
    if isinstance(t, Dis):
        if not theory.affine:
            raise AffineError("dis is only available in affine theories")
        a = _derive(theory, ctx, t.body)
        return Derivation(ctx, t, UNIT, "dis", (a,))
    raise TypingError(f"not a term: {t!r}")


# --- validation of given derivations --------------------------------------


def check_derivation(theory: Theory, d: Derivation) -> None:
    """Validate a derivation object node by node (shuffles included)."""
    if d.blocks and not is_shuffle(d.ctx, d.blocks):
        raise ShuffleError(f"{pretty_context(d.ctx)} is not a shuffle of the premise contexts")
    fresh = _derive(theory, d.ctx, d.term) if d.rule in ("hyp", "unit_i") else None
    if fresh is not None:
        if fresh.type != d.type:
            raise SortMismatch("conclusion type does not follow from the rule")
        return
    for p in d.premises:
        check_derivation(theory, p)
    again = derive(theory, d.ctx, d.term)
    if derivation_key(again) != derivation_key(d):
        raise TypingError(f"derivation does not match the rules at {RULE_SYMBOLS[d.rule]}")


# --- renaming helpers -------------------------------------------------------


def derivation_names(d: Derivation) -> set[str]:
    out = set(ctx_names(d.ctx))
    for p in d.premises:
        out |= derivation_names(p)
    return out


def rename_derivation(d: Derivation, mapping: dict) -> Derivation:
    """Rename free variables throughout ``d`` (no capture checks)."""
    if not mapping:
        return d

    def rc(ctx):
        return tuple((mapping.get(n, n), ty) for n, ty in ctx)

    return Derivation(
        rc(d.ctx), rename(d.term, mapping), d.type, d.rule,
        tuple(rename_derivation(p, mapping) for p in d.premises),
        tuple(rc(b) for b in d.blocks),
        tuple(mapping.get(n, n) for n in d.binders),
    )


def _avoid_binder_clash(d: Derivation, avoid: set) -> Derivation:
    """Rename variables bound inside ``d`` so none of them lands in ``avoid``."""
    prems = list(d.premises)
    binders = list(d.binders)
    if d.binders:
        k = len(prems) - 1  # the binding premise is always the last one
        clash = [b for b in d.binders if b in avoid]
        if clash:
            taken = avoid | derivation_names(d)
            mapping = {}
            for b in clash:
                nb = fresh_name(b, taken)
                taken.add(nb)
                mapping[b] = nb
            prems[k] = rename_derivation(prems[k], mapping)
            binders = [mapping.get(b, b) for b in binders]
    prems = [_avoid_binder_clash(p, avoid) for p in prems]
    return Derivation(d.ctx, d.term, d.type, d.rule, tuple(prems), d.blocks, tuple(binders))


def _splice(ctx: Context, x: str, repl: Context) -> Context:
    out = []
    for item in ctx:
        if item[0] == x:
            out.extend(repl)
        else:
            out.append(item)
    return tuple(out)


# --- admissible rules -------------------------------------------------------


def subst(outer: Derivation, inner: Derivation) -> Derivation:
    """From Γ,x:A ▷ v : B and Δ ▷ w : A build Γ,Δ ▷ v[w/x] : B."""
    if not outer.ctx:
        raise TypingError("substitution needs a variable at the end of the outer context")
    x, a = outer.ctx[-1]
    if inner.type != a:
        raise SortMismatch(f"substituting a term of type {pretty_type(inner.type)} for {x} : {pretty_type(a)}")
    gamma = outer.ctx[:-1]
    taken = set(ctx_names(gamma))
    clash = {n: None for n in ctx_names(inner.ctx) if n in taken}
    if clash:
        pool = taken | derivation_names(inner) | derivation_names(outer)
        for n in clash:
            clash[n] = fresh_name(n, pool)
            pool.add(clash[n])
        inner = rename_derivation(inner, clash)
    outer = _avoid_binder_clash(outer, set(ctx_names(inner.ctx)) | derivation_names(inner))
    return _subst_at(outer, x, inner)


def _subst_at(d: Derivation, x: str, inner: Derivation) -> Derivation:
    if d.rule == "hyp":
        return inner
    new_ctx = _splice(d.ctx, x, inner.ctx)
    new_term = term_subst(d.term, {x: inner.term})
    prems = list(d.premises)
    blocks = list(d.blocks)
    if d.rule in ("lolli_i", "dis"):
        prems[0] = _subst_at(prems[0], x, inner)
    else:
        for k, b in enumerate(blocks):
            if x in ctx_names(b):
                blocks[k] = _splice(b, x, inner.ctx)
                prems[k] = _subst_at(prems[k], x, inner)
                break
        else:
            raise TypingError(f"variable {x} not found in any premise")
    return Derivation(new_ctx, new_term, d.type, d.rule, tuple(prems), tuple(blocks), d.binders)


def exchange(d: Derivation, i: int) -> Derivation:
    """Swap context entries ``i`` and ``i+1``."""
    if i < 0 or i + 1 >= len(d.ctx):
        raise IndexError(f"cannot exchange positions {i},{i + 1} in a context of length {len(d.ctx)}")
    a, b = d.ctx[i][0], d.ctx[i + 1][0]
    ctx = list(d.ctx)
    ctx[i], ctx[i + 1] = ctx[i + 1], ctx[i]
    prems = list(d.premises)
    blocks = list(d.blocks)
    if d.rule in ("lolli_i", "dis"):
        prems[0] = exchange(prems[0], i)
    else:
        for k, blk in enumerate(blocks):
            names = ctx_names(blk)
            if a in names and b in names:
                j = names.index(a)
                nb = list(blk)
                nb[j], nb[j + 1] = nb[j + 1], nb[j]
                blocks[k] = tuple(nb)
                prems[k] = exchange(prems[k], j)
                break
    return Derivation(tuple(ctx), d.term, d.type, d.rule, tuple(prems), tuple(blocks), d.binders)


def derivation_key(d: Derivation, env: Optional[dict] = None):
    """Structural fingerprint that ignores the names picked for bound variables."""
    env = dict(env or {})

    def rc(ctx):
        return tuple((env.get(n, n), ty) for n, ty in ctx)

    prem_keys = []
    for k, p in enumerate(d.premises):
        sub = env
        if d.binders and k == len(d.premises) - 1:
            sub = dict(env)
            for j, b in enumerate(d.binders):
                sub[b] = f"%{len(env)}.{j}"
        prem_keys.append(derivation_key(p, sub))
    return (d.rule, rc(d.ctx), rename(d.term, env), d.type, tuple(rc(b) for b in d.blocks), tuple(prem_keys))


def weakening(theory: Theory, d: Derivation, x: str, ty: TypeExpr) -> Derivation:
    """Derived affine weakening: Γ ▷ v : B gives Γ, x:A ▷ dis(x) to *. v : B."""
    if not theory.affine:
        raise AffineError("weakening is only derivable in affine theories")
    term = UnitTo(Dis(Var(x)), d.term)
    return derive(theory, d.ctx + ((x, ty),), term)
