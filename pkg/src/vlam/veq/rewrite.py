"""Normalization by oriented base equations, with a replayable trace.

Every rewrite step is a ``base_eq`` node placed at some position and lifted
to the whole term by congruence nodes, so a normal form always comes with a
proof of ``t =[top] nf(t)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

from ..syntax.terms import (
    STAR, App, BVar, Dis, Lambda, Lollipop, OpApp, PmTo, Star, Tensor, TensorIntro, Term,
    TypeExpr, UNIT, UnitTo, Var, all_names, children, ctx_names, fresh_name, free_vars,
    mk_lambda, mk_pm, open_lambda, open_pm, replace_children, restrict,
)
from ..syntax.theory import Theory
from ..typecheck import Derivation, TypingError
from . import base
from .proof import ProofTree, VEquation

DEFAULT_STEPS = 10_000


def infer_type(theory: Theory, env: dict, t: Term) -> TypeExpr:
    """Type of an already well-typed term; linearity is not re-checked."""
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Star):
        return UNIT
    if isinstance(t, OpApp):
        return theory.op(t.op, t.index).result
    if isinstance(t, TensorIntro):
        return Tensor(infer_type(theory, env, t.left), infer_type(theory, env, t.right))
    if isinstance(t, UnitTo):
        return infer_type(theory, env, t.body)
    if isinstance(t, PmTo):
        st = infer_type(theory, env, t.scrut)
        x, y = fresh_name(t.hx, env), None
        y = fresh_name(t.hy, set(env) | {x})
        inner = dict(env)
        inner[x], inner[y] = st.left, st.right
        return infer_type(theory, inner, open_pm(t, x, y))
    if isinstance(t, Lambda):
        x = fresh_name(t.hint, env)
        return Lollipop(t.ty, infer_type(theory, {**env, x: t.ty}, open_lambda(t, x)))
    if isinstance(t, App):
        return infer_type(theory, env, t.fn).cod
    if isinstance(t, Dis):
        return UNIT
    raise TypingError(f"cannot type {t!r}")


def top_eq(theory: Theory, ctx, lhs: Term, rhs: Term, ty: TypeExpr) -> VEquation:
    return VEquation(tuple(ctx), lhs, rhs, ty, theory.quantale.top())


def refl(theory: Theory, ctx, t: Term, ty: Optional[TypeExpr] = None) -> ProofTree:
    if ty is None:
        ty = infer_type(theory, dict(ctx), t)
    return ProofTree("refl", top_eq(theory, ctx, t, t, ty))


def trans(theory: Theory, a: ProofTree, b: ProofTree) -> ProofTree:
    if a.rule == "refl":
        return b
    if b.rule == "refl":
        return a
    ca, cb = a.conclusion, b.conclusion
    label = theory.quantale.tensor(ca.label, cb.label)
    return ProofTree("trans", VEquation(ca.ctx, ca.lhs, cb.rhs, ca.type, label), (a, b))


def chain(theory: Theory, proofs, ctx, t: Term, ty: TypeExpr) -> ProofTree:
    out = refl(theory, ctx, t, ty)
    for p in proofs:
        out = trans(theory, out, p)
    return out


# --- positions with opened binders ------------------------------------------


@dataclass
class Part:
    ctx: tuple
    term: Term


@dataclass
class Split:
    """A node cut into its immediate subterms, binders opened with fresh names."""

    rule: str
    parts: list
    binders: tuple = ()

    def rebuild(self, node: Term, new: list) -> Term:
        if isinstance(node, Lambda):
            (x,) = self.binders
            return mk_lambda(x, node.ty, new[0])
        if isinstance(node, PmTo):
            x, y = self.binders
            return mk_pm(new[0], x, y, new[1])
        return replace_children(node, new)


CONG_RULE = {
    OpApp: "cong_op", TensorIntro: "cong_tensor", UnitTo: "cong_to", PmTo: "cong_pm",
    Lambda: "cong_lam", App: "cong_app", Dis: "cong_dis",
}


def split(theory: Theory, ctx, t: Term, avoid=(), names=None) -> Optional[Split]:
    """Cut ``t``; ``names`` forces the binder names (they must be fresh)."""
    rule = CONG_RULE.get(type(t))
    if rule is None:
        return None
    taken = set(ctx_names(ctx)) | set(free_vars(t)) | set(avoid)
    if isinstance(t, Lambda):
        x = names[0] if names else fresh_name(t.hint, taken)
        return Split(rule, [Part(tuple(ctx) + ((x, t.ty),), open_lambda(t, x))], (x,))
    if isinstance(t, PmTo):
        if names:
            x, y = names
        else:
            x = fresh_name(t.hx, taken)
            y = fresh_name(t.hy, taken | {x})
        st = infer_type(theory, dict(ctx), t.scrut)
        body = open_pm(t, x, y)
        rest = restrict(ctx, [n for n in free_vars(body) if n not in (x, y)])
        return Split(rule, [Part(restrict(ctx, free_vars(t.scrut)), t.scrut),
                            Part(rest + ((x, st.left), (y, st.right)), body)], (x, y))
    if isinstance(t, Dis):
        return Split(rule, [Part(tuple(ctx), t.body)])
    return Split(rule, [Part(restrict(ctx, free_vars(c)), c) for c in children(t)])


def congruence(theory: Theory, ctx, t: Term, ty: TypeExpr, sp: Split, premises: list) -> ProofTree:
    """Congruence node over ``t`` whose i-th premise proves part i."""
    q = theory.quantale
    lhs = sp.rebuild(t, [p.conclusion.lhs for p in premises])
    rhs = sp.rebuild(t, [p.conclusion.rhs for p in premises])
    label = q.tensor_all([p.label for p in premises])
    return ProofTree(sp.rule, VEquation(tuple(ctx), lhs, rhs, ty, label), tuple(premises))


def lift(theory: Theory, ctx, t: Term, ty: TypeExpr, sp: Split, i: int, proof: ProofTree) -> ProofTree:
    """Congruence with ``proof`` at part ``i`` and reflexivity elsewhere."""
    prems = []
    for j, part in enumerate(sp.parts):
        prems.append(proof if j == i else refl(theory, part.ctx, part.term))
    return congruence(theory, ctx, t, ty, sp, prems)


# --- redexes ----------------------------------------------------------------


def _base_node(theory, ctx, ty, name, inst, orientation="lr") -> ProofTree:
    lhs, rhs = base.oriented(name, inst, orientation)
    return ProofTree("base_eq", top_eq(theory, ctx, lhs, rhs, ty),
                     payload={"name": name, "orientation": orientation, "inst": inst})


def _head_child(t: Term) -> Optional[int]:
    if isinstance(t, (PmTo, UnitTo)):
        return 0
    if isinstance(t, App):
        return 0
    return None


def redex(theory: Theory, ctx, t: Term, ty: TypeExpr) -> Optional[ProofTree]:
    """A base_eq node rewriting ``t`` itself, if ``t`` is a redex."""
    taken = set(ctx_names(ctx)) | set(free_vars(t))
    if isinstance(t, App) and isinstance(t.fn, Lambda):
        x = fresh_name(t.fn.hint, taken)
        inst = {"x": x, "A": t.fn.ty, "v": open_lambda(t.fn, x), "w": t.arg}
        return _base_node(theory, ctx, ty, "lam_beta", inst)
    if isinstance(t, PmTo) and isinstance(t.scrut, TensorIntro):
        x = fresh_name(t.hx, taken)
        y = fresh_name(t.hy, taken | {x})
        inst = {"v": t.scrut.left, "w": t.scrut.right, "x": x, "y": y, "u": open_pm(t, x, y)}
        return _base_node(theory, ctx, ty, "pm_beta", inst)
    if isinstance(t, UnitTo) and isinstance(t.scrut, Star):
        return _base_node(theory, ctx, ty, "unit_beta", {"v": t.body})
    if isinstance(t, UnitTo) and isinstance(t.body, Star):
        z = fresh_name("z", taken)
        return _base_node(theory, ctx, ty, "unit_eta", {"v": t.scrut, "z": z, "w": Var(z)})
    if isinstance(t, PmTo):
        x = fresh_name(t.hx, taken)
        y = fresh_name(t.hy, taken | {x})
        if open_pm(t, x, y) == TensorIntro(Var(x), Var(y)):
            z = fresh_name("z", taken | {x, y})
            inst = {"v": t.scrut, "x": x, "y": y, "z": z, "u": Var(z)}
            return _base_node(theory, ctx, ty, "pm_eta", inst)
    if isinstance(t, Lambda):
        x = fresh_name(t.hint, taken)
        body = open_lambda(t, x)
        if isinstance(body, App) and body.arg == Var(x) and x not in free_vars(body.fn):
            return _base_node(theory, ctx, ty, "lam_eta", {"x": x, "A": t.ty, "v": body.fn})
    if isinstance(t, Dis) and theory.affine and not isinstance(t.body, Var):
        return _base_node(theory, ctx, ty, "dis_vars", {"v": t.body, "vars": tuple(ctx_names(ctx))})
    h = _head_child(t)
    if h is not None:
        inner = children(t)[h]
        z = fresh_name("z", taken)
        hole = replace_children(t, [Var(z) if i == h else c for i, c in enumerate(children(t))])
        if isinstance(inner, UnitTo):
            inst = {"u": hole, "z": z, "v": inner.scrut, "w": inner.body}
            return _base_node(theory, ctx, ty, "cc_unit", inst)
        if isinstance(inner, PmTo):
            x = fresh_name(inner.hx, taken | {z})
            y = fresh_name(inner.hy, taken | {z, x})
            inst = {"u": hole, "z": z, "v": inner.scrut, "x": x, "y": y, "w": open_pm(inner, x, y)}
            return _base_node(theory, ctx, ty, "cc_pm", inst)
    return None


def step(theory: Theory, ctx, t: Term, ty: TypeExpr) -> Optional[ProofTree]:
    """One leftmost-outermost rewrite step as a proof of ``t =[top] t'``."""
    r = redex(theory, ctx, t, ty)
    if r is not None:
        return r
    sp = split(theory, ctx, t)
    if sp is None:
        return None
    for i, part in enumerate(sp.parts):
        pty = infer_type(theory, dict(part.ctx), part.term)
        inner = step(theory, part.ctx, part.term, pty)
        if inner is not None:
            return lift(theory, ctx, t, ty, sp, i, inner)
    return None


class NormalResult(NamedTuple):
    term: Term
    proof: ProofTree
    steps: int
    complete: bool


def normalize_term(theory: Theory, ctx, t: Term, ty: Optional[TypeExpr] = None,
                   max_steps: int = DEFAULT_STEPS) -> NormalResult:
    ctx = tuple(ctx)
    if ty is None:
        ty = infer_type(theory, dict(ctx), t)
    proofs, cur = [], t
    for n in range(max_steps):
        p = step(theory, ctx, cur, ty)
        if p is None:
            return NormalResult(cur, chain(theory, proofs, ctx, t, ty), n, True)
        proofs.append(p)
        cur = p.conclusion.rhs
    return NormalResult(cur, chain(theory, proofs, ctx, t, ty), max_steps, False)


def normalize(theory: Theory, d: Derivation, max_steps: int = DEFAULT_STEPS) -> NormalResult:
    """Normal form of the derivation's term; ``complete`` is False when the budget ran out."""
    return normalize_term(theory, d.ctx, d.term, d.type, max_steps)


def reverse(theory: Theory, tree: ProofTree) -> ProofTree:
    """Mirror a top-labelled proof built from base equations and congruences."""
    c = tree.conclusion
    flipped = VEquation(c.ctx, c.rhs, c.lhs, c.type, c.label)
    if tree.rule == "refl":
        return tree
    if tree.rule == "base_eq":
        p = dict(tree.payload)
        p["orientation"] = "rl" if p.get("orientation", "lr") == "lr" else "lr"
        return ProofTree("base_eq", flipped, (), p)
    if tree.rule == "trans":
        a, b = tree.premises
        return ProofTree("trans", flipped, (reverse(theory, b), reverse(theory, a)))
    if tree.rule.startswith("cong_") and tree.rule != "cong_subst":
        return ProofTree(tree.rule, flipped, tuple(reverse(theory, p) for p in tree.premises), tree.payload)
    if tree.rule == "perm":
        return ProofTree("perm", flipped, (reverse(theory, tree.premises[0]),))
    raise ValueError(f"cannot mirror a {tree.rule} node without symmetry")


def eta_expand(theory: Theory, ctx, t: Term) -> Term:
    ty = infer_type(theory, dict(ctx), t)
    if not isinstance(ty, Lollipop):
        raise TypingError("eta expansion needs a function type")
    x = fresh_name("x", set(ctx_names(ctx)) | all_names(t))
    return mk_lambda(x, ty.dom, App(t, Var(x)))
