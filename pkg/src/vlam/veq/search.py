"""Bounded search for the best derivable label of ``ctx |- v =[?] w``.

The engine is sound (every answer comes with a tree accepted by
``check_proof``) and deliberately incomplete.  Both sides are normalized,
then compared by reflexivity, head congruence, axiom leaves and a bounded
number of trans pivots through axiom sides.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from ..syntax.index import IExpr, match_index
from ..syntax.terms import (
    STAR, App, Dis, Lambda, OpApp, PmTo, Star, TensorIntro, Term, UNIT, UnitTo, Var,
    children, ctx_names, fresh_name, free_vars, is_locally_closed, restrict, subst,
)
from ..syntax.theory import Theory
from ..typecheck import TypingError, derive
from . import base
from .proof import ProofTree, VEquation
from .rewrite import (
    DEFAULT_STEPS, _base_node, congruence, infer_type, normalize_term, refl, reverse, split,
    top_eq, trans,
)


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class Budget:
    nodes: int = 4000  # search-state expansions
    depth: int = 2  # nested trans pivots
    steps: int = DEFAULT_STEPS  # normalization steps per side


# --- first-order matching ---------------------------------------------------


def match(pattern: Term, term: Term, metas: set, sigma: dict, env: dict, deferred: list) -> bool:
    """Extend ``sigma``/``env`` so that the pattern instantiates to ``term``."""
    if isinstance(pattern, Var) and pattern.name in metas:
        if not is_locally_closed(term):
            return False
        prev = sigma.get(pattern.name)
        if prev is None:
            sigma[pattern.name] = term
            return True
        return prev == term
    if type(pattern) is not type(term):
        return False
    if isinstance(pattern, OpApp):
        if pattern.op != term.op or len(pattern.args) != len(term.args):
            return False
        if isinstance(pattern.index, IExpr):
            if not isinstance(term.index, Fraction):
                return False
            ok = match_index(pattern.index, term.index, env)
            if ok is None:
                deferred.append((pattern.index, term.index))
            elif not ok:
                return False
        elif pattern.index != term.index:
            return False
    elif isinstance(pattern, Lambda):
        if pattern.ty != term.ty:
            return False
    elif not children(pattern):
        return pattern == term
    return all(match(p, t, metas, sigma, env, deferred) for p, t in zip(children(pattern), children(term)))


def _settle(ax, env: dict, deferred: list) -> bool:
    if set(env) != {n for n, _ in ax.params}:
        return False
    if any(e.eval(env) != v for e, v in deferred):
        return False
    return ax.admits(env)


@dataclass(frozen=True)
class _Rule:
    index: int
    lhs: Term
    rhs: Term
    flipped: bool  # used right-to-left through sym


class _Search:
    def __init__(self, theory: Theory, budget: Budget):
        self.th = theory
        self.q = theory.quantale
        self.budget = budget
        self.expanded = 0
        self.memo: dict = {}
        rules = []
        for i, ax in enumerate(theory.axioms):
            rules.append(_Rule(i, ax.lhs, ax.rhs, False))
            if theory.symmetric:
                rules.append(_Rule(i, ax.rhs, ax.lhs, True))
        self.rules = rules

    # ordering

    def better(self, a: ProofTree, b: Optional[ProofTree]) -> bool:
        if b is None:
            return True
        if a.label != b.label:
            return self.q.leq(b.label, a.label)
        return a.rule_sequence() < b.rule_sequence()

    def pick(self, cands):
        best = None
        for c in cands:
            if c is not None and self.better(c, best):
                best = c
        return best

    # proof pieces

    def axiom_node(self, ctx, rule: _Rule, env: dict, sigma: dict, ty) -> ProofTree:
        ax = self.th.axioms[rule.index]
        lhs, rhs = ax.instance(env)
        lhs, rhs = subst(lhs, sigma), subst(rhs, sigma)
        label = ax.label_value(self.q, env)
        names = set()
        for t in sigma.values():
            names |= set(free_vars(t))
        actx = restrict(ctx, names)
        payload = {"index": rule.index, "params": dict(env), "subst": dict(sigma)}
        node = ProofTree("axiom", VEquation(actx, lhs, rhs, ty, label), (), payload)
        if rule.flipped:
            node = ProofTree("sym", VEquation(actx, rhs, lhs, ty, label), (node,))
        return node

    def collapse(self, ctx, t: Term) -> ProofTree:
        """Affine: any term of type I equals the discard chain of its context."""
        target = base.discard_chain(ctx_names(ctx))
        if t == target:
            return refl(self.th, ctx, t, UNIT)
        z = fresh_name("z", set(ctx_names(ctx)))
        p1 = _base_node(self.th, ctx, UNIT, "unit_eta", {"v": t, "z": z, "w": Var(z)}, "rl")
        p2 = _base_node(self.th, ctx, UNIT, "dis_unit", {"v": t})
        d = _base_node(self.th, ctx, UNIT, "dis_vars", {"v": t, "vars": tuple(ctx_names(ctx))})
        sp = split(self.th, ctx, UnitTo(Dis(t), STAR))
        p3 = congruence(self.th, ctx, UnitTo(Dis(t), STAR), UNIT, sp, [d, refl(self.th, (), STAR, UNIT)])
        p4 = _base_node(self.th, ctx, UNIT, "unit_eta", {"v": target, "z": z, "w": Var(z)})
        out = p1
        for p in (p2, p3, p4):
            out = trans(self.th, out, p)
        return out

    # search

    def search(self, ctx, a: Term, b: Term, ty, depth: int) -> Optional[ProofTree]:
        key = (ctx, a, b, depth)
        if key in self.memo:
            return self.memo[key]
        if a == b:
            return refl(self.th, ctx, a, ty)
        if self.th.affine and ty == UNIT:
            res = trans(self.th, self.collapse(ctx, a), reverse(self.th, self.collapse(ctx, b)))
            self.memo[key] = res
            return res
        if self.expanded >= self.budget.nodes:
            return None
        self.expanded += 1
        self.memo[key] = None  # guards against cycles through pivots
        cands = [self.head(ctx, a, b, ty, depth)]
        cands += self.leaves(ctx, a, b, ty, depth)
        best = self.pick(cands)
        if depth > 0 and not (best is not None and best.label == self.q.top()):
            best = self.pick([best] + self.pivots(ctx, a, b, ty, depth))
        self.memo[key] = best
        return best

    def head(self, ctx, a: Term, b: Term, ty, depth: int) -> Optional[ProofTree]:
        if type(a) is not type(b) or not children(a):
            return None
        if isinstance(a, OpApp) and (a.op, a.index, len(a.args)) != (b.op, b.index, len(b.args)):
            return None
        if isinstance(a, Lambda) and a.ty != b.ty:
            return None
        sa = split(self.th, ctx, a, avoid=free_vars(b))
        if sa is None:
            return None
        sb = split(self.th, ctx, b, names=sa.binders or None)
        prems = []
        for pa, pb in zip(sa.parts, sb.parts):
            if pa.ctx != pb.ctx:
                return None
            ta = infer_type(self.th, dict(pa.ctx), pa.term)
            if infer_type(self.th, dict(pb.ctx), pb.term) != ta:
                return None
            p = self.search(pa.ctx, pa.term, pb.term, ta, depth)
            if p is None:
                return None
            prems.append(p)
        return congruence(self.th, ctx, a, ty, sa, prems)

    def along(self, ctx, pattern: Term, s: Term, t: Term, metas: set, ty, depth: int) -> Optional[ProofTree]:
        """Prove ``s = t`` where both instantiate ``pattern``; search only below metavariables."""
        if s == t:
            return refl(self.th, ctx, s, ty)
        if isinstance(pattern, Var) and pattern.name in metas:
            return self.search(ctx, s, t, ty, depth)
        sp = split(self.th, ctx, s, avoid=free_vars(t))
        st = split(self.th, ctx, t, names=sp.binders or None)
        pp = split(self.th, (), pattern, names=sp.binders or None) if isinstance(pattern, (Lambda, PmTo)) else None
        pparts = [p.term for p in pp.parts] if pp else list(children(pattern))
        prems = []
        for pat, x, y in zip(pparts, sp.parts, st.parts):
            if x.ctx != y.ctx:
                return None
            pty = infer_type(self.th, dict(x.ctx), x.term)
            p = self.along(x.ctx, pat, x.term, y.term, metas, pty, depth)
            if p is None:
                return None
            prems.append(p)
        return congruence(self.th, ctx, s, ty, sp, prems)

    def leaves(self, ctx, a: Term, b: Term, ty, depth: int) -> list:
        out = []
        for rule in self.rules:
            ax = self.th.axioms[rule.index]
            if ax.type != ty:
                continue
            metas = set(ctx_names(ax.ctx))
            sl, env, deferred = {}, {}, []
            if not match(rule.lhs, a, metas, sl, env, deferred):
                continue
            sr: dict = {}
            if not match(rule.rhs, b, metas, sr, env, deferred):
                continue
            if not _settle(ax, env, deferred):
                continue
            node = self.axiom_node(ctx, rule, env, sl, ty)
            if sl == sr:
                out.append(node)
                continue
            rest = self.along(ctx, rule.rhs, node.conclusion.rhs, b, metas, ty, depth)
            if rest is not None:
                out.append(trans(self.th, node, rest))
        return out

    def pivots(self, ctx, a: Term, b: Term, ty, depth: int) -> list:
        out = []
        for rule in self.rules:
            ax = self.th.axioms[rule.index]
            if ax.type != ty:
                continue
            metas = set(ctx_names(ax.ctx))
            for forward in (True, False):
                sigma, env, deferred = {}, {}, []
                pat, target = (rule.lhs, a) if forward else (rule.rhs, b)
                if not match(pat, target, metas, sigma, env, deferred):
                    continue
                if not _settle(ax, env, deferred) or set(sigma) != metas:
                    continue
                node = self.axiom_node(ctx, rule, env, sigma, ty)
                if node.conclusion.ctx != ctx:
                    continue
                if forward:
                    mid = node.conclusion.rhs
                    if mid == a:
                        continue
                    rest = self.search(ctx, mid, b, ty, depth - 1)
                    if rest is not None:
                        out.append(trans(self.th, node, rest))
                else:
                    mid = node.conclusion.lhs
                    if mid == b:
                        continue
                    first = self.search(ctx, a, mid, ty, depth - 1)
                    if first is not None:
                        out.append(trans(self.th, first, node))
        return out


def derive_bound(theory: Theory, ctx, v: Term, w: Term, budget: Optional[Budget] = None,
                 join_mode: str = "full"):
    """Best label found for ``ctx |- v =[q] w`` together with a checkable proof.

    When nothing is found the answer is the bottom element, proved by the
    empty join.  Candidate decompositions are compared directly: every
    builtin quantale is a chain, so their join is always one of them and
    no non-empty join node is ever emitted (``join_mode`` is accepted for
    symmetry with ``check_proof``).
    """
    budget = budget or Budget()
    ctx = tuple(ctx)
    try:
        dv = derive(theory, ctx, v)
        dw = derive(theory, ctx, w)
    except TypingError as exc:
        raise SearchError(f"ill-typed side: {exc}") from None
    if dv.type != dw.type:
        raise SearchError(f"sides have different types: {dv.type} vs {dw.type}")
    ty = dv.type
    q = theory.quantale
    nv = normalize_term(theory, ctx, v, ty, budget.steps)
    nw = normalize_term(theory, ctx, w, ty, budget.steps)
    engine = _Search(theory, budget)
    core = engine.search(ctx, nv.term, nw.term, ty, budget.depth)
    if core is None:
        tree = ProofTree("join", VEquation(ctx, v, w, ty, q.bottom()))
        return q.bottom(), tree
    tree = trans(theory, nv.proof, trans(theory, core, reverse(theory, nw.proof)))
    return tree.label, tree
