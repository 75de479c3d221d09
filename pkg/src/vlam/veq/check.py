"""Independent checking of proof trees.

Labels and conclusions are recomputed from premises and payloads; the
stored conclusion of each node must agree with the recomputation.
"""
from __future__ import annotations

from collections import Counter
from fractions import Fraction

from ..syntax.pretty import pretty
from ..syntax.terms import (
    App, Dis, Lambda, OpApp, PmTo, TensorIntro, UnitTo, Var, abstract, ctx_names,
    free_vars, is_shuffle, pretty_context, pretty_type, restrict, subst, Tensor,
)
from ..syntax.theory import Theory, instantiate_indices
from ..typecheck import TypingError, derive
from . import base
from .proof import ProofTree, VEquation


class ProofError(Exception):
    def __init__(self, path: str, rule: str, message: str):
        self.path = path
        self.rule = rule
        self.message = message
        super().__init__(f"at {path} ({rule}): {message}")


class _Checker:
    def __init__(self, theory: Theory, join_mode: str = "full"):
        self.th = theory
        self.q = theory.quantale
        self.join_mode = join_mode
        self._types: dict = {}

    def type_of(self, ctx, term):
        key = (ctx, term)
        if key not in self._types:
            try:
                self._types[key] = derive(self.th, ctx, term).type
            except TypingError as exc:
                self._types[key] = exc
        res = self._types[key]
        if isinstance(res, Exception):
            raise res
        return res

    def check(self, node: ProofTree, path: str) -> VEquation:
        if not isinstance(node, ProofTree):
            raise ProofError(path, "?", "not a proof node")
        prems = [self.check(p, f"{path}/{i}") for i, p in enumerate(node.premises)]
        c = node.conclusion
        for side, name in ((c.lhs, "left"), (c.rhs, "right")):
            try:
                ty = self.type_of(c.ctx, side)
            except TypingError as exc:
                raise ProofError(path, node.rule, f"ill-typed {name} side {pretty(side)}: {exc}") from None
            if ty != c.type:
                raise ProofError(path, node.rule,
                                 f"{name} side has type {pretty_type(ty)}, node claims {pretty_type(c.type)}")
        handler = getattr(self, f"rule_{node.rule}", None)
        if handler is None:
            raise ProofError(path, node.rule, "unknown rule")
        try:
            label = handler(node, prems)
        except ProofError:
            raise
        except (ValueError, TypingError, KeyError, IndexError) as exc:
            raise ProofError(path, node.rule, str(exc)) from None
        if label != c.label:
            raise ProofError(path, node.rule, f"label mismatch: rule gives {label}, node claims {c.label}")
        return c

    # helpers

    def _arity(self, node, prems, n):
        if len(prems) != n:
            raise ValueError(f"expects {n} premise(s), has {len(prems)}")

    def _same_sides(self, node, p: VEquation):
        if not node.conclusion.same_sides(p):
            raise ValueError("conclusion differs from the premise")

    # rules

    def rule_refl(self, node, prems):
        self._arity(node, prems, 0)
        if node.conclusion.lhs != node.conclusion.rhs:
            raise ValueError("refl needs identical sides")
        return self.q.top()

    def rule_sym(self, node, prems):
        if not self.th.symmetric:
            raise ValueError("sym is not available in a non-symmetric theory")
        self._arity(node, prems, 1)
        p, c = prems[0], node.conclusion
        if (c.ctx, c.lhs, c.rhs, c.type) != (p.ctx, p.rhs, p.lhs, p.type):
            raise ValueError("conclusion is not the premise with sides swapped")
        return p.label

    def rule_trans(self, node, prems):
        self._arity(node, prems, 2)
        a, b = prems
        c = node.conclusion
        if a.ctx != b.ctx or a.ctx != c.ctx:
            raise ValueError("premises and conclusion must share the context")
        if a.rhs != b.lhs:
            raise ValueError(f"middle terms differ: {pretty(a.rhs)} vs {pretty(b.lhs)}")
        if (c.lhs, c.rhs) != (a.lhs, b.rhs):
            raise ValueError("conclusion does not chain the premises")
        return self.q.tensor(a.label, b.label)

    def rule_weak(self, node, prems):
        self._arity(node, prems, 1)
        self._same_sides(node, prems[0])
        r = node.payload["r"]
        if not self.q.leq(r, prems[0].label):
            raise ValueError(f"cannot weaken {prems[0].label} to {r}: {r} is not below it")
        return r

    def rule_arch(self, node, prems):
        ws = list(node.payload["witnesses"])
        if len(ws) != len(prems):
            raise ValueError("one premise per witness required")
        q = node.conclusion.label
        for w, p in zip(ws, prems):
            self._same_sides(node, p)
            if not self.q.leq(w, p.label):
                raise ValueError(f"premise proves {p.label}, witness {w} needs more")
            if not self.q.way_below(w, q):
                raise ValueError(f"witness {w} is not way below {q}")
        # finitely many witnesses cannot cover everything way below q, so the
        # premises themselves have to reach q
        reached = self.q.join([p.label for p in prems])
        if not self.q.leq(q, reached):
            raise ValueError(f"premises only reach {reached}, not {q}")
        return q

    def rule_join(self, node, prems):
        if prems and self.join_mode == "bottom":
            raise ValueError("only the nullary join is allowed in this mode")
        for p in prems:
            self._same_sides(node, p)
        return self.q.join([p.label for p in prems])

    def rule_perm(self, node, prems):
        self._arity(node, prems, 1)
        p, c = prems[0], node.conclusion
        if Counter(p.ctx) != Counter(c.ctx):
            raise ValueError(f"{pretty_context(c.ctx)} is not a permutation of {pretty_context(p.ctx)}")
        if (p.lhs, p.rhs, p.type) != (c.lhs, c.rhs, c.type):
            raise ValueError("perm changes only the context")
        return p.label

    def rule_axiom(self, node, prems):
        self._arity(node, prems, 0)
        i = node.payload["index"]
        if not (0 <= i < len(self.th.axioms)):
            raise ValueError(f"axiom index {i} out of range (theory has {len(self.th.axioms)})")
        ax = self.th.axioms[i]
        env = dict(node.payload.get("params", {}))
        if set(env) != {n for n, _ in ax.params}:
            raise ValueError("axiom parameters do not match the schema")
        if not ax.admits(env):
            raise ValueError(f"parameters {env} violate the axiom's side conditions")
        sigma = dict(node.payload.get("subst", {}))
        ax_vars = ctx_names(ax.ctx)
        for k in sigma:
            if k not in ax_vars:
                raise ValueError(f"{k} is not a variable of axiom {i}")
        for k in ax_vars:
            sigma.setdefault(k, Var(k))
        seen: set = set()
        c = node.conclusion
        for x, ty in ax.ctx:
            fv = free_vars(sigma[x])
            if seen & set(fv):
                raise ValueError("instantiation shares variables between axiom variables")
            seen |= set(fv)
            sub_ctx = restrict(c.ctx, fv)
            if self.type_of(sub_ctx, sigma[x]) != ty:
                raise ValueError(f"instance of {x} does not have type {pretty_type(ty)}")
        if seen != set(ctx_names(c.ctx)):
            raise ValueError("conclusion context must consist of the instantiation's variables")
        lhs, rhs = ax.instance(env)
        lhs, rhs = subst(lhs, sigma), subst(rhs, sigma)
        if (lhs, rhs) != (c.lhs, c.rhs):
            raise ValueError(f"conclusion is not an instance of axiom {i}")
        if c.type != ax.type:
            raise ValueError("type differs from the axiom's")
        return ax.label_value(self.q, env)

    def rule_base_eq(self, node, prems):
        self._arity(node, prems, 0)
        name = node.payload["name"]
        if name in base.AFFINE_SCHEMAS and not self.th.affine:
            raise ValueError(f"{name} needs an affine theory")
        inst = node.payload.get("inst", {})
        lhs, rhs = base.oriented(name, inst, node.payload.get("orientation", "lr"))
        c = node.conclusion
        if (lhs, rhs) != (c.lhs, c.rhs):
            raise ValueError(f"conclusion is not an instance of {name}")
        self._hole_checks(name, inst, c.ctx)
        if name == "dis_vars":
            if list(inst["vars"]) != ctx_names(c.ctx):
                raise ValueError("dis_vars must list the context's variables in order")
        return self.q.top()

    def _hole_checks(self, name, inst, ctx):
        holes = {
            "pm_eta": ("u", "z", "v"),
            "unit_eta": ("w", "z", "v"),
        }
        if name in holes:
            tk, zk, fk = holes[name]
            self._hole(ctx, inst[tk], inst[zk], inst[fk])
        elif name == "cc_unit":
            self._hole(ctx, inst["u"], inst["z"], UnitTo(inst["v"], inst["w"]))
        elif name == "cc_pm":
            from ..syntax.terms import mk_pm

            self._hole(ctx, inst["u"], inst["z"], mk_pm(inst["v"], inst["x"], inst["y"], inst["w"]))

    def _hole(self, ctx, u, z, filler):
        if z in ctx_names(ctx):
            raise ValueError(f"hole variable {z} clashes with the context")
        a = self.type_of(restrict(ctx, free_vars(filler)), filler)
        rest = [n for n in free_vars(u) if n != z]
        self.type_of(restrict(ctx, rest) + ((z, a),), u)

    def _cong(self, node, prems, n, head_ok, build):
        self._arity(node, prems, n)
        c = node.conclusion
        if not head_ok(c.lhs) or not head_ok(c.rhs):
            raise ValueError("conclusion head does not match the congruence")
        lhs = build(c.lhs, [p.lhs for p in prems])
        rhs = build(c.rhs, [p.rhs for p in prems])
        if (lhs, rhs) != (c.lhs, c.rhs):
            raise ValueError("conclusion sides are not built from the premises")
        return self.q.tensor_all([p.label for p in prems])

    def _split_ctx(self, node, blocks):
        if not is_shuffle(node.conclusion.ctx, blocks):
            raise ValueError(f"{pretty_context(node.conclusion.ctx)} is not a shuffle of the premise contexts")

    def rule_cong_op(self, node, prems):
        c = node.conclusion
        if not isinstance(c.lhs, OpApp) or not isinstance(c.rhs, OpApp):
            raise ValueError("cong_op needs operation applications")
        if (c.lhs.op, c.lhs.index) != (c.rhs.op, c.rhs.index):
            raise ValueError("both sides must apply the same operation")
        label = self._cong(node, prems, len(c.lhs.args), lambda t: True,
                           lambda t, ch: OpApp(t.op, tuple(ch), t.index))
        self._split_ctx(node, [p.ctx for p in prems])
        return label

    def _binary(self, cls, node, prems):
        label = self._cong(node, prems, 2, lambda t: isinstance(t, cls), lambda t, ch: cls(*ch))
        self._split_ctx(node, [p.ctx for p in prems])
        return label

    def rule_cong_tensor(self, node, prems):
        return self._binary(TensorIntro, node, prems)

    def rule_cong_to(self, node, prems):
        return self._binary(UnitTo, node, prems)

    def rule_cong_app(self, node, prems):
        return self._binary(App, node, prems)

    def rule_cong_dis(self, node, prems):
        if not self.th.affine:
            raise ValueError("dis needs an affine theory")
        label = self._cong(node, prems, 1, lambda t: isinstance(t, Dis), lambda t, ch: Dis(ch[0]))
        if prems[0].ctx != node.conclusion.ctx:
            raise ValueError("context must be unchanged")
        return label

    def rule_cong_lam(self, node, prems):
        self._arity(node, prems, 1)
        p, c = prems[0], node.conclusion
        if not p.ctx or p.ctx[:-1] != c.ctx:
            raise ValueError("premise context must extend the conclusion's by one variable")
        x, a = p.ctx[-1]
        lhs = Lambda(a, abstract(p.lhs, [x]), x)
        rhs = Lambda(a, abstract(p.rhs, [x]), x)
        if (lhs, rhs) != (c.lhs, c.rhs):
            raise ValueError("conclusion sides are not the abstracted premise")
        return p.label

    def rule_cong_pm(self, node, prems):
        self._arity(node, prems, 2)
        a, b = prems
        c = node.conclusion
        if len(b.ctx) < 2 or not isinstance(a.type, Tensor):
            raise ValueError("second premise must bind the two components")
        (x, ta), (y, tb) = b.ctx[-2:]
        if (ta, tb) != (a.type.left, a.type.right):
            raise ValueError("bound variable types do not match the scrutinee")
        lhs = PmTo(a.lhs, abstract(b.lhs, [y, x]), x, y)
        rhs = PmTo(a.rhs, abstract(b.rhs, [y, x]), x, y)
        if (lhs, rhs) != (c.lhs, c.rhs):
            raise ValueError("conclusion sides are not built from the premises")
        self._split_ctx(node, [a.ctx, b.ctx[:-2]])
        return self.q.tensor(a.label, b.label)

    def rule_cong_subst(self, node, prems):
        self._arity(node, prems, 2)
        a, b = prems
        c = node.conclusion
        if not a.ctx:
            raise ValueError("first premise needs the substituted variable last in its context")
        x, ty = a.ctx[-1]
        if node.payload.get("var", x) != x:
            raise ValueError(f"payload names {node.payload.get('var')} but the premise binds {x}")
        if b.type != ty:
            raise ValueError(f"substituted terms have type {pretty_type(b.type)}, {x} has {pretty_type(ty)}")
        gamma = a.ctx[:-1]
        if set(ctx_names(gamma)) & set(ctx_names(b.ctx)):
            raise ValueError("contexts of the premises overlap")
        if c.ctx != gamma + b.ctx:
            raise ValueError("conclusion context must be the first context followed by the second")
        lhs, rhs = subst(a.lhs, {x: b.lhs}), subst(a.rhs, {x: b.rhs})
        if (lhs, rhs) != (c.lhs, c.rhs):
            raise ValueError("conclusion is not the substitution instance")
        return self.q.tensor(a.label, b.label)


def check_proof(theory: Theory, tree: ProofTree, join_mode: str = "full") -> VEquation:
    """Validate every node; returns the conclusion with its recomputed label."""
    return _Checker(theory, join_mode).check(tree, "$")
