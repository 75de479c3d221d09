"""Independent reference implementations used by the tests."""
from __future__ import annotations

import itertools
import math
import random
from collections import Counter
from typing import Optional

from vlam.syntax import parse_theory
from vlam.syntax.terms import (
    STAR, UNIT, App, BVar, Dis, Ground, Lambda, Lollipop, OpApp, PmTo, Star, Tensor, TensorIntro, UnitTo,
    Var, mk_lambda, mk_pm, open_lambda, open_pm,
)

GEN_THEORY_TEXT = """
quantale: lawvere
flags: symmetric{affine}
types: X, Y
ops:
  f : X -> X
  g : X, X -> X
  c : I -> X
  e : X -> I
  k : Y -> X
  p : X -> X * Y
"""


def gen_theory(affine: bool = False):
    return parse_theory(GEN_THEORY_TEXT.replace("{affine}", ", affine" if affine else ""), name="gen")


X, Y = Ground("X"), Ground("Y")
SMALL_TYPES = (X, Y, UNIT, Tensor(X, Y), Lollipop(X, X), Tensor(X, X))


# --- exhaustive deriver ----------------------------------------------------------


def _splits(ctx, n):
    """Every assignment of context entries to ``n`` ordered premises."""
    for choice in itertools.product(range(n), repeat=len(ctx)):
        yield tuple(tuple(e for e, c in zip(ctx, choice) if c == k) for k in range(n))


def count_derivations(theory, ctx, t, _memo=None) -> Counter:
    """Map from type to the number of distinct typing derivations of ``ctx |- t``.

    Tries every rule whose conclusion matches the term's shape and every way
    of distributing the context among the premises, so nothing is inferred
    from free variables.
    """
    memo = {} if _memo is None else _memo
    key = (tuple(ctx), t)
    if key in memo:
        return memo[key]
    out: Counter = Counter()
    ctx = tuple(ctx)
    names = {n for n, _ in ctx}
    fresh = _fresh(names, t)
    if isinstance(t, Var):
        if len(ctx) == 1 and ctx[0][0] == t.name:
            out[ctx[0][1]] += 1
    elif isinstance(t, Star):
        if not ctx:
            out[UNIT] += 1
    elif isinstance(t, OpApp):
        decl = theory.ops.get(t.op)
        if decl is not None and len(decl.args) == len(t.args):
            for blocks in _splits(ctx, len(t.args)):
                n = 1
                for b, a, want in zip(blocks, t.args, decl.args):
                    n *= count_derivations(theory, b, a, memo)[want]
                    if not n:
                        break
                out[decl.result] += n
    elif isinstance(t, TensorIntro):
        for bl, br in _splits(ctx, 2):
            cl = count_derivations(theory, bl, t.left, memo)
            cr = count_derivations(theory, br, t.right, memo)
            for (ta, na), (tb, nb) in itertools.product(cl.items(), cr.items()):
                out[Tensor(ta, tb)] += na * nb
    elif isinstance(t, UnitTo):
        for bs, bb in _splits(ctx, 2):
            ns = count_derivations(theory, bs, t.scrut, memo)[UNIT]
            if ns:
                for tb, nb in count_derivations(theory, bb, t.body, memo).items():
                    out[tb] += ns * nb
    elif isinstance(t, PmTo):
        x, y = fresh, fresh + "'"
        body = open_pm(t, x, y)
        for bs, bb in _splits(ctx, 2):
            for ts, ns in count_derivations(theory, bs, t.scrut, memo).items():
                if isinstance(ts, Tensor) and ns:
                    inner = bb + ((x, ts.left), (y, ts.right))
                    for tb, nb in count_derivations(theory, inner, body, memo).items():
                        out[tb] += ns * nb
    elif isinstance(t, Lambda):
        body = open_lambda(t, fresh)
        for tb, nb in count_derivations(theory, ctx + ((fresh, t.ty),), body, memo).items():
            out[Lollipop(t.ty, tb)] += nb
    elif isinstance(t, App):
        for bf, ba in _splits(ctx, 2):
            cf = count_derivations(theory, bf, t.fn, memo)
            if not cf:
                continue
            ca = count_derivations(theory, ba, t.arg, memo)
            for tf, nf in cf.items():
                if isinstance(tf, Lollipop):
                    out[tf.cod] += nf * ca[tf.dom]
    elif isinstance(t, Dis):
        if theory.affine:
            n = sum(count_derivations(theory, ctx, t.body, memo).values())
            if n:
                out[UNIT] += n
    out = Counter({k: v for k, v in out.items() if v})
    memo[key] = out
    return out


def _fresh(names, t) -> str:
    k = 0
    while f"_v{k}" in names:
        k += 1
    return f"_v{k}"


# --- random well-typed terms ---------------------------------------------------------


class TermGen:
    """Type-directed generator of linear (or affine) terms over ``gen_theory``."""

    def __init__(self, seed: int = 0, affine: bool = False):
        self.rng = random.Random(seed)
        self.affine = affine
        self.k = 0

    def fresh(self) -> str:
        self.k += 1
        return f"v{self.k}"

    def split(self, items):
        left, right = [], []
        for it in items:
            (left if self.rng.random() < 0.5 else right).append(it)
        return left, right

    def term(self, ty, vs, size: int):
        """A term of type ``ty`` using every variable in ``vs`` exactly once."""
        rng = self.rng
        opts = []
        if len(vs) == 1 and vs[0][1] == ty:
            opts += ["var"] * 3
        if ty == UNIT and not vs:
            opts += ["star"] * 2
        if ty == X and not vs:
            opts.append("c")
        if size > 1:
            if ty == X:
                opts += ["f", "g", "k", "g"]
            if ty == UNIT:
                opts.append("e")
                if self.affine:
                    opts.append("dis")
            if isinstance(ty, Tensor):
                opts += ["tensor"] * 2
            if isinstance(ty, Lollipop):
                opts += ["lam"] * 2
            if size > 2:
                opts += ["app", "pm", "unit_e"]
                if any(isinstance(t, Tensor) for _, t in vs):
                    opts += ["pm_var"] * 2
                if any(t == UNIT for _, t in vs):
                    opts += ["unit_var"] * 2
                if any(isinstance(t, Lollipop) for _, t in vs):
                    opts += ["app_var"] * 2
        if not opts:
            return None
        kind = rng.choice(opts)
        s = size - 1
        if kind == "var":
            return Var(vs[0][0])
        if kind == "star":
            return STAR
        if kind == "c":
            return OpApp("c", (STAR,))
        if kind in ("f", "e"):
            a = self.term(X, vs, s)
            return None if a is None else OpApp(kind, (a,))
        if kind == "k":
            a = self.term(Y, vs, s)
            return None if a is None else OpApp("k", (a,))
        if kind == "dis":
            a = self.term(rng.choice(SMALL_TYPES), vs, s)
            return None if a is None else Dis(a)
        if kind == "g":
            l, r = self.split(vs)
            sl = rng.randint(1, max(1, s - 1))
            a, b = self.term(X, l, sl), self.term(X, r, max(1, s - sl))
            return None if a is None or b is None else OpApp("g", (a, b))
        if kind == "tensor":
            l, r = self.split(vs)
            sl = rng.randint(1, max(1, s - 1))
            a, b = self.term(ty.left, l, sl), self.term(ty.right, r, max(1, s - sl))
            return None if a is None or b is None else TensorIntro(a, b)
        if kind == "lam":
            x = self.fresh()
            body = self.term(ty.cod, vs + [(x, ty.dom)], s)
            return None if body is None else mk_lambda(x, ty.dom, body)
        if kind in ("app", "app_var"):
            if kind == "app_var":
                fv = rng.choice([v for v in vs if isinstance(v[1], Lollipop)])
                if fv[1].cod != ty:
                    return None
                rest = [v for v in vs if v != fv]
                a = self.term(fv[1].dom, rest, s)
                return None if a is None else App(Var(fv[0]), a)
            dom = rng.choice(SMALL_TYPES)
            l, r = self.split(vs)
            sl = rng.randint(1, max(1, s - 1))
            fn = self.term(Lollipop(dom, ty), l, sl)
            a = self.term(dom, r, max(1, s - sl))
            return None if fn is None or a is None else App(fn, a)
        if kind in ("pm", "pm_var"):
            if kind == "pm_var":
                sv = rng.choice([v for v in vs if isinstance(v[1], Tensor)])
                scrut, st, rest = Var(sv[0]), sv[1], [v for v in vs if v != sv]
            else:
                st = rng.choice([Tensor(X, Y), Tensor(X, X)])
                l, rest = self.split(vs)
                scrut = self.term(st, l, max(1, s // 2))
                if scrut is None:
                    return None
            x, y = self.fresh(), self.fresh()
            body = self.term(ty, rest + [(x, st.left), (y, st.right)], max(1, s - 1))
            return None if body is None else mk_pm(scrut, x, y, body)
        if kind in ("unit_e", "unit_var"):
            if kind == "unit_var":
                uv = rng.choice([v for v in vs if v[1] == UNIT])
                scrut, rest = Var(uv[0]), [v for v in vs if v != uv]
            else:
                l, rest = self.split(vs)
                scrut = self.term(UNIT, l, max(1, s // 2))
                if scrut is None:
                    return None
            body = self.term(ty, rest, max(1, s - 1))
            return None if body is None else UnitTo(scrut, body)
        return None

    def judgement(self, max_size: int = 12, tries: int = 5000):
        """Random (ctx, term, type) with term size at most ``max_size``."""
        from vlam.syntax.terms import size

        target = self.rng.randint(1, max_size)
        for _ in range(tries):
            n = self.rng.randint(0, 3)
            vs = [(self.fresh(), self.rng.choice(SMALL_TYPES)) for _ in range(n)]
            ty = self.rng.choice(SMALL_TYPES)
            t = self.term(ty, list(vs), target + 2)
            if t is not None and max(1, target // 2) <= size(t) <= max_size:
                ctx = list(vs)
                self.rng.shuffle(ctx)
                return tuple(ctx), t, ty
        raise RuntimeError("generator kept failing")


# --- closed forms ------------------------------------------------------------------


def phase_gap(eps: float) -> float:
    """Diamond distance between phase gates differing by ``eps``."""
    return 2 * abs(math.sin(eps / 2))


def brute_force_shuffles(blocks):
    """All orderings of the union that keep each block's order, by filtering permutations."""
    flat = [e for b in blocks for e in b]
    out = []
    for perm in itertools.permutations(flat):
        ok = all([e for e in perm if e in b] == list(b) for b in blocks)
        if ok and perm not in out:
            out.append(perm)
    return out
