"""Satisfaction of V-equations and whole theories in an interpretation."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..quantale import INF, QValue
from ..syntax.index import in_sort
from ..syntax.pretty import pretty
from ..syntax.terms import (
    App, Lollipop, Var, contains_higher_order, ctx_names, fresh_name, has_lollipop,
)
from ..syntax.theory import Theory
from ..typecheck import derive
from ..veq.proof import VEquation
from ..veq.rewrite import normalize_term
from .core import Interpretation, MissingCapability, SemanticsError, interpret


@dataclass
class SatResult:
    satisfied: bool
    label: QValue
    distance: QValue

    @property
    def distance_float(self) -> float:
        x = self.distance.x
        return math.inf if x == INF else float(x)


def first_order(theory: Theory, e: VEquation) -> VEquation:
    """Apply both sides to fresh variables until the type is first order, then normalize."""
    ctx, lhs, rhs, ty = tuple(e.ctx), e.lhs, e.rhs, e.type
    taken = set(ctx_names(ctx))
    while isinstance(ty, Lollipop):
        x = fresh_name("u", taken)
        taken.add(x)
        ctx = ctx + ((x, ty.dom),)
        lhs, rhs, ty = App(lhs, Var(x)), App(rhs, Var(x)), ty.cod
    lhs = normalize_term(theory, ctx, lhs, ty).term
    rhs = normalize_term(theory, ctx, rhs, ty).term
    for side in (lhs, rhs):
        if contains_higher_order(side) or any(has_lollipop(t) for _, t in ctx):
            raise MissingCapability(f"term {pretty(side)} stays higher order after normalization")
    return VEquation(ctx, lhs, rhs, ty, e.label)


def _leq_tol(q, label: QValue, dist: QValue, tol: float) -> bool:
    if q.leq(label, dist):
        return True
    if q.kind == "lawvere" and tol > 0 and label.x != INF and dist.x != INF:
        return float(dist.x) <= float(label.x) + tol
    return False


def check_satisfaction(i: Interpretation, theory: Theory, e: VEquation, tol: Optional[float] = None) -> SatResult:
    """Is ``label <= a([[lhs]], [[rhs]])``, allowing the distance to exceed by ``tol``?"""
    b = i.backend
    tol = b.tol if tol is None else tol
    if not b.has_hom:
        e = first_order(theory, e)
    f = interpret(i, derive(theory, e.ctx, e.lhs))
    g = interpret(i, derive(theory, e.ctx, e.rhs))
    d = b.hom_distance(f, g)
    return SatResult(_leq_tol(b.quantale, e.label, d, tol), e.label, d)


DEFAULT_SAMPLES = {
    "nat": [0, 1, 2, 3],
    "int": [-2, -1, 0, 1, 2],
    "rat": [Fraction(-1, 2), 0, Fraction(1, 3), 1],
    "nnrat": [0, Fraction(1, 3), 1],
    "prob": [0, Fraction(1, 2), 1],
}


@dataclass
class AxiomCheck:
    index: int
    params: dict
    label: QValue
    distance: QValue
    ok: bool
    error: str = ""

    def __str__(self) -> str:
        ps = ", ".join(f"{k}={v}" for k, v in self.params.items())
        status = "ok" if self.ok else "FAIL"
        extra = f" ({self.error})" if self.error else ""
        return f"[{self.index}]{'{' + ps + '}' if ps else ''} label {self.label} distance {self.distance} {status}{extra}"


@dataclass
class AxiomReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.ok]


def sample_envs(ax, samples: Optional[dict] = None):
    samples = samples or {}
    names = [n for n, _ in ax.params]
    pools = []
    for n, sort in ax.params:
        pool = samples.get(n, samples.get(sort, DEFAULT_SAMPLES[sort]))
        pools.append([Fraction(v) for v in pool if in_sort(Fraction(v), sort)])
    for combo in itertools.product(*pools):
        env = dict(zip(names, combo))
        if ax.admits(env):
            yield env


def check_axioms(i: Interpretation, theory: Theory, tol: Optional[float] = None,
                 samples: Optional[dict] = None) -> AxiomReport:
    report = AxiomReport()
    q = theory.quantale
    samples = i.samples if samples is None else samples
    for k, ax in enumerate(theory.axioms):
        for env in sample_envs(ax, samples):
            label = ax.label_value(q, env)
            lhs, rhs = ax.instance(env)
            e = VEquation(ax.ctx, lhs, rhs, ax.type, label)
            try:
                r = check_satisfaction(i, theory, e, tol)
                report.checks.append(AxiomCheck(k, env, label, r.distance, r.satisfied))
            except SemanticsError as exc:
                report.checks.append(AxiomCheck(k, env, label, q.bottom(), False, str(exc)))
    return report
