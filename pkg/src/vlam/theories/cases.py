"""Builtin case studies: a theory, a model of it, and probe equations."""
from __future__ import annotations

import copy
import json
import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional

from ..quantale import INF, QValue
from ..semantics.core import Interpretation, SemanticsError
from ..semantics.modelfile import build_model
from ..semantics.satisfy import check_axioms, check_satisfaction
from ..syntax.index import INum, format_fraction
from ..syntax.parser import parse_type
from ..syntax.pretty import pretty
from ..syntax.terms import App, Lollipop, Term, TypeExpr, Var, mk_lambda
from ..syntax.theory import Theory, parse_theory
from ..veq import Budget, ProofError, ProofTree, check_proof, derive_bound, dump_proof

BUILTINS = ("wait-metric", "wait-ordered", "bernoulli", "qwalk", "affine-demo")
MODES = ("exact", "leq-with-tol")


class CaseStudyError(ValueError):
    pass


def data_path(name: str) -> Path:
    return Path(str(resources.files("vlam.theories") / "data" / name))


def seq_term(n: int, ty: TypeExpr) -> Term:
    """The n-fold composition combinator at type ``ty``, linear in every argument."""
    if n < 1:
        raise CaseStudyError("seq_term needs n >= 1")
    fn_ty = Lollipop(ty, ty)
    body: Term = Var("x")
    for k in range(n, 0, -1):
        body = App(Var(f"f{k}"), body)
    t = mk_lambda("x", ty, body)
    for k in range(n, 0, -1):
        t = mk_lambda(f"f{k}", fn_ty, t)
    return t


def apply_all(f: Term, args) -> Term:
    for a in args:
        f = App(f, a)
    return f


@dataclass
class Probe:
    name: str
    ctx: tuple
    lhs: Term
    rhs: Term
    expected: QValue
    mode: str = "exact"

    def __post_init__(self):
        if self.mode not in MODES:
            raise CaseStudyError(f"unknown probe mode {self.mode!r}")


@dataclass
class CaseStudy:
    name: str
    theory: Theory
    interpretation: Interpretation
    probes: list = field(default_factory=list)
    budget: Budget = field(default_factory=Budget)


def _load(name: str, model_patch=None, tol=None, seed=None):
    theory = parse_theory(data_path(f"{name}.th").read_text(), name=name)
    data = json.loads(data_path(f"{name}.model.json").read_text())
    if model_patch:
        data = copy.deepcopy(data)
        model_patch(data)
    return theory, build_model(data, theory, tol, seed)


def _wait_metric(opts) -> CaseStudy:
    bound = int(opts.get("bound", 1024))
    tags = opts.get("tags", ["a"])

    def patch(d):
        d["types"]["X"].update(bound=bound, tags=tags)
        d["ops"]["zero"]["value"] = [0, tags[0]]

    th, i = _load("wait-metric", patch, opts.get("tol"))
    X = parse_type("X")
    x = (("x", X),)
    probes = []
    for n, m in [(0, 3), (1, 4), (2, 2), (5, 1), (3, 0)]:
        probes.append(Probe(f"wait{n} vs wait{m}", x, th.parse_term(f"wait{{{n}}}(x)", x),
                            th.parse_term(f"wait{{{m}}}(x)", x), th.quantale.value(abs(n - m))))
    w1, w2, z = th.defs["w1"], th.defs["w2"], th.defs["z'"]
    for n in (1, 2, 3, 5):
        s = seq_term(n, X)
        probes.append(Probe(f"seq{n} w1.. vs seq{n} w2..", (), apply_all(s, [w1] * n + [z]),
                            apply_all(s, [w2] * n + [z]), th.quantale.value(n)))
    probes.append(Probe("w1 vs w2", (), w1, w2, th.quantale.value(1)))
    return CaseStudy("wait-metric", th, i, probes)


def _wait_ordered(opts) -> CaseStudy:
    bound = int(opts.get("bound", 5))

    def patch(d):
        d["types"]["X"]["bound"] = bound

    th, i = _load("wait-ordered", patch, opts.get("tol"))
    X = parse_type("X")
    x = (("x", X),)
    top = th.quantale.top()
    probes = [
        Probe("v w1 <= v w11", (), App(th.defs["v"], th.defs["w1"]), App(th.defs["v"], th.defs["w11"]), top),
        Probe("wait1 <= wait3", x, th.parse_term("wait1(x)", x), th.parse_term("wait3(x)", x), top),
        Probe("wait1(wait1 x) <= wait2", x, th.parse_term("wait1(wait1(x))", x), th.parse_term("wait2(x)", x), top),
    ]
    return CaseStudy("wait-ordered", th, i, probes)


def walk_term(theory: Theory, p: Fraction) -> Term:
    return theory.parse_term(
        f"\\x:real. bernoulli(r0(*), plus(x, normal(r0(*), rp1(*))), ru{{{format_fraction(Fraction(p))}}}(*))")


BERNOULLI_PAIRS = ((Fraction(3, 10), Fraction(1, 2)), (Fraction(0), Fraction(1)), (Fraction(1, 4), Fraction(1, 4)))


def _bernoulli(opts) -> CaseStudy:
    th, i = _load("bernoulli", None, opts.get("tol"))
    probes = []
    for p, q in opts.get("pairs", BERNOULLI_PAIRS):
        p, q = Fraction(p), Fraction(q)
        probes.append(Probe(f"walk({p}) vs walk({q})", (), walk_term(th, p), walk_term(th, q),
                            th.quantale.value(abs(p - q)), "leq-with-tol"))
    return CaseStudy("bernoulli", th, i, probes)


def _qwalk(opts) -> CaseStudy:
    pos = int(opts.get("pos", 4))
    eps = Fraction(opts.get("eps", Fraction(1, 10)))
    delta = float(opts.get("delta", 0.07))
    if math.hypot(delta, delta) > eps:
        raise CaseStudyError(f"|(delta, delta, 0)| = {math.hypot(delta, delta):.4g} exceeds eps = {eps}")

    def patch(d):
        d["types"]["pos"]["dim"] = pos
        d["ops"]["S"]["n"] = pos
        d["ops"]["He"]["product"] = [["ry", math.pi / 2], ["phase", math.pi + delta]]
        d["options"]["starts"] = int(opts.get("starts", 32))

    th, i = _load("qwalk", patch, opts.get("tol"), opts.get("seed"))
    if eps != Fraction(1, 10):
        th.axioms[0] = replace(th.axioms[0], label=INum(eps), source="")
    ty = parse_type("qbit * pos")
    probes = []
    for n in opts.get("lengths", (1, 2, 4)):
        s = seq_term(n, ty)
        probes.append(Probe(f"seq{n} step.. vs seq{n} stepe..", (), apply_all(s, [th.defs["step"]] * n),
                            apply_all(s, [th.defs["stepe"]] * n), th.quantale.value(n * eps), "leq-with-tol"))
    return CaseStudy("qwalk", th, i, probes)


def _affine_demo(opts) -> CaseStudy:
    th, i = _load("affine-demo", None, opts.get("tol"))
    q = th.quantale
    lhs = th.parse_term("(\\x:X. \\y:X. dis(x) to *. g(y)) w u")
    rhs = th.parse_term("(\\x:X. \\y:X. dis(x) to *. g(y)) w' u'")
    lin_l = th.parse_term("(\\x:X. \\y:X. h(x, y)) w u")
    lin_r = th.parse_term("(\\x:X. \\y:X. h(x, y)) w' u'")
    probes = [
        Probe("discarding x", (), lhs, rhs, q.value(Fraction(1, 3))),
        Probe("using both", (), lin_l, lin_r, q.value(Fraction(5, 6))),
    ]
    return CaseStudy("affine-demo", th, i, probes)


_BUILDERS = {
    "wait-metric": _wait_metric,
    "wait-ordered": _wait_ordered,
    "bernoulli": _bernoulli,
    "qwalk": _qwalk,
    "affine-demo": _affine_demo,
}


def builtin(name: str, **opts) -> CaseStudy:
    """Options: ``bound``/``tags`` (wait), ``pos``/``eps``/``delta``/``starts``/``seed``
    (qwalk), ``pairs`` (bernoulli) and ``tol`` for all."""
    if name not in _BUILDERS:
        raise CaseStudyError(f"unknown case study {name!r}; choose from {', '.join(BUILTINS)}")
    return _BUILDERS[name](opts)


# --- reports --------------------------------------------------------------------


def _as_float(v: QValue) -> float:
    return math.inf if v.x == INF else float(v.x)


@dataclass
class ProbeResult:
    probe: Probe
    derived: Optional[QValue] = None
    proof: Optional[ProofTree] = None
    proof_ok: bool = False
    distance: Optional[QValue] = None
    satisfied: bool = False
    matches: bool = False
    error: str = ""

    @property
    def passed(self) -> bool:
        return self.proof_ok and self.satisfied and self.matches and not self.error

    def to_json(self) -> dict:
        return {
            "probe": self.probe.name,
            "lhs": pretty(self.probe.lhs),
            "rhs": pretty(self.probe.rhs),
            "expected": str(self.probe.expected),
            "derived": None if self.derived is None else str(self.derived),
            "measured": None if self.distance is None else _as_float(self.distance),
            "mode": self.probe.mode,
            "proof_ok": self.proof_ok,
            "satisfied": self.satisfied,
            "pass": self.passed,
            "error": self.error or None,
        }


@dataclass
class Report:
    name: str
    axioms_ok: bool
    axiom_failures: list
    results: list
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.axioms_ok and all(r.passed for r in self.results)

    def text(self) -> str:
        lines = [f"case study {self.name}: {'PASS' if self.ok else 'FAIL'} ({self.seconds:.2f}s)",
                 f"  model axioms: {'ok' if self.axioms_ok else 'FAILED'}"]
        lines += [f"    {c}" for c in self.axiom_failures]
        w = max((len(r.probe.name) for r in self.results), default=5)
        lines.append(f"  {'probe'.ljust(w)}  {'derived':>10}  {'measured':>12}  result")
        for r in self.results:
            meas = "-" if r.distance is None else f"{_as_float(r.distance):.6g}"
            der = "-" if r.derived is None else str(r.derived)
            status = "pass" if r.passed else "FAIL" + (f": {r.error}" if r.error else "")
            lines.append(f"  {r.probe.name.ljust(w)}  {der:>10}  {meas:>12}  {status}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "case_study": self.name,
            "ok": self.ok,
            "axioms_ok": self.axioms_ok,
            "axiom_failures": [str(c) for c in self.axiom_failures],
            "probes": [r.to_json() for r in self.results],
            "seconds": round(self.seconds, 3),
        }


def run_probe(cs: CaseStudy, probe: Probe, budget: Optional[Budget] = None, tol: Optional[float] = None) -> ProbeResult:
    th, i = cs.theory, cs.interpretation
    q = th.quantale
    res = ProbeResult(probe)
    try:
        label, proof = derive_bound(th, probe.ctx, probe.lhs, probe.rhs, budget or cs.budget)
        res.derived, res.proof = label, proof
        check_proof(th, proof)
        res.proof_ok = True
        sat = check_satisfaction(i, th, proof.conclusion, tol)
        res.distance, res.satisfied = sat.distance, sat.satisfied
        if label != probe.expected:
            res.error = f"derived {label}, expected {probe.expected}"
        elif probe.mode == "exact":
            res.matches = sat.distance == label
            if not res.matches:
                res.error = f"measured {sat.distance}, expected exactly {label}"
        else:
            res.matches = sat.satisfied
    except ProofError as e:
        res.error = f"proof rejected: {e}"
    except SemanticsError as e:
        res.error = f"semantics: {e}"
    if not res.error and not res.satisfied:
        res.error = f"model distance {res.distance} violates label {res.derived}"
    return res


def run_case_study(name: str, budget: Optional[Budget] = None, tol: Optional[float] = None,
                   proof_dir=None, **opts) -> Report:
    t0 = time.perf_counter()
    cs = builtin(name, tol=tol, **opts) if tol is not None else builtin(name, **opts)
    axioms = check_axioms(cs.interpretation, cs.theory, tol)
    results = [run_probe(cs, p, budget, tol) for p in cs.probes]
    if proof_dir is not None:
        out = Path(proof_dir)
        out.mkdir(parents=True, exist_ok=True)
        for k, r in enumerate(results):
            if r.proof is not None:
                (out / f"{name}-{k}.proof.json").write_text(dump_proof(r.proof, name))
    return Report(name, axioms.ok, axioms.failures, results, time.perf_counter() - t0)
