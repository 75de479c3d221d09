"""End-to-end acceptance checks, one test per numbered criterion.

Each test registers itself with the ``criterion`` fixture, and the terminal
summary prints one PASS/FAIL line per criterion.
"""
import functools
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

import models
import oracles
from vlam import numeric_q as nq
from vlam import quantale as Q
from vlam.semantics import check_satisfaction
from vlam.syntax import parse_context, pretty
from vlam.syntax.terms import size
from vlam.theories import BUILTINS, builtin, run_case_study
from vlam.theories.cases import BERNOULLI_PAIRS
from vlam.typecheck import derive
from vlam.veq import Budget, ProofError, ProofTree, check_proof, derive_bound, dump_proof, load_proof


@functools.lru_cache(maxsize=None)
def report(name):
    return run_case_study(name)


@functools.lru_cache(maxsize=None)
def study(name):
    return builtin(name)


# --- 1 -----------------------------------------------------------------------


def test_wait_metric_labels_are_exact(criterion):
    criterion(1, "wait metric: exact labels |m-n| and n, FinMet distances equal labels, < 5 s")
    r = report("wait-metric")
    assert r.ok, r.text()
    q = Q.LAWVERE
    waits = [x for x in r.results if x.probe.name.startswith("wait")]
    seqs = [x for x in r.results if x.probe.name.startswith("seq")]
    assert len(waits) == 5 and len(seqs) == 4
    for x in waits:
        n, m = (int(s.removeprefix("wait")) for s in x.probe.name.split(" vs "))
        assert x.derived == q.value(abs(m - n)), x.probe.name
        assert x.distance == x.derived
    for x, n in zip(seqs, (1, 2, 3, 5)):
        assert x.derived == q.value(n), x.probe.name
        assert x.distance == x.derived
        assert isinstance(x.distance.x, (int, Fraction))
    assert r.seconds < 5, f"took {r.seconds:.2f}s"


# --- 2 -----------------------------------------------------------------------


def test_bernoulli_labels_bound_total_variation(criterion):
    criterion(2, "bernoulli: label |p-q|, MeasL1 distance <= |p-q| + 1e-12, < 5 s")
    r = report("bernoulli")
    assert r.ok, r.text()
    assert [(x.probe.name) for x in r.results] == [f"walk({p}) vs walk({q})" for p, q in BERNOULLI_PAIRS]
    for x, (p, q) in zip(r.results, BERNOULLI_PAIRS):
        assert x.derived == Q.LAWVERE.value(abs(p - q))
        assert float(x.distance.x) <= float(abs(p - q)) + 1e-12
    assert r.seconds < 5, f"took {r.seconds:.2f}s"


# --- 3 -----------------------------------------------------------------------


def test_quantum_walk(criterion):
    criterion(3, "quantum walk: axioms hold, labels n*eps, phase-gate oracle within 1e-4, < 60 s")
    t0 = time.perf_counter()
    cs = study("qwalk")
    eps = Fraction(1, 10)
    delta = 0.07
    assert math.hypot(delta, delta) <= eps
    r = report("qwalk")
    assert r.axioms_ok, r.text()
    assert r.ok, r.text()
    dims = [cs.interpretation.types[g].n for g in ("qbit", "pos")]
    assert math.prod(dims) <= 8
    for x, n in zip(r.results, (1, 2, 4)):
        assert x.derived == Q.LAWVERE.value(n * eps)
        assert float(x.distance.x) <= float(n * eps) + 1e-6
    for e in (0.5, 0.1, 0.01):
        for phi in (0.0, 1.3):
            d = nq.diamond_distance_iso(nq.phase(phi), nq.phase(phi + e), starts=32)
            assert abs(d - oracles.phase_gap(e)) <= 1e-4, (e, phi, d)
            assert d <= math.sqrt(2) * e + 1e-12
    assert r.seconds + (time.perf_counter() - t0) < 60


# --- 4 -----------------------------------------------------------------------


def test_trace_norm_matches_bloch_distance(criterion):
    criterion(4, "trace norm equals Bloch distance on 500 pure qubit pairs within 1e-9")
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(500):
        u, v = (rng.normal(size=2) + 1j * rng.normal(size=2) for _ in range(2))
        u, v = u / np.linalg.norm(u), v / np.linalg.norm(v)
        t = nq.trace_norm(nq.pure(u) - nq.pure(v))
        b = float(np.linalg.norm(np.subtract(nq.bloch(u), nq.bloch(v))))
        worst = max(worst, abs(t - b))
    assert worst <= 1e-9


# --- 5 -----------------------------------------------------------------------


def test_unique_derivation(criterion):
    criterion(5, "exhaustive deriver finds exactly one derivation on >= 2000 random terms, < 60 s")
    t0 = time.perf_counter()
    seen = 0
    for affine, count, seed in ((False, 2000, 5), (True, 500, 55)):
        theory = oracles.gen_theory(affine)
        gen = oracles.TermGen(seed, affine)
        for _ in range(count):
            ctx, t, ty = gen.judgement(12)
            assert size(t) <= 12
            d = derive(theory, ctx, t)
            counts = oracles.count_derivations(theory, ctx, t)
            assert d.type == ty
            assert counts == {ty: 1}, (ctx, pretty(t), counts)
            seen += 1
    assert seen >= 2000
    assert time.perf_counter() - t0 < 60


# --- 6 -----------------------------------------------------------------------


@pytest.mark.parametrize("name", BUILTINS)
def test_soundness_harness(criterion, name):
    criterion(6, "every derived proof passes check_proof and holds in its model")
    r = report(name)
    cs = study(name)
    violations = []
    for x in r.results:
        assert x.proof is not None, x.error
        # go through the on-disk certificate format, independent of the runner's own checks
        tree = load_proof(dump_proof(x.proof, name), cs.theory)
        e = check_proof(cs.theory, tree)
        assert e == x.proof.conclusion
        sat = check_satisfaction(cs.interpretation, cs.theory, e)
        if not sat.satisfied:
            violations.append((x.probe.name, str(e.label), str(sat.distance)))
    assert violations == []
    assert r.ok, r.text()


# --- 7 -----------------------------------------------------------------------


def test_ordered_waits(criterion):
    criterion(7, "ordered waits: v w1 <= v w11 derivable and FinPos-satisfied, sym rejected")
    cs = study("wait-ordered")
    th, i = cs.theory, cs.interpretation
    probe = cs.probes[0]
    assert probe.name == "v w1 <= v w11"
    label, proof = derive_bound(th, probe.ctx, probe.lhs, probe.rhs)
    assert label == Q.BOOLEAN.top()
    assert check_proof(th, proof).label == label
    assert check_satisfaction(i, th, proof.conclusion).satisfied
    assert not th.symmetric
    e = proof.conclusion
    flipped = ProofTree("sym", type(e)(e.ctx, e.rhs, e.lhs, e.type, e.label), (proof,))
    with pytest.raises(ProofError, match="symmetric"):
        check_proof(th, flipped)
    # the flipped inequation is genuinely false in the model
    assert not check_satisfaction(i, th, flipped.conclusion).satisfied


# --- 8 -----------------------------------------------------------------------


def _wait_corpus(th, n, seed=8):
    rng = random.Random(seed)
    ctx = parse_context("x:X")

    def nest(ks, inner="x"):
        for k in ks:
            inner = f"wait{{{k}}}({inner})"
        return inner

    out = []
    while len(out) < n:
        a = [rng.randint(0, 4) for _ in range(rng.randint(1, 3))]
        b = [rng.randint(0, 4) for _ in range(rng.randint(1, 2))]
        inner = rng.choice(["x", "x", "wait{1}(x)"])
        out.append((ctx, th.parse_term(nest(a, inner), ctx), th.parse_term(nest(b), ctx)))
    return out


def test_join_rule_is_conservative(criterion):
    criterion(8, "join rule vs bottom-only rule give the same labels on 50 lawvere equations")
    th = study("wait-metric").theory
    q = th.quantale
    rng = random.Random(88)
    budget = Budget(nodes=600)
    for ctx, lhs, rhs in _wait_corpus(th, 50):
        best, proof = derive_bound(th, ctx, lhs, rhs, budget)
        e = check_proof(th, proof, join_mode="bottom")
        assert e.label == best
        # combine several weaker proofs with a non-empty join
        labels = [best]
        if best.x != Q.INF:
            labels += [q.value(best.x + rng.randint(0, 3)) for _ in range(3)]
        weak = [ProofTree("weak", e.with_label(r), (proof,), {"r": r}) for r in labels]
        joined = ProofTree("join", e.with_label(q.join(labels)), tuple(weak))
        full = check_proof(th, joined, join_mode="full").label
        with pytest.raises(ProofError):
            check_proof(th, joined, join_mode="bottom")
        # the join reaches nothing that the bottom-only system misses
        assert full == best
        below = [q.value(r.x + 1) for r in labels if r.x != Q.INF] + [q.bottom()]
        for r in below:
            assert check_proof(th, ProofTree("weak", e.with_label(r), (proof,), {"r": r}),
                               join_mode="bottom").label == r


# --- 9 -----------------------------------------------------------------------


@pytest.mark.parametrize("backend", sorted(models.AFFINE_BACKENDS))
def test_affine_equations_hold_at_top(criterion, backend):
    criterion(9, "affine: discarding equations hold at top, label r for dis-term, soundness")
    th = models.theory_for(backend)
    i = models.AFFINE_BACKENDS[backend]()
    for e in models.affine_equations(th):
        sat = check_satisfaction(i, th, e)
        assert sat.satisfied, (backend, str(e), sat.distance)
        assert e.label == th.quantale.top()


def test_affine_demo_label(criterion):
    criterion(9, "affine: discarding equations hold at top, label r for dis-term, soundness")
    cs = study("affine-demo")
    r = report("affine-demo")
    assert cs.theory.affine
    by_name = {x.probe.name: x for x in r.results}
    q = cs.theory.quantale
    dis = by_name["discarding x"]
    assert dis.derived == q.value(Fraction(1, 3))
    assert dis.derived != q.tensor(q.value(Fraction(1, 2)), q.value(Fraction(1, 3)))
    assert by_name["using both"].derived == q.value(Fraction(5, 6))
    for x in r.results:
        check_proof(cs.theory, x.proof)
        assert check_satisfaction(cs.interpretation, cs.theory, x.proof.conclusion).satisfied
    assert r.ok, r.text()


# --- 10 ----------------------------------------------------------------------


def _sample(q, rng):
    if q.kind == "boolean":
        return q.value(rng.randint(0, 1))
    x = Fraction(rng.randint(0, 60), rng.randint(1, 12))
    if q.kind == "goedel":
        return q.value(min(x, 1))
    return q.value(Q.INF if rng.random() < 0.08 else x)


@pytest.mark.parametrize("q", [Q.BOOLEAN, Q.LAWVERE, Q.ULTRAMETRIC, Q.GOEDEL], ids=lambda q: q.kind)
def test_quantale_laws_exact(criterion, q):
    criterion(10, "quantale laws on 10k random samples per instance, exact")
    rng = random.Random(hash(q.kind) % 1000)
    top, unit, bot = q.top(), q.unit(), q.bottom()
    assert unit == top
    for _ in range(10_000):
        a, b, c = (_sample(q, rng) for _ in range(3))
        s = [_sample(q, rng) for _ in range(rng.randint(0, 4))]
        t = q.tensor
        assert t(a, t(b, c)) == t(t(a, b), c)
        assert t(a, b) == t(b, a)
        assert t(a, unit) == a
        assert q.leq(bot, a) and q.leq(a, top)
        assert q.leq(t(a, b), a)
        j = q.join(s)
        assert all(q.leq(x, j) for x in s)
        if all(q.leq(x, c) for x in s):
            assert q.leq(j, c)
        assert t(a, j) == q.join([t(a, x) for x in s])
        if q.leq(a, b):
            assert q.leq(t(a, c), t(b, c))
        assert q.leq(a, b) == (q.join([a, b]) == b)
        if q.way_below(a, b):
            assert q.leq(a, b)
        xs = q.approximants(a, 3)
        assert all(q.way_below(x, a) for x in xs)
        assert q.join(xs + [bot]) == q.join(xs) or not xs
