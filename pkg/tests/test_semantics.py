import functools
import json
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import unitary_group

import models
import oracles
from vlam import numeric_q as nq
from vlam import quantale as Q
from vlam.semantics import (
    MeasL1, MissingCapability, QChan, SemanticsError, VCat, check_axioms, check_satisfaction, denote,
    interpret, interpret_ctx, interpret_type, measure_norm, metric_space, nat_trunc,
)
from vlam.semantics.core import Exch, Join, Sh, Spl, Compose
from vlam.semantics.measl1 import Kernel, Support
from vlam.semantics.modelfile import ModelError, build_model, complex_entry
from vlam.semantics.vcat import Map, Product
from vlam.syntax import UNIT, Ground, Tensor, parse_context, parse_theory, parse_type
from vlam.theories import builtin, data_path
from vlam.typecheck import derive, exchange, subst
from vlam.veq import VEquation

L, B = Q.LAWVERE, Q.BOOLEAN
X = Ground("X")


@functools.lru_cache(maxsize=None)
def study(name):
    return builtin(name)


# --- objects -------------------------------------------------------------------------


def test_empty_context_is_unit():
    for mk in models.AFFINE_BACKENDS.values():
        i = mk()
        assert i.backend.equal_objects(interpret_ctx(i, ()), i.backend.unit())


def test_tensor_with_unit_in_finmet():
    i = models.finmet()
    two = metric_space(["p", "q"], lambda a, b: Fraction(0 if a == b else 1))
    i.types["X"] = two
    obj = interpret_type(i, Tensor(X, UNIT))
    assert obj.points == [("p", ()), ("q", ())]
    assert obj.dist(("p", ()), ("q", ())) == L.value(1)


def test_context_is_tensor_of_types():
    i = models.finmet()
    obj = interpret_ctx(i, parse_context("x:X, y:X"))
    assert obj.size() == 16
    assert obj.dist((0, 3), (1, 1)) == L.value(3)


def test_unmapped_ground_type():
    i = models.finmet()
    with pytest.raises(SemanticsError):
        interpret_type(i, Ground("Z"))


# --- morphisms -----------------------------------------------------------------------


def test_variable_is_identity():
    for name, mk in models.AFFINE_BACKENDS.items():
        i = mk()
        th = models.theory_for(name)
        ctx = parse_context("x:X")
        f = denote(i, th, ctx, th.parse_term("x", ctx))
        assert models.same_morphism(i, f, i.backend.id(i.types["X"])) if name != "QChan" else \
            np.allclose(f.t, np.eye(2))


def test_wait_shifts_the_clock():
    cs = study("wait-metric")
    ctx = parse_context("x:X")
    f = denote(cs.interpretation, cs.theory, ctx, cs.theory.parse_term("wait3(x)", ctx))
    assert f((4, "a")) == (7, "a")
    assert f((0, "a")) == (3, "a")


def test_qchan_has_no_internal_hom():
    i = models.qchan()
    th = models.theory_for("QChan")
    with pytest.raises(MissingCapability):
        denote(i, th, (), th.parse_term(r"\x:X. f(x)"))


def test_qchan_checks_lollipop_equations_after_uncurrying():
    i = models.qchan()
    th = models.theory_for("QChan")
    lhs = th.parse_term(r"\x:X. f(f(x))")
    e = VEquation((), lhs, th.parse_term(r"\y:X. y"), parse_type("X ->o X"), L.top())
    assert check_satisfaction(i, th, e).satisfied  # H twice is the identity


def test_dis_is_bang_after_body():
    i = models.finmet()
    th = models.theory_for("FinMet")
    ctx = parse_context("x:X, y:X")
    f = denote(i, th, ctx, th.parse_term("dis(m(x, y))", ctx))
    assert all(f(p) == () for p in interpret_ctx(i, ctx).points)


# --- satisfaction ---------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(models.AFFINE_BACKENDS))
def test_reflexivity_instances_hold_everywhere(name):
    i, th = models.AFFINE_BACKENDS[name](), models.theory_for(name)
    ctx = parse_context("x:X, y:X")
    t = th.parse_term("m(f(x), y)", ctx)
    e = VEquation(ctx, t, t, Tensor(X, X), th.quantale.top())
    assert check_satisfaction(i, th, e).satisfied


def test_wait_axiom_and_a_false_claim():
    cs = study("wait-metric")
    th, i = cs.theory, cs.interpretation
    ctx = parse_context("x:X")
    w1, w3 = th.parse_term("wait1(x)", ctx), th.parse_term("wait3(x)", ctx)
    r = check_satisfaction(i, th, VEquation(ctx, w1, w3, X, L.value(2)))
    assert r.satisfied and r.distance == L.value(2)
    r = check_satisfaction(i, th, VEquation(ctx, w1, w3, X, L.value(1)))
    assert not r.satisfied and r.distance == L.value(2)


def test_tolerance_is_applied_on_the_distance_side():
    cs = study("bernoulli")
    th, i = cs.theory, cs.interpretation
    from vlam.theories import walk_term

    a, b = walk_term(th, Fraction(3, 10)), walk_term(th, Fraction(1, 2))
    ty = parse_type("real ->o real")
    tight = VEquation((), a, b, ty, L.value(Fraction(1, 5)))
    # the float distance sits a rounding error above 1/5
    assert check_satisfaction(i, th, tight).satisfied
    too_tight = VEquation((), a, b, ty, L.value(Fraction(19, 100)))
    assert not check_satisfaction(i, th, too_tight, tol=0).satisfied
    assert check_satisfaction(i, th, too_tight, tol=0.011).satisfied


@pytest.mark.parametrize("name", ["wait-metric", "wait-ordered", "bernoulli", "affine-demo", "qwalk"])
def test_builtin_models_satisfy_their_axioms(name):
    cs = study(name)
    rep = check_axioms(cs.interpretation, cs.theory)
    assert rep.ok, [str(c) for c in rep.failures]
    assert rep.checks


def _wait_interp(th, fam):
    i = build_model(json.loads(data_path("wait-metric.model.json").read_text()), th)
    X_ = i.types["X"]
    i.ops["wait"] = lambda n: Map(X_, X_, fam(int(n)))
    return i


def test_sabotaged_wait_model_is_caught():
    th = study("wait-metric").theory
    # waiting twice as long breaks only the distance axiom
    i = _wait_interp(th, lambda n: lambda x: (x[0] + 2 * n, x[1]))
    rep = check_axioms(i, th)
    assert not rep.ok
    bad = {(c.index, c.params["n"], c.params["m"]) for c in rep.failures}
    assert all(k == 2 and n != m for k, n, m in bad)
    samples = [Fraction(v) for v in i.samples["nat"]]
    assert len(bad) == sum(1 for n in samples for m in samples if n != m)


def test_identity_waits_satisfy_the_upper_bounds():
    # distance 0 is below every |m-n|, so collapsing the clock is a model
    th = study("wait-metric").theory
    i = _wait_interp(th, lambda n: lambda x: x)
    assert check_axioms(i, th).ok


def test_empty_theory_passes():
    th = parse_theory("quantale: lawvere\ntypes: X\nops:\n  f : X -> X\n")
    i = models.finmet()
    assert check_axioms(i, th).ok and check_axioms(i, th).checks == []


# --- housekeeping --------------------------------------------------------------------


def test_split_then_join_is_identity():
    i = models.finmet()
    b = i.backend
    blocks = [parse_context("a:X, b:X"), parse_context("c:X")]
    plan = Spl(i, blocks).then(Join(i, blocks))
    assert plan.is_identity
    m = b.compose(Join(i, blocks).morphism(b), Spl(i, blocks).morphism(b))
    assert models.same_morphism(i, m, b.id(interpret_ctx(i, blocks[0] + blocks[1])))


def test_exchange_twice_is_identity():
    i = models.finmet()
    ctx = parse_context("a:X, b:X, c:X")
    swapped = (ctx[1], ctx[0], ctx[2])
    assert Compose(Exch(i, ctx, 0), Exch(i, swapped, 0)).is_identity


def test_shuffle_plan_matches_names():
    i = models.finmet()
    b = i.backend
    ctx = parse_context("b:X, a:X")
    blocks = [parse_context("a:X"), parse_context("b:X")]
    m = Sh(i, ctx, blocks).morphism(b)
    assert m((3, 1)) == (1, 3)


def _judgements(gen, rng, n):
    out = []
    while len(out) < n:
        ctx, t, ty = gen.judgement(8)
        if not ctx:
            continue
        a = ctx[-1][1]
        vs = [(gen.fresh(), rng.choice([X, Ground("Y"), UNIT])) for _ in range(rng.randint(0, 2))]
        w = gen.term(a, list(vs), rng.randint(1, 4))
        if w is not None:
            out.append((ctx, t, tuple(vs), w))
    return out


@pytest.mark.parametrize("make", [models.gen_finmet, models.gen_measl1], ids=["FinMet", "MeasL1"])
def test_substitution_commutes_with_interpretation(make):
    th = oracles.gen_theory()
    i = make()
    b = i.backend
    rng = random.Random(7)
    checked = 0
    for ctx, t, vs, w in _judgements(oracles.TermGen(70), rng, 60):
        outer, inner = derive(th, ctx, t), derive(th, vs, w)
        whole = subst(outer, inner)
        gamma, delta = outer.ctx[:-1], whole.ctx[len(outer.ctx) - 1:]
        try:
            lhs, v = interpret(i, whole), interpret(i, outer)
            wm = interpret(i, derive(th, delta, _rename_term(inner, delta)))
        except SemanticsError:
            continue
        gobj = interpret_ctx(i, gamma)
        rhs = b.compose(Spl(i, [gamma, delta]).morphism(b), b.id(interpret_ctx(i, whole.ctx)))
        rhs = b.compose(b.tensor(b.id(gobj), wm), rhs)
        rhs = b.compose(Join(i, [gamma, outer.ctx[-1:]]).morphism(b), rhs)
        rhs = b.compose(v, rhs)
        assert models.same_morphism(i, lhs, rhs)
        checked += 1
    assert checked >= 40


def _rename_term(inner, delta):
    """The inner term after subst's renaming of clashing variables."""
    from vlam.syntax.terms import rename

    mapping = dict(zip([n for n, _ in inner.ctx], [n for n, _ in delta]))
    return rename(inner.term, mapping)


@pytest.mark.parametrize("make", [models.gen_finmet, models.gen_measl1], ids=["FinMet", "MeasL1"])
def test_exchange_commutes_with_interpretation(make):
    th = oracles.gen_theory()
    i = make()
    b = i.backend
    gen, rng = oracles.TermGen(71), random.Random(8)
    checked = 0
    while checked < 60:
        ctx, t, _ = gen.judgement(8)
        if len(ctx) < 2:
            continue
        k = rng.randrange(len(ctx) - 1)
        d = derive(th, ctx, t)
        try:
            before = interpret(i, d)
            after = interpret(i, exchange(d, k))
        except SemanticsError:
            continue
        assert models.same_morphism(i, before, b.compose(after, Exch(i, ctx, k).morphism(b)))
        checked += 1


# --- enrichment invariants -------------------------------------------------------------


def _lipschitz_map(rng, n, monotone=False):
    vals = [rng.randint(0, n)]
    for _ in range(n):
        step = rng.choice([0, 1]) if monotone else rng.choice([-1, 0, 1])
        vals.append(min(n, max(0, vals[-1] + step)))
    return vals


@pytest.mark.parametrize("q", [L, B], ids=["FinMet", "FinPos"])
def test_vcat_enrichment(q):
    b = VCat(q)
    n = 4
    S = nat_trunc(q, n)
    rng = random.Random(9)
    mono = q.kind == "boolean"

    def mk():
        vals = _lipschitz_map(rng, n, mono)
        return Map(S, S, lambda x, v=vals: v[x])

    for _ in range(1000):
        f, g, h, f2, g2 = (mk() for _ in range(5))
        assert b.is_monotone(f)
        d = b.hom_distance
        assert d(f, f) == q.top()
        assert q.leq(q.tensor(d(f, g), d(g, h)), d(f, h))
        assert q.leq(q.tensor(d(f, f2), d(g, g2)), d(b.compose(g, f), b.compose(g2, f2)))
        assert q.leq(q.tensor(d(f, f2), d(g, g2)), d(b.tensor(f, g), b.tensor(f2, g2)))


def test_finmet_distance_by_hand():
    b = VCat(L)
    S = nat_trunc(L, 5)
    rng = random.Random(10)
    for _ in range(200):
        u, v = _lipschitz_map(rng, 5), _lipschitz_map(rng, 5)
        f, g = Map(S, S, lambda x: u[x]), Map(S, S, lambda x: v[x])
        assert b.hom_distance(f, g) == L.value(max(abs(a - c) for a, c in zip(u, v)))


def _stochastic(rng, rows, cols):
    m = rng.dirichlet(np.ones(rows), size=cols).T
    return m


def test_measl1_enrichment():
    b = MeasL1()
    A, Bs = Support(tuple(range(3))), Support(tuple(range(4)))
    rng = np.random.default_rng(11)
    for _ in range(1000):
        f, g, h = (Kernel(A, A, _stochastic(rng, 3, 3)) for _ in range(3))
        k1, k2 = (Kernel(A, Bs, _stochastic(rng, 4, 3)) for _ in range(2))
        d = b.distance_float
        assert d(f, f) == 0
        assert d(f, h) <= d(f, g) + d(g, h) + 1e-9
        assert d(b.compose(k1, f), b.compose(k2, g)) <= d(f, g) + d(k1, k2) + 1e-9
        assert d(b.tensor(f, k1), b.tensor(g, k2)) <= d(f, g) + d(k1, k2) + 1e-9


def test_measure_norm():
    assert measure_norm(np.array([0.5, -0.2, -0.1])) == pytest.approx(0.5)
    assert measure_norm(np.array([0.1, -0.6])) == pytest.approx(0.6)
    assert measure_norm(np.zeros(3)) == 0
    # half the total variation on differences of probability vectors
    p, q = np.array([0.3, 0.7]), np.array([0.5, 0.5])
    assert measure_norm(p - q) == pytest.approx(0.5 * np.abs(p - q).sum())


@pytest.mark.slow
def test_qchan_enrichment():
    pool_n = 24
    us = [nq.isometry(unitary_group.rvs(2, random_state=k)) for k in range(pool_n)]
    b = QChan(starts=8)
    d = {}
    for x in range(pool_n):
        for y in range(pool_n):
            if x < y:
                d[x, y] = d[y, x] = b.distance_float(us[x], us[y])
        d[x, x] = b.distance_float(us[x], us[x])
    assert max(d[x, x] for x in range(pool_n)) <= 1e-6
    rng = random.Random(12)
    triples = [(x, y, z) for x in range(pool_n) for y in range(pool_n) for z in range(pool_n)]
    for x, y, z in rng.sample(triples, 3000):
        assert d[x, z] <= d[x, y] + d[y, z] + 1e-6
    # a lower bound on the left side is enough for these two inequalities
    quick = QChan(starts=1)
    for _ in range(1000):
        f, f2, g, g2 = (rng.randrange(pool_n) for _ in range(4))
        lhs = quick.distance_float(b.compose(us[g], us[f]), b.compose(us[g2], us[f2]))
        assert lhs <= d[f, f2] + d[g, g2] + 1e-6
    for _ in range(1000):
        f, f2, g, g2 = (rng.randrange(pool_n) for _ in range(4))
        lhs = quick.distance_float(b.tensor(us[f], us[g]), b.tensor(us[f2], us[g2]))
        assert lhs <= d[f, f2] + d[g, g2] + 1e-6


# --- affine structure ------------------------------------------------------------------


def test_unit_is_terminal_in_finmet():
    b = VCat(L)
    S = nat_trunc(L, 3)
    hom = b.hom_obj(S, b.unit())
    assert len(hom.points) == 1


def test_mass_loss_breaks_discarding():
    th = models.theory_for("MeasL1")
    i = models.measl1(lossy=True)
    results = [check_satisfaction(i, th, e) for e in models.affine_equations(th)]
    assert not all(r.satisfied for r in results)
    assert max(r.distance_float for r in results) == pytest.approx(0.25)


# --- model files ------------------------------------------------------------------------


def _wait_model():
    return json.loads(data_path("wait-metric.model.json").read_text())


def test_model_must_cover_the_signature():
    th = study("wait-metric").theory
    data = _wait_model()
    del data["ops"]["zero"]
    with pytest.raises(ModelError, match="zero"):
        build_model(data, th)


def test_model_rejects_unknown_backend_and_wrong_quantale():
    th = study("wait-metric").theory
    data = _wait_model()
    data["backend"] = "hilbert"
    with pytest.raises(ModelError):
        build_model(data, th)
    data = _wait_model()
    data["backend"] = "finpos"
    with pytest.raises(ModelError):
        build_model(data, th)


def test_complex_entries():
    assert complex_entry("1+2i") == 1 + 2j
    assert complex_entry("-0.5i") == -0.5j
    assert complex_entry("3") == 3
    with pytest.raises(ModelError):
        complex_entry("abc")


def test_explicit_metric_model():
    th = parse_theory("quantale: lawvere\ntypes: X\nops:\n  f : X -> X\naxioms:\n  x:X |- f(x) =[1] x : X\n")
    data = {
        "schema_version": 1, "backend": "finmet",
        "types": {"X": {"kind": "explicit", "points": ["a", "b"], "dist": [["0", "1"], ["1", "0"]]}},
        "ops": {"f": {"kind": "table", "map": [["a", "b"], ["b", "a"]]}},
    }
    i = build_model(data, th)
    assert check_axioms(i, th).ok
    data["types"]["X"]["dist"] = [["0", "2"], ["2", "0"]]
    assert not check_axioms(build_model(data, th), th).ok
