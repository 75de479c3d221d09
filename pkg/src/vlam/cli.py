"""Command-line front end: ``vlam check|prove|verify|interpret|model-check|casestudy``."""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .quantale import QuantaleError
from .semantics import MeasL1, QChan, SemanticsError, VCat, check_axioms, check_satisfaction
from .semantics.core import interpret
from .semantics.modelfile import ModelError, load_model
from .syntax.terms import ground_names
from .syntax import ParseError, Theory, TheoryError, load_theory, parse_context, pretty, pretty_type
from .theories import BUILTINS, CaseStudyError, run_case_study
from .typecheck import TypingError, derive
from .veq import Budget, ProofError, ProofFormatError, SearchError, check_proof, derive_bound, dump_proof, load_proof
from .veq.proof import VEquation

SCHEMA_VERSION = 1
OK, FAIL, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --- output helpers -------------------------------------------------------------


def _color_on(stream) -> bool:
    mode = os.environ.get("VLAM_COLOR", "auto").lower()
    if mode in ("always", "1", "yes", "on"):
        return True
    if mode in ("never", "0", "no", "off"):
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def _diag(kind: str, msg: str) -> None:
    codes = {"error": "31", "fail": "31", "note": "36"}
    tag = f"{kind}:"
    if _color_on(sys.stderr):
        tag = f"\x1b[1;{codes.get(kind, '0')}m{tag}\x1b[0m"
    print(f"{tag} {msg}", file=sys.stderr)


def _emit(args, doc: dict, text: str) -> None:
    if args.json:
        print(json.dumps({"schema_version": SCHEMA_VERSION, **doc}, indent=2, default=str))
    else:
        print(text)


# --- argument loading -------------------------------------------------------------


def _text(arg: str) -> str:
    """Command-line term or context; ``@path`` reads it from a file."""
    if arg.startswith("@"):
        path = Path(arg[1:])
        try:
            return path.read_text(encoding="utf-8").strip()
        except OSError as e:
            raise UsageError(f"cannot read {path}: {e.strerror}") from None
    return arg


def _theory(path: str) -> Theory:
    try:
        return load_theory(path)
    except OSError as e:
        raise UsageError(f"cannot read theory {path}: {e.strerror}") from None
    except (ParseError, TheoryError) as e:
        raise UsageError(f"{path}: {e}") from None


def _ctx(theory: Theory, arg: str):
    try:
        ctx = parse_context(_text(arg))
    except ParseError as e:
        raise UsageError(f"context: {e}") from None
    missing = {t for _, ty in ctx for t in ground_names(ty)} - set(theory.types)
    if missing:
        raise UsageError(f"context mentions unknown type(s) {', '.join(sorted(missing))}")
    return ctx


def _term(theory: Theory, arg: str, ctx):
    try:
        return theory.parse_term(_text(arg), ctx)
    except (ParseError, TheoryError) as e:
        raise UsageError(f"term: {e}") from None


def _model(theory: Theory, args):
    if not args.model:
        raise UsageError("this command needs --model FILE")
    try:
        return load_model(args.model, theory, args.tol, args.seed)
    except OSError as e:
        raise UsageError(f"cannot read model {args.model}: {e.strerror}") from None
    except ModelError as e:
        raise UsageError(f"{args.model}: {e}") from None


# --- commands ---------------------------------------------------------------------


def cmd_check(args) -> int:
    th = _theory(args.theory)
    ctx = _ctx(th, args.ctx)
    t = _term(th, args.term, ctx)
    try:
        d = derive(th, ctx, t)
    except TypingError as e:
        _emit(args, {"command": "check", "ok": False, "error": str(e)}, f"ill-typed: {e}")
        return FAIL
    text = f"{pretty(t)} : {pretty_type(d.type)}"
    if args.derivation:
        text += "\n" + d.render()
    _emit(args, {"command": "check", "ok": True, "term": pretty(t), "type": pretty_type(d.type),
                 "derivation_size": d.size()}, text)
    return OK


def cmd_prove(args) -> int:
    th = _theory(args.theory)
    ctx = _ctx(th, args.ctx)
    lhs, rhs = _term(th, args.lhs, ctx), _term(th, args.rhs, ctx)
    budget = Budget(nodes=args.budget) if args.budget else Budget()
    try:
        label, proof = derive_bound(th, ctx, lhs, rhs, budget)
    except SearchError as e:
        _emit(args, {"command": "prove", "ok": False, "error": str(e)}, f"cannot prove: {e}")
        return FAIL
    out = None
    if args.proof_out != "-":
        out = Path(args.proof_out)
        try:
            out.write_text(dump_proof(proof, th.name) + "\n", encoding="utf-8")
        except OSError as e:
            raise UsageError(f"cannot write {out}: {e.strerror}") from None
    text = str(label)
    if out is not None and not args.quiet:
        _diag("note", f"proof ({proof.size()} nodes) written to {out}")
    _emit(args, {"command": "prove", "ok": True, "label": str(label), "proof_file": str(out) if out else None,
                 "proof_size": proof.size()}, text)
    return OK


def cmd_verify(args) -> int:
    th = _theory(args.theory)
    try:
        text = Path(args.proof).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read proof {args.proof}: {e.strerror}") from None
    try:
        tree = load_proof(text, th)
        e = check_proof(th, tree)
    except (ProofFormatError, ProofError) as err:
        path = getattr(err, "path", None)
        _emit(args, {"command": "verify", "ok": False, "error": str(err), "path": path},
              f"invalid proof: {err}")
        return FAIL
    _emit(args, {"command": "verify", "ok": True, "label": str(e.label), "lhs": pretty(e.lhs),
                 "rhs": pretty(e.rhs), "type": pretty_type(e.type)},
          f"valid: {e}")
    return OK


def _describe(i, m) -> str:
    b = i.backend
    if isinstance(b, VCat):
        pts = m.dom.points if m.dom.size() <= 64 else None
        if pts is None:
            return f"map on {m.dom.size()} points"
        return "\n".join(f"  {p!r} -> {m(p)!r}" for p in pts)
    if isinstance(b, MeasL1):
        with np.printoptions(precision=6, suppress=True):
            return f"matrix {m.m.shape[0]}x{m.m.shape[1]} (columns are inputs)\n{m.m}"
    if isinstance(b, QChan):
        from . import numeric_q as nq

        v, k = nq.stinespring(m)
        return f"channel C^{m.n_in} -> C^{m.n_out}, Stinespring environment of dimension {k}"
    return repr(m)


def cmd_interpret(args) -> int:
    th = _theory(args.theory)
    ctx = _ctx(th, args.ctx)
    t = _term(th, args.term, ctx)
    i = _model(th, args)
    try:
        d = derive(th, ctx, t)
    except TypingError as e:
        _emit(args, {"command": "interpret", "ok": False, "error": str(e)}, f"ill-typed: {e}")
        return FAIL
    doc = {"command": "interpret", "ok": True, "term": pretty(t), "type": pretty_type(d.type)}
    try:
        if args.against:
            other = _term(th, args.against, ctx)
            try:
                label = th.quantale.parse(args.label) if args.label else th.quantale.top()
            except QuantaleError as e:
                raise UsageError(f"--label: {e}") from None
            sat = check_satisfaction(i, th, VEquation(ctx, t, other, d.type, label), args.tol)
            doc.update(against=pretty(other), distance=str(sat.distance), label=str(label),
                       satisfied=sat.satisfied)
            text = f"distance {sat.distance}; label {label} {'satisfied' if sat.satisfied else 'VIOLATED'}"
            _emit(args, doc, text)
            return OK if sat.satisfied else FAIL
        m = interpret(i, d)
    except TypingError as e:
        _emit(args, {"command": "interpret", "ok": False, "error": str(e)}, f"ill-typed: {e}")
        return FAIL
    except SemanticsError as e:
        _emit(args, {"command": "interpret", "ok": False, "error": str(e)}, f"cannot interpret: {e}")
        return FAIL
    _emit(args, doc, f"[[{pretty(t)}]] in {i.backend.name}:\n{_describe(i, m)}")
    return OK


def cmd_model_check(args) -> int:
    th = _theory(args.theory)
    i = _model(th, args)
    report = check_axioms(i, th, args.tol)
    doc = {"command": "model-check", "ok": report.ok, "checks": len(report.checks),
           "failures": [{"axiom": c.index, "params": {k: str(v) for k, v in c.params.items()},
                         "label": str(c.label), "distance": str(c.distance), "error": c.error or None}
                        for c in report.failures]}
    lines = [f"{len(report.checks)} axiom instances checked, {len(report.failures)} failed"]
    lines += [f"  {c}" for c in report.failures]
    _emit(args, doc, "\n".join(lines))
    return OK if report.ok else FAIL


def cmd_casestudy(args) -> int:
    opts = {}
    if args.seed is not None:
        opts["seed"] = args.seed
    budget = Budget(nodes=args.budget) if args.budget else None
    proof_dir = None if args.proof_out in (None, "-") else args.proof_out
    try:
        report = run_case_study(args.name, budget=budget, tol=args.tol, proof_dir=proof_dir, **opts)
    except CaseStudyError as e:
        raise UsageError(str(e)) from None
    except OSError as e:
        raise UsageError(f"cannot write proofs: {e.strerror}") from None
    _emit(args, {"command": "casestudy", **report.to_json()}, report.text())
    return OK if report.ok else FAIL


# --- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--tol", type=float, default=None, help="numeric tolerance for model checks")
    common.add_argument("--seed", type=int, default=None, help="seed for randomized numerics")
    common.add_argument("--budget", type=int, default=None, help="search node budget for prove")
    common.add_argument("--model", default=None, help="model file (JSON)")

    p = argparse.ArgumentParser(prog="vlam", description="Quantitative equational reasoning for linear lambda calculi.")
    p.add_argument("--version", action="version", version=f"vlam {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    c = sub.add_parser("check", parents=[common], help="typecheck a term in context")
    c.add_argument("theory")
    c.add_argument("ctx", help="context such as 'x:X, y:X', or '-' for the empty one")
    c.add_argument("term")
    c.add_argument("--derivation", action="store_true", help="print the typing derivation")
    c.set_defaults(fn=cmd_check)

    c = sub.add_parser("prove", parents=[common], help="search for the best label relating two terms")
    c.add_argument("theory")
    c.add_argument("ctx")
    c.add_argument("lhs")
    c.add_argument("rhs")
    c.add_argument("--proof-out", default="proof.json", help="proof file to write ('-' to skip)")
    c.add_argument("--quiet", action="store_true")
    c.set_defaults(fn=cmd_prove)

    c = sub.add_parser("verify", parents=[common], help="check a proof file against a theory")
    c.add_argument("theory")
    c.add_argument("proof")
    c.set_defaults(fn=cmd_verify)

    c = sub.add_parser("interpret", parents=[common], help="interpret a judgement in a model")
    c.add_argument("theory")
    c.add_argument("ctx")
    c.add_argument("term")
    c.add_argument("--against", default=None, help="second term: report the distance to it")
    c.add_argument("--label", default=None, help="label to test with --against (default: top)")
    c.set_defaults(fn=cmd_interpret)

    c = sub.add_parser("model-check", parents=[common], help="check that a model satisfies every axiom")
    c.add_argument("theory")
    c.set_defaults(fn=cmd_model_check)

    c = sub.add_parser("casestudy", parents=[common], help="run a builtin case study")
    c.add_argument("name", choices=BUILTINS)
    c.add_argument("--proof-out", default=None, help="directory for the probe proofs")
    c.set_defaults(fn=cmd_casestudy)
    return p


def _validate(args) -> None:
    if args.budget is not None and args.budget <= 0:
        raise UsageError("--budget must be positive")
    if args.tol is not None and not (args.tol >= 0 and math.isfinite(args.tol)):
        raise UsageError("--tol must be a finite non-negative number")


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else OK
    try:
        _validate(args)
        return args.fn(args)
    except UsageError as e:
        _diag("error", str(e))
        return USAGE
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
