"""V-equations, proof trees and their JSON encoding."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .. import quantale as Q
from ..syntax.index import format_fraction
from ..syntax.parser import parse_raw_term, parse_type
from ..syntax.pretty import pretty
from ..syntax.terms import Term, TypeExpr, Var, children, pretty_context, pretty_type

SCHEMA_VERSION = 1

RULES = (
    "axiom", "base_eq", "refl", "trans", "weak", "arch", "join", "cong_op", "cong_tensor",
    "cong_to", "cong_pm", "cong_lam", "cong_app", "cong_subst", "perm", "cong_dis", "sym",
)


@dataclass(frozen=True)
class VEquation:
    ctx: tuple
    lhs: Term
    rhs: Term
    type: TypeExpr
    label: Q.QValue

    def __str__(self) -> str:
        return (
            f"{pretty_context(self.ctx)} |- {pretty(self.lhs)} =[{self.label}] "
            f"{pretty(self.rhs)} : {pretty_type(self.type)}"
        )

    def with_label(self, label: Q.QValue) -> "VEquation":
        return VEquation(self.ctx, self.lhs, self.rhs, self.type, label)

    def same_sides(self, other: "VEquation") -> bool:
        return (self.ctx, self.lhs, self.rhs, self.type) == (other.ctx, other.lhs, other.rhs, other.type)


@dataclass(frozen=True)
class ProofTree:
    rule: str
    conclusion: VEquation
    premises: tuple = ()
    payload: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def label(self) -> Q.QValue:
        return self.conclusion.label

    def rule_sequence(self) -> tuple:
        out = [self.rule]
        for p in self.premises:
            out.extend(p.rule_sequence())
        return tuple(out)

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def nodes(self):
        yield self
        for p in self.premises:
            yield from p.nodes()

    def render(self, indent: int = 0) -> str:
        pad = "  " * indent
        extra = ""
        if self.rule == "axiom":
            extra = f"[{self.payload.get('index')}]"
        elif self.rule == "base_eq":
            extra = f"[{self.payload.get('name')}/{self.payload.get('orientation', 'lr')}]"
        lines = [f"{pad}{self.rule}{extra}: {self.conclusion}"]
        lines += [p.render(indent + 1) for p in self.premises]
        return "\n".join(lines)


# --- JSON -------------------------------------------------------------------


def _label_str(v: Q.QValue) -> str:
    return str(v)


def _term_json(t: Term) -> str:
    return pretty(t)


def _all_var_names(t: Term) -> set:
    out = set()
    if isinstance(t, Var):
        out.add(t.name)
    for c in children(t):
        out |= _all_var_names(c)
    return out


def _term_from_json(text: str, theory) -> Term:
    t = parse_raw_term(text)
    return theory.resolve(t, bound=_all_var_names(t))


def equation_to_json(e: VEquation) -> dict:
    return {
        "ctx": [[n, pretty_type(ty)] for n, ty in e.ctx],
        "lhs": _term_json(e.lhs),
        "rhs": _term_json(e.rhs),
        "type": pretty_type(e.type),
        "label": _label_str(e.label),
    }


def equation_from_json(d: dict, theory) -> VEquation:
    q = theory.quantale
    ctx = tuple((n, parse_type(ty)) for n, ty in d["ctx"])
    return VEquation(ctx, _term_from_json(d["lhs"], theory), _term_from_json(d["rhs"], theory),
                     parse_type(d["type"]), q.parse(str(d["label"])))


def _inst_to_json(inst: dict) -> dict:
    out = {}
    for k, v in inst.items():
        if isinstance(v, Term):
            out[k] = {"term": _term_json(v)}
        elif isinstance(v, TypeExpr):
            out[k] = {"type": pretty_type(v)}
        elif isinstance(v, (list, tuple)):
            out[k] = {"names": list(v)}
        else:
            out[k] = {"name": str(v)}
    return out


def _inst_from_json(d: dict, theory) -> dict:
    out = {}
    for k, v in d.items():
        if "term" in v:
            out[k] = _term_from_json(v["term"], theory)
        elif "type" in v:
            out[k] = parse_type(v["type"])
        elif "names" in v:
            out[k] = tuple(v["names"])
        else:
            out[k] = v["name"]
    return out


def tree_to_json(t: ProofTree) -> dict:
    d: dict[str, Any] = {"rule": t.rule, "conclusion": equation_to_json(t.conclusion)}
    p = t.payload
    if t.rule == "axiom":
        d["index"] = p["index"]
        d["params"] = {k: format_fraction(v) for k, v in p.get("params", {}).items()}
        d["subst"] = {k: _term_json(v) for k, v in p.get("subst", {}).items()}
    elif t.rule == "base_eq":
        d["name"] = p["name"]
        d["orientation"] = p.get("orientation", "lr")
        d["inst"] = _inst_to_json(p.get("inst", {}))
    elif t.rule == "weak":
        d["r"] = _label_str(p["r"])
    elif t.rule == "arch":
        d["witnesses"] = [_label_str(w) for w in p["witnesses"]]
    elif t.rule == "cong_subst":
        d["var"] = p["var"]
    d["premises"] = [tree_to_json(c) for c in t.premises]
    return d


class ProofFormatError(ValueError):
    pass


def tree_from_json(d: dict, theory, path: str = "$") -> ProofTree:
    try:
        rule = d["rule"]
        if rule not in RULES:
            raise ProofFormatError(f"{path}: unknown rule {rule!r}")
        concl = equation_from_json(d["conclusion"], theory)
        q = theory.quantale
        payload: dict = {}
        if rule == "axiom":
            payload["index"] = int(d["index"])
            payload["params"] = {k: Fraction(v) for k, v in d.get("params", {}).items()}
            payload["subst"] = {k: _term_from_json(v, theory) for k, v in d.get("subst", {}).items()}
        elif rule == "base_eq":
            payload["name"] = d["name"]
            payload["orientation"] = d.get("orientation", "lr")
            payload["inst"] = _inst_from_json(d.get("inst", {}), theory)
        elif rule == "weak":
            payload["r"] = q.parse(str(d["r"]))
        elif rule == "arch":
            payload["witnesses"] = [q.parse(str(w)) for w in d["witnesses"]]
        elif rule == "cong_subst":
            payload["var"] = d["var"]
        prems = tuple(
            tree_from_json(c, theory, f"{path}.premises[{i}]") for i, c in enumerate(d.get("premises", []))
        )
    except ProofFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ProofFormatError(f"{path}: malformed node ({exc})") from None
    return ProofTree(rule, concl, prems, payload)


def dump_proof(tree: ProofTree, theory_name: str = "") -> str:
    doc = {"schema_version": SCHEMA_VERSION, "theory": theory_name, "proof": tree_to_json(tree)}
    return json.dumps(doc, indent=1, ensure_ascii=False)


def load_proof(text: str, theory) -> ProofTree:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProofFormatError(f"not JSON: {exc}") from None
    if not isinstance(doc, dict) or "proof" not in doc:
        raise ProofFormatError("missing 'proof' field")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ProofFormatError(f"unsupported schema_version {doc.get('schema_version')!r}")
    return tree_from_json(doc["proof"], theory)
