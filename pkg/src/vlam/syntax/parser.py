"""Recursive-descent parser for types, terms, contexts and index expressions.

Term grammar, loosest binding first::

    term   ::= '\\' x ':' type '.' term
             | 'pm' term 'to' x '*' y '.' term
             | tens [ 'to' '*' '.' term ]
    tens   ::= app ( '*' app )*
    app    ::= atom atom*
    atom   ::= x | f(term, ...) | f{idx}(term, ...) | '*' | 'dis' '(' term ')' | '(' term ')'

An identifier written directly against '(' is an operation call; with a
space in between it is an application of a variable.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .index import Cmp, IAbs, IBin, IExpr, IInf, INeg, INum, IVar
from .lexer import ParseError, Token, tokenize
from .terms import (
    STAR, UNIT, App, BVar, Dis, Ground, Lambda, Lollipop, OpApp, PmTo, Tensor,
    Term, TypeExpr, UnitTo, Var, make_context, SyntaxUsageError, TensorIntro,
)

KEYWORDS = {"pm", "to", "dis"}


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0
        self.scope: list[str] = []

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Optional[Token] = None):
        t = tok or self.tok
        raise ParseError(msg, t.line, t.col)

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("SYM", "IDENT") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        t = self.tok
        self.pos += 1
        return t

    def ident(self, what: str = "identifier") -> str:
        t = self.tok
        if t.kind != "IDENT" or t.text in KEYWORDS:
            self.error(f"expected {what}, found {t.text or 'end of input'!r}")
        self.pos += 1
        return t.text

    def done(self):
        if self.tok.kind != "EOF":
            self.error(f"unexpected {self.tok.text!r}")

    # types

    def type_(self) -> TypeExpr:
        left = self.tensor_type()
        if self.accept("->o"):
            return Lollipop(left, self.type_())
        return left

    def tensor_type(self) -> TypeExpr:
        t = self.atom_type()
        while self.accept("*"):
            t = Tensor(t, self.atom_type())
        return t

    def atom_type(self) -> TypeExpr:
        if self.accept("("):
            t = self.type_()
            self.expect(")")
            return t
        name = self.ident("a type")
        return UNIT if name == "I" else Ground(name)

    # contexts

    def context(self):
        if self.at("-") and not self.peek().text == ">":
            self.pos += 1
            return ()
        pairs = []
        if self.tok.kind == "EOF" or self.at("|-"):
            return ()
        while True:
            name = self.ident("a variable")
            self.expect(":")
            pairs.append((name, self.type_()))
            if not self.accept(","):
                break
        try:
            return make_context(pairs)
        except SyntaxUsageError as exc:
            self.error(str(exc))

    # terms

    def term(self) -> Term:
        if self.accept("\\"):
            name = self.ident("a bound variable")
            self.expect(":")
            ty = self.type_()
            self.expect(".")
            self.scope.append(name)
            body = self.term()
            self.scope.pop()
            return Lambda(ty, body, name)
        if self.accept("pm"):
            scrut = self.term()
            self.expect("to")
            x = self.ident("a bound variable")
            self.expect("*")
            y = self.ident("a bound variable")
            if x == y:
                self.error(f"pm binds {x} twice")
            self.expect(".")
            self.scope.extend([x, y])
            body = self.term()
            del self.scope[-2:]
            return PmTo(scrut, body, x, y)
        t = self.tens()
        if self.at("to") and self.peek().text == "*" and self.peek(2).text == ".":
            self.pos += 3
            return UnitTo(t, self.term())
        return t

    def tens(self) -> Term:
        t = self.app()
        while self.at("*"):
            self.pos += 1
            t = TensorIntro(t, self.app())
        return t

    def _starts_atom(self) -> bool:
        t = self.tok
        if t.kind == "IDENT":
            return t.text not in ("to", "pm")
        return t.kind == "SYM" and t.text == "("

    def app(self) -> Term:
        if self.at("*"):
            self.pos += 1
            t: Term = STAR
        else:
            t = self.atom()
        while self._starts_atom():
            t = App(t, self.atom())
        return t

    def atom(self) -> Term:
        tok = self.tok
        if self.accept("("):
            t = self.term()
            self.expect(")")
            return t
        if self.accept("*"):
            return STAR
        if tok.kind != "IDENT":
            self.error(f"expected a term, found {tok.text or 'end of input'!r}")
        if tok.text == "dis":
            self.pos += 1
            self.expect("(")
            t = self.term()
            self.expect(")")
            return Dis(t)
        name = self.ident("a term")
        index = None
        glued = tok.glued
        if glued and self.at("{"):
            self.pos += 1
            expr = self.iexpr()
            close = self.expect("}")
            index = expr.value if isinstance(expr, INum) else expr
            glued = close.glued
            if not (glued and self.at("(")):
                self.error(f"operation {name} needs an argument list")
        if glued and self.at("("):
            self.pos += 1
            args = []
            if not self.at(")"):
                while True:
                    args.append(self.term())
                    if not self.accept(","):
                        break
            self.expect(")")
            if not args:
                self.error(f"operation {name} applied to no arguments; write {name}(*)", tok)
            return OpApp(name, tuple(args), index)
        for k in range(len(self.scope) - 1, -1, -1):
            if self.scope[k] == name:
                return BVar(len(self.scope) - 1 - k)
        return Var(name)

    # index expressions

    def iexpr(self) -> IExpr:
        e = self.iterm()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.pos += 1
            e = IBin(op, e, self.iterm())
        return _fold(e)

    def iterm(self) -> IExpr:
        e = self.ifactor()
        while self.at("*") or self.at("/"):
            op = self.tok.text
            self.pos += 1
            e = IBin(op, e, self.ifactor())
        return e

    def ifactor(self) -> IExpr:
        t = self.tok
        if self.accept("-"):
            return INeg(self.ifactor())
        if self.accept("("):
            e = self.iexpr()
            self.expect(")")
            return e
        if t.kind == "NUM":
            self.pos += 1
            return INum(Fraction(t.text))
        if t.kind == "IDENT":
            if t.text in ("inf", "infinity"):
                self.pos += 1
                return IInf()
            if t.text == "true":
                self.pos += 1
                return INum(Fraction(1))
            if t.text == "false":
                self.pos += 1
                return INum(Fraction(0))
            if t.text == "abs":
                self.pos += 1
                self.expect("(")
                e = self.iexpr()
                self.expect(")")
                return IAbs(e)
            self.pos += 1
            return IVar(t.text)
        self.error(f"expected a number or parameter, found {t.text or 'end of input'!r}")

    def condition(self) -> list[Cmp]:
        out = []
        while True:
            left = self.iexpr()
            op = self.tok.text
            if op not in ("<=", "<", ">=", ">", "==", "!="):
                self.error(f"expected a comparison, found {op!r}")
            self.pos += 1
            out.append(Cmp(op, left, self.iexpr()))
            if not self.accept("and"):
                return out


def _fold(e: IExpr) -> IExpr:
    """Collapse parameter-free subexpressions to numbers."""
    if isinstance(e, (INum, IVar, IInf)):
        return e
    if not e.vars() and not _has_inf(e):
        return INum(e.eval({}))
    return e


def _has_inf(e) -> bool:
    if isinstance(e, IInf):
        return True
    if isinstance(e, IBin):
        return _has_inf(e.left) or _has_inf(e.right)
    if isinstance(e, (IAbs, INeg)):
        return _has_inf(e.arg)
    return False


def _run(text: str, fn):
    p = Parser(tokenize(text))
    out = fn(p)
    p.done()
    return out


def parse_type(text: str) -> TypeExpr:
    return _run(text, Parser.type_)


def parse_context(text: str):
    return _run(text, Parser.context)


def parse_raw_term(text: str) -> Term:
    return _run(text, Parser.term)


def parse_term(text: str, theory=None, ctx=None) -> Term:
    """Parse a term; with a theory, resolve family names and expand definitions."""
    t = parse_raw_term(text)
    if theory is not None:
        names = {n for n, _ in ctx} if ctx else set()
        t = theory.resolve(t, bound=names)
    return t


def parse_index(text: str) -> IExpr:
    return _run(text, Parser.iexpr)
