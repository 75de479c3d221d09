"""Arithmetic over family indices and axiom labels.

Axiom schemas such as ``wait{n}(x) =[abs(m-n)] wait{m}(x)`` quantify over
rational parameters.  This module holds the small expression language used
for those indices, labels and side conditions.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

SORTS = ("nat", "int", "rat", "nnrat", "prob")


class IndexError_(ValueError):
    pass


def in_sort(x: Fraction, sort: str) -> bool:
    if sort == "nat":
        return x.denominator == 1 and x >= 0
    if sort == "int":
        return x.denominator == 1
    if sort == "rat":
        return True
    if sort == "nnrat":
        return x >= 0
    if sort == "prob":
        return 0 <= x <= 1
    raise IndexError_(f"unknown index sort {sort!r}")


class IExpr:
    __slots__ = ()

    def vars(self) -> set[str]:
        raise NotImplementedError

    def eval(self, env: Mapping[str, Fraction]) -> Fraction:
        raise NotImplementedError


@dataclass(frozen=True)
class INum(IExpr):
    value: Fraction

    def vars(self):
        return set()

    def eval(self, env):
        return self.value

    def __str__(self):
        v = self.value
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


@dataclass(frozen=True)
class IVar(IExpr):
    name: str

    def vars(self):
        return {self.name}

    def eval(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise IndexError_(f"unbound index parameter {self.name}") from None

    def __str__(self):
        return self.name


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


@dataclass(frozen=True)
class IBin(IExpr):
    op: str
    left: IExpr
    right: IExpr

    def vars(self):
        return self.left.vars() | self.right.vars()

    def eval(self, env):
        a, b = self.left.eval(env), self.right.eval(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if b == 0:
            raise IndexError_("division by zero in index expression")
        return a / b

    def __str__(self):
        def wrap(e, right_side):
            s = str(e)
            if isinstance(e, IBin) and (_PREC[e.op] < _PREC[self.op] or (right_side and _PREC[e.op] == _PREC[self.op])):
                return f"({s})"
            return s

        return f"{wrap(self.left, False)}{self.op}{wrap(self.right, True)}"


@dataclass(frozen=True)
class IAbs(IExpr):
    arg: IExpr

    def vars(self):
        return self.arg.vars()

    def eval(self, env):
        return abs(self.arg.eval(env))

    def __str__(self):
        return f"abs({self.arg})"


@dataclass(frozen=True)
class INeg(IExpr):
    arg: IExpr

    def vars(self):
        return self.arg.vars()

    def eval(self, env):
        return -self.arg.eval(env)

    def __str__(self):
        return f"-{self.arg}" if isinstance(self.arg, (INum, IVar)) else f"-({self.arg})"


@dataclass(frozen=True)
class IInf(IExpr):
    """The infinite label; only meaningful for reversed quantales."""

    def vars(self):
        return set()

    def eval(self, env):
        import math

        return math.inf

    def __str__(self):
        return "inf"


@dataclass(frozen=True)
class Cmp:
    op: str
    left: IExpr
    right: IExpr

    def holds(self, env) -> bool:
        a, b = self.left.eval(env), self.right.eval(env)
        return {
            "<=": a <= b,
            "<": a < b,
            ">=": a >= b,
            ">": a > b,
            "==": a == b,
            "!=": a != b,
        }[self.op]

    def vars(self):
        return self.left.vars() | self.right.vars()

    def __str__(self):
        return f"{self.left} {self.op} {self.right}"


def match_index(pattern: IExpr, value: Fraction, env: dict) -> Optional[bool]:
    """Try to extend ``env`` so that ``pattern`` evaluates to ``value``.

    Returns True/False when decided, None when the pattern has unbound
    parameters that cannot be solved directly (compound expressions).
    """
    if isinstance(pattern, IVar):
        if pattern.name in env:
            return env[pattern.name] == value
        env[pattern.name] = value
        return True
    if pattern.vars() <= set(env):
        return pattern.eval(env) == value
    return None


def format_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
