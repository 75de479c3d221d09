"""Integral quantales over exact rationals.

Four instances are provided: boolean, lawvere, ultrametric and goedel.
Values carry the instance they belong to, so mixing instances is caught
early instead of producing nonsense labels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

INF = math.inf

Payload = Union[Fraction, float]

KINDS = ("boolean", "lawvere", "ultrametric", "goedel")


class QuantaleError(ValueError):
    pass


@dataclass(frozen=True, order=False)
class QValue:
    kind: str
    x: Payload

    def __str__(self) -> str:
        return format_payload(self.x)

    def __repr__(self) -> str:
        return f"QValue({self.kind}, {format_payload(self.x)})"

    @property
    def is_inf(self) -> bool:
        return self.x == INF


def format_payload(x: Payload) -> str:
    if x == INF:
        return "inf"
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _coerce(x) -> Payload:
    if isinstance(x, QValue):
        return x.x
    if isinstance(x, float) and math.isinf(x):
        if x < 0:
            raise QuantaleError("negative infinity is not a quantale value")
        return INF
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return parse_payload(x)
    raise QuantaleError(f"cannot read {x!r} as a quantale value")


def parse_payload(text: str) -> Payload:
    t = text.strip().lower()
    if t in ("inf", "infinity", "∞"):
        return INF
    if t == "true":
        return Fraction(1)
    if t == "false":
        return Fraction(0)
    try:
        return Fraction(t)
    except (ValueError, ZeroDivisionError) as exc:
        raise QuantaleError(f"bad quantale value {text!r}") from exc


class Quantale:
    """One of the four supported instances, selected by ``kind``."""

    def __init__(self, kind: str):
        if kind not in KINDS:
            raise QuantaleError(f"unknown quantale {kind!r}; expected one of {', '.join(KINDS)}")
        self.kind = kind
        # lawvere and ultrametric order their values backwards
        self.reversed = kind in ("lawvere", "ultrametric")

    def __repr__(self) -> str:
        return f"Quantale({self.kind})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Quantale) and other.kind == self.kind

    def __hash__(self) -> int:
        return hash(self.kind)

    # construction

    def value(self, x) -> QValue:
        if isinstance(x, QValue):
            self._own(x)
            return x
        p = _coerce(x)
        if not self.contains(p):
            raise QuantaleError(f"{format_payload(p)} is not a value of the {self.kind} quantale")
        return QValue(self.kind, p)

    def parse(self, text: str) -> QValue:
        return self.value(parse_payload(text))

    def contains(self, p: Payload) -> bool:
        if p == INF:
            return self.reversed
        if self.kind == "boolean":
            return p in (0, 1)
        if self.kind == "goedel":
            return 0 <= p <= 1
        return p >= 0

    def _own(self, *vals: QValue) -> None:
        for v in vals:
            if not isinstance(v, QValue):
                raise QuantaleError(f"expected a quantale value, got {v!r}")
            if v.kind != self.kind:
                raise QuantaleError(f"mixed quantale instances: {v.kind} value used in {self.kind}")

    # distinguished elements

    def top(self) -> QValue:
        return QValue(self.kind, Fraction(0) if self.reversed else Fraction(1))

    def unit(self) -> QValue:
        return self.top()

    def bottom(self) -> QValue:
        return QValue(self.kind, INF if self.reversed else Fraction(0))

    # structure

    def tensor(self, a: QValue, b: QValue) -> QValue:
        self._own(a, b)
        x, y = a.x, b.x
        if self.kind == "lawvere":
            r = INF if INF in (x, y) else x + y
        elif self.kind == "ultrametric":
            r = max(x, y)
        else:
            r = min(x, y)
        return QValue(self.kind, r)

    def tensor_all(self, values: Iterable[QValue]) -> QValue:
        acc = self.unit()
        for v in values:
            acc = self.tensor(acc, v)
        return acc

    def join(self, values: Iterable[QValue]) -> QValue:
        vals = list(values)
        self._own(*vals)
        if not vals:
            return self.bottom()
        xs = [v.x for v in vals]
        return QValue(self.kind, min(xs) if self.reversed else max(xs))

    def meet(self, values: Iterable[QValue]) -> QValue:
        vals = list(values)
        self._own(*vals)
        if not vals:
            return self.top()
        xs = [v.x for v in vals]
        return QValue(self.kind, max(xs) if self.reversed else min(xs))

    def leq(self, a: QValue, b: QValue) -> bool:
        self._own(a, b)
        return a.x >= b.x if self.reversed else a.x <= b.x

    def way_below(self, a: QValue, b: QValue) -> bool:
        self._own(a, b)
        if self.kind == "boolean":
            return a.x <= b.x
        if self.reversed:
            return a.x > b.x or (a.x == INF and b.x == INF)
        return a.x < b.x or (a.x == 0 and b.x == 0)

    def approximants(self, q: QValue, n: int) -> list[QValue]:
        """``n`` values way below ``q`` that climb towards it."""
        self._own(q)
        if n < 1:
            raise QuantaleError("approximants needs n >= 1")
        if self.kind == "boolean" or self.way_below(q, q):
            return [q] * n
        if self.reversed:
            return [QValue(self.kind, q.x + Fraction(1, k)) for k in range(1, n + 1)]
        return [QValue(self.kind, q.x * Fraction(k, k + 1)) for k in range(1, n + 1)]


BOOLEAN = Quantale("boolean")
LAWVERE = Quantale("lawvere")
ULTRAMETRIC = Quantale("ultrametric")
GOEDEL = Quantale("goedel")

_INSTANCES = {q.kind: q for q in (BOOLEAN, LAWVERE, ULTRAMETRIC, GOEDEL)}


def get(kind: str) -> Quantale:
    try:
        return _INSTANCES[kind]
    except KeyError:
        raise QuantaleError(f"unknown quantale {kind!r}") from None


def of(v: QValue) -> Quantale:
    return get(v.kind)
