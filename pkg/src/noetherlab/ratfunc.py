"""Exact rational functions of the adiabatic exponent gamma.

Coefficients of every symbolic expression live in Q(gamma).  A value is a
reduced fraction ``num/den`` of univariate polynomials with ``mpq``
coefficients; ``den`` is monic and coprime to ``num``.  When gamma is pinned
to a rational number, coefficients degenerate to constants (degree-0
polynomials) and the same class is used.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Tuple, Union

from gmpy2 import mpq

Poly = Tuple[mpq, ...]  # low degree first, no trailing zeros; () is zero

_ZERO: Poly = ()
_ONE: Poly = (mpq(1),)


def _trim(c: Iterable) -> Poly:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def padd(a: Poly, b: Poly) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] = out[i] + x
    return _trim(out)


def pneg(a: Poly) -> Poly:
    return tuple(-x for x in a)


def pmul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return _ZERO
    if len(a) == 1:
        return tuple(a[0] * x for x in b)
    if len(b) == 1:
        return tuple(b[0] * x for x in a)
    out = [mpq(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out)


def pscale(a: Poly, k) -> Poly:
    if k == 0:
        return _ZERO
    return tuple(k * x for x in a)


def pdivmod(a: Poly, b: Poly) -> Tuple[Poly, Poly]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) < len(b):
        return _ZERO, a
    r = list(a)
    q = [mpq(0)] * (len(a) - len(b) + 1)
    lead = b[-1]
    for k in range(len(a) - len(b), -1, -1):
        f = r[k + len(b) - 1] / lead
        q[k] = f
        if f != 0:
            for j, y in enumerate(b):
                r[k + j] -= f * y
    return _trim(q), _trim(r[: len(b) - 1])


def pmonic(a: Poly) -> Poly:
    if not a:
        return a
    lead = a[-1]
    if lead == 1:
        return a
    return tuple(x / lead for x in a)


def pgcd(a: Poly, b: Poly) -> Poly:
    while b:
        a, b = b, pdivmod(a, b)[1]
    return pmonic(a)


def peval(a: Poly, x):
    acc = 0
    for c in reversed(a):
        acc = acc * x + c
    return acc


def pstr(a: Poly, var: str = "gamma") -> str:
    if not a:
        return "0"
    parts = []
    for k in range(len(a) - 1, -1, -1):
        c = a[k]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = -c if c < 0 else c
        if k == 0:
            body = _qstr(mag)
        else:
            pw = var if k == 1 else f"{var}^{k}"
            body = pw if mag == 1 else f"{_qstr(mag)}*{pw}"
        parts.append((sign, body))
    s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        s += f" {sign} {body}"
    return s


def _qstr(q) -> str:
    q = mpq(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


Number = Union[int, Fraction, "mpq"]


class RatFunc:
    """An element of Q(gamma), always stored in lowest terms."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: Poly = _ONE, _reduced: bool = False):
        if not den:
            raise ZeroDivisionError("zero denominator in Q(gamma)")
        if not _reduced and (len(den) > 1 or den[0] != 1):
            if not num:
                den = _ONE
            else:
                g = pgcd(num, den)
                if len(g) > 1:
                    num = pdivmod(num, g)[0]
                    den = pdivmod(den, g)[0]
                lead = den[-1]
                if lead != 1:
                    num = tuple(x / lead for x in num)
                    den = tuple(x / lead for x in den)
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def const(cls, c: Number) -> "RatFunc":
        c = mpq(c)
        return cls((c,) if c != 0 else _ZERO, _ONE, True)

    @classmethod
    def gamma(cls) -> "RatFunc":
        return cls((mpq(0), mpq(1)), _ONE, True)

    # -- predicates ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def is_one(self) -> bool:
        return self.den == _ONE and self.num == _ONE

    def is_const(self) -> bool:
        return len(self.num) <= 1 and len(self.den) == 1

    def const_value(self) -> mpq:
        if not self.is_const():
            raise ValueError(f"{self} depends on gamma")
        return self.num[0] / self.den[0] if self.num else mpq(0)

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other: "RatFunc") -> "RatFunc":
        if not isinstance(other, RatFunc):
            other = RatFunc.const(other)
        if self.den == other.den:
            if self.den == _ONE:
                return RatFunc(padd(self.num, other.num), _ONE, True)
            return RatFunc(padd(self.num, other.num), self.den)
        num = padd(pmul(self.num, other.den), pmul(other.num, self.den))
        return RatFunc(num, pmul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self) -> "RatFunc":
        return RatFunc(pneg(self.num), self.den, True)

    def __sub__(self, other: "RatFunc") -> "RatFunc":
        if not isinstance(other, RatFunc):
            other = RatFunc.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "RatFunc":
        return RatFunc.const(other) - self

    def __mul__(self, other: "RatFunc") -> "RatFunc":
        if not isinstance(other, RatFunc):
            other = RatFunc.const(other)
        if self.den == _ONE and other.den == _ONE:
            return RatFunc(pmul(self.num, other.num), _ONE, True)
        return RatFunc(pmul(self.num, other.num), pmul(self.den, other.den))

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if not self.num:
            raise ZeroDivisionError("inverse of zero in Q(gamma)")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other: "RatFunc") -> "RatFunc":
        if not isinstance(other, RatFunc):
            other = RatFunc.const(other)
        return self * other.inverse()

    def __rtruediv__(self, other) -> "RatFunc":
        return RatFunc.const(other) / self

    def __pow__(self, n: int) -> "RatFunc":
        if n < 0:
            return self.inverse() ** (-n)
        out = RatFunc.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatFunc):
            try:
                other = RatFunc.const(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    # -- evaluation / specialization ----------------------------------------
    def evaluate(self, g) -> mpq:
        """Exact value at a rational gamma; raises on a pole."""
        d = peval(self.den, mpq(g))
        if d == 0:
            raise ZeroDivisionError(f"denominator {pstr(self.den)} vanishes at gamma={g}")
        return peval(self.num, mpq(g)) / d

    def evaluate_float(self, g: float) -> float:
        d = float(peval(self.den, g))
        if d == 0.0:
            raise ZeroDivisionError(f"denominator {pstr(self.den)} vanishes at gamma={g}")
        return float(peval(self.num, g)) / d

    def denominator_factors(self) -> Tuple[Poly, ...]:
        """Nonconstant denominator, for the side-condition ledger."""
        return (self.den,) if len(self.den) > 1 else ()

    # -- printing -----------------------------------------------------------
    def __str__(self) -> str:
        n = pstr(self.num)
        if self.den == _ONE:
            return n
        d = pstr(self.den)
        if len(self.num) > 1 and sum(1 for x in self.num if x != 0) > 1:
            n = f"({n})"
        if len(self.den) > 1 and sum(1 for x in self.den if x != 0) > 1:
            d = f"({d})"
        elif len(self.den) > 1 and self.den[-1] != 1:
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self) -> str:
        return f"RatFunc({self})"


ZERO = RatFunc(_ZERO, _ONE, True)
ONE = RatFunc(_ONE, _ONE, True)
GAMMA = RatFunc.gamma()
