"""Text form of expressions.

Grammar (EBNF)::

    expr     = term , { ("+" | "-") , term } ;
    term     = unary , { ("*" | "/") , unary } ;
    unary    = ("+" | "-") , unary | power ;
    power    = primary , [ "^" , unary ] ;           (* right associative *)
    primary  = number | atom | "gamma" | "(" , expr , ")" ;
    number   = digit , { digit } , [ "." , digit , { digit } ] ;
    atom     = [ "E:" ] , name , [ "_" , index ] ;
    index    = label , { label } ;                    (* e.g. phi1_txi, S_xy, F_SS *)

Names are resolved against a frame's symbol table.  In the Lagrangian frame
``phi1 phi2`` are dependent variables, ``t xi eta`` labels, ``S h psi0 psi1
psi2`` given functions of ``(xi, eta)``, ``F`` a function of ``S`` (``F_S`` is
F'), and ``J`` the protected Jacobian.  Eulerian names are ``rho u v S h psi2
F`` over ``t x y``; the ``E:`` prefix selects an Eulerian atom from any frame
(``E:S_x``).  Constants ``c1 ... c10``, ``ct10``, ``lam``, ``b``, ``u0``,
``v0``, ``k`` are always available.

Exponents must be atom-free and linear in gamma.  :func:`to_text` emits this
grammar, so ``parse(to_text(e))`` reproduces ``e``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .expr import Atom, Expr, ExprError, Exponent, make_atom


class ParseError(ExprError):
    def __init__(self, message: str, pos: int, text: str = ""):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos
        self.text = text


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: str
    labels: Tuple[str, ...] = ()  # labels allowed in the derivative index


LAGRANGIAN_SYMBOLS: Dict[str, Symbol] = {
    s.name: s
    for s in (
        Symbol("phi1", "jet", ("t", "xi", "eta")),
        Symbol("phi2", "jet", ("t", "xi", "eta")),
        Symbol("t", "label"),
        Symbol("xi", "label"),
        Symbol("eta", "label"),
        Symbol("S", "function", ("xi", "eta")),
        Symbol("h", "function", ("xi", "eta")),
        Symbol("psi0", "function", ("xi", "eta")),
        Symbol("psi1", "function", ("xi", "eta")),
        Symbol("psi2", "function", ("xi", "eta")),
        Symbol("F", "function", ("S",)),
        Symbol("J", "protected"),
    )
}

EULERIAN_SYMBOLS: Dict[str, Symbol] = {
    s.name: s
    for s in (
        Symbol("rho", "eulerian", ("t", "x", "y")),
        Symbol("u", "eulerian", ("t", "x", "y")),
        Symbol("v", "eulerian", ("t", "x", "y")),
        Symbol("S", "eulerian", ("t", "x", "y")),
        Symbol("h", "eulerian", ("t", "x", "y")),
        Symbol("psi2", "eulerian", ("t", "x", "y")),
        Symbol("F", "eulerian", ("S",)),
        Symbol("t", "label"),
        Symbol("x", "label"),
        Symbol("y", "label"),
    )
}

_CONSTANT_RE = re.compile(r"^(c\d+|ct\d+|lam|b|u0|v0|k)$")

# names that exist in only one table resolve from anywhere
_UNAMBIGUOUS: Dict[str, Symbol] = {}
for _n, _s in list(LAGRANGIAN_SYMBOLS.items()) + list(EULERIAN_SYMBOLS.items()):
    if _n in LAGRANGIAN_SYMBOLS and _n in EULERIAN_SYMBOLS and LAGRANGIAN_SYMBOLS[_n] != EULERIAN_SYMBOLS[_n]:
        continue
    _UNAMBIGUOUS[_n] = _s

_AMBIGUOUS = {n for n in LAGRANGIAN_SYMBOLS if n in EULERIAN_SYMBOLS and LAGRANGIAN_SYMBOLS[n] != EULERIAN_SYMBOLS[n]}


def _resolve(name: str, qualified: bool, frame: str, pos: int, text: str) -> Symbol:
    if qualified:
        if name in EULERIAN_SYMBOLS:
            return EULERIAN_SYMBOLS[name]
        raise ParseError(f"unknown Eulerian name {name!r}", pos, text)
    table = EULERIAN_SYMBOLS if frame == "eulerian" else LAGRANGIAN_SYMBOLS
    if name in table:
        return table[name]
    if name in _UNAMBIGUOUS:
        return _UNAMBIGUOUS[name]
    if _CONSTANT_RE.match(name):
        return Symbol(name, "constant")
    raise ParseError(f"unknown atom name {name!r}", pos, text)


def _split_index(idx: str, allowed: Sequence[str]) -> Optional[List[str]]:
    out: List[str] = []
    i = 0
    labels = sorted(allowed, key=len, reverse=True)
    while i < len(idx):
        for lab in labels:
            if idx.startswith(lab, i):
                out.append(lab)
                i += len(lab)
                break
        else:
            return None
    return out


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>(?:E:)?[A-Za-z][A-Za-z0-9]*(?:_[A-Za-z]+)?)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    pos = 0
    toks = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", pos, text)
        start = m.start(m.lastgroup)
        toks.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, frame: str):
        self.text = text
        self.frame = frame
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, op: str):
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            where = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {op!r}, found {where}", pos, self.text)

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos, self.text)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                e = e + rhs if val == "+" else e - rhs
            else:
                return e

    def term(self) -> Expr:
        e = self.unary()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.unary()
                if val == "*":
                    e = e * rhs
                else:
                    try:
                        e = e / rhs
                    except (ExprError, ZeroDivisionError) as exc:
                        raise ParseError(str(exc), pos, self.text) from None
            else:
                return e

    def unary(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            e = self.unary()
            return -e if val == "-" else e
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.take()
            ex = self.unary()
            try:
                return base ** ex
            except (ExprError, ZeroDivisionError) as exc:
                raise ParseError(str(exc), pos, self.text) from None
        return base

    def primary(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return Expr.const(mpq(val) if "." not in val else _decimal(val))
        if kind == "name":
            return self.atom(val, pos)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        where = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"syntax error: unexpected {where}", pos, self.text)

    def atom(self, tok: str, pos: int) -> Expr:
        qualified = tok.startswith("E:")
        if qualified:
            tok = tok[2:]
        name, _, idx = tok.partition("_")
        if name == "gamma" and not qualified:
            if idx:
                raise ParseError("gamma takes no index", pos, self.text)
            return Expr.gamma()
        sym = _resolve(name, qualified, self.frame, pos, self.text)
        labels: List[str] = []
        if idx:
            split = _split_index(idx, sym.labels)
            if not sym.labels or split is None:
                raise ParseError(f"malformed multi-index {idx!r} for {name}", pos, self.text)
            labels = split
        return Expr.atom(make_atom(sym.kind, sym.name, labels))


def _decimal(s: str) -> mpq:
    whole, frac = s.split(".")
    return mpq(int(whole + frac), 10 ** len(frac))


def parse(text: str, frame: str = "lagrangian") -> Expr:
    """Parse ``text`` in the given frame (``"lagrangian"`` or ``"eulerian"``)."""
    if frame not in ("lagrangian", "eulerian"):
        raise ValueError(f"unknown frame {frame!r}")
    return _Parser(text, frame).parse()


# ---------------------------------------------------------------------------
# printing


def atom_text(a: Atom, frame: str = "lagrangian") -> str:
    base = a.name
    if a.kind == "eulerian" and a.name in _AMBIGUOUS and frame != "eulerian":
        base = "E:" + base
    if a.index:
        base += "_" + "".join(a.index)
    return base


def _exp_text(e: Exponent) -> str:
    if e.is_integer():
        n = int(e.a)
        return str(n) if n > 0 else f"({n})"
    return f"({e})"


def _qtext(q) -> str:
    q = mpq(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _term_key(m):
    return tuple((a.kind, a.name, a.index, float(e.a), float(e.b)) for a, e in m)


def to_text(e: Expr, frame: str = "lagrangian") -> str:
    if not e.terms:
        return "0"
    pieces: List[Tuple[str, str]] = []
    for m in sorted(e.terms, key=_term_key):
        c = e.terms[m]
        factors = "*".join(atom_text(a, frame) + ("" if e_ == Exponent(1, 0) else "^" + _exp_text(e_))
                           for a, e_ in m)
        if c.is_const():
            q = c.const_value()
            sign = "-" if q < 0 else "+"
            mag = -q if q < 0 else q
            if not factors:
                body = _qtext(mag)
            elif mag == 1:
                body = factors
            else:
                body = f"{_qtext(mag)}*{factors}"
        else:
            sign = "+"
            body = f"({c})" + (f"*{factors}" if factors else "")
        pieces.append((sign, body))
    out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


_PRETTY_NAMES = {
    "phi1": "φ₁", "phi2": "φ₂", "xi": "ξ", "eta": "η", "rho": "ρ", "psi0": "ψ₀",
    "psi1": "ψ₁", "psi2": "ψ₂", "gamma": "γ",
}
_PRETTY_ORDER = {"rho": 0, "u": 1, "v": 2, "t": 3, "x": 4, "y": 5}
_SUPERSCRIPT = str.maketrans("0123456789-", "⁰¹²³⁴⁵⁶⁷⁸⁹⁻")


def _pretty_atom(a: Atom) -> str:
    name = _PRETTY_NAMES.get(a.name, a.name)
    if a.name == "F" and a.index:
        return "F" + "′" * len(a.index)
    if a.index:
        name += "".join(_PRETTY_NAMES.get(i, i) for i in a.index) if a.kind == "jet" else \
            "_" + "".join(_PRETTY_NAMES.get(i, i) for i in a.index)
    return name


def _pretty_exp(e: Exponent) -> str:
    if e.is_integer():
        n = int(e.a)
        return "" if n == 1 else str(n).translate(_SUPERSCRIPT)
    if e.a == 0 and e.b == 1:
        return "^γ"
    return "^(" + str(e).replace("gamma", "γ") + ")"


def pretty(e: Expr) -> str:
    """Unicode rendering for reports; not parseable."""
    if not e.terms:
        return "0"

    def fkey(p):
        a = p[0]
        return (_PRETTY_ORDER.get(a.name, 10), a.kind, a.name, a.index)

    rows = []
    for m, c in e.terms.items():
        fac = sorted(m, key=fkey)
        rows.append(([fkey(p) for p in fac], fac, c))
    rows.sort(key=lambda r: r[0])
    out = ""
    for i, (_, fac, c) in enumerate(rows):
        body = "".join(_pretty_atom(a) + _pretty_exp(x) for a, x in fac)
        if c.is_const():
            q = c.const_value()
            neg = q < 0
            mag = -q if neg else q
            coef = "" if (mag == 1 and body) else _qtext(mag)
        else:
            neg = False
            coef = "(" + str(c).replace("gamma", "γ") + ")"
        text = coef + body
        if i == 0:
            out = ("-" if neg else "") + text
        else:
            out += (" - " if neg else " + ") + text
    return out
