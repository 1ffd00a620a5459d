"""Exact symbolic expressions over jet variables.

An :class:`Expr` is a finite sum of terms ``coeff * prod(base ** exponent)``
where ``coeff`` lies in Q(gamma) (:class:`~noetherlab.ratfunc.RatFunc`), each
base is an :class:`Atom`, and each exponent is ``a + b*gamma`` with rational
``a`` and ``b``.  Negative exponents are allowed, so division by a single
term never leaves the representation; division by a genuine sum is rejected.

The Jacobian ``J = phi1_xi*phi2_eta - phi1_eta*phi2_xi`` is a *protected*
base: it stays atomic through every operation and is only unfolded by
:func:`canonicalize`, which trades ``phi1_xi`` for ``J``.  After that change
of variables the remaining bases are algebraically independent, so the
collected representation is unique and ``is_zero`` is decidable.

Atom ordering (used for the printed and stored order of factors) is
lexicographic on ``(kind, name, index)``; index labels are ordered
``t < xi < eta < x < y < S``.
"""

from __future__ import annotations

import math
from typing import Callable, Dict, Iterable, Mapping, NamedTuple, Optional, Tuple

from gmpy2 import mpq

from .ratfunc import GAMMA, ONE, ZERO, RatFunc, peval, pstr

LABEL_ORDER = {"t": 0, "xi": 1, "eta": 2, "x": 3, "y": 4, "S": 5}

KINDS = ("constant", "eulerian", "function", "jet", "label", "protected")


class ExprError(ValueError):
    """Raised for operations that leave the supported expression class."""


class LedgerViolation(ZeroDivisionError):
    """A value excluded by the side-condition ledger was hit."""


class Atom(NamedTuple):
    kind: str
    name: str
    index: Tuple[str, ...] = ()

    @property
    def order(self) -> int:
        return len(self.index)

    def differentiated(self, *labels: str) -> "Atom":
        idx = tuple(sorted(self.index + labels, key=LABEL_ORDER.__getitem__))
        return Atom(self.kind, self.name, idx)


def make_atom(kind: str, name: str, index: Iterable[str] = ()) -> Atom:
    if kind not in KINDS:
        raise ExprError(f"unknown atom kind {kind!r}")
    idx = tuple(sorted(index, key=LABEL_ORDER.__getitem__))
    return Atom(kind, name, idx)


class Exponent(NamedTuple):
    """The exponent ``a + b*gamma``."""

    a: mpq
    b: mpq

    def __add__(self, other: "Exponent") -> "Exponent":  # type: ignore[override]
        return Exponent(self.a + other.a, self.b + other.b)

    def __neg__(self) -> "Exponent":
        return Exponent(-self.a, -self.b)

    def __sub__(self, other: "Exponent") -> "Exponent":
        return Exponent(self.a - other.a, self.b - other.b)

    def scale(self, k) -> "Exponent":
        return Exponent(self.a * k, self.b * k)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_integer(self) -> bool:
        return self.b == 0 and self.a.denominator == 1

    def as_ratfunc(self) -> RatFunc:
        return RatFunc((self.a, self.b)) if self.b != 0 else RatFunc.const(self.a)

    def value(self, gamma: float) -> float:
        return float(self.a) + float(self.b) * gamma

    def at(self, gamma) -> "Exponent":
        return Exponent(self.a + self.b * mpq(gamma), mpq(0))

    def __str__(self) -> str:
        return pstr((self.a, self.b) if self.b != 0 else ((self.a,) if self.a != 0 else ()))


def exponent(a=0, b=0) -> Exponent:
    return Exponent(mpq(a), mpq(b))


E_ONE = exponent(1)
E_MINUS_ONE = exponent(-1)

Monomial = Tuple[Tuple[Atom, Exponent], ...]


def mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for a, e in m2:
        e0 = d.get(a)
        if e0 is None:
            d[a] = e
        else:
            s = Exponent(e0.a + e.a, e0.b + e.b)
            if s.a == 0 and s.b == 0:
                del d[a]
            else:
                d[a] = s
    return tuple(sorted(d.items()))


def mono_pow(m: Monomial, e: Exponent) -> Monomial:
    out = []
    for a, ea in m:
        # (a^x)^y with x = p + q*gamma stays linear in gamma only if x or y is constant
        if ea.b != 0 and e.b != 0:
            raise ExprError("exponent would be nonlinear in gamma")
        na = ea.a * e.a
        nb = ea.a * e.b + ea.b * e.a
        out.append((a, Exponent(na, nb)))
    return tuple(out)


# A side condition is a nonvanishing requirement: ("gamma", poly) or ("atom", atom).
Condition = Tuple[str, object]
_NO_CONDITIONS: frozenset = frozenset()


def condition_text(c: Condition) -> str:
    tag, val = c
    if tag == "gamma":
        return f"{pstr(val)} != 0"
    atom = val
    return f"{atom.name}{'_' + ''.join(atom.index) if atom.index else ''} != 0"


class Expr:
    """Immutable sum of terms; see the module docstring."""

    __slots__ = ("terms", "conditions", "_hash")

    def __init__(self, terms: Optional[Mapping[Monomial, RatFunc]] = None,
                 conditions: frozenset = _NO_CONDITIONS):
        self.terms: Dict[Monomial, RatFunc] = dict(terms) if terms else {}
        self.conditions = conditions
        self._hash = None

    @classmethod
    def _raw(cls, terms: Dict[Monomial, RatFunc], conditions: frozenset = _NO_CONDITIONS) -> "Expr":
        obj = cls.__new__(cls)
        obj.terms = terms
        obj.conditions = conditions
        obj._hash = None
        return obj

    # -- constructors -------------------------------------------------------
    @classmethod
    def const(cls, c) -> "Expr":
        rf = c if isinstance(c, RatFunc) else RatFunc.const(c)
        if rf.is_zero():
            return cls._raw({})
        conds = frozenset(("gamma", d) for d in rf.denominator_factors())
        return cls._raw({(): rf}, conds)

    @classmethod
    def atom(cls, a: Atom, e: Exponent = E_ONE) -> "Expr":
        return cls._raw({((a, e),): ONE})

    @classmethod
    def gamma(cls) -> "Expr":
        return cls._raw({(): GAMMA})

    @classmethod
    def monomial(cls, m: Monomial, c: RatFunc = ONE) -> "Expr":
        return cls._raw({m: c} if not c.is_zero() else {})

    # -- structure ----------------------------------------------------------
    def is_zero_repr(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def atoms(self) -> set:
        out = set()
        for m in self.terms:
            for a, _ in m:
                out.add(a)
        return out

    def is_constant(self) -> bool:
        """True when the expression contains no atoms (a pure element of Q(gamma))."""
        return all(not m for m in self.terms)

    def constant_value(self) -> RatFunc:
        if not self.is_constant():
            raise ExprError("expression is not atom-free")
        return self.terms.get((), ZERO)

    def single_term(self) -> Optional[Tuple[Monomial, RatFunc]]:
        if len(self.terms) == 1:
            return next(iter(self.terms.items()))
        return None

    def with_conditions(self, conds: frozenset) -> "Expr":
        if not conds or conds <= self.conditions:
            return self
        return Expr._raw(self.terms, self.conditions | conds)

    def _conds(self, other: "Expr") -> frozenset:
        a, b = self.conditions, other.conditions
        if not b or a is b:
            return a
        if not a:
            return b
        return a | b

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other) -> "Expr":
        other = _coerce(other)
        if not other.terms:
            return self.with_conditions(other.conditions)
        if not self.terms:
            return other.with_conditions(self.conditions)
        if len(other.terms) > len(self.terms):
            big, small = other.terms, self.terms
        else:
            big, small = self.terms, other.terms
        out = dict(big)
        for m, c in small.items():
            c0 = out.get(m)
            if c0 is None:
                out[m] = c
            else:
                s = c0 + c
                if s.is_zero():
                    del out[m]
                else:
                    out[m] = s
        return Expr._raw(out, self._conds(other))

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr._raw({m: -c for m, c in self.terms.items()}, self.conditions)

    def __sub__(self, other) -> "Expr":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "Expr":
        return _coerce(other) - self

    def __mul__(self, other) -> "Expr":
        other = _coerce(other)
        conds = self._conds(other)
        if not self.terms or not other.terms:
            return Expr._raw({}, conds)
        out: Dict[Monomial, RatFunc] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                c = c1 * c2
                c0 = out.get(m)
                if c0 is None:
                    out[m] = c
                else:
                    s = c0 + c
                    if s.is_zero():
                        del out[m]
                    else:
                        out[m] = s
        return Expr._raw(out, conds)

    __rmul__ = __mul__

    def scale(self, c: RatFunc) -> "Expr":
        if c.is_zero():
            return Expr._raw({}, self.conditions)
        if c.is_one():
            return self
        return Expr._raw({m: v * c for m, v in self.terms.items()}, self.conditions)

    def inverse(self) -> "Expr":
        """Reciprocal of a single term; records the nonvanishing conditions."""
        st = self.single_term()
        if st is None:
            if not self.terms:
                raise ZeroDivisionError("division by zero expression")
            raise ExprError(f"division by a sum is not supported: {self}")
        m, c = st
        inv_m = tuple((a, -e) for a, e in m)
        conds = set(self.conditions)
        if len(c.num) > 1:
            conds.add(("gamma", c.num))
        for d in c.denominator_factors():
            conds.add(("gamma", d))
        for a, _ in m:
            conds.add(("atom", a))
        return Expr._raw({inv_m: c.inverse()}, frozenset(conds))

    def __truediv__(self, other) -> "Expr":
        return self * _coerce(other).inverse()

    def __rtruediv__(self, other) -> "Expr":
        return _coerce(other) * self.inverse()

    def __pow__(self, e) -> "Expr":
        if isinstance(e, Expr):
            e = expr_to_exponent(e)
        if isinstance(e, int):
            e = exponent(e)
        elif not isinstance(e, Exponent):
            e = exponent(mpq(e))
        if e.is_integer():
            n = int(e.a)
            if n < 0:
                return self.inverse() ** (-n)
            out = Expr.const(1).with_conditions(self.conditions)
            base = self
            while n:
                if n & 1:
                    out = out * base
                base = base * base
                n >>= 1
            return out
        st = self.single_term()
        if st is None:
            raise ExprError(f"non-integer power of a sum: ({self})^({e})")
        m, c = st
        if not c.is_one():
            raise ExprError(f"non-integer power of a numeric coefficient: ({self})^({e})")
        return Expr._raw({mono_pow(m, e): ONE}, self.conditions)

    # -- equality / hashing (structural; see canonical_eq for math equality) --
    def __eq__(self, other) -> bool:
        if not isinstance(other, Expr):
            try:
                other = _coerce(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __str__(self) -> str:
        from .grammar import to_text

        return to_text(self)

    def __repr__(self) -> str:
        return f"Expr({self})"

    # -- convenience --------------------------------------------------------
    def split(self, selected: Callable[[Atom], bool]) -> Dict[Monomial, "Expr"]:
        """Group terms by their factors on selected atoms; values are the cofactors."""
        out: Dict[Monomial, Dict[Monomial, RatFunc]] = {}
        for m, c in self.terms.items():
            key = tuple(p for p in m if selected(p[0]))
            rest = tuple(p for p in m if not selected(p[0]))
            bucket = out.setdefault(key, {})
            bucket[rest] = bucket[rest] + c if rest in bucket else c
        return {k: Expr._raw({m: c for m, c in v.items() if not c.is_zero()}, self.conditions)
                for k, v in out.items()}


def _coerce(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, Atom):
        return Expr.atom(x)
    if isinstance(x, RatFunc):
        return Expr.const(x)
    if isinstance(x, (int,)) or type(x).__name__ in ("mpq", "mpz", "Fraction"):
        return Expr.const(mpq(x))
    raise TypeError(f"cannot use {type(x).__name__} as an expression")


def expr_to_exponent(e: Expr) -> Exponent:
    if not e.is_constant():
        raise ExprError(f"exponent must be atom-free, got {e}")
    rf = e.constant_value()
    if len(rf.den) != 1 or len(rf.num) > 2:
        raise ExprError(f"exponent must be linear in gamma, got {rf}")
    a = rf.num[0] if rf.num else mpq(0)
    b = rf.num[1] if len(rf.num) > 1 else mpq(0)
    return Exponent(mpq(a), mpq(b))


ZERO_EXPR = Expr()


def from_terms(items: Iterable[Tuple[Monomial, RatFunc]], conditions: frozenset = _NO_CONDITIONS) -> Expr:
    out: Dict[Monomial, RatFunc] = {}
    for m, c in items:
        c0 = out.get(m)
        out[m] = c if c0 is None else c0 + c
    return Expr._raw({m: c for m, c in out.items() if not c.is_zero()}, conditions)


# ---------------------------------------------------------------------------
# Derivations and substitution


def apply_derivation(e: Expr, action: Callable[[Atom], Optional[Expr]]) -> Expr:
    """Apply the derivation determined by its values on atoms.

    ``action(atom)`` returns the image of the atom or ``None`` for zero.
    Leibniz and power rules are applied factor by factor; coefficients
    (elements of Q(gamma)) are constants.
    """
    cache: Dict[Atom, Optional[Expr]] = {}
    acc: Dict[Monomial, RatFunc] = {}
    conds = set(e.conditions)
    for m, c in e.terms.items():
        for i, (a, ea) in enumerate(m):
            if a in cache:
                img = cache[a]
            else:
                img = action(a)
                if img is not None and not img.terms:
                    img = None
                cache[a] = img
                if img is not None and img.conditions:
                    conds |= img.conditions
            if img is None:
                continue
            # d(a^e) = e * a^(e-1) * d(a)
            k = c * ea.as_ratfunc()
            if k.is_zero():
                continue
            reduced = ea - E_ONE
            if reduced.is_zero():
                rest = m[:i] + m[i + 1:]
            else:
                rest = m[:i] + ((a, reduced),) + m[i + 1:]
            for mi, ci in img.terms.items():
                mm = mono_mul(rest, mi)
                v = k * ci
                v0 = acc.get(mm)
                acc[mm] = v if v0 is None else v0 + v
    return Expr._raw({m: c for m, c in acc.items() if not c.is_zero()}, frozenset(conds))


def partial(e: Expr, target: Atom) -> Expr:
    """Partial derivative treating atoms as independent (protected bases unfolded by chain rule)."""

    def action(a: Atom) -> Optional[Expr]:
        if a == target:
            return Expr.const(1)
        if a.kind == "protected" and a != target:
            return apply_derivation(protected_definition(a), lambda b: Expr.const(1) if b == target else None)
        return None

    return apply_derivation(e, action)


class SubstitutionError(ExprError):
    pass


def _check_acyclic(rules: Mapping[Atom, Expr]) -> None:
    graph = {lhs: {a for a in rhs.atoms() if a in rules} for lhs, rhs in rules.items()}
    state: Dict[Atom, int] = {}

    def visit(n: Atom) -> None:
        state[n] = 1
        for nxt in graph[n]:
            s = state.get(nxt, 0)
            if s == 1:
                raise SubstitutionError(f"cyclic rule set through {nxt.name}")
            if s == 0:
                visit(nxt)
        state[n] = 2

    for n in graph:
        if state.get(n, 0) == 0:
            visit(n)


def substitute(e: Expr, rules: Mapping[Atom, Expr], check_cycles: bool = True) -> Expr:
    """Simultaneous substitution of atoms (including protected bases) by expressions."""
    if not rules:
        return e
    if check_cycles:
        _check_acyclic(rules)
    conds = set(e.conditions)
    for r in rules.values():
        conds |= r.conditions
    power_cache: Dict[Tuple[Atom, Exponent], Expr] = {}
    acc: Dict[Monomial, RatFunc] = {}
    pending = []
    for m, c in e.terms.items():
        keep = []
        repl = []
        for a, ea in m:
            if a in rules:
                repl.append((a, ea))
            else:
                keep.append((a, ea))
        if not repl:
            v0 = acc.get(m)
            acc[m] = c if v0 is None else v0 + c
            continue
        prod = Expr._raw({tuple(keep): c})
        for a, ea in repl:
            key = (a, ea)
            p = power_cache.get(key)
            if p is None:
                rhs = rules[a]
                try:
                    p = rhs ** ea
                except ExprError as exc:
                    raise SubstitutionError(f"cannot substitute {a.name}^({ea}): {exc}") from exc
                power_cache[key] = p
                conds |= p.conditions
            prod = prod * p
        pending.append(prod)
    base = Expr._raw({m: c for m, c in acc.items() if not c.is_zero()})
    for p in pending:
        base = base + p
    return Expr._raw(base.terms, frozenset(conds))


# ---------------------------------------------------------------------------
# Protected base J and canonical form

PHI1_XI = Atom("jet", "phi1", ("xi",))
PHI1_ETA = Atom("jet", "phi1", ("eta",))
PHI2_XI = Atom("jet", "phi2", ("xi",))
PHI2_ETA = Atom("jet", "phi2", ("eta",))
J_ATOM = Atom("protected", "J", ())

_J_DEF = Expr.atom(PHI1_XI) * Expr.atom(PHI2_ETA) - Expr.atom(PHI1_ETA) * Expr.atom(PHI2_XI)
# phi1_xi = (J + phi1_eta*phi2_xi) / phi2_eta
_PHI1_XI_SOLVED = (Expr.atom(J_ATOM) + Expr.atom(PHI1_ETA) * Expr.atom(PHI2_XI)) * Expr.atom(PHI2_ETA, E_MINUS_ONE)

_PROTECTED = {J_ATOM: (_J_DEF, PHI1_XI, _PHI1_XI_SOLVED)}


def protected_definition(a: Atom) -> Expr:
    try:
        return _PROTECTED[a][0]
    except KeyError:
        raise ExprError(f"unknown protected base {a.name}") from None


def expand_protected(e: Expr) -> Expr:
    """Unfold nonnegative integer powers of protected bases into their definitions."""
    rules = {}
    for a in e.atoms():
        if a.kind == "protected":
            rules[a] = protected_definition(a)
    if not rules:
        return e
    # only integer powers can be unfolded
    for m in e.terms:
        for a, ea in m:
            if a in rules and not (ea.is_integer() and ea.a >= 0):
                raise ExprError(f"cannot unfold {a.name}^({ea})")
    return substitute(e, rules)


def canonicalize(e: Expr) -> Expr:
    """Unique representative: eliminate ``phi1_xi`` in favour of the protected base ``J``.

    Requires ``phi1_xi`` to occur with nonnegative integer exponents.
    """
    out = e
    for patom, (_, elim, solved) in _PROTECTED.items():
        present = False
        for m in out.terms:
            for a, ea in m:
                if a == elim:
                    if not (ea.is_integer() and ea.a >= 0):
                        raise ExprError(f"{elim.name}_{''.join(elim.index)} occurs with exponent {ea}")
                    present = True
        if present:
            out = substitute(out, {elim: solved}, check_cycles=False)
    return Expr._raw(out.terms, e.conditions | out.conditions)


def is_zero(e: Expr) -> bool:
    if not e.terms:
        return True
    atoms = e.atoms()
    for patom, (_, elim, _) in _PROTECTED.items():
        if patom in atoms and elim in atoms:
            # phi1_xi is a unit: clearing its negative powers does not change zero-ness
            low = min(ea.a for m in e.terms for a, ea in m if a == elim)
            if low < 0:
                e = e * Expr.atom(elim, exponent(-math.floor(low)))
            return not canonicalize(e).terms
    return False


def canonical_eq(a, b) -> bool:
    return is_zero(_coerce(a) - _coerce(b))


# ---------------------------------------------------------------------------
# Specialization and numeric evaluation


def specialize_gamma(e: Expr, g) -> Expr:
    """Substitute a rational value for gamma in coefficients and exponents."""
    g = mpq(g)
    conds = set()
    for tag, val in e.conditions:
        if tag == "gamma":
            if peval(val, g) == 0:
                raise LedgerViolation(f"gamma = {g} violates side condition {pstr(val)} != 0")
        else:
            conds.add((tag, val))
    acc: Dict[Monomial, RatFunc] = {}
    for m, c in e.terms.items():
        nm = tuple(sorted((a, ea.at(g)) for a, ea in m if not ea.at(g).is_zero()))
        try:
            v = RatFunc.const(c.evaluate(g))
        except ZeroDivisionError as exc:
            raise LedgerViolation(str(exc)) from None
        v0 = acc.get(nm)
        acc[nm] = v if v0 is None else v0 + v
    return Expr._raw({m: c for m, c in acc.items() if not c.is_zero()}, frozenset(conds))


def check_gamma(e: Expr, gamma: float) -> None:
    for tag, val in e.conditions:
        if tag == "gamma" and abs(float(peval(val, gamma))) < 1e-14:
            raise LedgerViolation(f"gamma = {gamma} violates side condition {pstr(val)} != 0")


def atom_values(e: Expr, assignment: Mapping[Atom, float]) -> Dict[Atom, float]:
    vals: Dict[Atom, float] = {}
    for a in e.atoms():
        if a in assignment:
            vals[a] = float(assignment[a])
        elif a.kind == "protected":
            d = protected_definition(a)
            vals[a] = eval_numeric(d, assignment, 0.0)
        else:
            raise KeyError(f"no value assigned to atom {a.name}{'_' + ''.join(a.index) if a.index else ''}")
    return vals


def eval_terms(e: Expr, assignment: Mapping[Atom, float], gamma: float):
    """Yield the float value of each term."""
    check_gamma(e, gamma)
    vals = atom_values(e, assignment)
    for m, c in e.terms.items():
        v = c.evaluate_float(gamma)
        for a, ea in m:
            x = vals[a]
            if ea.is_integer():
                n = int(ea.a)
                if x == 0.0 and n < 0:
                    raise ZeroDivisionError(f"atom {a.name} evaluates to zero under a negative power")
                v *= x ** n
            else:
                if x <= 0.0:
                    raise ValueError(f"non-integer power of nonpositive value for {a.name}")
                v *= x ** ea.value(gamma)
        yield v


def eval_numeric(e: Expr, assignment: Mapping[Atom, float], gamma: float) -> float:
    return math.fsum(eval_terms(e, assignment, gamma))
