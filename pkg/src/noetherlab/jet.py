"""Jet-space calculus: total and variational derivatives, prolongation, Noether operators."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from gmpy2 import mpq

from .expr import (
    Atom,
    Expr,
    ExprError,
    apply_derivation,
    make_atom,
    partial,
    protected_definition,
    substitute,
)
from .grammar import parse
from .ratfunc import RatFunc


class FrameError(ExprError):
    pass


@dataclass(frozen=True)
class JetFrame:
    """Independent labels, dependent symbols and declared dependencies of one frame.

    ``deps`` maps ``(kind, name)`` of every differentiable symbol to the labels
    it depends on; ``composite`` maps a function of another symbol (``F`` of
    ``S``) to that symbol.  Dependent symbols are the ones a generator moves.
    """

    name: str
    labels: Tuple[str, ...]
    dependents: Tuple[Tuple[str, str], ...]
    deps: Mapping[Tuple[str, str], Tuple[str, ...]]
    composite: Mapping[Tuple[str, str], Tuple[str, str]] = field(default_factory=dict)
    allowed_kinds: Tuple[str, ...] = ("constant", "function", "jet", "label", "protected")

    def dependent_atom(self, dep: Tuple[str, str], index: Iterable[str] = ()) -> Atom:
        return make_atom(dep[0], dep[1], index)

    def is_dependent(self, a: Atom) -> bool:
        return (a.kind, a.name) in self.dependents

    def check(self, a: Atom) -> None:
        if a.kind not in self.allowed_kinds:
            raise FrameError(f"atom {a.name} ({a.kind}) does not belong to the {self.name} frame")
        if a.kind == "label" and a.name not in self.labels:
            raise FrameError(f"label {a.name} does not belong to the {self.name} frame")

    def parse(self, text: str) -> Expr:
        return self.restrict(parse(text, "eulerian" if self.name == "eulerian" else "lagrangian"))

    def restrict(self, e: Expr) -> Expr:
        """Zero every derivative taken along a label its symbol does not depend on."""
        rules = {}
        for a in e.atoms():
            if a.index and (a.kind, a.name) in self.deps and (a.kind, a.name) not in self.composite:
                allowed = self.deps[(a.kind, a.name)]
                if any(lab not in allowed for lab in a.index):
                    rules[a] = Expr()
        return substitute(e, rules, check_cycles=False) if rules else e


_FUNCS = ("S", "h", "psi0", "psi1", "psi2")


def lagrangian_frame(entropy: str = "general", entropy_dependent: bool = False) -> JetFrame:
    """Frame on (t, xi, eta) with dependents phi1, phi2.

    ``entropy="isentropic"`` makes S a constant; ``entropy_dependent`` adds S to the
    dependents, as needed for equivalence generators.
    """
    deps = {("jet", "phi1"): ("t", "xi", "eta"), ("jet", "phi2"): ("t", "xi", "eta")}
    for f in _FUNCS:
        deps[("function", f)] = ("xi", "eta")
    if entropy == "isentropic":
        deps[("function", "S")] = ()
    elif entropy != "general":
        raise FrameError(f"unknown entropy mode {entropy!r}")
    dependents = (("jet", "phi1"), ("jet", "phi2"))
    if entropy_dependent:
        dependents += (("function", "S"),)
    return JetFrame(
        name="lagrangian",
        labels=("t", "xi", "eta"),
        dependents=dependents,
        deps=deps,
        composite={("function", "F"): ("function", "S")},
    )


def eulerian_frame(entropy: str = "general") -> JetFrame:
    deps = {("eulerian", n): ("t", "x", "y") for n in ("rho", "u", "v", "S", "h", "psi2")}
    dependents = (("eulerian", "rho"), ("eulerian", "u"), ("eulerian", "v"), ("eulerian", "S"))
    if entropy == "isentropic":
        deps[("eulerian", "S")] = ()
        dependents = dependents[:3]
    elif entropy != "general":
        raise FrameError(f"unknown entropy mode {entropy!r}")
    return JetFrame(
        name="eulerian",
        labels=("t", "x", "y"),
        dependents=dependents,
        deps=deps,
        composite={("eulerian", "F"): ("eulerian", "S")},
        allowed_kinds=("constant", "eulerian", "label"),
    )


LAGRANGIAN = lagrangian_frame()
ISENTROPIC = lagrangian_frame("isentropic")
EULERIAN = eulerian_frame()

_ONE = Expr.const(1)


def _composite_base(frame: JetFrame, a: Atom) -> Optional[Atom]:
    base = frame.composite.get((a.kind, a.name))
    if base is None:
        return None
    return make_atom(base[0], base[1])


def total_derivative(e: Expr, label: str, frame: JetFrame = LAGRANGIAN) -> Expr:
    """D_label e: chain rule through every atom's declared dependencies."""
    if label not in frame.labels:
        raise FrameError(f"label {label} is not in the {frame.name} frame")
    return apply_derivation(e, lambda a: _d_atom(a, label, frame, True))


def explicit_derivative(e: Expr, label: str, frame: JetFrame = LAGRANGIAN) -> Expr:
    """Partial in a label with every jet of a dependent variable held fixed."""
    if label not in frame.labels:
        raise FrameError(f"label {label} is not in the {frame.name} frame")
    return apply_derivation(e, lambda a: _d_atom(a, label, frame, False))


def _d_atom(a: Atom, label: str, frame: JetFrame, through_jets: bool) -> Optional[Expr]:
    frame.check(a)
    if a.kind == "label":
        return _ONE if a.name == label else None
    if a.kind == "constant":
        return None
    if a.kind == "protected":
        return apply_derivation(protected_definition(a), lambda b: _d_atom(b, label, frame, through_jets))
    if not through_jets and frame.is_dependent(a):
        return None
    base = _composite_base(frame, a)
    if base is not None:
        inner = _d_atom(base, label, frame, through_jets)
        if inner is None:
            return None
        return Expr.atom(a.differentiated(base.name)) * inner
    labels = frame.deps.get((a.kind, a.name))
    if labels is None:
        raise FrameError(f"no dependency declaration for {a.name} in the {frame.name} frame")
    if label not in labels:
        return None
    return Expr.atom(a.differentiated(label))


def total_derivative_multi(e: Expr, labels: Sequence[str], frame: JetFrame = LAGRANGIAN) -> Expr:
    for lab in labels:
        e = total_derivative(e, lab, frame)
    return e


def divergence(components: Sequence[Expr], frame: JetFrame = LAGRANGIAN) -> Expr:
    out = Expr()
    for lab, comp in zip(frame.labels, components):
        out = out + total_derivative(comp, lab, frame)
    return out


def jets_of(e: Expr, dep: Tuple[str, str], frame: JetFrame = LAGRANGIAN) -> List[Atom]:
    """Jet atoms of ``dep`` that ``e`` depends on, including through protected bases."""
    found = set()
    for a in e.atoms():
        if (a.kind, a.name) == dep:
            found.add(a)
        elif a.kind == "protected":
            for b in protected_definition(a).atoms():
                if (b.kind, b.name) == dep:
                    found.add(b)
    return sorted(found)


def variational_derivative(e: Expr, dep, frame: JetFrame = LAGRANGIAN) -> Expr:
    """Euler operator: sum over unordered multi-indices of (-D)_I d/du_I."""
    dep = _dep_key(dep, frame)
    out = Expr()
    for a in jets_of(e, dep, frame):
        term = partial(e, a)
        if not term:
            continue
        for lab in a.index:
            term = total_derivative(term, lab, frame)
        out = out + (term if len(a.index) % 2 == 0 else -term)
    return out


def _dep_key(dep, frame: JetFrame) -> Tuple[str, str]:
    if isinstance(dep, tuple):
        return dep
    for d in frame.dependents:
        if d[1] == dep:
            return d
    raise FrameError(f"{dep} is not a dependent variable of the {frame.name} frame")


def max_jet_order(e: Expr, frame: JetFrame = LAGRANGIAN) -> int:
    order = 0
    for dep in frame.dependents:
        for a in jets_of(e, dep, frame):
            order = max(order, len(a.index))
    return order


# ---------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class Generator:
    """Point vector field; ``coeffs`` maps a label or dependent name to its coefficient."""

    coeffs: Mapping[str, Expr]
    name: str = ""
    frame: JetFrame = LAGRANGIAN

    def __post_init__(self):
        names = set(self.frame.labels) | {d[1] for d in self.frame.dependents}
        for key, val in self.coeffs.items():
            if key not in names:
                raise FrameError(f"generator coefficient on unknown variable {key}")
            for a in val.atoms():
                self.frame.check(a)
                if a.kind == "protected" or (self.frame.is_dependent(a) and a.index):
                    raise ExprError(f"generator coefficient {key} depends on derivatives: {val}")

    @classmethod
    def from_text(cls, coeffs: Mapping[str, str], name: str = "", frame: JetFrame = LAGRANGIAN) -> "Generator":
        return cls({k: frame.parse(v) for k, v in coeffs.items()}, name, frame)

    def coeff(self, var: str) -> Expr:
        return self.coeffs.get(var, Expr())

    def __add__(self, other: "Generator") -> "Generator":
        keys = set(self.coeffs) | set(other.coeffs)
        return Generator({k: self.coeff(k) + other.coeff(k) for k in keys}, f"{self.name}+{other.name}", self.frame)

    def scaled(self, c) -> "Generator":
        c = c if isinstance(c, Expr) else Expr.const(c)
        return Generator({k: v * c for k, v in self.coeffs.items()}, self.name, self.frame)

    def with_frame(self, frame: JetFrame) -> "Generator":
        return Generator(dict(self.coeffs), self.name, frame)

    def is_zero(self) -> bool:
        return all(not v.terms for v in self.coeffs.values())


def characteristic(X: Generator) -> Dict[str, Expr]:
    """W^k = eta^k - xi^i u^k_i for every dependent."""
    frame = X.frame
    out = {}
    for dep in frame.dependents:
        w = X.coeff(dep[1])
        for lab in frame.labels:
            c = X.coeff(lab)
            if c.terms and lab in frame.deps.get(dep, ()):
                w = w - c * Expr.atom(frame.dependent_atom(dep, (lab,)))
        out[dep[1]] = w
    return out


class Prolongation:
    """Lazily computed prolonged coefficients of a generator, keyed by jet atom."""

    def __init__(self, X: Generator, order: Optional[int] = None):
        if order is not None and order > 2:
            raise ValueError("prolongation beyond order 2 is not supported")
        self.X = X
        self.order = order
        self.W = characteristic(X)
        self._cache: Dict[Atom, Expr] = {}

    def zeta(self, a: Atom) -> Expr:
        """zeta_{k,I} = D_I(W_k) + xi^i u^k_{I+i}."""
        if self.order is not None and len(a.index) > self.order:
            raise ValueError(f"jet {a.name}_{''.join(a.index)} exceeds prolongation order {self.order}")
        hit = self._cache.get(a)
        if hit is not None:
            return hit
        frame = self.X.frame
        out = total_derivative_multi(self.W[a.name], a.index, frame)
        for lab in frame.labels:
            c = self.X.coeff(lab)
            if c.terms and lab in frame.deps.get((a.kind, a.name), ()):
                out = out + c * Expr.atom(a.differentiated(lab))
        self._cache[a] = out
        return out

    def table(self, max_order: int) -> Dict[Atom, Expr]:
        frame = self.X.frame
        out = {}
        for dep in frame.dependents:
            labs = frame.deps.get(dep, ())
            for n in range(1, max_order + 1):
                for idx in combinations_with_replacement(labs, n):
                    a = frame.dependent_atom(dep, idx)
                    out[a] = self.zeta(a)
        return out

    def action(self, a: Atom) -> Optional[Expr]:
        frame = self.X.frame
        frame.check(a)
        if a.kind == "label":
            c = self.X.coeff(a.name)
            return c if c.terms else None
        if a.kind == "constant":
            return None
        if a.kind == "protected":
            return apply_derivation(protected_definition(a), self.action)
        if frame.is_dependent(a):
            z = self.zeta(a)
            return z if z.terms else None
        base = _composite_base(frame, a)
        if base is not None:
            inner = self.action(base)
            return None if inner is None else Expr.atom(a.differentiated(base.name)) * inner
        # given function of the labels: X f = xi^i d_i f
        out = Expr()
        for lab in frame.deps.get((a.kind, a.name), ()):
            c = self.X.coeff(lab)
            if c.terms:
                out = out + c * Expr.atom(a.differentiated(lab))
        return out if out.terms else None

    def apply(self, e: Expr) -> Expr:
        """The prolonged generator acting on e."""
        return apply_derivation(e, self.action)


def prolong(X: Generator, order: int) -> Dict[Atom, Expr]:
    """Table of prolonged coefficients for every jet up to ``order`` (1 or 2)."""
    if order not in (1, 2):
        raise ValueError("prolongation order must be 1 or 2")
    return Prolongation(X, order).table(order)


def apply_prolonged(X: Generator, e: Expr) -> Expr:
    return Prolongation(X).apply(e)


def total_divergence_of_xi(X: Generator) -> Expr:
    frame = X.frame
    out = Expr()
    for lab in frame.labels:
        c = X.coeff(lab)
        if c.terms:
            out = out + total_derivative(c, lab, frame)
    return out


# ---------------------------------------------------------------------------
# Noether operator


def _weight(i: str, j: str):
    return mpq(1) if i == j else mpq(1, 2)


def noether_operator(X: Generator, F: Expr, label: str, W: Optional[Dict[str, Expr]] = None) -> Expr:
    """N^i F for F of jet order at most 2.

    Second-order terms use symmetric jet coordinates: the derivative with respect
    to ``u_ij`` carries weight 1/2 when ``i != j``.
    """
    frame = X.frame
    if label not in frame.labels:
        raise FrameError(f"label {label} is not in the {frame.name} frame")
    if max_jet_order(F, frame) > 2:
        raise ValueError("Noether operator implemented for jet order <= 2")
    W = W if W is not None else characteristic(X)
    out = X.coeff(label) * F
    for dep in frame.dependents:
        if label not in frame.deps.get(dep, ()):
            continue
        w = W[dep[1]]
        if not w.terms:
            continue
        ui = frame.dependent_atom(dep, (label,))
        dFi = partial(F, ui)
        for j in frame.deps.get(dep, ()):
            uij = ui.differentiated(j)
            dFij = partial(F, uij)
            if not dFij.terms:
                continue
            dFij = dFij.scale(RatFunc.const(_weight(label, j)))
            dFi = dFi - total_derivative(dFij, j, frame)
            out = out + total_derivative(w, j, frame) * dFij
        out = out + w * dFi
    return out


def noether_vector(X: Generator, F: Expr) -> Tuple[Expr, ...]:
    W = characteristic(X)
    return tuple(noether_operator(X, F, lab, W) for lab in X.frame.labels)


def noether_identity_residual(X: Generator, F: Expr) -> Expr:
    """X F + F D_i xi^i - W^k dF/du^k - D_i(N^i F); identically zero."""
    frame = X.frame
    lhs = apply_prolonged(X, F) + F * total_divergence_of_xi(X)
    W = characteristic(X)
    rhs = Expr()
    for dep in frame.dependents:
        w = W[dep[1]]
        if w.terms:
            rhs = rhs + w * variational_derivative(F, dep, frame)
    rhs = rhs + divergence(noether_vector(X, F), frame)
    return lhs - rhs


def second_identity_residual(X: Generator, F: Expr, B: Sequence[Expr] = ()) -> Dict[str, Expr]:
    """Residual of the variational identity for a point generator and first-order F.

    d/du^j (XF + F D_i xi^i - D_i B^i)
        = X(dF/du^j) + dF/du^k (d eta^k/du^j - d xi^i/du^j u^k_i + delta_kj D_i xi^i)
    """
    frame = X.frame
    div_xi = total_divergence_of_xi(X)
    inner = apply_prolonged(X, F) + F * div_xi
    if B:
        inner = inner - divergence(B, frame)
    euler = {dep: variational_derivative(F, dep, frame) for dep in frame.dependents}
    out = {}
    for dj in frame.dependents:
        uj = frame.dependent_atom(dj)
        lhs = variational_derivative(inner, dj, frame)
        rhs = apply_prolonged(X, euler[dj])
        for dk in frame.dependents:
            ek = euler[dk]
            if not ek.terms:
                continue
            k_term = partial(X.coeff(dk[1]), uj)
            for lab in frame.labels:
                if lab in frame.deps.get(dk, ()):
                    k_term = k_term - partial(X.coeff(lab), uj) * Expr.atom(frame.dependent_atom(dk, (lab,)))
            if dk == dj:
                k_term = k_term + div_xi
            rhs = rhs + ek * k_term
        out[dj[1]] = lhs - rhs
    return out
