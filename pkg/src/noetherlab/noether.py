"""Divergence symmetries, Noether conserved vectors and their on-shell verification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .expr import (
    Atom,
    Expr,
    ExprError,
    canonicalize,
    exponent,
    is_zero,
    make_atom,
    mono_mul,
    partial,
)
from .grammar import to_text
from .jet import (
    Generator,
    JetFrame,
    Prolongation,
    divergence,
    noether_vector,
    total_derivative,
    total_divergence_of_xi,
    variational_derivative,
)
from .linalg import LinearForm, row_space, row_text
from .model import ELSystem, RelationSet, on_shell_reduce
from .ratfunc import RatFunc
from .report import CheckRecord, record


class CertificateError(ExprError):
    pass


@dataclass(frozen=True)
class DivergenceCertificate:
    """B with X L + L D_i xi^i = D_i B^i."""

    components: Tuple[Expr, ...]

    @classmethod
    def temporal(cls, b: Expr, n: int = 3) -> "DivergenceCertificate":
        return cls((b,) + (Expr(),) * (n - 1))

    @classmethod
    def zero(cls, n: int = 3) -> "DivergenceCertificate":
        return cls((Expr(),) * n)


@dataclass(frozen=True)
class ConservedVector:
    components: Tuple[Expr, ...]
    frame: JetFrame
    id: str = ""

    def __iter__(self):
        return iter(self.components)

    def scaled(self, k: Expr) -> "ConservedVector":
        return ConservedVector(tuple(c * k for c in self.components), self.frame, self.id)

    def text(self) -> List[str]:
        return [to_text(c) for c in self.components]


@dataclass
class DivergenceResult:
    accepted: bool
    certificate: Optional[DivergenceCertificate] = None
    witness: Optional[Expr] = None
    note: str = ""


def symmetry_defect(X: Generator, L: Expr) -> Expr:
    """X L + L D_i xi^i (prolonged X)."""
    return Prolongation(X).apply(L) + L * total_divergence_of_xi(X)


def _reduce(e: Expr, relations: Optional[RelationSet]) -> Expr:
    if relations is not None:
        e = relations.reduce(e)
    return canonicalize(e)


def variational_witness(V: Expr, frame: JetFrame, relations: Optional[RelationSet] = None) -> Optional[Expr]:
    """First nonzero variational derivative of V, or None when V is a total divergence."""
    for dep in frame.dependents:
        d = _reduce(variational_derivative(V, dep, frame), relations)
        if not is_zero(d):
            return d
    return None


def integrate(e: Expr, a: Atom) -> Expr:
    """Antiderivative in the atom a, term by term; rejects a^-1."""
    out = {}
    for m, c in e.terms.items():
        n = next((p for p in m if p[0] == a), None)
        k = n[1] if n is not None else exponent(0)
        new_k = k + exponent(1)
        if new_k.is_zero():
            raise CertificateError(f"logarithmic antiderivative in {a.name}")
        rest = tuple(p for p in m if p[0] != a)
        mono = mono_mul(rest, ((a, new_k),))
        out[mono] = c / new_k.as_ratfunc()
    return Expr._raw(out, e.conditions)


def _point_coordinates(frame: JetFrame) -> List[Atom]:
    return [make_atom("label", lab) for lab in frame.labels] + [frame.dependent_atom(d) for d in frame.dependents]


def search_certificate(V: Expr, frame: JetFrame) -> DivergenceCertificate:
    """B = (b, 0, 0) with D_t b = V and b a function of the point coordinates.

    V must be affine in the first time derivatives with point-function
    coefficients; b is assembled by integrating in each dependent and then t.
    """
    V = canonicalize(V)
    point = set(_point_coordinates(frame))
    deps = [frame.dependent_atom(d) for d in frame.dependents if "t" in frame.deps.get(d, ())]
    vel = {frame.dependent_atom(d, ("t",)) for d in frame.dependents if "t" in frame.deps.get(d, ())}
    parts = V.split(lambda a: a in vel)
    coef: Dict[Atom, Expr] = {}
    for key, c in parts.items():
        if len(key) > 1 or (key and (key[0][1].a != 1 or key[0][1].b != 0)):
            raise CertificateError("not affine in the velocities")
        for a in c.atoms():
            if a not in point and a.kind != "constant":
                raise CertificateError(f"coefficient depends on {a.name}{''.join(a.index)}")
        coef[key[0][0] if key else None] = c
    b = Expr()
    for u in deps:
        ut = u.differentiated("t")
        target = coef.get(ut, Expr()) - partial(b, u)
        b = b + integrate(canonicalize(target), u)
    t = make_atom("label", "t")
    rest = canonicalize(coef.get(None, Expr()) - partial(b, t))
    for u in deps:
        if any(a == u for a in rest.atoms()):
            raise CertificateError("time remainder depends on the dependent variables")
    b = canonicalize(b + integrate(rest, t))
    cert = DivergenceCertificate.temporal(b, len(frame.labels))
    if not is_zero(V - total_derivative(b, "t", frame)):
        raise CertificateError("integrated certificate does not reproduce the defect")
    return cert


def divergence_symmetry_test(X: Generator, L: Expr, certificate: Optional[DivergenceCertificate] = None,
                             relations: Optional[RelationSet] = None) -> DivergenceResult:
    frame = X.frame
    V = symmetry_defect(X, L)
    if certificate is not None:
        r = _reduce(V - divergence(certificate.components, frame), relations)
        return DivergenceResult(is_zero(r), certificate if is_zero(r) else None, None if is_zero(r) else r)
    w = variational_witness(V, frame, relations)
    if w is not None:
        return DivergenceResult(False, None, w, "nonvanishing variational derivative")
    try:
        cert = search_certificate(_reduce(V, relations), frame)
    except CertificateError as exc:
        return DivergenceResult(True, None, None, f"divergence form; certificate search: {exc}")
    return DivergenceResult(True, cert)


def build_conserved_vector(X: Generator, L: Expr, certificate: DivergenceCertificate,
                           relations: Optional[RelationSet] = None) -> ConservedVector:
    res = divergence_symmetry_test(X, L, certificate, relations)
    if not res.accepted:
        raise CertificateError(f"certificate rejected for {X.name}: {to_text(res.witness)}")
    N = noether_vector(X, L)
    return ConservedVector(tuple(n - b for n, b in zip(N, certificate.components)), X.frame, X.name)


def conservation_residual(T: Sequence[Expr], sys: ELSystem, relations: Optional[RelationSet] = None,
                          fired: Optional[set] = None, frame: Optional[JetFrame] = None) -> Expr:
    frame = frame or sys.config.frame()
    div = divergence(tuple(T), frame)
    return canonicalize(on_shell_reduce(div, sys, relations, fired))


def verify_conservation_law(T: ConservedVector, sys: ELSystem, relations: Optional[RelationSet] = None,
                            id: str = "") -> CheckRecord:
    fired: set = set()
    r = conservation_residual(T.components, sys, relations, fired, T.frame)
    ok = is_zero(r)
    return record(id or T.id, "conservation", ok, residual_witness=None if ok else to_text(r),
                  details={"fired": sorted(fired)})


def shared_scale(N: Sequence[Expr], T: Sequence[Expr], relations: Optional[RelationSet] = None) -> Optional[RatFunc]:
    """The single k in Q(gamma) with N = k T componentwise, if there is one."""
    N = [_reduce(n, relations) for n in N]
    T = [_reduce(t, relations) for t in T]
    k = None
    for n, t in zip(N, T):
        if not t.terms:
            continue
        m, c = next(iter(t.terms.items()))
        cn = n.terms.get(m)
        if cn is None:
            return None
        k = cn / c
        break
    if k is None or k.is_zero():
        return None
    if all(is_zero(n - t.scale(k)) for n, t in zip(N, T)):
        return k
    return None


# ---------------------------------------------------------------------------
# constraints on coefficient combinations


def constant_names(e: Expr) -> List[str]:
    return sorted({a.name for a in e.atoms() if a.kind == "constant"}, key=_cname_key)


def _cname_key(n: str):
    digits = "".join(ch for ch in n if ch.isdigit())
    return (int(digits) if digits else 0, n)


def divergence_conditions(X: Generator, L: Expr, relations: Optional[RelationSet] = None,
                          names: Optional[Sequence[str]] = None) -> Tuple[List[str], list]:
    """Linear conditions on the symbolic constants for X L + L D xi to be a total divergence.

    Returns the constant names and the reduced row echelon form of the conditions.
    """
    frame = X.frame
    V = symmetry_defect(X, L)
    names = list(names) if names is not None else constant_names(V)
    forms = []
    for dep in frame.dependents:
        d = _reduce(variational_derivative(V, dep, frame), relations)
        parts = d.split(lambda a: not (a.kind == "constant" and a.name in names))
        for cofactor in parts.values():
            forms.append(LinearForm.from_expr(cofactor, names))
    return names, row_space(forms, names)


def expected_conditions(texts: Sequence[str], names: Sequence[str], frame: JetFrame) -> list:
    forms = [LinearForm.from_expr(frame.parse(t), names) for t in texts]
    return row_space(forms, names)


def conditions_text(rows, names) -> List[str]:
    return [row_text(r, names) for r in rows]
