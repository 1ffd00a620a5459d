"""The polytropic gas model in mass Lagrangian coordinates.

Builds the Lagrangian ``(phi1_t^2 + phi2_t^2)/2 - J^(1-gamma) S/(gamma-1)``,
its Euler-Lagrange system, relation sets for on-shell reduction in both
frames, and the consistency checks tying the Euler-Lagrange equations to the
gas dynamics equations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from gmpy2 import mpq

from .expr import (
    E_ONE,
    Atom,
    Expr,
    ExprError,
    LedgerViolation,
    condition_text,
    is_zero,
    make_atom,
    specialize_gamma,
    substitute,
)
from .grammar import parse, to_text
from .jet import (
    JetFrame,
    eulerian_frame,
    lagrangian_frame,
    total_derivative,
    total_derivative_multi,
    variational_derivative,
)
from .report import CheckRecord, record

GammaSpec = Union[str, mpq]


class ConfigError(ValueError):
    pass


def parse_gamma(text) -> GammaSpec:
    if isinstance(text, str) and text.strip() == "symbolic":
        return "symbolic"
    try:
        g = mpq(str(text).strip()) if not isinstance(text, (int,)) else mpq(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"gamma must be 'symbolic' or a rational p/q, got {text!r}") from None
    if g == 1:
        raise LedgerViolation("gamma = 1 is excluded: the Lagrangian divides by gamma - 1")
    if g <= 1:
        raise ConfigError(f"gamma must exceed 1, got {text}")
    return g


@dataclass(frozen=True)
class ModelConfig:
    """gamma is ``"symbolic"`` or an exact rational > 1; entropy is isentropic or general."""

    gamma: GammaSpec = "symbolic"
    entropy: str = "general"
    frame_name: str = "lagrangian"

    def __post_init__(self):
        object.__setattr__(self, "gamma", parse_gamma(self.gamma) if self.gamma != "symbolic" else "symbolic")
        if self.entropy not in ("isentropic", "general"):
            raise ConfigError(f"entropy must be 'isentropic' or 'general', got {self.entropy!r}")
        if self.frame_name not in ("lagrangian", "eulerian"):
            raise ConfigError(f"frame must be 'lagrangian' or 'eulerian', got {self.frame_name!r}")

    @property
    def symbolic(self) -> bool:
        return self.gamma == "symbolic"

    @property
    def gamma_is_two(self) -> bool:
        return not self.symbolic and self.gamma == 2

    @property
    def isentropic(self) -> bool:
        return self.entropy == "isentropic"

    def frame(self) -> JetFrame:
        if self.frame_name == "eulerian":
            return eulerian_frame(self.entropy)
        return lagrangian_frame(self.entropy)

    def specialize(self, e: Expr) -> Expr:
        return e if self.symbolic else specialize_gamma(e, self.gamma)

    def label(self) -> str:
        g = "symbolic" if self.symbolic else str(self.gamma)
        return f"gamma={g},entropy={self.entropy}"


def build_lagrangian(config: ModelConfig = ModelConfig()) -> Expr:
    """(phi1_t^2 + phi2_t^2)/2 - J^(1-gamma) S/(gamma-1); S is constant when isentropic."""
    L = parse("phi1_t^2/2 + phi2_t^2/2 - J^(1-gamma)*S/(gamma-1)")
    return config.specialize(L)


def gamma_expr(config: ModelConfig) -> Expr:
    return Expr.gamma() if config.symbolic else Expr.const(config.gamma)


# ---------------------------------------------------------------------------
# relation sets


@dataclass(frozen=True)
class Relation:
    """Oriented side relation ``lhs -> rhs``; also rewrites every derivative of ``lhs``."""

    lhs: Atom
    rhs: Expr
    name: str

    def matches(self, a: Atom) -> Optional[Tuple[str, ...]]:
        if a.kind != self.lhs.kind or a.name != self.lhs.name:
            return None
        rest = list(a.index)
        for lab in self.lhs.index:
            if lab in rest:
                rest.remove(lab)
            else:
                return None
        return tuple(rest)


class ReductionStall(ExprError):
    pass


@dataclass
class RelationSet:
    """Ordered relations; the first matching relation wins."""

    relations: List[Relation] = field(default_factory=list)
    frame: JetFrame = field(default_factory=lambda: lagrangian_frame())
    max_rounds: int = 50

    def __add__(self, other: "RelationSet") -> "RelationSet":
        return RelationSet(self.relations + other.relations, self.frame, max(self.max_rounds, other.max_rounds))

    def names(self) -> List[str]:
        return [r.name for r in self.relations]

    def replacement(self, a: Atom, cache: Dict[Atom, Optional[Tuple[Expr, str]]]) -> Optional[Tuple[Expr, str]]:
        if a in cache:
            return cache[a]
        hit = None
        for rel in self.relations:
            rest = rel.matches(a)
            if rest is not None:
                hit = (total_derivative_multi(rel.rhs, rest, self.frame), rel.name)
                break
        cache[a] = hit
        return hit

    def reduce(self, e: Expr, fired: Optional[set] = None) -> Expr:
        cache: Dict[Atom, Optional[Tuple[Expr, str]]] = {}
        for _ in range(self.max_rounds):
            rules = {}
            for a in e.atoms():
                hit = self.replacement(a, cache)
                if hit is not None:
                    rules[a] = hit[0]
                    if fired is not None:
                        fired.add(hit[1])
            if not rules:
                return e
            e = substitute(e, rules, check_cycles=False)
        raise ReductionStall(f"relation set did not terminate; remaining atoms {sorted(a.name for a in rules)}")


def _rel(frame: JetFrame, lhs: str, rhs: str, name: str) -> Relation:
    lhs_e = frame.parse(lhs)
    atom = next(iter(lhs_e.atoms()))
    return Relation(atom, frame.parse(rhs), name)


def psi_relations(orientation: str = "xi", frame: Optional[JetFrame] = None) -> RelationSet:
    """Relations fixing psi1, psi2 in terms of S: solved for the eta (or xi) derivative.

        psi1_eta S_xi - (psi1_xi S_eta + xi S_xi) = 0
        S_xi psi2_eta - S_eta psi2_xi + 2 S = 0
        psi0 = F(S)   (used directly, no relation needed)
    """
    frame = frame or lagrangian_frame()
    if orientation == "xi":
        rels = [
            _rel(frame, "psi1_eta", "(psi1_xi*S_eta + xi*S_xi)/S_xi", "psi1"),
            _rel(frame, "psi2_eta", "(S_eta*psi2_xi - 2*S)/S_xi", "psi2"),
        ]
    elif orientation == "eta":
        rels = [
            _rel(frame, "psi1_xi", "(psi1_eta*S_xi - xi*S_xi)/S_eta", "psi1"),
            _rel(frame, "psi2_xi", "(S_xi*psi2_eta + 2*S)/S_eta", "psi2"),
        ]
    else:
        raise ConfigError(f"orientation must be 'xi' or 'eta', got {orientation!r}")
    return RelationSet(rels, frame)


def classifying_relation(frame: Optional[JetFrame] = None) -> RelationSet:
    """h_xi S_eta - (h_eta - 2 gamma c9 xi) S_xi = 2 gamma c10 S, solved for h_eta."""
    frame = frame or lagrangian_frame()
    return RelationSet(
        [_rel(frame, "h_eta", "(h_xi*S_eta + 2*gamma*c9*xi*S_xi - 2*gamma*c10*S)/S_xi", "classifying")],
        frame,
    )


def eulerian_relations(entropy: str = "general", with_psi2: bool = True, literal_momentum: bool = False,
                       config: Optional[ModelConfig] = None) -> RelationSet:
    """The Eulerian system solved for time derivatives, plus advection of h, psi2 and psi2's constraint.

    ``literal_momentum`` uses ``u_t + u u_x + v v_y`` in the first momentum
    equation (as typeset in some sources) instead of the material derivative
    ``u_t + u u_x + v u_y``; it is kept as a negative control.
    """
    frame = eulerian_frame(entropy)
    adv_u = "u*u_x + v*v_y" if literal_momentum else "u*u_x + v*u_y"
    rels = [
        _rel(frame, "rho_t", "-(u*rho_x + v*rho_y + rho*(u_x + v_y))", "mass"),
        _rel(frame, "u_t", f"-({adv_u}) - (S_x*rho^gamma + gamma*S*rho^(gamma-1)*rho_x)/rho", "momentum-x"),
        _rel(frame, "v_t", "-(u*v_x + v*v_y) - (S_y*rho^gamma + gamma*S*rho^(gamma-1)*rho_y)/rho", "momentum-y"),
        _rel(frame, "h_t", "-(u*h_x + v*h_y)", "h-advection"),
    ]
    if entropy == "general":
        rels.append(_rel(frame, "S_t", "-(u*S_x + v*S_y)", "entropy"))
        if with_psi2:
            rels.append(_rel(frame, "psi2_t", "-(u*psi2_x + v*psi2_y)", "psi2-advection"))
            rels.append(_rel(frame, "psi2_x", "(2*rho*S + psi2_y*S_x)/S_y", "psi2-constraint"))
    if config is not None:
        rels = [Relation(r.lhs, config.specialize(r.rhs), r.name) for r in rels]
    return RelationSet(rels, frame)


# ---------------------------------------------------------------------------
# Euler-Lagrange system


@dataclass(frozen=True)
class ELSystem:
    """Left sides E1, E2 of the momentum equations and their solved forms for phi_k_tt."""

    config: ModelConfig
    E1: Expr
    E2: Expr
    solved: Dict[Atom, Expr]

    @property
    def equations(self) -> Tuple[Expr, Expr]:
        return (self.E1, self.E2)

    def relations(self) -> RelationSet:
        rels = [Relation(a, rhs, f"EL-{a.name}") for a, rhs in self.solved.items()]
        return RelationSet(rels, self.config.frame())


PRINTED_E1 = (
    "J^gamma*phi1_tt + S_xi*phi2_eta - S_eta*phi2_xi + gamma*J^(-1)*S*("
    "phi2_eta*(phi1_eta*phi2_xixi - phi2_eta*phi1_xixi) + phi2_xi*(phi1_xi*phi2_etaeta - phi1_etaeta*phi2_xi)"
    " + 2*phi2_xi*phi2_eta*phi1_xieta - (phi1_xi*phi2_eta + phi1_eta*phi2_xi)*phi2_xieta)"
)
PRINTED_E2 = (
    "J^gamma*phi2_tt - S_xi*phi1_eta + S_eta*phi1_xi + gamma*S*J^(-1)*("
    "phi1_eta*(phi2_eta*phi1_xixi - phi1_eta*phi2_xixi) + phi1_xi*(phi2_xi*phi1_etaeta - phi1_xi*phi2_etaeta)"
    " + 2*phi1_xi*phi1_eta*phi2_xieta - (phi1_xi*phi2_eta + phi1_eta*phi2_xi)*phi1_xieta)"
)


def printed_equations(config: ModelConfig = ModelConfig()) -> Tuple[Expr, Expr]:
    """The momentum equations as typeset, with S constant in isentropic mode."""
    out = []
    for text in (PRINTED_E1, PRINTED_E2):
        e = config.frame().parse(text)
        out.append(config.specialize(e))
    return tuple(out)


def euler_lagrange(config: ModelConfig = ModelConfig()) -> ELSystem:
    frame = config.frame()
    L = build_lagrangian(config)
    Jg = config.specialize(parse("J^gamma"))
    eqs = []
    solved = {}
    for k in ("phi1", "phi2"):
        E = -Jg * variational_derivative(L, k, frame)
        tt = make_atom("jet", k, ("t", "t"))
        parts = E.split(lambda a: a == tt)
        lead = parts.get(((tt, E_ONE),))
        if lead is None or set(parts) - {(), ((tt, E_ONE),)} or not is_zero(lead - Jg):
            raise ExprError(f"Euler-Lagrange expression for {k} is not affine in {k}_tt with coefficient J^gamma")
        rest = parts.get((), Expr())
        solved[tt] = -rest / Jg
        eqs.append(E)
    return ELSystem(config, eqs[0], eqs[1], solved)


def on_shell_reduce(e: Expr, sys: ELSystem, relations: Optional[RelationSet] = None,
                    fired: Optional[set] = None) -> Expr:
    """Replace phi_k_tt by the solved forms and apply the side relations (with consequences)."""
    rs = sys.relations()
    if relations is not None:
        rs = rs + relations
    return rs.reduce(e, fired)


# ---------------------------------------------------------------------------
# consistency with the gas dynamics equations


def verify_gd_consistency(config: ModelConfig = ModelConfig()) -> List[CheckRecord]:
    """Specific volume, momentum and one-dimensional reduction checks."""
    frame = config.frame()
    sys = euler_lagrange(config)
    out = []

    # specific volume: (1/rho)_t = u_xi phi2_eta - phi1_eta v_xi - (u_eta phi2_xi - phi1_xi v_eta)
    J = parse("J")
    rhs = parse("phi1_txi*phi2_eta - phi1_eta*phi2_txi - (phi1_teta*phi2_xi - phi1_xi*phi2_teta)")
    res = total_derivative(J, "t", frame) - rhs
    out.append(record("specific-volume", "consistency", is_zero(res), residual_witness=None if is_zero(res) else to_text(res)))

    # momentum: J^gamma (u_t + phi2_eta p_xi - phi2_xi p_eta) with p = S J^-gamma
    p = config.specialize(parse("S*J^(-gamma)"))
    Jg = config.specialize(parse("J^gamma"))
    mom1 = Jg * (parse("phi1_tt") + parse("phi2_eta") * total_derivative(p, "xi", frame)
                 - parse("phi2_xi") * total_derivative(p, "eta", frame))
    mom2 = Jg * (parse("phi2_tt") - parse("phi1_eta") * total_derivative(p, "xi", frame)
                 + parse("phi1_xi") * total_derivative(p, "eta", frame))
    for name, mom, E in (("momentum-1", mom1, sys.E1), ("momentum-2", mom2, sys.E2)):
        r = mom - E
        ok = is_zero(r)
        out.append(record(name, "consistency", ok, residual_witness=None if ok else to_text(r)))

    # one-dimensional reduction: phi2 = eta, phi1 independent of eta
    reduced = reduce_one_dimensional(sys.E1)
    target = config.specialize(frame.parse(
        "J^gamma*(phi1_tt + S_xi*phi1_xi^(-gamma) - gamma*S*phi1_xi^(-gamma-1)*phi1_xixi)"))
    target = substitute(target, {parse("J").single_term()[0][0][0]: parse("phi1_xi")})
    r = reduced - target
    ok = is_zero(r)
    out.append(record("one-dimensional", "consistency", ok, residual_witness=None if ok else to_text(r),
                      details={"reduced": to_text(reduced)}))
    return out


def one_dimensional_rules() -> Dict[Atom, Expr]:
    """phi2 = eta, phi1_eta = 0 (and all derivatives), J = phi1_xi."""
    rules: Dict[Atom, Expr] = {}
    for idx in ("", "_t", "_xi", "_eta", "_tt", "_txi", "_teta", "_xixi", "_xieta", "_etaeta"):
        a = parse("phi2" + idx).single_term()[0][0][0]
        rules[a] = parse({"": "eta", "_eta": "1"}.get(idx, "0"))
        if "eta" in idx:
            rules[parse("phi1" + idx).single_term()[0][0][0]] = Expr()
    rules[parse("J").single_term()[0][0][0]] = parse("phi1_xi")
    return rules


def reduce_one_dimensional(e: Expr) -> Expr:
    return substitute(e, one_dimensional_rules(), check_cycles=False)


def ledger_text(e: Expr) -> List[str]:
    return sorted(condition_text(c) for c in e.conditions)
