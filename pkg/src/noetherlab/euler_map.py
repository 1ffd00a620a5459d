"""Mapping Lagrangian conserved vectors to Eulerian coordinates and checking them there.

With x = phi1, y = phi2 and rho = 1/J, a Lagrangian vector (T^t, T^xi, T^eta) becomes

    rho T^t,
    rho u T^t + (phi1_xi T^xi + phi1_eta T^eta) / J,
    rho v T^t + (phi2_xi T^xi + phi2_eta T^eta) / J.

Label derivatives of advected functions follow the chain rule
f_xi = f_x phi1_xi + f_y phi2_xi.  After canonicalization the deformation
gradient must cancel except through J; anything left over has no Eulerian
representation.
"""

from __future__ import annotations

from typing import Dict, List, Optional

from .expr import Atom, Expr, ExprError, J_ATOM, canonicalize, is_zero, make_atom, substitute
from .grammar import to_text
from .jet import divergence, eulerian_frame
from .model import ModelConfig, RelationSet, eulerian_relations
from .noether import ConservedVector
from .report import CheckRecord, record


class NoEulerianRepresentation(ExprError):
    def __init__(self, survivors: List[str], id: str = ""):
        self.survivors = survivors
        super().__init__(f"{id or 'vector'} has no Eulerian representation; surviving Lagrangian atoms: "
                         + ", ".join(survivors))


def _jet(name: str, *idx: str) -> Atom:
    return make_atom("jet", name, idx)


def _eul(name: str, *idx: str) -> Expr:
    return Expr.atom(make_atom("eulerian", name, idx))


_X = Expr.atom(make_atom("label", "x"))
_Y = Expr.atom(make_atom("label", "y"))
_GRAD = {("xi", 1): _jet("phi1", "xi"), ("xi", 2): _jet("phi2", "xi"),
         ("eta", 1): _jet("phi1", "eta"), ("eta", 2): _jet("phi2", "eta")}
ADVECTED = ("S", "h", "psi2")


def frame_dictionary(atoms) -> Dict[Atom, Expr]:
    """Substitution rules for the Lagrangian atoms that have Eulerian counterparts."""
    rules: Dict[Atom, Expr] = {}
    for a in atoms:
        if a.kind == "jet" and a.name in ("phi1", "phi2"):
            k = a.name[-1]
            if a.index == ():
                rules[a] = _X if k == "1" else _Y
            elif a.index == ("t",):
                rules[a] = _eul("u" if k == "1" else "v")
        elif a.kind == "function" and a.name in ADVECTED and len(a.index) <= 1:
            if not a.index:
                rules[a] = _eul(a.name)
            else:
                lab = a.index[0]
                rules[a] = (_eul(a.name, "x") * Expr.atom(_GRAD[(lab, 1)])
                            + _eul(a.name, "y") * Expr.atom(_GRAD[(lab, 2)]))
        elif a.kind == "function" and a.name == "F":
            rules[a] = Expr.atom(make_atom("eulerian", "F", a.index))
    return rules


def lagrangian_survivors(e: Expr) -> List[str]:
    out = set()
    for a in e.atoms():
        if a.kind in ("jet", "function", "protected") or (a.kind == "label" and a.name in ("xi", "eta")):
            out.add(a.name + ("_" + "".join(a.index) if a.index else ""))
    return sorted(out)


def _map_component(e: Expr) -> Expr:
    e = substitute(e, frame_dictionary(e.atoms()), check_cycles=False)
    e = canonicalize(e)
    rho_inv = Expr.atom(make_atom("eulerian", "rho")) ** -1
    return canonicalize(substitute(e, {J_ATOM: rho_inv}, check_cycles=False))


def to_eulerian(T: ConservedVector, config: Optional[ModelConfig] = None) -> ConservedVector:
    Tt, Txi, Teta = T.components
    Jinv = Expr.atom(J_ATOM) ** -1
    rho = Jinv
    p1x, p2x = Expr.atom(_GRAD[("xi", 1)]), Expr.atom(_GRAD[("xi", 2)])
    p1e, p2e = Expr.atom(_GRAD[("eta", 1)]), Expr.atom(_GRAD[("eta", 2)])
    u, v = Expr.atom(_jet("phi1", "t")), Expr.atom(_jet("phi2", "t"))
    raw = (
        rho * Tt,
        rho * u * Tt + (p1x * Txi + p1e * Teta) * Jinv,
        rho * v * Tt + (p2x * Txi + p2e * Teta) * Jinv,
    )
    comps = tuple(_map_component(c) for c in raw)
    survivors = sorted({s for c in comps for s in lagrangian_survivors(c)})
    if survivors:
        raise NoEulerianRepresentation(survivors, T.id)
    entropy = config.entropy if config is not None else "general"
    return ConservedVector(comps, eulerian_frame(entropy), T.id)


def eulerian_residual(T: ConservedVector, relations: RelationSet, fired: Optional[set] = None) -> Expr:
    div = divergence(T.components, T.frame)
    return canonicalize(relations.reduce(div, fired))


def verify_eulerian_claw(T: ConservedVector, relations: Optional[RelationSet] = None,
                         config: Optional[ModelConfig] = None, id: str = "") -> CheckRecord:
    """D_t T^t + D_x T^x + D_y T^y reduced by the gas dynamics equations and advection."""
    entropy = config.entropy if config is not None else ("isentropic" if T.frame.deps[("eulerian", "S")] == () else "general")
    relations = relations or eulerian_relations(entropy, config=config)
    fired: set = set()
    r = eulerian_residual(T, relations, fired)
    ok = is_zero(r)
    details = {"fired": sorted(fired)}
    if "psi2-constraint" in fired:
        sy = ("atom", make_atom("eulerian", "S", ("y",)))
        details["ledger"] = "S_y != 0"
        if sy not in r.conditions:
            ok = False
            details["ledger"] = "missing S_y != 0"
    return record(id or T.id, "eulerian-conservation", ok, residual_witness=None if ok else to_text(r),
                  details=details)


def eulerian_vector(components, config: ModelConfig, id: str = "") -> ConservedVector:
    return ConservedVector(tuple(components), eulerian_frame(config.entropy), id)
