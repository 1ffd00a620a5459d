"""Catalog of generators, conserved vectors and coefficient constraints.

The data lives in ``data/catalog.yaml``; this module turns entries into
expressions for a given :class:`~noetherlab.model.ModelConfig` and checks that
generators are admitted by the Euler-Lagrange system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Dict, List, Optional, Sequence, Tuple

import yaml

from .expr import E_ONE, Expr, canonicalize, is_zero, make_atom, specialize_gamma
from .grammar import to_text
from .jet import Generator, JetFrame, Prolongation, lagrangian_frame, total_derivative
from .linalg import solve
from .model import (
    ModelConfig,
    RelationSet,
    classifying_relation,
    euler_lagrange,
    on_shell_reduce,
    psi_relations,
)
from .ratfunc import ZERO, RatFunc
from .report import CheckRecord, record


class CatalogError(KeyError):
    def __init__(self, id: str):
        self.id = id
        super().__init__(id)

    def __str__(self) -> str:
        return f"unknown catalog id {self.id!r}"


@lru_cache(maxsize=1)
def raw_catalog() -> dict:
    text = resources.files("noetherlab").joinpath("data/catalog.yaml").read_text()
    return yaml.safe_load(text)


def applies(app: dict, config: ModelConfig) -> bool:
    """Applicability from the config alone; symbolic gamma counts as generic (gamma != 2)."""
    modes = app.get("entropy")
    if modes is not None and config.entropy not in modes:
        return False
    g = app.get("gamma", "any")
    if g == "two":
        return config.gamma_is_two
    if g == "not-two":
        return not config.gamma_is_two
    return True


def equivalence_frame() -> JetFrame:
    return lagrangian_frame("general", entropy_dependent=True)


@dataclass
class CatalogEntry:
    id: str
    kind: str
    frame: str
    applicability: dict
    data: dict = field(repr=False)

    @property
    def note(self) -> str:
        return self.data.get("note", "")

    @property
    def relations_tag(self) -> Optional[str]:
        return self.data.get("relations")

    @property
    def source(self) -> Optional[str]:
        return self.data.get("source")

    def expects_divergence_symmetry(self, config: ModelConfig) -> bool:
        v = self.data.get("divergence_symmetry", True)
        return config.gamma_is_two if v == "two" else bool(v)

    def noether_scale(self, config: ModelConfig) -> Expr:
        return parse_in(config, self.data.get("noether_scale", "1"))

    def certificates(self, config: ModelConfig) -> List[Expr]:
        c = self.data.get("certificate", "0")
        return [parse_in(config, s) for s in (c if isinstance(c, list) else [c])]

    def components(self, config: ModelConfig) -> Tuple[Expr, ...]:
        return tuple(parse_in(config, s) for s in self.data["components"])

    def alternates(self, config: ModelConfig) -> List[Tuple[str, Tuple[Expr, ...]]]:
        return [(a.get("note", ""), tuple(parse_in(config, s) for s in a["components"]))
                for a in self.data.get("alternates", [])]

    def eulerian(self, config: ModelConfig) -> Optional[dict]:
        """``{"components", "scale"}`` or ``{"no_representation", "reason"}`` for this config."""
        e = self.data.get("eulerian")
        if e is None:
            return None
        if "gamma_two" in e:
            e = e["gamma_two"] if config.gamma_is_two else e["otherwise"]
        if e.get("no_representation"):
            return {"no_representation": True, "reason": e.get("reason", "")}
        ecfg = ModelConfig(config.gamma, config.entropy, "eulerian")
        out = {
            "components": tuple(parse_in(ecfg, s) for s in e["components"]),
            "scale": parse_in(ecfg, e.get("scale", "1")),
        }
        if "erratum" in e:
            out["erratum"] = {"note": e["erratum"].get("note", ""),
                              "components": tuple(parse_in(ecfg, s) for s in e["erratum"]["components"])}
        return out


def parse_in(config: ModelConfig, text: str) -> Expr:
    return config.specialize(config.frame().parse(str(text)))


def _entries(section: str, kind_default: str, frame: str) -> List[CatalogEntry]:
    out = []
    for d in raw_catalog()[section]:
        out.append(CatalogEntry(d["id"], d.get("kind", kind_default), d.get("frame", frame),
                                d.get("applicability", {}), d))
    return out


def all_generators() -> List[CatalogEntry]:
    return _entries("generators", "generator", "lagrangian")


def all_equivalence_generators() -> List[CatalogEntry]:
    return _entries("equivalence_generators", "equivalence-generator", "equivalence")


def all_conserved_vectors() -> List[CatalogEntry]:
    return _entries("conserved_vectors", "conserved-vector", "lagrangian")


def all_constraints() -> List[CatalogEntry]:
    return _entries("constraints", "constraint", "lagrangian")


def entry(id: str) -> CatalogEntry:
    for e in all_generators() + all_equivalence_generators() + all_conserved_vectors() + all_constraints():
        if e.id == id:
            return e
    raise CatalogError(id)


def generators(config: ModelConfig) -> List[CatalogEntry]:
    """The admitted basis (plus the arbitrary-function family) for the config."""
    return [e for e in all_generators() if e.kind == "generator" and applies(e.applicability, config)]


def combinations(config: ModelConfig) -> List[CatalogEntry]:
    return [e for e in all_generators() if e.kind == "combination" and applies(e.applicability, config)]


def equivalence_generators(config: ModelConfig) -> List[CatalogEntry]:
    return [e for e in all_equivalence_generators() if applies(e.applicability, config)]


def conserved_vectors(config: ModelConfig) -> List[CatalogEntry]:
    return [e for e in all_conserved_vectors() if applies(e.applicability, config)]


def build_generator(id: str, config: ModelConfig, frame: Optional[JetFrame] = None) -> Generator:
    e = entry(id)
    if e.kind == "equivalence-generator":
        frame = frame or equivalence_frame()
    frame = frame or config.frame()
    if "combination" in e.data:
        X = None
        for gid, c in e.data["combination"].items():
            Y = build_generator(gid, config, frame).scaled(config.specialize(frame.parse(c)))
            X = Y if X is None else X + Y
        return Generator(dict(X.coeffs), id, frame)
    coeffs = {k: config.specialize(frame.parse(v)) for k, v in e.data["coeffs"].items()}
    return Generator(coeffs, id, frame)


def printed_generator(id: str, config: ModelConfig) -> Optional[Generator]:
    p = entry(id).data.get("printed")
    if p is None:
        return None
    frame = config.frame()
    return Generator({k: config.specialize(frame.parse(v)) for k, v in p["coeffs"].items()}, id + "-printed", frame)


def relations_for(tag: Optional[str], config: ModelConfig) -> Optional[RelationSet]:
    if tag == "psi":
        return psi_relations("xi", config.frame())
    return None


# ---------------------------------------------------------------------------
# admitted generators


def determining_residuals(X: Generator, config: ModelConfig, relations: Optional[RelationSet] = None,
                          fired: Optional[set] = None) -> Tuple[Expr, Expr]:
    """Prolonged X applied to E_1, E_2 and reduced on the solution manifold."""
    sys = euler_lagrange(config)
    P = Prolongation(X)
    out = []
    for E in sys.equations:
        R = on_shell_reduce(P.apply(E), sys, relations, fired)
        out.append(canonicalize(R))
    return tuple(out)


def verify_admitted(entry_id: str, config: ModelConfig) -> CheckRecord:
    """Zero determining residuals for a concrete catalog generator (or equivalence generator)."""
    e = entry(entry_id)
    X = build_generator(entry_id, config)
    fired: set = set()
    rel = relations_for(e.relations_tag, config)
    R = determining_residuals(X, config, rel, fired)
    ok = all(is_zero(r) for r in R)
    witness = None if ok else to_text(next(r for r in R if not is_zero(r)))
    return record(entry_id, "admitted", ok, residual_witness=witness,
                  details={"fired": sorted(fired), "config": config.label()})


GENERAL_COEFFS = {
    "t": "c6 + c7*t^2 + c8*gamma*t",
    "xi": "2*gamma*c9*xi - h_eta",
    "eta": "h_xi",
    "phi1": "c1 + c3*t + c5*phi2 + c7*t*phi1 + c8*phi1 + c9*(gamma-1)*phi1 + c10*phi1",
    "phi2": "c2 + c4*t - c5*phi1 + c7*t*phi2 + c8*phi2 + c9*(gamma-1)*phi2 + c10*phi2",
}


def general_combination(config: ModelConfig, names: Sequence[str] = ("X1", "X2", "X3", "X4", "X5", "X6",
                                                                      "X7", "X8", "X9", "X10")) -> Generator:
    """sum c_j X_j + X_h with symbolic c_j, assembled from the catalog entries."""
    frame = config.frame()
    X = Generator({"xi": frame.parse("-h_eta"), "eta": frame.parse("h_xi")}, "Xh", frame)
    for gid in names:
        c = Expr.atom(make_atom("constant", "c" + gid[1:]))
        X = X + build_generator(gid, config, frame).scaled(c)
    return Generator(dict(X.coeffs), "general", frame)


def pressure_operator(E: Expr, frame: JetFrame) -> Dict[int, Expr]:
    """Coefficients of S, S_xi, S_eta in a momentum equation (it is linear in them)."""
    atoms = {0: make_atom("function", "S"), 1: make_atom("function", "S", ("xi",)),
             2: make_atom("function", "S", ("eta",))}
    parts = E.split(lambda a: a in atoms.values())
    out = {}
    for i, a in atoms.items():
        out[i] = parts.get(((a, E_ONE),), Expr())
    return out


def verify_classifying(config: ModelConfig = ModelConfig()) -> List[CheckRecord]:
    """Residual of the general combination against the classifying equation.

    Splits the residual into its c7-free part and the c7 part.  The c7-free part
    must equal the pressure operator of each momentum equation applied to
    Q = h_xi S_eta - (h_eta - 2 gamma c9 xi) S_xi - 2 gamma c10 S; the c7 part must
    carry the factor (gamma - 2).
    """
    if config.isentropic or not config.symbolic:
        config = ModelConfig("symbolic", "general")
    frame = config.frame()
    sys = euler_lagrange(config)
    X = general_combination(config)
    R = determining_residuals(X, config)
    Q = frame.parse("h_xi*S_eta - (h_eta - 2*gamma*c9*xi)*S_xi - 2*gamma*c10*S")
    c7 = make_atom("constant", "c7")
    out = []
    for i, (E, r) in enumerate(zip(sys.equations, R), start=1):
        parts = r.split(lambda a: a == c7)
        free = parts.get((), Expr())
        with_c7 = sum((v for k, v in parts.items() if k), Expr())
        op = pressure_operator(E, frame)
        predicted = op[0] * Q + op[1] * total_derivative(Q, "xi", frame) + op[2] * total_derivative(Q, "eta", frame)
        factor_ok = is_zero(free - predicted)
        nontrivial = not is_zero(free) and not all(is_zero(v) for v in op.values())
        reduced_ok = is_zero(classifying_relation(frame).reduce(free))
        obstruction_ok = not is_zero(with_c7) and is_zero(specialize_gamma(with_c7, 2))
        ok = factor_ok and nontrivial and reduced_ok and obstruction_ok
        out.append(record(f"classifying-E{i}", "classifying", ok,
                          residual_witness=None if ok else to_text(canonicalize(free - predicted)),
                          details={"multiplier": f"pressure operator of E{i}",
                                   "factors": factor_ok, "vanishes-modulo-relation": reduced_ok,
                                   "c7-obstruction-gamma-2": obstruction_ok,
                                   "c7-part": to_text(with_c7)}))
    return out


# ---------------------------------------------------------------------------
# commutators


def apply_to_function(X: Generator, f: Expr) -> Expr:
    return Prolongation(X).apply(f)


def commutator(X: Generator, Y: Generator) -> Generator:
    keys = set(X.frame.labels) | {d[1] for d in X.frame.dependents}
    coeffs = {}
    for k in keys:
        c = canonicalize(apply_to_function(X, Y.coeff(k)) - apply_to_function(Y, X.coeff(k)))
        if c.terms:
            coeffs[k] = c
    return Generator(coeffs, f"[{X.name},{Y.name}]", X.frame)


def _coefficient_rows(gens: Sequence[Generator], target: Generator, keys: Sequence[str]):
    monos = set()
    for g in list(gens) + [target]:
        for k in keys:
            monos.update((k, m) for m in g.coeff(k).terms)
    monos = sorted(monos, key=repr)
    A = [[g.coeff(k).terms.get(m, ZERO) for g in gens] for k, m in monos]
    b = [target.coeff(k).terms.get(m, ZERO) for k, m in monos]
    return A, b


def decompose(Z: Generator, basis: Sequence[Generator]) -> Optional[Tuple[List[RatFunc], Generator]]:
    """Structure constants k with Z - sum k_j basis_j in the arbitrary-function family, or None."""
    moving = ["t"] + [d[1] for d in Z.frame.dependents]
    A, b = _coefficient_rows(basis, Z, moving)
    k = solve(A, b) if A else []
    if k is None:
        return None
    rest = Z
    for kj, g in zip(k, basis):
        if not kj.is_zero():
            rest = rest + g.scaled(Expr.const(-kj))
    rest = Generator({v: canonicalize(c) for v, c in rest.coeffs.items() if canonicalize(c).terms}, rest.name, Z.frame)
    if not in_function_family(rest):
        return None
    return k, rest


def in_function_family(Z: Generator) -> bool:
    """Divergence-free field in (xi, eta) with coefficients depending on the labels xi, eta only."""
    frame = Z.frame
    for k, c in Z.coeffs.items():
        if k not in ("xi", "eta"):
            return False
        for a in c.atoms():
            if a.kind == "label" and a.name not in ("xi", "eta"):
                return False
            if frame.is_dependent(a):
                return False
    div = total_derivative(Z.coeff("xi"), "xi", frame) + total_derivative(Z.coeff("eta"), "eta", frame)
    return is_zero(div)


def commutator_table(config: ModelConfig = ModelConfig(entropy="isentropic")) -> List[CheckRecord]:
    """Pairwise commutators of the finite isentropic basis and the h family close on the algebra."""
    frame = config.frame()
    finite = [build_generator(e.id, config) for e in generators(config) if e.id != "Xh"]
    fam = [Generator({"xi": frame.parse("-h_eta"), "eta": frame.parse("h_xi")}, "Xh", frame),
           Generator({"xi": frame.parse("-psi0_eta"), "eta": frame.parse("psi0_xi")}, "Xg", frame)]
    members = finite + fam
    out = []
    for i, X in enumerate(members):
        for Y in members[i + 1:]:
            Z = commutator(X, Y)
            res = decompose(Z, finite)
            ok = res is not None
            consts = None
            if ok:
                consts = {g.name: str(kj) for kj, g in zip(res[0], finite) if not kj.is_zero()}
                if res[1].coeffs:
                    consts["family"] = ", ".join(f"{k}: {to_text(v)}" for k, v in sorted(res[1].coeffs.items()))
            out.append(record(f"[{X.name},{Y.name}]", "closure", ok,
                              residual_witness=None if ok else str({k: to_text(v) for k, v in Z.coeffs.items()}),
                              details={"structure": consts} if consts else {}))
    return out
