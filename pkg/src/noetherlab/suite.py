"""Verification suites over the catalog for one model configuration.

Each suite returns a list of :class:`CheckRecord` in catalog order.  ``run``
dispatches (config, suite) pairs to an optional process pool and concatenates
the results in submission order, so reports do not depend on scheduling.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import sympy as sp

from . import oracle
from .catalog import (
    CatalogEntry,
    all_constraints,
    applies,
    build_generator,
    combinations,
    commutator_table,
    conserved_vectors,
    entry,
    equivalence_generators,
    generators,
    relations_for,
    verify_admitted,
    verify_classifying,
)
from .euler_map import NoEulerianRepresentation, to_eulerian, verify_eulerian_claw, eulerian_vector
from .expr import Expr, canonical_eq, canonicalize, is_zero, make_atom
from .grammar import to_text
from .jet import (
    Generator,
    JetFrame,
    divergence,
    lagrangian_frame,
    noether_identity_residual,
    noether_vector,
    second_identity_residual,
)
from .model import (
    ModelConfig,
    build_lagrangian,
    eulerian_relations,
    euler_lagrange,
    on_shell_reduce,
    printed_equations,
    verify_gd_consistency,
)
from .noether import (
    ConservedVector,
    DivergenceCertificate,
    divergence_conditions,
    divergence_symmetry_test,
    expected_conditions,
    conditions_text,
    shared_scale,
    verify_conservation_law,
)
from .report import CheckRecord, record

SUITES = ("admitted", "noether", "claws", "eulerian", "oracle")


@dataclass(frozen=True)
class Options:
    tol: float = 1e-9
    trials: int = 100
    seed: int = oracle.DEFAULT_SEED


def default_configs() -> List[ModelConfig]:
    """Symbolic gamma in both entropy modes, then the gamma = 2 specials."""
    return [ModelConfig("symbolic", "general"), ModelConfig("symbolic", "isentropic"),
            ModelConfig("2", "general"), ModelConfig("2", "isentropic")]


def _tag(config: ModelConfig, records: List[CheckRecord]) -> List[CheckRecord]:
    for r in records:
        r.details.setdefault("config", config.label())
    return records


def _relations(e: CatalogEntry, config: ModelConfig):
    tag = e.relations_tag
    if tag is None and e.source:
        tag = entry(e.source).relations_tag
    return relations_for(tag, config)


def _vector(e: CatalogEntry, config: ModelConfig) -> ConservedVector:
    return ConservedVector(e.components(config), config.frame(), e.id)


# ---------------------------------------------------------------------------
# admitted


def euler_lagrange_check(config: ModelConfig) -> List[CheckRecord]:
    """Euler-Lagrange expressions against their printed forms."""
    sys = euler_lagrange(config)
    out = []
    for i, (E, P) in enumerate(zip(sys.equations, printed_equations(config)), start=1):
        ok = canonical_eq(E, P)
        out.append(record(f"E{i}", "euler-lagrange", ok,
                          residual_witness=None if ok else to_text(canonicalize(E - P))))
    return out


def admitted_suite(config: ModelConfig, opts: Options = Options()) -> List[CheckRecord]:
    out = euler_lagrange_check(config)
    for e in generators(config) + combinations(config):
        out.append(verify_admitted(e.id, config))
    if config.entropy == "general":
        for e in equivalence_generators(config):
            out.append(verify_admitted(e.id, config))
    if config.isentropic and config.symbolic:
        out.extend(commutator_table(config))
    return _tag(config, out)


# ---------------------------------------------------------------------------
# noether


def noether_chain(e: CatalogEntry, config: ModelConfig) -> List[CheckRecord]:
    """N^i L - B^i = noether_scale * T for each certificate candidate of the entry."""
    L = build_lagrangian(config)
    X = build_generator(e.source, config)
    rel = _relations(e, config)
    T = e.components(config)
    k = e.noether_scale(config)
    out = []
    cands = e.certificates(config)
    for j, b in enumerate(cands):
        cid = e.id if len(cands) == 1 else f"{e.id}/b{j + 1}"
        cert = DivergenceCertificate.temporal(b, len(config.frame().labels))
        res = divergence_symmetry_test(X, L, cert, rel)
        if not res.accepted:
            out.append(record(cid, "noether-chain", False, residual_witness="certificate rejected: " + to_text(res.witness)))
            continue
        N = [n - c for n, c in zip(noether_vector(X, L), cert.components)]
        got = shared_scale(N, T, rel)
        want = canonicalize(k)
        ok = got is not None and is_zero(Expr.const(got) - want)
        out.append(record(cid, "noether-chain", ok, scale=to_text(want),
                          residual_witness=None if ok else f"shared scale {got}",
                          details={"source": e.source, "certificate": to_text(b)}))
    return out


def _constraint_combination(c: CatalogEntry, config: ModelConfig) -> Tuple[Generator, List[str]]:
    frame = config.frame()
    names = c.data.get("coefficient_names", {})
    X = None
    consts = []
    for gid in c.data["combination"]:
        if gid in ("Xh", "XF"):
            G = build_generator(gid, config)
            X = G if X is None else X + G
            continue
        cname = names.get(gid, "c" + gid[1:].rstrip("n"))
        consts.append(cname)
        G = build_generator(gid, config).scaled(Expr.atom(make_atom("constant", cname)))
        X = G if X is None else X + G
    return Generator(dict(X.coeffs), c.id, frame), consts


def constraint_check(c: CatalogEntry, config: ModelConfig) -> CheckRecord:
    X, consts = _constraint_combination(c, config)
    rel = relations_for("psi", config) if config.entropy == "general" else None
    names, rows = divergence_conditions(X, build_lagrangian(config), rel, consts)
    want = expected_conditions([to_text(config.specialize(config.frame().parse(t))) for t in c.data["expected"]],
                               names, config.frame())
    ok = rows == want
    return record(c.id, "constraint", ok, residual_witness=None if ok else "; ".join(conditions_text(rows, names)),
                  details={"conditions": conditions_text(rows, names)})


def identity_checks(config: ModelConfig) -> List[CheckRecord]:
    """Both Noether identities for every catalog generator with F = L."""
    L = build_lagrangian(config)
    out = []
    for e in generators(config) + combinations(config):
        X = build_generator(e.id, config)
        r1 = canonicalize(noether_identity_residual(X, L))
        r3 = [canonicalize(v) for v in second_identity_residual(X, L).values()]
        ok1, ok3 = is_zero(r1), all(is_zero(v) for v in r3)
        out.append(record(e.id, "noether-identity", ok1, residual_witness=None if ok1 else to_text(r1)))
        out.append(record(e.id, "variational-identity", ok3,
                          residual_witness=None if ok3 else to_text(next(v for v in r3 if not is_zero(v)))))
    return out


def noether_suite(config: ModelConfig, opts: Options = Options()) -> List[CheckRecord]:
    L = build_lagrangian(config)
    out = []
    for e in generators(config) + combinations(config):
        res = divergence_symmetry_test(build_generator(e.id, config), L, relations=relations_for(e.relations_tag, config))
        want = e.expects_divergence_symmetry(config)
        det = {"expected": "accept" if want else "reject", "outcome": "accept" if res.accepted else "reject"}
        if res.certificate is not None:
            det["certificate"] = to_text(res.certificate.components[0])
        out.append(record(e.id, "divergence-symmetry", res.accepted == want, details=det,
                          residual_witness=None if res.accepted or not want else to_text(res.witness)))
    for e in conserved_vectors(config):
        if e.source:
            out.extend(noether_chain(e, config))
    for c in all_constraints():
        if applies(c.applicability, config) and "expected" in c.data:
            out.append(constraint_check(c, config))
    if config.symbolic and config.entropy == "general":
        out.extend(verify_classifying(config))
    out.extend(identity_checks(config))
    return _tag(config, out)


# ---------------------------------------------------------------------------
# conservation laws


def claws_suite(config: ModelConfig, opts: Options = Options()) -> List[CheckRecord]:
    out = list(verify_gd_consistency(config))
    sys = euler_lagrange(config)
    for e in conserved_vectors(config):
        rel = _relations(e, config)
        r = verify_conservation_law(_vector(e, config), sys, rel)
        for j, (note, comps) in enumerate(e.alternates(config), start=1):
            alt = verify_conservation_law(ConservedVector(comps, config.frame(), e.id), sys, rel)
            r.details[f"literal-variant-{j}"] = f"{alt.status}: {note}"
        out.append(r)
    return _tag(config, out)


# ---------------------------------------------------------------------------
# eulerian


def eulerian_checks(e: CatalogEntry, config: ModelConfig) -> List[CheckRecord]:
    info = e.eulerian(config)
    if info is None:
        return []
    T = _vector(e, config)
    try:
        img = to_eulerian(T, config)
    except NoEulerianRepresentation as exc:
        ok = bool(info.get("no_representation"))
        return [record(e.id, "eulerian-map", ok, details={"no_representation": ", ".join(exc.survivors)},
                       residual_witness=None if ok else str(exc))]
    if info.get("no_representation"):
        return [record(e.id, "eulerian-map", False, residual_witness="image exists: " + "; ".join(img.text()))]
    k = info["scale"]
    printed = info["components"]
    diffs = [canonicalize(a - b * k) for a, b in zip(img.components, printed)]
    ok = all(is_zero(d) for d in diffs)
    out = [record("e" + e.id, "eulerian-map", ok, scale=to_text(k),
                  residual_witness=None if ok else "; ".join(img.text()))]
    out.append(verify_eulerian_claw(eulerian_vector(printed, config, "e" + e.id), config=config))
    out.append(verify_eulerian_claw(img, config=config, id="e" + e.id + "/image"))
    if "erratum" in info:
        fixed = info["erratum"]["components"]
        match = all(is_zero(canonicalize(a - b * k)) for a, b in zip(img.components, fixed))
        out.append(record("e" + e.id + "/erratum", "eulerian-map", match, scale=to_text(k),
                          details={"note": info["erratum"]["note"]}))
        out.append(verify_eulerian_claw(eulerian_vector(fixed, config, "e" + e.id + "/erratum"), config=config))
    return out


def literal_momentum_control(config: ModelConfig) -> CheckRecord:
    """With v v_y in place of v u_y in the x-momentum equation eT1 must stop reducing to zero."""
    e = entry("T1")
    printed = e.eulerian(config)["components"]
    rel = eulerian_relations(config.entropy, literal_momentum=True, config=config)
    r = verify_eulerian_claw(eulerian_vector(printed, config, "eT1"), relations=rel, config=config)
    return record("eT1/literal-momentum", "negative-control", not r.passed,
                  details={"expected": "nonzero residual"})


def eulerian_suite(config: ModelConfig, opts: Options = Options()) -> List[CheckRecord]:
    out = []
    for e in conserved_vectors(config):
        out.extend(eulerian_checks(e, config))
    out.append(literal_momentum_control(config))
    return _tag(config, out)


# ---------------------------------------------------------------------------
# oracle


def on_shell_divergence(e: CatalogEntry, config: ModelConfig, components=None) -> Expr:
    """The reduced divergence before canonicalization (phi1_xi and J both kept)."""
    comps = components if components is not None else e.components(config)
    div = divergence(tuple(comps), config.frame())
    return on_shell_reduce(div, euler_lagrange(config), _relations(e, config))


def solution_gamma(config: ModelConfig):
    return sp.Integer(2) if config.gamma_is_two else sp.Rational(7, 5)


def _numeric_config(config: ModelConfig) -> ModelConfig:
    return config if not config.symbolic else ModelConfig("7/5", config.entropy)


def _covers(sol: oracle.ManufacturedSolution, comps) -> bool:
    for c in comps:
        for a in c.atoms():
            try:
                oracle.atom_closed_form(a, sol)
            except KeyError:
                return False
    return True


def manufactured_solutions(config: ModelConfig) -> List[oracle.ManufacturedSolution]:
    g = solution_gamma(config)
    sols = [oracle.uniform_flow(gamma=g), oracle.dilation_flow(gamma=g)]
    if config.entropy == "general":
        sols.append(oracle.shear_flow(gamma=g))
    return sols


def negative_controls(config: ModelConfig, opts: Options) -> List[CheckRecord]:
    out = []
    bad_gamma = ModelConfig("5/3", config.entropy)
    T7 = entry("T7")
    div7 = on_shell_divergence(T7, bad_gamma, T7.components(bad_gamma))
    out.append(oracle.point_record("T7@gamma=5/3", "negative-control", div7, opts.trials, opts.tol, opts.seed,
                                   expect_zero=False))
    T1 = entry("T1")
    comps = list(T1.components(config))
    comps[0] = comps[0] + config.frame().parse("phi1_xi")
    out.append(oracle.point_record("T1+phi1_xi", "negative-control", on_shell_divergence(T1, config, comps),
                                   opts.trials, opts.tol, opts.seed, expect_zero=False))
    bad = oracle.non_solution(gamma=solution_gamma(config))
    out.append(record("non-solution", "negative-control", not bad.certified,
                      details={"certificate": bad.certificate_note}))
    return out


def oracle_suite(config: ModelConfig, opts: Options = Options()) -> List[CheckRecord]:
    out = []
    for e in conserved_vectors(config):
        out.append(oracle.point_record(e.id, "random-point", on_shell_divergence(e, config),
                                       opts.trials, opts.tol, opts.seed))
        info = e.eulerian(config)
        if info and not info.get("no_representation"):
            comps = info.get("erratum", {}).get("components", info["components"])
            ev = eulerian_vector(comps, config, "e" + e.id)
            div = eulerian_relations(config.entropy, config=config).reduce(divergence(ev.components, ev.frame))
            out.append(oracle.point_record(ev.id, "random-point", div, opts.trials, opts.tol, opts.seed))
    out.extend(negative_controls(config, opts))
    ncfg = _numeric_config(config)
    for sol in manufactured_solutions(config):
        for e in conserved_vectors(ncfg):
            comps = e.components(ncfg)
            if not _covers(sol, comps):
                continue
            for order in (2, 4):
                res = oracle.manufactured_check(comps, sol, oracle.GridSpec(order=order), f"{e.id}@{sol.name}")
                out.append(oracle.manufactured_record(res))
    return _tag(config, out)


SUITE_FUNCS: Dict[str, Callable[[ModelConfig, Options], List[CheckRecord]]] = {
    "admitted": admitted_suite,
    "noether": noether_suite,
    "claws": claws_suite,
    "eulerian": eulerian_suite,
    "oracle": oracle_suite,
}


def _run_one(job: Tuple[str, ModelConfig, Options]) -> List[CheckRecord]:
    name, config, opts = job
    return SUITE_FUNCS[name](config, opts)


def run(configs: Sequence[ModelConfig], suites: Sequence[str] = SUITES, opts: Options = Options(),
        workers: Optional[int] = None) -> List[CheckRecord]:
    """All (config, suite) jobs; records come back in job order whatever the pool does."""
    unknown = [s for s in suites if s not in SUITE_FUNCS]
    if unknown:
        raise ValueError(f"unknown suite(s): {', '.join(unknown)}")
    jobs = [(s, c, opts) for c in configs for s in suites]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_one, jobs))
    else:
        chunks = [_run_one(j) for j in jobs]
    return [r for chunk in chunks for r in chunk]


# ---------------------------------------------------------------------------
# randomized identity pairs


_JET_POOL = ("phi1", "phi2", "phi1_t", "phi2_t", "phi1_xi", "phi1_eta", "phi2_xi", "phi2_eta",
             "phi1_tt", "phi2_xieta", "phi1_xixi", "phi2_teta")
_POINT_POOL = ("1", "t", "xi", "eta", "phi1", "phi2", "t*phi1", "xi*phi2", "phi1^2", "eta*t")


def random_pair(rng: random.Random, frame: Optional[JetFrame] = None) -> Tuple[Generator, Expr]:
    """A point generator with polynomial coefficients and a polynomial density of jet order <= 2."""
    frame = frame or lagrangian_frame("isentropic")
    coeffs = {}
    for var in ("t", "xi", "eta", "phi1", "phi2"):
        if rng.random() < 0.7:
            terms = rng.sample(_POINT_POOL, rng.randint(1, 3))
            coeffs[var] = " + ".join(f"{rng.randint(-3, 3) or 1}*{m}" for m in terms)
    if not coeffs:
        coeffs["phi1"] = "1"
    monos = []
    for _ in range(rng.randint(2, 4)):
        factors = rng.sample(_JET_POOL, rng.randint(1, 3))
        monos.append(f"{rng.randint(-4, 4) or 1}*" + "*".join(factors))
    if rng.random() < 0.5:
        monos.append("S*J^(1-gamma)")
    X = Generator.from_text(coeffs, "random", frame)
    return X, frame.parse(" + ".join(monos))


def identity_pairs(n: int = 20, seed: int = oracle.DEFAULT_SEED) -> List[CheckRecord]:
    rng = random.Random(seed)
    out = []
    for i in range(n):
        X, F = random_pair(rng)
        r = canonicalize(noether_identity_residual(X, F))
        ok = is_zero(r)
        out.append(record(f"pair-{i + 1}", "noether-identity", ok, seed=seed,
                          residual_witness=None if ok else to_text(r),
                          details={"X": {k: to_text(v) for k, v in sorted(X.coeffs.items())}, "F": to_text(F)}))
    return out
