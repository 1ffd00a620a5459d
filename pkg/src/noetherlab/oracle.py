"""Numeric cross-checks that do not go through the symbolic zero test.

``random_point_check`` evaluates an expression at random points in floating
point.  ``manufactured_check`` evaluates a conserved vector on an exact flow
certified by sympy (its own Euler-Lagrange operator, not ours) and measures
the finite-difference divergence as the step shrinks.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp

from .expr import Atom, Expr, J_ATOM, LedgerViolation, eval_numeric, eval_terms, protected_definition
from .report import CheckRecord, record

GAMMA_SAMPLES = (1.4, 5 / 3, 1.8, 3.0)
DEFAULT_SEED = 20240611


@dataclass
class PointCheck:
    passed: bool
    worst: float
    trials: int
    seed: int
    worst_point: Dict[str, float] = field(default_factory=dict)


def _atom_label(a: Atom) -> str:
    prefix = "E:" if a.kind == "eulerian" else ""
    return prefix + a.name + ("_" + "".join(a.index) if a.index else "")


def _needs_positive(e: Expr) -> set:
    pos = set()
    for m in e.terms:
        for a, k in m:
            if not k.is_integer():
                pos.add(a)
    return pos


def _has_gamma(e: Expr) -> bool:
    for m, c in e.terms.items():
        if not c.is_const():
            return True
        if any(k.b != 0 for _, k in m):
            return True
    return False


def _draw(rng: random.Random, positive: bool) -> float:
    x = rng.uniform(0.5, 2.0)
    return x if positive or rng.random() < 0.5 else -x


def sample_assignment(e: Expr, rng: random.Random, max_tries: int = 1000) -> Dict[Atom, float]:
    """Values for every atom of e except J, which follows from its definition and must exceed 0.1."""
    positive = _needs_positive(e)
    atoms = [a for a in sorted(e.atoms()) if a.kind != "protected"]
    needs_j = J_ATOM in e.atoms()
    jdef = protected_definition(J_ATOM)
    atoms += [a for a in sorted(jdef.atoms()) if needs_j and a not in atoms]
    for _ in range(max_tries):
        vals = {a: _draw(rng, a in positive) for a in atoms}
        if needs_j:
            if eval_numeric(jdef, vals, 0.0) <= 0.1:
                continue
        return vals
    raise RuntimeError("could not draw a point with J > 0.1")


def random_point_check(e: Expr, trials: int = 100, tol: float = 1e-9, seed: Optional[int] = None) -> PointCheck:
    """Pass iff |sum of terms| / max |term| < tol at every sampled point."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    seed = DEFAULT_SEED if seed is None else seed
    rng = random.Random(seed)
    gammas = list(GAMMA_SAMPLES) + [rng.uniform(1.1, 3.0)]
    uses_gamma = _has_gamma(e)
    worst, worst_point = 0.0, {}
    for i in range(trials):
        g = gammas[i % len(gammas)] if uses_gamma else 0.0
        vals = sample_assignment(e, rng)
        try:
            terms = list(eval_terms(e, vals, g))
        except LedgerViolation:
            continue
        except (ZeroDivisionError, ValueError) as exc:
            raise ArithmeticError(f"evaluation failed at {({_atom_label(a): v for a, v in vals.items()})}: {exc}") from exc
        scale = max((abs(t) for t in terms), default=0.0)
        rel = 0.0 if scale == 0.0 else abs(math.fsum(terms)) / scale
        if rel > worst:
            worst = rel
            worst_point = {_atom_label(a): v for a, v in vals.items()}
            if uses_gamma:
                worst_point["gamma"] = g
    return PointCheck(worst < tol, worst, trials, seed, worst_point)


# ---------------------------------------------------------------------------
# manufactured solutions


T, XI, ETA = sp.symbols("t xi eta", real=True)
_S_SYM = sp.Symbol("s", positive=True)


@dataclass
class ManufacturedSolution:
    """Closed-form phi1, phi2 and given functions of the labels, with a sympy certificate."""

    name: str
    phi1: sp.Expr
    phi2: sp.Expr
    gamma: sp.Rational
    S: sp.Expr
    functions: Dict[str, sp.Expr] = field(default_factory=dict)
    F: Optional[sp.Expr] = None  # expression in the symbol s
    entropy: str = "isentropic"
    certified: bool = False
    certificate_note: str = ""

    def certify(self) -> "ManufacturedSolution":
        self.certified, self.certificate_note = certify_solution(self)
        return self


def sympy_euler_lagrange(phi1: sp.Expr, phi2: sp.Expr, S: sp.Expr, gamma) -> Tuple[sp.Expr, sp.Expr]:
    """Euler-Lagrange expressions of the gas Lagrangian, computed by sympy, at the given fields."""
    f1, f2 = sp.Function("f1")(T, XI, ETA), sp.Function("f2")(T, XI, ETA)
    J = sp.diff(f1, XI) * sp.diff(f2, ETA) - sp.diff(f1, ETA) * sp.diff(f2, XI)
    L = (sp.diff(f1, T) ** 2 + sp.diff(f2, T) ** 2) / 2 - J ** (1 - gamma) * S / (gamma - 1)
    eqs = sp.euler_equations(L, [f1, f2], [T, XI, ETA])
    out = []
    for eq in eqs:
        lhs = eq.lhs.subs({f1: phi1, f2: phi2}).doit()
        out.append(lhs)
    return tuple(out)


def certify_solution(sol: ManufacturedSolution) -> Tuple[bool, str]:
    E = sympy_euler_lagrange(sol.phi1, sol.phi2, sol.S, sol.gamma)
    bad = [i + 1 for i, e in enumerate(E) if sp.simplify(e) != 0]
    if bad:
        return False, f"Euler-Lagrange expression {bad} does not vanish"
    if sol.entropy == "general" and sol.functions:
        S = sol.S
        p1, p2 = sol.functions.get("psi1"), sol.functions.get("psi2")
        checks = []
        if p1 is not None:
            checks.append(sp.diff(p1, ETA) * sp.diff(S, XI) - (sp.diff(p1, XI) * sp.diff(S, ETA) + XI * sp.diff(S, XI)))
        if p2 is not None:
            checks.append(sp.diff(S, XI) * sp.diff(p2, ETA) - sp.diff(S, ETA) * sp.diff(p2, XI) + 2 * S)
        if any(sp.simplify(c) != 0 for c in checks):
            return False, "psi functions violate their defining relations"
    return True, "sympy Euler-Lagrange operator vanishes identically"


def uniform_flow(u0=sp.Rational(3, 10), v0=sp.Rational(-1, 5), gamma=sp.Rational(7, 5), S0=sp.Rational(3, 2)):
    return ManufacturedSolution("uniform", XI + u0 * T, ETA + v0 * T, gamma, S0 + 0 * XI,
                                {"h": sp.sin(XI) * sp.cos(ETA)}).certify()


def dilation_flow(b=sp.Rational(1, 2), gamma=sp.Rational(7, 5), S0=sp.Rational(3, 2)):
    return ManufacturedSolution("dilation", (1 + b * T) * XI, (1 + b * T) * ETA, gamma, S0 + 0 * XI,
                                {"h": sp.sin(XI) * sp.cos(ETA)}).certify()


def shear_flow(gamma=sp.Rational(7, 5), p0=sp.Integer(1)):
    """phi1 = xi + t U(eta), phi2 = g(eta), S = p0 g'(eta)^gamma: uniform pressure, layered entropy."""
    g = ETA + sp.sin(ETA) / 3
    U = sp.cos(ETA)
    S = p0 * sp.diff(g, ETA) ** gamma
    psi2 = 2 * XI * S / sp.diff(S, ETA)
    psi1 = sp.sin(ETA)
    return ManufacturedSolution("shear", XI + T * U, g, gamma, S,
                                {"psi1": psi1, "psi2": psi2, "h": sp.Integer(0)},
                                F=_S_SYM ** 2, entropy="general").certify()


def non_solution(gamma=sp.Rational(7, 5)):
    return ManufacturedSolution("non-solution", XI + T ** 2 * XI ** 2, ETA, gamma, sp.Rational(3, 2) + 0 * XI).certify()


def _label_symbol(lab: str) -> sp.Symbol:
    return {"t": T, "xi": XI, "eta": ETA}[lab]


def atom_closed_form(a: Atom, sol: ManufacturedSolution) -> sp.Expr:
    if a.kind == "label":
        return _label_symbol(a.name)
    if a.kind == "jet":
        base = sol.phi1 if a.name == "phi1" else sol.phi2
        return sp.diff(base, *[_label_symbol(l) for l in a.index]) if a.index else base
    if a.kind == "protected":
        return (sp.diff(sol.phi1, XI) * sp.diff(sol.phi2, ETA) - sp.diff(sol.phi1, ETA) * sp.diff(sol.phi2, XI))
    if a.kind == "function":
        if a.name == "F":
            if sol.F is None:
                raise KeyError("solution defines no F")
            f = sp.diff(sol.F, _S_SYM, len(a.index)) if a.index else sol.F
            return f.subs(_S_SYM, sol.S)
        base = sol.S if a.name == "S" else sol.functions.get(a.name)
        if base is None:
            raise KeyError(f"solution defines no {a.name}")
        return sp.diff(base, *[_label_symbol(l) for l in a.index]) if a.index else base
    raise KeyError(f"no closed form for atom {a.name} of kind {a.kind}")


def compile_numpy(e: Expr, sol: ManufacturedSolution) -> Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]:
    """Vectorized evaluator of e along the solution (atoms lambdified from sympy closed forms)."""
    g = float(sol.gamma)
    atoms = sorted(e.atoms())
    funcs = {a: sp.lambdify((T, XI, ETA), atom_closed_form(a, sol), "numpy") for a in atoms}
    terms = [(c.evaluate_float(g), [(a, k.value(g)) for a, k in m]) for m, c in e.terms.items()]

    def f(t, xi, eta):
        vals = {a: np.broadcast_to(np.asarray(fn(t, xi, eta), dtype=float), np.shape(t)) for a, fn in funcs.items()}
        acc = np.zeros(np.shape(t))
        for c, mono in terms:
            term = np.full(np.shape(t), c)
            for a, k in mono:
                term = term * vals[a] ** k
            acc = acc + term
        return acc

    return f


_STENCILS = {
    2: ((-1, -0.5), (1, 0.5)),
    4: ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12)),
}


@dataclass
class GridSpec:
    """Sample box in (t, xi, eta), points per axis, step sizes and stencil order."""

    box: Tuple[Tuple[float, float], ...] = ((0.2, 0.6), (0.6, 1.4), (0.6, 1.4))
    points: int = 5
    steps: Tuple[float, ...] = (0.04, 0.02, 0.01)
    order: int = 2

    def __post_init__(self):
        if len(self.steps) < 3:
            raise ValueError("at least three step sizes are needed for an order estimate")
        if self.points < 3:
            raise ValueError("grid too coarse: fewer than 3 points per axis")
        if self.order not in _STENCILS:
            raise ValueError("stencil order must be 2 or 4")

    def mesh(self):
        axes = [np.linspace(lo, hi, self.points) for lo, hi in self.box]
        return np.meshgrid(*axes, indexing="ij")


@dataclass
class ManufacturedResult:
    id: str
    solution: str
    norms: List[float]
    steps: Tuple[float, ...]
    order: Optional[float]
    exact: bool
    stencil: int

    def passed(self, floor: float = 1e-11, slack: float = 0.2) -> bool:
        if self.exact:
            return True
        return self.order is not None and self.order >= self.stencil - slack


def fd_divergence(fs: Sequence[Callable], pts: Tuple[np.ndarray, ...], h: float, order: int) -> np.ndarray:
    div = np.zeros(np.shape(pts[0]))
    for axis, f in enumerate(fs):
        for shift, w in _STENCILS[order]:
            p = list(pts)
            p[axis] = p[axis] + shift * h
            div = div + w * f(*p) / h
    return div


def manufactured_check(T_components: Sequence[Expr], sol: ManufacturedSolution, grid: GridSpec = GridSpec(),
                       id: str = "", floor: float = 1e-11) -> ManufacturedResult:
    if not sol.certified:
        raise ValueError(f"manufactured solution {sol.name} is not certified: {sol.certificate_note}")
    fs = [compile_numpy(c, sol) for c in T_components]
    pts = grid.mesh()
    scale = max(float(np.max(np.abs(f(*pts)))) for f in fs) or 1.0
    norms = [float(np.max(np.abs(fd_divergence(fs, pts, h, grid.order)))) / scale for h in grid.steps]
    exact = max(norms) < floor
    order = None
    if not exact and min(norms) > 0:
        order = float(np.polyfit(np.log(grid.steps), np.log(norms), 1)[0])
    return ManufacturedResult(id, sol.name, norms, grid.steps, order, exact, grid.order)


def manufactured_record(res: ManufacturedResult) -> CheckRecord:
    ok = res.passed()
    summary = f"stencil {res.stencil}: " + ("exact" if res.exact else f"order {res.order:.2f}")
    det = {"summary": summary, "solution": res.solution, "norms": [f"{n:.3e}" for n in res.norms], "stencil": res.stencil,
           "order": None if res.order is None else round(res.order, 3), "exact": res.exact}
    return record(res.id, "manufactured", ok, details=det,
                  residual_witness=None if ok else f"observed order {res.order}")


def point_record(id: str, check: str, e: Expr, trials: int = 100, tol: float = 1e-9, seed: Optional[int] = None,
                 expect_zero: bool = True) -> CheckRecord:
    res = random_point_check(e, trials, tol, seed)
    ok = res.passed if expect_zero else not res.passed
    return record(id, check, ok, seed=res.seed,
                  residual_witness=None if ok else f"worst relative residual {res.worst:.3e}",
                  details={"summary": f"worst {res.worst:.1e} over {trials} trials", "worst": f"{res.worst:.3e}", "trials": trials, "tol": tol,
                           "expect": "zero" if expect_zero else "nonzero"})
