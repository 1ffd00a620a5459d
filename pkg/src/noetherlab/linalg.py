"""Exact linear algebra over Q(gamma) and linear forms in the symbolic constants."""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence

from .expr import Expr, ExprError
from .ratfunc import ZERO, RatFunc

Row = List[RatFunc]


def rref(rows: Sequence[Sequence[RatFunc]], ncols: int) -> List[Row]:
    """Reduced row echelon form; zero rows are dropped."""
    m = [list(r) for r in rows if any(not x.is_zero() for x in r)]
    out: List[Row] = []
    col = 0
    while m and col < ncols:
        piv = next((i for i, r in enumerate(m) if not r[col].is_zero()), None)
        if piv is None:
            col += 1
            continue
        r = m.pop(piv)
        inv = r[col].inverse()
        r = [x * inv for x in r]
        for other in out + m:
            f = other[col]
            if not f.is_zero():
                for j in range(ncols):
                    other[j] = other[j] - f * r[j]
        out.append(r)
        m = [row for row in m if any(not x.is_zero() for x in row)]
        col += 1
    out.sort(key=lambda r: next(j for j, x in enumerate(r) if not x.is_zero()))
    return out


def solve(A: Sequence[Sequence[RatFunc]], b: Sequence[RatFunc]) -> Optional[List[RatFunc]]:
    """One solution of A k = b, or None when the system is inconsistent."""
    n = len(A[0]) if A else 0
    R = rref([list(row) + [bi] for row, bi in zip(A, b)], n + 1)
    k = [ZERO] * n
    for r in R:
        lead = next(j for j, x in enumerate(r) if not x.is_zero())
        if lead == n:
            return None
        k[lead] = r[n]
    return k


class LinearForm:
    """sum_j a_j c_j + a_0 with the c_j symbolic constants and a_j in Q(gamma)."""

    def __init__(self, coeffs: Dict[str, RatFunc], const: RatFunc = ZERO):
        self.coeffs = {k: v for k, v in coeffs.items() if not v.is_zero()}
        self.const = const

    @classmethod
    def from_expr(cls, e: Expr, names: Sequence[str]) -> "LinearForm":
        coeffs: Dict[str, RatFunc] = {}
        const = ZERO
        for m, c in e.terms.items():
            if not m:
                const = const + c
                continue
            if len(m) != 1 or m[0][0].kind != "constant" or m[0][0].name not in names or m[0][1].a != 1 or m[0][1].b != 0:
                raise ExprError(f"not linear in {', '.join(names)}: {e}")
            n = m[0][0].name
            coeffs[n] = coeffs.get(n, ZERO) + c
        return cls(coeffs, const)

    def row(self, names: Sequence[str]) -> Row:
        return [self.coeffs.get(n, ZERO) for n in names] + [self.const]

    def is_zero(self) -> bool:
        return not self.coeffs and self.const.is_zero()


def row_space(forms: Sequence[LinearForm], names: Sequence[str]) -> List[Row]:
    return rref([f.row(names) for f in forms], len(names) + 1)


def row_text(row: Row, names: Sequence[str]) -> str:
    parts = []
    for n, c in zip(list(names) + ["1"], row):
        if c.is_zero():
            continue
        s = str(c)
        if n == "1":
            parts.append(s)
        elif c.is_one():
            parts.append(n)
        else:
            parts.append(f"({s})*{n}")
    return " + ".join(parts) + " = 0" if parts else "0 = 0"
