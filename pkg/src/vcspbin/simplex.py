"""Two-phase tableau simplex over Fractions with Bland's rule.

Small and slow on purpose: it only answers support-membership questions
over a handful of unary operations, where exactness matters and size does not.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence


@dataclass(frozen=True)
class LPResult:
    status: str                 # "optimal", "infeasible" or "unbounded"
    value: Optional[Fraction]
    x: Optional[tuple]


def _pivot(T, basis, r, c):
    piv = T[r][c]
    T[r] = [v / piv for v in T[r]]
    for i in range(len(T)):
        if i != r and T[i][c] != 0:
            f = T[i][c]
            row = T[r]
            T[i] = [a - f * b for a, b in zip(T[i], row)]
    basis[r] = c


def _run(T, basis, obj_row, allowed):
    """Maximise the objective stored (negated) in T[obj_row]. Bland's rule."""
    m = len(basis)
    while True:
        col = None
        for j in allowed:
            if T[obj_row][j] < 0:
                col = j
                break
        if col is None:
            return "optimal"
        best, row = None, None
        for i in range(m):
            if T[i][col] > 0:
                ratio = T[i][-1] / T[i][col]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[row]):
                    best, row = ratio, i
        if row is None:
            return "unbounded"
        _pivot(T, basis, row, col)


def maximize(c: Sequence, A_ub: Sequence = (), b_ub: Sequence = (),
             A_eq: Sequence = (), b_eq: Sequence = ()) -> LPResult:
    """max c.x subject to A_ub x <= b_ub, A_eq x = b_eq, x >= 0."""
    n = len(c)
    rows = [([Fraction(v) for v in a], Fraction(b), "ub") for a, b in zip(A_ub, b_ub)]
    rows += [([Fraction(v) for v in a], Fraction(b), "eq") for a, b in zip(A_eq, b_eq)]
    m = len(rows)
    n_slack = sum(1 for r in rows if r[2] == "ub")
    # columns: originals, slacks, artificials, rhs
    width = n + n_slack + m + 1
    T = []
    basis = []
    s = 0
    for i, (a, b, kind) in enumerate(rows):
        row = [Fraction(0)] * width
        sign = -1 if b < 0 else 1
        for j, v in enumerate(a):
            row[j] = sign * v
        if kind == "ub":
            row[n + s] = Fraction(sign)
            s += 1
        row[n + n_slack + i] = Fraction(1)
        row[-1] = sign * b
        T.append(row)
        basis.append(n + n_slack + i)
    art = range(n + n_slack, n + n_slack + m)
    # phase one: minimise the sum of artificials
    phase1 = [Fraction(0)] * width
    for j in art:
        phase1[j] = Fraction(1)
    for i in range(m):
        phase1 = [p - v for p, v in zip(phase1, T[i])]
    T.append(phase1)
    _run(T, basis, m, range(n + n_slack + m))
    if T[m][-1] != 0:
        return LPResult("infeasible", None, None)
    # drive remaining artificials out of the basis where possible
    for i in range(m):
        if basis[i] in art:
            for j in range(n + n_slack):
                if T[i][j] != 0:
                    _pivot(T, basis, i, j)
                    break
    T.pop()
    obj = [Fraction(0)] * width
    for j, v in enumerate(c):
        obj[j] = -Fraction(v)
    for i in range(m):
        if obj[basis[i]] != 0:
            f = obj[basis[i]]
            obj = [o - f * t for o, t in zip(obj, T[i])]
    T.append(obj)
    status = _run(T, basis, m, range(n + n_slack))
    if status == "unbounded":
        return LPResult("unbounded", None, None)
    x = [Fraction(0)] * n
    for i, b in enumerate(basis):
        if b < n:
            x[b] = T[i][-1]
    return LPResult("optimal", T[m][-1], tuple(x))
