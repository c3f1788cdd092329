"""Two-phase exact simplex for the small LPs used by the FIS and tightness code.

Solves ``max c.x  s.t.  A x <= b,  x >= 0`` over ``Fraction`` with Bland's rule,
so it terminates on the degenerate instances that graph polytopes produce.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class LPError(RuntimeError):
    pass


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: tuple[Fraction, ...] | None
    value: Fraction | None


def _pivot(T, rhs, basis, row, col):
    piv = T[row][col]
    T[row] = [v / piv for v in T[row]]
    rhs[row] = rhs[row] / piv
    for i in range(len(T)):
        if i != row and T[i][col] != 0:
            f = T[i][col]
            T[i] = [a - f * b for a, b in zip(T[i], T[row])]
            rhs[i] -= f * rhs[row]
    basis[row] = col


def _run(T, rhs, basis, cost, allowed):
    """Maximize ``cost`` over the current feasible tableau. Returns False if unbounded."""
    while True:
        enter = None
        for j in allowed:
            if j in basis:
                continue
            reduced = cost[j] - sum(cost[basis[i]] * T[i][j] for i in range(len(T)))
            if reduced > 0:
                enter = j
                break
        if enter is None:
            return True
        best = None
        for i in range(len(T)):
            a = T[i][enter]
            if a > 0:
                ratio = rhs[i] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return False
        _pivot(T, rhs, basis, best[1], enter)


def maximize(c: Sequence, A: Sequence[Sequence], b: Sequence) -> LPResult:
    """Exact ``max c.x`` subject to ``A x <= b`` and ``x >= 0``."""
    c = [Fraction(v) for v in c]
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    m, n = len(A), len(c)
    if any(len(row) != n for row in A) or len(b) != m:
        raise LPError("inconsistent LP dimensions")

    neg = [i for i in range(m) if b[i] < 0]
    k = len(neg)
    width = n + m + k
    T, rhs, basis = [], [], []
    for i in range(m):
        sign = -1 if b[i] < 0 else 1
        row = [sign * v for v in A[i]] + [Fraction(0)] * (m + k)
        row[n + i] = Fraction(sign)
        if sign < 0:
            a = n + m + neg.index(i)
            row[a] = Fraction(1)
            basis.append(a)
        else:
            basis.append(n + i)
        T.append(row)
        rhs.append(sign * b[i])

    if k:
        phase1 = [Fraction(0)] * (n + m) + [Fraction(-1)] * k
        _run(T, rhs, basis, phase1, range(width))
        if sum(phase1[basis[i]] * rhs[i] for i in range(m)) < 0:
            return LPResult("infeasible", None, None)
        # drive zero-level artificials out of the basis
        for i in range(m):
            if basis[i] >= n + m:
                col = next((j for j in range(n + m) if T[i][j] != 0 and j not in basis), None)
                if col is not None:
                    _pivot(T, rhs, basis, i, col)
        keep = [i for i in range(m) if basis[i] < n + m]
        T = [T[i][: n + m] for i in keep]
        rhs = [rhs[i] for i in keep]
        basis = [basis[i] for i in keep]

    cost = c + [Fraction(0)] * m
    if not _run(T, rhs, basis, cost, range(n + m)):
        return LPResult("unbounded", None, None)
    x = [Fraction(0)] * (n + m)
    for i, j in enumerate(basis):
        x[j] = rhs[i]
    value = sum(ci * xi for ci, xi in zip(c, x[:n]))
    return LPResult("optimal", tuple(x[:n]), value)


def minimize(c: Sequence, A: Sequence[Sequence], b: Sequence) -> LPResult:
    res = maximize([-Fraction(v) for v in c], A, b)
    if res.status != "optimal":
        return res
    return LPResult("optimal", res.x, -res.value)
