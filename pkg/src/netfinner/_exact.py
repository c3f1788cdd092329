"""Small exact-arithmetic helpers shared across modules."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def parse_number(x):
    """Parse a JSON-ish scalar: ``"1/8"`` and ints become Fractions, floats stay floats."""
    if isinstance(x, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return x
    if isinstance(x, str):
        s = x.strip()
        try:
            return Fraction(s)
        except ValueError:
            return float(s)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    return float(x)


def format_number(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int) and not isinstance(x, bool):
        return str(x)
    return float(x)


def lcm_of_denominators(values: Iterable[Fraction]) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, Fraction(v).denominator)
    return out


def rational_sqrt(x: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None when irrational."""
    x = Fraction(x)
    if x < 0:
        return None
    n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if n * n == x.numerator and d * d == x.denominator:
        return Fraction(n, d)
    return None


def rational_cbrt(x: Fraction) -> Fraction | None:
    x = Fraction(x)
    if x < 0:
        return None

    def icbrt(k: int) -> int | None:
        r = round(k ** (1.0 / 3.0)) if k else 0
        for c in (r - 1, r, r + 1):
            if c >= 0 and c ** 3 == k:
                return c
        return None

    n, d = icbrt(x.numerator), icbrt(x.denominator)
    if n is None or d is None:
        return None
    return Fraction(n, d)


def rank(rows: Sequence[Sequence]) -> int:
    """Rank of a rational matrix by exact Gaussian elimination (fraction-free for integer input)."""
    if not rows:
        return 0
    integral = all(isinstance(v, int) for row in rows for v in row)
    m = [list(row) if integral else [Fraction(v) for v in row] for row in rows]
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        p = m[r][c]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                if integral:
                    m[i] = [a * p - f * b for a, b in zip(m[i], m[r])]
                else:
                    m[i] = [a - f / p * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def solve(A: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """Solve a square rational system exactly; None if singular."""
    n = len(A)
    m = [[Fraction(v) for v in row] + [Fraction(bi)] for row, bi in zip(A, b)]
    for c in range(n):
        pivot = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pivot is None:
            return None
        m[c], m[pivot] = m[pivot], m[c]
        inv = 1 / m[c][c]
        m[c] = [v * inv for v in m[c]]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * p for a, p in zip(m[i], m[c])]
    return [row[n] for row in m]
