"""Entropies and (conditional) mutual information in bits, plus exact independence tests.

Distributions here are plain mappings ``outcome tuple -> probability``; values
may be Fractions or floats. Variables are selected by position in the tuple.
"""

from __future__ import annotations

import math
from collections import defaultdict
from fractions import Fraction
from typing import Mapping, Sequence

Dist = Mapping[tuple, object]


def project(dist: Dist, idx: Sequence[int]) -> dict:
    out: dict = defaultdict(int)
    for atom, p in dist.items():
        out[tuple(atom[i] for i in idx)] += p
    return dict(out)


def entropy(dist: Dist, idx: Sequence[int] | None = None) -> float:
    """Shannon entropy (bits) of the variables at positions ``idx`` (all if None)."""
    marg = dist if idx is None else project(dist, idx)
    h = 0.0
    for p in marg.values():
        p = float(p)
        if p > 0:
            h -= p * math.log2(p)
    return h


def mutual_information(dist: Dist, x: Sequence[int], y: Sequence[int], z: Sequence[int] = ()) -> float:
    """``I(X;Y|Z)`` in bits via the entropy expansion."""
    x, y, z = list(x), list(y), list(z)
    return entropy(dist, x + z) + entropy(dist, y + z) - entropy(dist, x + y + z) - (entropy(dist, z) if z else 0.0)


def independence_gap(dist: Dist, x: Sequence[int], y: Sequence[int], z: Sequence[int] = ()):
    """Max of ``|P(xyz) P(z) - P(xz) P(yz)|`` over the support; zero iff ``X`` and ``Y`` are independent given ``Z``.

    Exact when the probabilities are Fractions.
    """
    x, y, z = list(x), list(y), list(z)
    pxyz = project(dist, x + y + z)
    pxz = project(dist, x + z)
    pyz = project(dist, y + z)
    pz = project(dist, z) if z else {(): sum(dist.values())}
    nx, ny = len(x), len(y)
    worst = 0
    # every atom of the product of supports of P(xz) and P(yz) with matching z
    by_z_x: dict = defaultdict(list)
    for k in pxz:
        by_z_x[k[nx:]].append(k[:nx])
    by_z_y: dict = defaultdict(list)
    for k in pyz:
        by_z_y[k[ny:]].append(k[:ny])
    for zz, xs in by_z_x.items():
        for xx in xs:
            for yy in by_z_y.get(zz, ()):
                lhs = pxyz.get(xx + yy + zz, 0) * pz[zz]
                gap = abs(lhs - pxz[xx + zz] * pyz[yy + zz])
                if gap > worst:
                    worst = gap
    return worst


def is_exact_dist(dist: Dist) -> bool:
    return all(isinstance(p, (int, Fraction)) for p in dist.values())
