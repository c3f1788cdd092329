"""Joint output distributions over finite alphabets, with exact or float backing."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._exact import format_number, is_exact, parse_number

FLOAT_NORM_TOL = 1e-12


class DistributionError(ValueError):
    pass


class JointDistribution:
    """Probability table ``P(a_1 ... a_n)`` stored as an n-dimensional array.

    ``backend`` is ``"exact"`` (object array of Fractions) or ``"float"``.
    The flat order is row-major in party order: the last party varies fastest.
    """

    __slots__ = ("table", "backend")

    def __init__(self, table, backend: str | None = None, *, check: bool = True):
        arr = np.asarray(table)
        if backend is None:
            backend = "exact" if arr.dtype == object and all(is_exact(v) for v in arr.flat) else "float"
        if backend == "exact":
            arr = np.array([Fraction(v) for v in arr.flat], dtype=object).reshape(arr.shape)
        elif backend == "float":
            arr = np.array([float(v) for v in arr.flat], dtype=float).reshape(arr.shape)
        else:
            raise DistributionError(f"unknown backend {backend!r}")
        arr.flags.writeable = False
        self.table = arr
        self.backend = backend
        if check:
            self._check()

    def _check(self):
        if self.table.ndim == 0 or any(k < 1 for k in self.table.shape):
            raise DistributionError("every party needs a non-empty alphabet")
        if self.backend == "exact":
            if any(v < 0 for v in self.table.flat):
                raise DistributionError("negative probability")
            if sum(self.table.flat) != 1:
                raise DistributionError(f"probabilities sum to {sum(self.table.flat)}, not 1")
        else:
            if not np.all(np.isfinite(self.table)) or np.any(self.table < 0):
                raise DistributionError("negative or non-finite probability")
            if abs(self.table.sum() - 1.0) > FLOAT_NORM_TOL:
                raise DistributionError(f"probabilities sum to {self.table.sum()!r}, not 1")

    # basic accessors ----------------------------------------------------

    @property
    def alphabets(self) -> tuple[int, ...]:
        return tuple(self.table.shape)

    @property
    def n(self) -> int:
        return self.table.ndim

    @property
    def exact(self) -> bool:
        return self.backend == "exact"

    @property
    def probabilities(self) -> list:
        return list(self.table.flat)

    def __getitem__(self, outcome):
        return self.table[tuple(outcome)]

    def outcomes(self) -> Iterable[tuple[int, ...]]:
        return itertools.product(*(range(k) for k in self.alphabets))

    def __repr__(self):
        return f"JointDistribution(alphabets={self.alphabets}, backend={self.backend!r})"

    def __eq__(self, other):
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return self.alphabets == other.alphabets and all(a == b for a, b in zip(self.table.flat, other.table.flat))

    __hash__ = None

    def to_float(self) -> "JointDistribution":
        if self.backend == "float":
            return self
        return JointDistribution(self.table.astype(float), "float", check=False)

    def allclose(self, other: "JointDistribution", atol: float = 1e-10) -> bool:
        return self.alphabets == other.alphabets and np.allclose(
            self.table.astype(float), other.table.astype(float), atol=atol, rtol=0
        )

    def l1_distance(self, other: "JointDistribution"):
        if self.exact and other.exact:
            return sum(abs(a - b) for a, b in zip(self.table.flat, other.table.flat))
        return float(np.abs(self.table.astype(float) - other.table.astype(float)).sum())

    # marginals ---------------------------------------------------------

    def marginal(self, subset: Iterable[int]) -> "JointDistribution":
        """Distribution of the parties in ``subset`` (kept in ascending index order)."""
        keep = sorted(set(subset))
        if not keep:
            raise DistributionError("marginal over an empty set of parties")
        if keep[0] < 0 or keep[-1] >= self.n:
            raise DistributionError(f"party index out of range in {keep}")
        drop = tuple(j for j in range(self.n) if j not in keep)
        table = self.table.sum(axis=drop) if drop else self.table
        return JointDistribution(np.asarray(table, dtype=self.table.dtype).reshape([self.alphabets[j] for j in keep]),
                                 self.backend, check=False)

    def party_marginal(self, j: int) -> np.ndarray:
        return self.marginal([j]).table

    def marginals(self) -> list[np.ndarray]:
        return [self.party_marginal(j) for j in range(self.n)]

    # serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {"alphabets": list(self.alphabets), "probabilities": [format_number(v) for v in self.table.flat]}

    @classmethod
    def from_dict(cls, d: dict) -> "JointDistribution":
        try:
            alphabets = [int(k) for k in d["alphabets"]]
            if "counts" in d:
                return from_counts(alphabets, d["counts"])[0]
            values = [parse_number(v) for v in d["probabilities"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise DistributionError(f"malformed distribution description: {exc}") from exc
        if len(values) != math.prod(alphabets):
            raise DistributionError(f"expected {math.prod(alphabets)} probabilities, got {len(values)}")
        exact = all(is_exact(v) for v in values)
        arr = np.array(values, dtype=object if exact else float).reshape(alphabets)
        return cls(arr, "exact" if exact else "float")

    @classmethod
    def load(cls, path) -> "JointDistribution":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))


def from_counts(alphabets: Sequence[int], counts: Sequence) -> tuple[JointDistribution, int]:
    """Normalize raw outcome counts; returns the float distribution and the sample total."""
    c = np.asarray(counts, dtype=float)
    if c.size != math.prod(alphabets) or np.any(c < 0):
        raise DistributionError("counts must be non-negative, one per outcome")
    total = c.sum()
    if total <= 0:
        raise DistributionError("counts sum to zero")
    return JointDistribution((c / total).reshape(alphabets), "float", check=False), int(round(total))


# families --------------------------------------------------------------


def _exact_zeros(alphabets):
    return np.full(tuple(alphabets), Fraction(0), dtype=object)


def uniform(alphabets: Sequence[int] = (2, 2, 2)) -> JointDistribution:
    size = math.prod(alphabets)
    return JointDistribution(np.full(tuple(alphabets), Fraction(1, size), dtype=object), "exact")


def delta(outcome: Sequence[int], alphabets: Sequence[int] | None = None) -> JointDistribution:
    alphabets = tuple(alphabets) if alphabets is not None else (2,) * len(outcome)
    t = _exact_zeros(alphabets)
    t[tuple(outcome)] = Fraction(1)
    return JointDistribution(t, "exact")


def ghz(n: int = 3, k: int = 2) -> JointDistribution:
    """Uniform mixture of the ``k`` all-equal strings on ``n`` parties."""
    t = _exact_zeros((k,) * n)
    for a in range(k):
        t[(a,) * n] = Fraction(1, k)
    return JointDistribution(t, "exact")


def w(n: int = 3) -> JointDistribution:
    """Exactly one of ``n`` binary parties, chosen uniformly, outputs 1."""
    t = _exact_zeros((2,) * n)
    for j in range(n):
        out = [0] * n
        out[j] = 1
        t[tuple(out)] = Fraction(1, n)
    return JointDistribution(t, "exact")


def _as_param(x):
    x = parse_number(x) if isinstance(x, str) else x
    return Fraction(x) if is_exact(x) else float(x)


def pq(p, q) -> JointDistribution:
    """``p d_000 + q d_111 + (1-p-q) P_diff`` with ``P_diff`` uniform on the six mixed strings."""
    p, q = _as_param(p), _as_param(q)
    if p < 0 or q < 0 or p + q > 1:
        raise DistributionError(f"need p, q >= 0 and p + q <= 1, got p={p}, q={q}")
    exact = is_exact(p) and is_exact(q)
    rest = (1 - p - q) / 6
    t = np.full((2, 2, 2), rest, dtype=object if exact else float)
    t[0, 0, 0] = p
    t[1, 1, 1] = q
    return JointDistribution(t, "exact" if exact else "float", check=exact)


def r_mix(r) -> JointDistribution:
    """``r d_111 + (1-r) P_u`` on three binary parties."""
    r = _as_param(r)
    if not 0 <= r <= 1:
        raise DistributionError(f"need 0 <= r <= 1, got {r}")
    exact = is_exact(r)
    t = np.full((2, 2, 2), (1 - r) / 8, dtype=object if exact else float)
    t[1, 1, 1] += r
    return JointDistribution(t, "exact" if exact else "float", check=exact)


def product(marginals: Sequence[Sequence]) -> JointDistribution:
    """Independent parties with the given single-party marginals."""
    vecs = [[_as_param(v) for v in m] for m in marginals]
    exact = all(is_exact(v) for m in vecs for v in m)
    t = np.array([math.prod(vals) if exact else float(np.prod(vals)) for vals in itertools.product(*vecs)],
                 dtype=object if exact else float).reshape([len(m) for m in vecs])
    return JointDistribution(t, "exact" if exact else "float")


FAMILIES = ("uniform", "ghz", "w", "delta", "pq", "r_mix")


def make_family(name: str, n: int = 3, alphabets: Sequence[int] | None = None, **params) -> JointDistribution:
    """Build a named family member: uniform, ghz, w, delta(outcome=...), pq(p=, q=), r_mix(r=)."""
    if name == "uniform":
        return uniform(alphabets or (2,) * n)
    if name == "ghz":
        return ghz(n, (alphabets or (2,))[0])
    if name == "w":
        return w(n)
    if name == "delta":
        outcome = params.get("outcome")
        if outcome is None:
            raise DistributionError("delta needs an outcome")
        return delta(outcome, alphabets)
    if name == "pq":
        return pq(params["p"], params["q"])
    if name == "r_mix":
        return r_mix(params["r"])
    raise DistributionError(f"unknown family {name!r}; expected one of {FAMILIES}")


@dataclass(frozen=True)
class FactorizationReport:
    max_deviation: object
    passed: bool


def check_bilocal_factorization(P: JointDistribution, tol: float = 1e-12) -> FactorizationReport:
    """Compare ``P_AC(ac)`` with ``P_A(a) P_C(c)`` for a three-party distribution."""
    if P.n != 3:
        raise DistributionError(f"bilocal factorization needs 3 parties, got {P.n}")
    pac = P.marginal([0, 2]).table
    pa, pc = P.party_marginal(0), P.party_marginal(2)
    dev = max(abs(pac[a, c] - pa[a] * pc[c]) for a in range(len(pa)) for c in range(len(pc)))
    if P.exact:
        return FactorizationReport(dev, dev == 0)
    return FactorizationReport(float(dev), float(dev) <= tol)
