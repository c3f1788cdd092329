"""Networks (parties + independent sources) and their fractional independent sets."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Sequence

from . import simplex
from ._exact import is_exact, parse_number, rank, solve

HALF = Fraction(1, 2)
HALF_INTEGRAL_CAP = 16
GENERAL_CAP = 10


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    kind: str  # "size" | "index" | "minimality"
    sources: tuple[int, ...]
    message: str


@dataclass(frozen=True)
class Network:
    """Parties plus sources; each source is the tuple of party indices it reaches.

    Party order defines the outcome-index order of every distribution checked
    against this network.
    """

    parties: tuple[str, ...]
    sources: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "parties", tuple(str(p) for p in self.parties))
        object.__setattr__(self, "sources", tuple(tuple(int(j) for j in s) for s in self.sources))

    @property
    def n(self) -> int:
        return len(self.parties)

    @property
    def bipartite_only(self) -> bool:
        return all(len(s) == 2 for s in self.sources)

    def incident(self, j: int) -> tuple[int, ...]:
        """Indices of sources reaching party ``j``."""
        return tuple(i for i, s in enumerate(self.sources) if j in s)

    def isolated(self) -> tuple[int, ...]:
        covered = {j for s in self.sources for j in s}
        return tuple(j for j in range(self.n) if j not in covered)

    @property
    def constraint_sets(self) -> tuple[tuple[int, ...], ...]:
        """Sources plus an implicit local source for every isolated party.

        The local source bounds an isolated party's weight by 1; for all
        other parties that bound is already implied by a real source.
        """
        return self.sources + tuple((j,) for j in self.isolated())

    # constructors -----------------------------------------------------

    @classmethod
    def triangle(cls) -> "Network":
        return cls(("A", "B", "C"), ((0, 1), (1, 2), (2, 0)))

    @classmethod
    def bilocality(cls) -> "Network":
        return cls(("A", "B", "C"), ((0, 1), (1, 2)))

    @classmethod
    def common_source(cls, n: int = 3) -> "Network":
        return cls(tuple("ABCDEFGH"[:n]) if n <= 8 else tuple(f"A{j}" for j in range(n)), (tuple(range(n)),))

    @classmethod
    def path(cls, n: int) -> "Network":
        return cls(tuple(f"A{j}" for j in range(n)), tuple((j, j + 1) for j in range(n - 1)))

    @classmethod
    def cycle(cls, n: int) -> "Network":
        return cls(tuple(f"A{j}" for j in range(n)), tuple((j, (j + 1) % n) for j in range(n)))

    @classmethod
    def from_dict(cls, d: dict) -> "Network":
        try:
            return cls(tuple(d["parties"]), tuple(tuple(s) for s in d["sources"]))
        except (KeyError, TypeError) as exc:
            raise NetworkError(f"malformed network description: {exc}") from exc

    def to_dict(self) -> dict:
        return {"parties": list(self.parties), "sources": [list(s) for s in self.sources]}

    @classmethod
    def load(cls, path) -> "Network":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))


def validate_network(net: Network) -> list[Violation]:
    """List indexing and minimality problems; an empty list means the network is valid."""
    out = []
    for i, s in enumerate(net.sources):
        if len(s) < 2:
            out.append(Violation("size", (i,), f"source {i} reaches {len(s)} part(ies); need at least 2"))
        bad = [j for j in s if not 0 <= j < net.n]
        if bad:
            out.append(Violation("index", (i,), f"source {i} references unknown parties {bad}"))
        if len(set(s)) != len(s):
            out.append(Violation("index", (i,), f"source {i} lists a party twice"))
    for i, k in itertools.combinations(range(len(net.sources)), 2):
        a, b = set(net.sources[i]), set(net.sources[k])
        if a <= b or b <= a:
            small, big = (i, k) if a <= b else (k, i)
            out.append(Violation("minimality", (i, k), f"source {small} is contained in source {big}"))
    return out


def _check_valid(net: Network) -> None:
    problems = validate_network(net)
    if problems:
        raise NetworkError("; ".join(v.message for v in problems))


def is_fis(net: Network, eta: Sequence) -> bool:
    """True iff ``eta`` is non-negative and every source's weight sum is at most 1."""
    if len(eta) != net.n:
        raise ValueError(f"expected {net.n} weights, got {len(eta)}")
    w = [v if is_exact(v) else float(v) for v in (parse_number(x) if isinstance(x, str) else x for x in eta)]
    if any(v < 0 for v in w):
        return False
    return all(sum(w[j] for j in s) <= 1 for s in net.constraint_sets)


@dataclass(frozen=True)
class FISPolytopeVertices:
    vertices: tuple[tuple[Fraction, ...], ...]
    half_integral: bool

    def __iter__(self) -> Iterator[tuple[Fraction, ...]]:
        return iter(self.vertices)

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, v) -> bool:
        return tuple(Fraction(x) for x in v) in self.vertices


def _constraint_rows(net: Network) -> list[list[int]]:
    return [[1 if j in s else 0 for j in range(net.n)] for s in net.constraint_sets]


def _is_vertex(net: Network, rows: list[list[int]], eta: Sequence, full=1) -> bool:
    active = [r for r in rows if sum(a * e for a, e in zip(r, eta)) == full]
    active += [[1 if k == j else 0 for k in range(net.n)] for j in range(net.n) if eta[j] == 0]
    return rank(active) == net.n


def _half_integral_vertices(net: Network) -> list[tuple[Fraction, ...]]:
    # search over doubled weights 2*eta in {0, 1, 2} to stay in integer arithmetic
    rows = _constraint_rows(net)
    # constraints checked as soon as their last party is assigned
    due = [[] for _ in range(net.n)]
    for s in net.constraint_sets:
        due[max(s)].append(s)
    as_fraction = (Fraction(0), HALF, Fraction(1))
    out = []
    eta: list[int] = []

    def rec(j):
        if j == net.n:
            if _is_vertex(net, rows, eta, full=2):
                out.append(tuple(as_fraction[v] for v in eta))
            return
        for v in (0, 1, 2):
            eta.append(v)
            if all(sum(eta[k] for k in s) <= 2 for s in due[j]):
                rec(j + 1)
            eta.pop()

    rec(0)
    return out


def _basic_solution_vertices(net: Network) -> list[tuple[Fraction, ...]]:
    """All vertices as feasible basic solutions: every n-subset of constraints made tight."""
    n = net.n
    rows = [(r, Fraction(1)) for r in _constraint_rows(net)]
    rows += [([1 if k == j else 0 for k in range(n)], Fraction(0)) for j in range(n)]
    found = set()
    for subset in itertools.combinations(rows, n):
        x = solve([r for r, _ in subset], [b for _, b in subset])
        if x is None or any(v < 0 for v in x):
            continue
        if all(sum(a * e for a, e in zip(r, x)) <= 1 for r, _ in rows[: len(rows) - n]):
            found.add(tuple(x))
    return sorted(found)


def enumerate_extreme_fis(
    net: Network,
    *,
    cap: int = HALF_INTEGRAL_CAP,
    general_cap: int = GENERAL_CAP,
    method: str = "auto",
) -> FISPolytopeVertices:
    """Vertices of the fractional-independent-set polytope of ``net``.

    Graph networks (all sources bipartite) use the half-integral search over
    ``{0, 1/2, 1}^n``; networks with multipartite sources, or ``method="general"``,
    enumerate basic feasible solutions exactly.
    """
    _check_valid(net)
    if method not in ("auto", "half", "general"):
        raise ValueError(f"unknown method {method!r}")
    use_half = method == "half" or (method == "auto" and net.bipartite_only)
    if use_half:
        if not net.bipartite_only:
            raise NetworkError("half-integral enumeration requires bipartite sources")
        if net.n > cap:
            raise NetworkError(f"{net.n} parties exceeds the enumeration cap of {cap}")
        verts = _half_integral_vertices(net)
    else:
        if net.n > general_cap:
            raise NetworkError(f"{net.n} parties exceeds the general enumeration cap of {general_cap}")
        verts = _basic_solution_vertices(net)
    verts = sorted(set(verts))
    half = all(v in (0, HALF, 1) for vert in verts for v in vert)
    return FISPolytopeVertices(tuple(verts), half)


@dataclass(frozen=True)
class FISOptimum:
    value: Fraction
    eta: tuple[Fraction, ...]
    dual: tuple[Fraction, ...]  # one entry per ``net.constraint_sets`` element


def maximize_fis_objective(net: Network, costs: Sequence) -> FISOptimum:
    """Maximize ``costs . eta`` over FIS of ``net`` and solve the dual separately.

    The dual assigns a non-negative weight to every source (and to the implicit
    local source of an isolated party) such that each party's incident weights
    cover its cost. Strong duality and complementary slackness are asserted.
    """
    _check_valid(net)
    if len(costs) != net.n:
        raise ValueError(f"expected {net.n} costs, got {len(costs)}")
    costs = [Fraction(c) for c in costs]
    if any(c < 0 for c in costs):
        raise ValueError("costs must be non-negative")
    rows = _constraint_rows(net)
    primal = simplex.maximize(costs, rows, [1] * len(rows))
    # dual: min sum(c) s.t. sum_{i -> j} c_i >= cost_j
    cols = [[-rows[i][j] for i in range(len(rows))] for j in range(net.n)]
    dual = simplex.minimize([1] * len(rows), cols, [-c for c in costs])
    assert primal.status == "optimal" and dual.status == "optimal", (primal.status, dual.status)
    assert primal.value == dual.value, "strong duality failed"
    eta, c = primal.x, dual.x
    for j in range(net.n):
        if eta[j] > 0:
            assert sum(rows[i][j] * c[i] for i in range(len(rows))) == costs[j]
    for i, r in enumerate(rows):
        if c[i] > 0:
            assert sum(a * e for a, e in zip(r, eta)) == 1
    return FISOptimum(primal.value, tuple(eta), tuple(c))
