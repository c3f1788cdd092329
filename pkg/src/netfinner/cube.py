"""Classical triangle strategies as labelled unit cubes.

Sources alpha, beta, gamma are uniform on [0, 1] and each is split into
intervals by rational cut positions. Alice sees (beta, gamma), Bob sees
(alpha, gamma), Charlie sees (alpha, beta); each face cell carries an output
label or ``UNIFORM`` (-1), meaning the party outputs a uniformly random symbol.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from ._exact import format_number, parse_number, rank, rational_cbrt, rational_sqrt
from .distributions import JointDistribution

UNIFORM = -1
AXES = ("alpha", "beta", "gamma")
# face -> the two axes it is indexed by
FACE_AXES = {"A": (1, 2), "B": (0, 2), "C": (0, 1)}
BALL_SIDE_CAP = Fraction(1, 13)
BALL_RADIUS_L1 = 2 * BALL_SIDE_CAP ** 3
GRID_GUARD = 2 ** 24


class CubeError(ValueError):
    pass


@dataclass(frozen=True)
class CubeStrategy:
    cuts: tuple[tuple[Fraction, ...], tuple[Fraction, ...], tuple[Fraction, ...]]
    A: np.ndarray  # (beta cells, gamma cells)
    B: np.ndarray  # (alpha cells, gamma cells)
    C: np.ndarray  # (alpha cells, beta cells)
    alphabets: tuple[int, int, int] = (2, 2, 2)

    def __post_init__(self):
        cuts = tuple(tuple(Fraction(c) for c in axis) for axis in self.cuts)
        if len(cuts) != 3:
            raise CubeError("need cut lists for exactly three axes")
        for name, axis in zip(AXES, cuts):
            if any(not 0 < c < 1 for c in axis) or any(a >= b for a, b in zip(axis, axis[1:])):
                raise CubeError(f"cuts on {name} must be strictly increasing inside (0, 1)")
        object.__setattr__(self, "cuts", cuts)
        object.__setattr__(self, "alphabets", tuple(int(k) for k in self.alphabets))
        for face, k in zip("ABC", self.alphabets):
            arr = np.asarray(getattr(self, face), dtype=int)
            ax = FACE_AXES[face]
            want = (len(cuts[ax[0]]) + 1, len(cuts[ax[1]]) + 1)
            if arr.shape != want:
                raise CubeError(f"face {face} has shape {arr.shape}, expected {want}")
            if np.any((arr < UNIFORM) | (arr >= k)):
                raise CubeError(f"face {face} has labels outside the alphabet")
            arr.flags.writeable = False
            object.__setattr__(self, face, arr)

    def widths(self, axis: int) -> list[Fraction]:
        edges = [Fraction(0), *self.cuts[axis], Fraction(1)]
        return [b - a for a, b in zip(edges, edges[1:])]

    def face(self, name: str) -> np.ndarray:
        return getattr(self, name)

    @classmethod
    def constant(cls, labels: Sequence[int], alphabets=(2, 2, 2)) -> "CubeStrategy":
        """Single-cell cube: every face carries one label (or UNIFORM)."""
        x, y, z = labels
        return cls(((), (), ()), np.array([[x]]), np.array([[y]]), np.array([[z]]), alphabets)

    def to_dict(self) -> dict:
        return {
            "cuts": {name: [format_number(c) for c in axis] for name, axis in zip(AXES, self.cuts)},
            "faces": {f: self.face(f).tolist() for f in "ABC"},
            "alphabets": list(self.alphabets),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CubeStrategy":
        try:
            cuts = tuple(tuple(parse_number(c) for c in d["cuts"][name]) for name in AXES)
            faces = d["faces"]
            return cls(cuts, np.array(faces["A"]), np.array(faces["B"]), np.array(faces["C"]),
                       tuple(d.get("alphabets", (2, 2, 2))))
        except (KeyError, TypeError) as exc:
            raise CubeError(f"malformed cube strategy: {exc}") from exc

    @classmethod
    def load(cls, path) -> "CubeStrategy":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _response(face: np.ndarray, k: int) -> np.ndarray:
    """Per-cell output distribution of a face as an object array ``(rows, cols, k)``."""
    rows, cols = face.shape
    r = np.full((rows, cols, k), Fraction(0), dtype=object)
    for i in range(rows):
        for j in range(cols):
            lab = face[i, j]
            if lab == UNIFORM:
                r[i, j, :] = Fraction(1, k)
            else:
                r[i, j, lab] = Fraction(1)
    return r


def evaluate_cube(s: CubeStrategy) -> JointDistribution:
    """Exact output distribution: cell volumes times per-face label agreement."""
    wa, wb, wc = (np.array(s.widths(k), dtype=object) for k in range(3))
    ka, kb, kc = s.alphabets
    table = np.einsum("i,j,k,jka,ikb,ijc->abc", wa, wb, wc,
                      _response(s.A, ka), _response(s.B, kb), _response(s.C, kc))
    return JointDistribution(table, "exact")


# embedding sub-strategies into boxes --------------------------------------


@dataclass(frozen=True)
class Box:
    sides: tuple[Fraction, Fraction, Fraction]
    strategy: CubeStrategy


def embed_boxes(boxes: Sequence[Box], alphabets=(2, 2, 2)) -> CubeStrategy:
    """Place boxes with pairwise disjoint projections on every axis; fill the rest with UNIFORM.

    Each box is filled with its strategy rescaled to the box. A box may have a
    zero side only if its strategy leaves every face using that axis UNIFORM.
    """
    cells: list[list[tuple[Fraction, object]]] = [[], [], []]
    for b, box in enumerate(boxes):
        sides = tuple(Fraction(x) for x in box.sides)
        if any(x < 0 for x in sides):
            raise CubeError("box sides must be non-negative")
        for axis in range(3):
            if sides[axis] == 0:
                for face, ax in FACE_AXES.items():
                    if axis in ax and np.any(box.strategy.face(face) != UNIFORM):
                        raise CubeError(f"box {b} has a zero {AXES[axis]} side but labels face {face}")
                continue
            for local, wdt in enumerate(box.strategy.widths(axis)):
                cells[axis].append((sides[axis] * wdt, (b, local)))
    for axis in range(3):
        used = sum(w for w, _ in cells[axis])
        if used > 1:
            raise CubeError(f"boxes overflow the {AXES[axis]} axis (total length {used})")
        if used < 1:
            cells[axis].append((1 - used, None))
    cells = [[c for c in axis if c[0] > 0] for axis in cells]
    cuts = []
    for axis in cells:
        pos, out = Fraction(0), []
        for wdt, _ in axis[:-1]:
            pos += wdt
            out.append(pos)
        cuts.append(tuple(out))
    faces = {}
    for face, (ax0, ax1) in FACE_AXES.items():
        arr = np.full((len(cells[ax0]), len(cells[ax1])), UNIFORM, dtype=int)
        for r, (_, t0) in enumerate(cells[ax0]):
            for c, (_, t1) in enumerate(cells[ax1]):
                if t0 is not None and t1 is not None and t0[0] == t1[0]:
                    arr[r, c] = boxes[t0[0]].strategy.face(face)[t0[1], t1[1]]
        faces[face] = arr
    return CubeStrategy(tuple(cuts), faces["A"], faces["B"], faces["C"], alphabets)


# contraction map -----------------------------------------------------------


def contraction_closed_form(P: JointDistribution, t) -> JointDistribution:
    """Closed form of the corner-subcube contraction for binary outputs."""
    t = Fraction(t)
    pa, pb, pc = P.marginals()
    table = np.empty((2, 2, 2), dtype=object)
    for a, b, c in itertools.product(range(2), repeat=3):
        table[a, b, c] = Fraction(1, 8) * (1 - 3 * t ** 2 + 2 * t ** 3 + 8 * t ** 3 * P[a, b, c]
                                           + 2 * t ** 2 * (1 - t) * (pa[a] + pb[b] + pc[c]))
    return JointDistribution(table, "exact")


def corner_strategy(s: CubeStrategy, t) -> CubeStrategy:
    """Strategy ``s`` squeezed into the ``t x t x t`` corner, UNIFORM elsewhere."""
    t = Fraction(t)
    if not 0 <= t <= 1:
        raise CubeError(f"t must lie in [0, 1], got {t}")
    if t == 0:
        return CubeStrategy.constant((UNIFORM,) * 3, s.alphabets)
    return embed_boxes([Box((t, t, t), s)], s.alphabets)


@dataclass(frozen=True)
class ContractionResult:
    t: Fraction
    closed_form: JointDistribution
    evaluated: JointDistribution
    strategy: CubeStrategy

    @property
    def agree(self) -> bool:
        return self.closed_form == self.evaluated


def contract(P: JointDistribution, strategy_for_P: CubeStrategy, t) -> ContractionResult:
    """Contract ``P`` towards the uniform distribution, by closed form and by construction."""
    if P.alphabets != (2, 2, 2) or strategy_for_P.alphabets != (2, 2, 2):
        raise CubeError("the contraction closed form is for binary outputs")
    if evaluate_cube(strategy_for_P) != P:
        raise CubeError("strategy_for_P does not produce P")
    t = Fraction(t)
    s_t = corner_strategy(strategy_for_P, t)
    return ContractionResult(t, contraction_closed_form(P, t), evaluate_cube(s_t), s_t)


# generators of perturbations around the uniform distribution ----------------

LABEL_SET = (0, 1, UNIFORM)


def gamma_generator(labels: Sequence[int], eps) -> np.ndarray:
    """Perturbation ``8 e^3 R + 2 e^2 (1-e)(R_A + R_B + R_C)`` for the constant cube ``labels``."""
    eps = Fraction(eps)
    P = evaluate_cube(CubeStrategy.constant(labels))
    R = P.table - Fraction(1, 8)
    ra, rb, rc = (m - Fraction(1, 2) for m in P.marginals())
    out = np.empty((2, 2, 2), dtype=object)
    for a, b, c in itertools.product(range(2), repeat=3):
        out[a, b, c] = 8 * eps ** 3 * R[a, b, c] + 2 * eps ** 2 * (1 - eps) * (ra[a] + rb[b] + rc[c])
    return out


def generator_labels() -> list[tuple[int, int, int]]:
    """The 26 label triples in ``{0, 1, ?}^3`` other than the all-``?`` cube."""
    return [lab for lab in itertools.product(LABEL_SET, repeat=3) if lab != (UNIFORM,) * 3]


def generator_span_rank(eps=Fraction(1, 10)) -> int:
    rows = [list(gamma_generator(lab, eps).flat) for lab in generator_labels()]
    return rank(rows)


def _parity(outcome, subset) -> int:
    return (-1) ** sum(outcome[j] for j in subset)


def walsh_coefficients(S: np.ndarray) -> dict[tuple[int, ...], Fraction]:
    """``s_T`` with ``S(abc) = sum_T s_T (-1)^(sum_{j in T} x_j)`` over non-empty ``T``."""
    out = {}
    for size in (1, 2, 3):
        for T in itertools.combinations(range(3), size):
            out[T] = sum(Fraction(S[x]) * _parity(x, T) for x in itertools.product(range(2), repeat=3)) / 8
    return out


def _sides_for_area(area: Fraction, cap: Fraction):
    side = rational_sqrt(area)
    if side is not None and side <= cap:
        return side, side
    if area / cap <= cap:
        return cap, area / cap
    return None


def _sides_for_volume(vol: Fraction, cap: Fraction):
    side = rational_cbrt(vol)
    if side is not None and side <= cap:
        return side, side, side
    if vol / cap ** 2 <= cap:
        return cap, cap, vol / cap ** 2
    return None


@dataclass(frozen=True)
class BallResult:
    strategy: CubeStrategy
    distribution: JointDistribution
    boxes: tuple[Box, ...]


def ball_construction(S, *, side_cap: Fraction | None = None) -> BallResult:
    """Realize ``P_u + S`` exactly for a small zero-sum rational perturbation ``S``.

    ``S`` is expanded in the parity basis; each parity term is produced by
    constant-label boxes (one box for single-party terms, label pairs such as
    00?/11? for two-party terms, the four even- or odd-parity labellings for the
    three-party term). Boxes sit side by side along every axis, so each side is
    capped at one over the largest number of boxes sharing an axis (at least
    1/12). Any ``S`` with ``||S||_1 <= BALL_RADIUS_L1`` is representable.
    """
    S = np.array([Fraction(v) for v in np.asarray(S, dtype=object).flat], dtype=object).reshape(2, 2, 2)
    if sum(S.flat) != 0:
        raise CubeError("perturbation must sum to zero")
    plan = []  # (labels, axes used, target area or volume)
    for T, s in walsh_coefficients(S).items():
        if s == 0:
            continue
        neg = s < 0
        if len(T) == 1:
            (j,) = T
            labels = [UNIFORM] * 3
            labels[j] = 1 if neg else 0
            plan.append((labels, FACE_AXES["ABC"[j]], 8 * abs(s)))
            continue
        patterns = [bits for bits in itertools.product(range(2), repeat=len(T)) if (sum(bits) % 2 == 1) == neg]
        for bits in patterns:
            labels = [UNIFORM] * 3
            for j, bit in zip(T, bits):
                labels[j] = bit
            plan.append((labels, (0, 1, 2), 8 * abs(s) / len(patterns)))
    if side_cap is None:
        load = [sum(1 for _, axes, _ in plan if k in axes) for k in range(3)]
        side_cap = Fraction(1, max(max(load), 1))
    boxes = []
    for labels, axes, size in plan:
        if len(axes) == 2:
            sides2 = _sides_for_area(size, side_cap)
            if sides2 is None:
                raise CubeError(f"perturbation outside the representable radius (labels {labels})")
            sides = [Fraction(0)] * 3
            sides[axes[0]], sides[axes[1]] = sides2
        else:
            sides = _sides_for_volume(size, side_cap)
            if sides is None:
                raise CubeError(f"perturbation outside the representable radius (labels {labels})")
        boxes.append(Box(tuple(sides), CubeStrategy.constant(labels)))
    strategy = embed_boxes(boxes) if boxes else CubeStrategy.constant((UNIFORM,) * 3)
    dist = evaluate_cube(strategy)
    target = np.full((2, 2, 2), Fraction(1, 8), dtype=object) + S
    assert all(a == b for a, b in zip(dist.table.flat, target.flat)), "ball construction mismatch"
    return BallResult(strategy, dist, tuple(boxes))


# exhaustive search over small deterministic strategies ----------------------


@dataclass(frozen=True)
class GridSearchResult:
    exact_hit: bool
    distance: Fraction | float
    strategy: CubeStrategy
    distribution: JointDistribution
    evaluated: int


def _label_options(rows: int, cols: int, k: int) -> np.ndarray:
    opts = np.array(list(itertools.product(range(k), repeat=rows * cols)), dtype=np.int64).reshape(-1, rows, cols)
    return np.eye(k, dtype=np.int64)[opts]  # (n_opts, rows, cols, k)


def grid_search(target: JointDistribution, k: int, d: int, *, guard: int = GRID_GUARD) -> GridSearchResult:
    """Exhaustive search over deterministic cubes with ``k`` cells per axis on the ``1/d`` lattice.

    Returns the minimal L1 distance to ``target`` (exact when ``target`` is
    rational). Ties keep the first strategy in enumeration order.
    """
    if target.n != 3:
        raise CubeError("grid search is for three-party targets")
    if k < 1 or d < 1 or k > d:
        raise CubeError("need 1 <= k <= d")
    ka, kb, kc = target.alphabets
    n_assign = (ka * kb * kc) ** (k * k)
    if n_assign > guard:
        raise CubeError(f"{n_assign} label assignments exceed the search guard {guard}")
    opts = {f: _label_options(k, k, q) for f, q in zip("ABC", target.alphabets)}
    exact = target.exact
    if exact:
        D = math.lcm(*(v.denominator for v in target.table.flat))
        tgt = np.array([int(v * D * d ** 3) for v in target.table.flat], dtype=object).reshape(target.alphabets)
    else:
        tgt = target.table.astype(float)
    best = None
    evaluated = 0
    cut_sets = list(itertools.combinations(range(1, d), k - 1))
    for ca, cb, cc in itertools.product(cut_sets, repeat=3):
        wa, wb, wc = (np.diff([0, *c, d]).astype(np.int64) for c in (ca, cb, cc))
        for ia, A in enumerate(opts["A"]):
            X = np.einsum("i,j,k,jka->ijka", wa, wb, wc, A)
            Y = np.einsum("ijka,oikb->oijab", X, opts["B"])
            P = np.einsum("oijab,pijc->opabc", Y, opts["C"])  # integer volumes in units of d^-3
            evaluated += P.shape[0] * P.shape[1]
            if exact:
                diff = np.abs(P.astype(object) * D - tgt).reshape(P.shape[0], P.shape[1], -1).sum(axis=2)
                dist = diff.astype(float)
            else:
                diff = None
                dist = np.abs(P / d ** 3 - tgt).reshape(P.shape[0], P.shape[1], -1).sum(axis=2)
            o, p = np.unravel_index(np.argmin(dist), dist.shape)
            val = Fraction(int(diff[o, p]), D * d ** 3) if exact else float(dist[o, p])
            if best is None or val < best[0]:
                labels = [opts[f][i].argmax(axis=-1) for f, i in zip("ABC", (ia, o, p))]
                cuts = tuple(tuple(Fraction(x, d) for x in c) for c in (ca, cb, cc))
                best = (val, CubeStrategy(cuts, *labels, alphabets=target.alphabets))
    val, strategy = best
    return GridSearchResult(val == 0, val, strategy, evaluate_cube(strategy), evaluated)


def random_strategy(rng: np.random.Generator, *, max_cells: int = 3, denominator: int = 12,
                    alphabets=(2, 2, 2), uniform_prob: float = 0.2) -> CubeStrategy:
    """Random cube with rational cuts on the ``1/denominator`` lattice and random labels."""
    cuts = []
    for _ in range(3):
        n_cuts = int(rng.integers(0, max_cells))
        pts = rng.choice(np.arange(1, denominator), size=min(n_cuts, denominator - 1), replace=False)
        cuts.append(tuple(Fraction(int(x), denominator) for x in sorted(pts)))
    faces = []
    for face, k in zip("ABC", alphabets):
        ax0, ax1 = FACE_AXES[face]
        shape = (len(cuts[ax0]) + 1, len(cuts[ax1]) + 1)
        labels = rng.integers(0, k, size=shape)
        labels[rng.random(shape) < uniform_prob] = UNIFORM
        faces.append(labels)
    return CubeStrategy(tuple(cuts), *faces, alphabets=alphabets)
