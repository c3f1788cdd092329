"""No-signaling boxes distributed by the sources of a network, and local wirings.

Each bipartite source hands out one or more boxes ``P(ab|xy)``. The first party
listed on the source holds the ``x/a`` end, the second the ``y/b`` end. Each
party uses each of its boxes once, choosing the next box and its input from
its transcript so far, and finally maps the full transcript to an output.

A party's transcript is a tuple of ``(box, input, output)`` steps, where
``box`` indexes the party's own boxes (sorted by source, then copy).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from . import infotheory
from ._exact import format_number, is_exact, parse_number
from .distributions import JointDistribution
from .network import Network

ATOM_GUARD = 2 ** 22

Step = tuple[int, int, int]
Transcript = tuple[Step, ...]


class BoxworldError(ValueError):
    pass


# boxes ----------------------------------------------------------------------


@dataclass(frozen=True)
class BoxViolation:
    kind: str  # "shape" | "negative" | "normalization" | "signaling_a" | "signaling_b"
    index: tuple
    message: str


class NSBox:
    """Conditional table ``P[x][y][a][b]``."""

    def __init__(self, table):
        arr = np.asarray(table, dtype=object)
        if arr.ndim != 4:
            raise BoxworldError("box tables are indexed [x][y][a][b]")
        flat = [parse_number(v) for v in arr.flat]
        self.exact = all(is_exact(v) for v in flat)
        vals = [Fraction(v) for v in flat] if self.exact else [float(v) for v in flat]
        self.table = np.array(vals, dtype=object if self.exact else float).reshape(arr.shape)
        self.table.flags.writeable = False

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return tuple(self.table.shape)

    def __eq__(self, other):
        return isinstance(other, NSBox) and self.shape == other.shape and all(
            a == b for a, b in zip(self.table.flat, other.table.flat))

    __hash__ = None

    def marginal_a(self, x: int, y: int = 0) -> np.ndarray:
        return self.table[x, y].sum(axis=1)

    def marginal_b(self, y: int, x: int = 0) -> np.ndarray:
        return self.table[x, y].sum(axis=0)

    def swapped(self) -> "NSBox":
        """The same box with the two ends exchanged: ``P'[y][x][b][a]``."""
        return NSBox(self.table.transpose(1, 0, 3, 2))

    def to_dict(self) -> dict:
        return {"table": [[[[format_number(v) for v in row] for row in pxy] for pxy in px] for px in self.table]}

    @classmethod
    def from_dict(cls, d) -> "NSBox":
        return cls(d["table"] if isinstance(d, dict) else d)

    # named boxes
    @classmethod
    def pr(cls) -> "NSBox":
        return cls.from_rule(lambda x, y, a, b: Fraction(1, 2) if (a ^ b) == (x & y) else 0)

    @classmethod
    def local_deterministic(cls, fa: Sequence[int], fb: Sequence[int]) -> "NSBox":
        """``a = fa[x]``, ``b = fb[y]``."""
        return cls.from_rule(lambda x, y, a, b: 1 if a == fa[x] and b == fb[y] else 0)

    @classmethod
    def from_rule(cls, rule: Callable, shape=(2, 2, 2, 2)) -> "NSBox":
        t = np.empty(shape, dtype=object)
        for idx in itertools.product(*(range(k) for k in shape)):
            t[idx] = Fraction(rule(*idx))
        return cls(t)


def validate_box(box: NSBox, tol: float = 1e-12) -> list[BoxViolation]:
    """Normalization and no-signaling problems (exact for rational tables)."""
    X, Y, A, B = box.shape
    t = box.table
    out = []

    def bad(v):
        return v != 0 if box.exact else abs(v) > tol

    for idx in itertools.product(range(X), range(Y), range(A), range(B)):
        if t[idx] < 0:
            out.append(BoxViolation("negative", idx, f"P{idx} < 0"))
    for x, y in itertools.product(range(X), range(Y)):
        s = t[x, y].sum()
        if bad(s - 1):
            out.append(BoxViolation("normalization", (x, y), f"P(.|{x}{y}) sums to {s}"))
    for x in range(X):
        for y in range(1, Y):
            for a in range(A):
                d = box.marginal_a(x, y)[a] - box.marginal_a(x, 0)[a]
                if bad(d):
                    out.append(BoxViolation("signaling_a", (x, y, a), f"P(a={a}|x={x}) depends on y"))
    for y in range(Y):
        for x in range(1, X):
            for b in range(B):
                d = box.marginal_b(y, x)[b] - box.marginal_b(y, 0)[b]
                if bad(d):
                    out.append(BoxViolation("signaling_b", (x, y, b), f"P(b={b}|y={y}) depends on x"))
    return out


def ns_vertices() -> list[NSBox]:
    """The 24 vertices of the binary no-signaling polytope (16 local, 8 PR-type)."""
    funcs = list(itertools.product(range(2), repeat=2))
    out = [NSBox.local_deterministic(fa, fb) for fa in funcs for fb in funcs]
    for al, be, ga in itertools.product(range(2), repeat=3):
        out.append(NSBox.from_rule(
            lambda x, y, a, b, al=al, be=be, ga=ga: Fraction(1, 2) if (a ^ b) == ((x & y) ^ (al & x) ^ (be & y) ^ ga) else 0))
    return out


def random_ns_box(rng: np.random.Generator, max_terms: int = 3, max_weight: int = 4) -> NSBox:
    """Random rational mixture of a few binary NS vertices."""
    verts = ns_vertices()
    k = int(rng.integers(1, max_terms + 1))
    picks = rng.choice(len(verts), size=k, replace=False)
    weights = [int(w) for w in rng.integers(1, max_weight + 1, size=k)]
    total = sum(weights)
    table = sum((verts[i].table * Fraction(wt, total) for i, wt in zip(picks, weights)),
                np.zeros((2, 2, 2, 2), dtype=object))
    return NSBox(table)


# programs -------------------------------------------------------------------


def transcript_key(tr: Transcript) -> str:
    return ";".join(f"{b},{x},{a}" for b, x, a in tr)


def parse_transcript_key(key: str) -> Transcript:
    if not key:
        return ()
    return tuple(tuple(int(v) for v in step.split(",")) for step in key.split(";"))


def _normalize(dist: Mapping, what: str) -> dict:
    out = {k: parse_number(v) if isinstance(v, str) else v for k, v in dist.items()}
    out = {k: v for k, v in out.items() if v != 0}
    if any(v < 0 for v in out.values()):
        raise BoxworldError(f"negative probability in {what}")
    s = sum(out.values())
    if (s != 1) if all(is_exact(v) for v in out.values()) else abs(s - 1) > 1e-12:
        raise BoxworldError(f"{what} sums to {s}, not 1")
    return out


@dataclass
class PartyProgram:
    """Wiring of one party.

    ``choose(transcript)`` gives a distribution over ``(box, input)`` pairs for
    the next step; ``output(transcript)`` gives the distribution of the final
    output once all boxes are used. Both may be lookup tables keyed by
    ``transcript_key`` strings or callables taking the transcript tuple.
    """

    choose: Callable[[Transcript], Mapping] | Mapping[str, Mapping]
    output: Callable[[Transcript], Mapping] | Mapping[str, Mapping]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def _lookup(self, rule, tr, what):
        key = (what, tr)
        if key in self._cache:
            return self._cache[key]
        if callable(rule):
            raw = rule(tr)
        else:
            try:
                raw = rule[transcript_key(tr)]
            except KeyError as exc:
                raise BoxworldError(f"no {what} rule for transcript {transcript_key(tr)!r}") from exc
        dist = _normalize(raw, f"{what} rule at {transcript_key(tr)!r}")
        if what == "choose":
            dist = {(int(k[0]), int(k[1])) if not isinstance(k, str) else tuple(int(v) for v in k.split(",")): v
                    for k, v in dist.items()}
        self._cache[key] = dist
        return dist

    def choice_dist(self, tr: Transcript) -> dict:
        return self._lookup(self.choose, tr, "choose")

    def output_dist(self, tr: Transcript) -> dict:
        return self._lookup(self.output, tr, "output")

    def to_dict(self, n_boxes: int, inputs: Sequence[int], outputs: Sequence[int]) -> dict:
        """Tabulate the program over every reachable transcript (for JSON export)."""
        choose, out = {}, {}
        frontier = [()]
        while frontier:
            tr = frontier.pop()
            if len(tr) == n_boxes:
                out[transcript_key(tr)] = {str(k): format_number(v) for k, v in self.output_dist(tr).items()}
                continue
            dist = self.choice_dist(tr)
            choose[transcript_key(tr)] = {f"{b},{x}": format_number(v) for (b, x), v in dist.items()}
            for b, x in dist:
                for a in range(outputs[b]):
                    frontier.append(tr + ((b, x, a),))
        return {"choose": choose, "output": out}

    @classmethod
    def from_dict(cls, d: dict) -> "PartyProgram":
        out = {k: {int(o): v for o, v in dist.items()} for k, dist in d["output"].items()}
        return cls(dict(d["choose"]), out)


def fixed_program(inputs: Sequence[int], output: Callable[[Sequence[int]], int]) -> PartyProgram:
    """Use boxes in order with fixed inputs, then output ``output(box outputs)``."""
    return PartyProgram(
        lambda tr: {(len(tr), inputs[len(tr)]): Fraction(1)},
        lambda tr: {output([a for _, _, a in sorted(tr)]): Fraction(1)},
    )


def _stable_seed(*parts) -> list[int]:
    return [int(p) & 0xFFFFFFFF for p in parts]


def random_program(seed: int, party: int, n_boxes: int, *, n_inputs: int = 2, n_outputs: int = 2,
                   stochastic: float = 0.15) -> PartyProgram:
    """Seeded adaptive wiring: mostly deterministic choices, occasionally a 50/50 split."""

    def rng_for(tr, tag):
        flat = [v for step in tr for v in step]
        return np.random.default_rng(_stable_seed(seed, party, tag, len(tr), *flat))

    def choose(tr):
        used = {b for b, _, _ in tr}
        free = [b for b in range(n_boxes) if b not in used]
        rng = rng_for(tr, 1)
        opts = [(int(b), int(x)) for b in free for x in range(n_inputs)]
        first = opts[int(rng.integers(len(opts)))]
        if len(opts) > 1 and rng.random() < stochastic:
            second = opts[int(rng.integers(len(opts)))]
            if second != first:
                return {first: Fraction(1, 2), second: Fraction(1, 2)}
        return {first: Fraction(1)}

    def output(tr):
        rng = rng_for(tr, 2)
        if rng.random() < stochastic and n_outputs > 1:
            a, b = rng.choice(n_outputs, size=2, replace=False)
            return {int(a): Fraction(1, 2), int(b): Fraction(1, 2)}
        return {int(rng.integers(n_outputs)): Fraction(1)}

    return PartyProgram(choose, output)


# box networks -----------------------------------------------------------------


@dataclass(frozen=True)
class BoxNetwork:
    """Network with bipartite sources, each carrying a list of NS boxes."""

    net: Network
    boxes: tuple[tuple[NSBox, ...], ...]  # per source

    def __post_init__(self):
        if not self.net.bipartite_only:
            raise BoxworldError("boxes need bipartite sources")
        if len(self.boxes) != len(self.net.sources):
            raise BoxworldError("need one box list per source")
        object.__setattr__(self, "boxes", tuple(tuple(bl) for bl in self.boxes))
        for i, bl in enumerate(self.boxes):
            for k, box in enumerate(bl):
                if validate_box(box):
                    raise BoxworldError(f"box {k} on source {i} is not a valid no-signaling box")

    @property
    def global_boxes(self) -> list[tuple[int, int]]:
        return [(i, k) for i, bl in enumerate(self.boxes) for k in range(len(bl))]

    def local_boxes(self, party: int) -> list[tuple[int, int, int]]:
        """``(source, copy, end)`` for each of the party's boxes, end 0 = x/a side."""
        out = []
        for i, k in self.global_boxes:
            s = self.net.sources[i]
            if party in s:
                out.append((i, k, s.index(party)))
        return out

    def io_sizes(self, party: int) -> tuple[list[int], list[int]]:
        ins, outs = [], []
        for i, k, end in self.local_boxes(party):
            X, Y, A, B = self.boxes[i][k].shape
            ins.append(X if end == 0 else Y)
            outs.append(A if end == 0 else B)
        return ins, outs

    @property
    def exact(self) -> bool:
        return all(b.exact for bl in self.boxes for b in bl)

    def to_dict(self) -> dict:
        return {"network": self.net.to_dict(), "boxes": [[b.to_dict() for b in bl] for bl in self.boxes]}

    @classmethod
    def from_dict(cls, d: dict) -> "BoxNetwork":
        return cls(Network.from_dict(d["network"]), tuple(tuple(NSBox.from_dict(b) for b in bl) for bl in d["boxes"]))


@dataclass(frozen=True)
class TranscriptDistribution:
    """Exact joint law of every party's full transcript and final output.

    ``atoms`` maps ``(transcripts, outputs)`` to probabilities, where
    ``transcripts`` has one transcript tuple per party.
    """

    boxnet: BoxNetwork
    atoms: Mapping[tuple[tuple[Transcript, ...], tuple[int, ...]], object]

    @property
    def n(self) -> int:
        return self.boxnet.net.n

    def outputs(self, alphabets: Sequence[int]) -> JointDistribution:
        exact = all(is_exact(v) for v in self.atoms.values())
        table = np.zeros(tuple(alphabets), dtype=object if exact else float)
        if exact:
            table[...] = Fraction(0)
        for (_, outs), p in self.atoms.items():
            table[outs] += p
        return JointDistribution(table, "exact" if exact else "float", check=exact)

    def same_law(self, other: "TranscriptDistribution", tol: float = 1e-12) -> bool:
        keys = set(self.atoms) | set(other.atoms)
        return all(abs(self.atoms.get(k, 0) - other.atoms.get(k, 0)) <= (0 if self.exact_atoms else tol) for k in keys)

    @property
    def exact_atoms(self) -> bool:
        return all(is_exact(v) for v in self.atoms.values())

    def box_use(self, party: int, transcript: Transcript, local_box: int) -> tuple[int, Step]:
        """Position in the transcript where ``local_box`` was used, and that step."""
        for pos, step in enumerate(transcript):
            if step[0] == local_box:
                return pos, step
        raise BoxworldError(f"party {party} never used box {local_box}")


def evaluate_wiring(boxnet: BoxNetwork, programs: Sequence[PartyProgram], *, schedule: Sequence[int] | None = None,
                    output_alphabets: Sequence[int] | None = None, guard: int = ATOM_GUARD,
                    check_order: bool = False) -> tuple[JointDistribution, TranscriptDistribution]:
    """Enumerate all joint transcripts exactly.

    Parties act in rounds; within a round they act in ``schedule`` order. When
    a box's first end is used, its output is drawn from that end's marginal;
    the second end draws from the conditional given the first. Branches of
    probability zero are dropped. With ``check_order`` the enumeration is
    repeated under the reversed schedule and both transcript laws must match.
    """
    net = boxnet.net
    n = net.n
    if len(programs) != n:
        raise BoxworldError(f"need {n} programs, got {len(programs)}")
    schedule = list(range(n)) if schedule is None else list(schedule)
    if sorted(schedule) != list(range(n)):
        raise BoxworldError("schedule must be a permutation of the parties")
    local = [boxnet.local_boxes(j) for j in range(n)]
    sizes = [boxnet.io_sizes(j) for j in range(n)]
    n_steps = [len(lb) for lb in local]
    order = [j for t in range(max(n_steps, default=0)) for j in schedule if t < n_steps[j]]
    atoms: dict = {}

    def rec(pos, trs, pending, prob):
        if pos == len(order):
            finish(trs, prob)
            return
        j = order[pos]
        tr = trs[j]
        for (b, x), pc in programs[j].choice_dist(tr).items():
            if not 0 <= b < n_steps[j] or any(s[0] == b for s in tr):
                raise BoxworldError(f"party {j} chose unavailable box {b} at {transcript_key(tr)!r}")
            if not 0 <= x < sizes[j][0][b]:
                raise BoxworldError(f"party {j} chose input {x} outside box {b}'s alphabet")
            i, k, end = local[j][b]
            box = boxnet.boxes[i][k]
            gid = (i, k)
            if gid in pending:
                x0, a0 = pending[gid]
                joint = box.table[x0, x] if end == 1 else box.table[x, x0]
                row = joint[a0, :] if end == 1 else joint[:, a0]
                marg = row.sum()
                dist = [v / marg for v in row]
                rest = {g: v for g, v in pending.items() if g != gid}
            else:
                dist = box.marginal_a(x) if end == 0 else box.marginal_b(x)
                rest = None
            for a, pa in enumerate(dist):
                if pa == 0:
                    continue
                new_trs = list(trs)
                new_trs[j] = tr + ((b, x, a),)
                if rest is None:
                    nxt = dict(pending)
                    nxt[gid] = (x, a)
                else:
                    nxt = rest
                rec(pos + 1, new_trs, nxt, prob * pc * pa)

    def finish(trs, prob):
        outs_per = [list(programs[j].output_dist(trs[j]).items()) for j in range(n)]
        for combo in itertools.product(*outs_per):
            p = prob
            for _, q in combo:
                p *= q
            key = (tuple(trs), tuple(o for o, _ in combo))
            atoms[key] = atoms.get(key, 0) + p
            if len(atoms) > guard:
                raise BoxworldError(f"transcript enumeration exceeded the guard of {guard} atoms")

    one = Fraction(1) if boxnet.exact else 1.0
    rec(0, [()] * n, {}, one)
    td = TranscriptDistribution(boxnet, atoms)
    if output_alphabets is None:
        output_alphabets = [1 + max(outs[j] for _, outs in atoms) for j in range(n)]
    if check_order and n > 1:
        other = evaluate_wiring(boxnet, programs, schedule=schedule[::-1], output_alphabets=output_alphabets,
                                guard=guard, check_order=False)[1]
        if not td.same_law(other):
            raise BoxworldError("transcript law depends on the firing order")
    return td.outputs(output_alphabets), td


def product_formula(td: TranscriptDistribution, programs: Sequence[PartyProgram]) -> dict:
    """Recompute every atom as choices x box tables x output maps, independently of the enumeration."""
    boxnet = td.boxnet
    n = boxnet.net.n
    local = [boxnet.local_boxes(j) for j in range(n)]
    out = {}
    for key in td.atoms:
        trs, outs = key
        p = Fraction(1) if td.exact_atoms else 1.0
        ends: dict = {}
        for j in range(n):
            tr = trs[j]
            for t, (b, x, a) in enumerate(tr):
                p *= programs[j].choice_dist(tr[:t]).get((b, x), 0)
                i, k, end = local[j][b]
                ends.setdefault((i, k), [None, None])[end] = (x, a)
            p *= programs[j].output_dist(tr).get(outs[j], 0)
        for (i, k), ((x, a), (y, b)) in ends.items():
            p *= boxnet.boxes[i][k].table[x, y, a, b]
        out[key] = p
    return out


# lemma-level identities --------------------------------------------------------


@dataclass(frozen=True)
class LemmaItem:
    name: str
    exact_gap: object  # max |P(xyz)P(z) - P(xz)P(yz)|
    mutual_information: float  # bits

    def holds(self, tol: float = 1e-12) -> bool:
        if isinstance(self.exact_gap, Fraction) or isinstance(self.exact_gap, int):
            return self.exact_gap == 0
        return self.exact_gap <= tol and abs(self.mutual_information) <= tol


@dataclass(frozen=True)
class LemmaReport:
    items: tuple[LemmaItem, ...]

    @property
    def max_gap(self):
        return max((it.exact_gap for it in self.items), default=0)

    @property
    def max_information(self) -> float:
        return max((it.mutual_information for it in self.items), default=0.0)

    def holds(self, tol: float = 1e-12) -> bool:
        return all(it.holds(tol) for it in self.items)


def _derived(atoms, fn):
    out: dict = {}
    for key, p in atoms.items():
        k = fn(key)
        if k is None:
            continue
        out[k] = out.get(k, 0) + p
    return out


def _item(name, atoms, fn) -> LemmaItem:
    """``fn(atom) -> (X, Y, Z)``; the item states ``I(X;Y|Z) = 0``."""
    d = _derived(atoms, fn)
    return LemmaItem(name, infotheory.independence_gap(d, [0], [1], [2]),
                     max(0.0, infotheory.mutual_information(d, [0], [1], [2])))


def check_ns_lemmas(td: TranscriptDistribution, party_order: Sequence[int] | None = None) -> LemmaReport:
    """Conditional-independence identities implied by local choices and no-signaling.

    With parties ordered ``p_0, p_1, ...`` (default: index order) the report covers

    * local choice: party ``q``'s box/input choice at step ``i`` is independent of
      the full transcripts of all earlier parties given ``q``'s transcript before step ``i``;
    * shared box with an earlier party ``p``: ``q``'s output of the box is
      independent of the earlier parties' transcripts given ``p``'s transcript up
      to and including that box's input, ``p``'s output, and ``q``'s transcript up
      to that box's input;
    * box with a later party: ``p``'s output is independent of the earlier
      parties' transcripts given ``p``'s transcript up to that box's input;
    * no-signaling: one end's output is independent of the other end's
      transcript-plus-input given its own transcript-plus-input.
    """
    boxnet = td.boxnet
    net = boxnet.net
    n = net.n
    order = list(range(n)) if party_order is None else list(party_order)
    rank_of = {p: r for r, p in enumerate(order)}
    local = [boxnet.local_boxes(j) for j in range(n)]
    items = []
    atoms = td.atoms

    def use(trs, party, gid):
        for pos, (b, x, a) in enumerate(trs[party]):
            if local[party][b][:2] == gid:
                return pos, x, a
        raise BoxworldError("box not used")

    for q in order:
        earlier = [p for p in order if rank_of[p] < rank_of[q]]
        if earlier:
            for i in range(len(local[q])):
                items.append(_item(
                    f"choice[{net.parties[q]},step {i}]", atoms,
                    lambda key, q=q, i=i, earlier=earlier: (
                        key[0][q][i][:2], tuple(key[0][p] for p in earlier), key[0][q][:i])))
        for b, (src, k, end) in enumerate(local[q]):
            gid = (src, k)
            other = net.sources[src][1 - end]
            label = f"{net.parties[q]} box {src}.{k}"

            def ext(trs, party, gid=gid):
                pos, x, _ = use(trs, party, gid)
                return trs[party][:pos], x

            if rank_of[other] < rank_of[q]:
                items.append(_item(
                    f"shared-earlier[{label}]", atoms,
                    lambda key, q=q, other=other, earlier=earlier, ext=ext, gid=gid: (
                        use(key[0], q, gid)[2], tuple(key[0][p] for p in earlier),
                        (ext(key[0], other), use(key[0], other, gid)[2], ext(key[0], q)))))
            elif earlier:
                items.append(_item(
                    f"shared-later[{label}]", atoms,
                    lambda key, q=q, earlier=earlier, ext=ext, gid=gid: (
                        use(key[0], q, gid)[2], tuple(key[0][p] for p in earlier), ext(key[0], q))))
            items.append(_item(
                f"no-signaling[{label}]", atoms,
                lambda key, q=q, other=other, ext=ext: (
                    use(key[0], q, gid)[2], ext(key[0], other), ext(key[0], q))))
    return LemmaReport(tuple(items))


def inject_dependence(td: TranscriptDistribution, strength=Fraction(1, 4)) -> TranscriptDistribution:
    """Negative control: reweight atoms by the parity of two parties' last box outputs.

    The result is still normalized, but party 1's outputs now lean on party
    0's transcript, which the lemma checks must detect.
    """
    def last_out(tr):
        return tr[-1][2] if tr else 0

    weights = {}
    for key, p in td.atoms.items():
        trs = key[0]
        s = 1 + strength if (last_out(trs[0]) ^ last_out(trs[1])) == 0 else 1 - strength
        weights[key] = p * s
    total = sum(weights.values())
    return TranscriptDistribution(td.boxnet, {k: v / total for k, v in weights.items()})


# JSON ------------------------------------------------------------------------


def load_wiring(path) -> tuple[BoxNetwork, list[PartyProgram]]:
    d = json.loads(Path(path).read_text())
    try:
        return BoxNetwork.from_dict(d), [PartyProgram.from_dict(p) for p in d["programs"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise BoxworldError(f"malformed wiring file: {exc}") from exc


def wiring_to_dict(boxnet: BoxNetwork, programs: Sequence[PartyProgram]) -> dict:
    d = boxnet.to_dict()
    d["programs"] = []
    for j, prog in enumerate(programs):
        ins, outs = boxnet.io_sizes(j)
        d["programs"].append(prog.to_dict(len(ins), ins, outs))
    return d


def pr_parity_wiring() -> tuple[BoxNetwork, list[PartyProgram]]:
    """Triangle with one PR box per source; everyone inputs 0 and outputs the XOR of both box outputs."""
    boxnet = BoxNetwork(Network.triangle(), ((NSBox.pr(),),) * 3)
    prog = fixed_program([0, 0], lambda outs: outs[0] ^ outs[1])
    return boxnet, [prog, prog, prog]


def random_wiring(seed: int, *, max_boxes_per_source: int = 2, net: Network | None = None
                  ) -> tuple[BoxNetwork, list[PartyProgram]]:
    """Random binary NS boxes on each source plus seeded random adaptive wirings."""
    net = net or Network.triangle()
    rng = np.random.default_rng(seed)
    boxes = tuple(tuple(random_ns_box(rng) for _ in range(int(rng.integers(1, max_boxes_per_source + 1))))
                  for _ in net.sources)
    boxnet = BoxNetwork(net, boxes)
    programs = [random_program(seed, j, len(boxnet.local_boxes(j))) for j in range(net.n)]
    return boxnet, programs
