"""Classical strategies that saturate the Finner bound at the all-ones outcome.

Target marginals are ``p_j = P(A_j = 1) = 2^(-e_j)``. The exponents ``e_j`` act
as LP costs: the primal picks a FIS ``eta`` maximizing ``sum eta_j e_j`` and the
dual assigns each source a cost ``c_i``. Source ``i`` emits a bit ``X_i`` with
``P(X_i = 1) = 2^(-c_i)``; party ``j`` outputs the AND of bits ``Y_i^(j)`` with
``P(Y_i^(j) = 1) = 2^(-d_i^(j))`` and ``Y_i^(j) >= X_i``.

When every ``e_j`` is rational, all probabilities live in the field
``Q(2^(1/L))`` and are compared exactly there.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from ._exact import format_number, is_exact, lcm_of_denominators
from .distributions import JointDistribution
from .finner import LOG_GAP_TOL, check_probability_form
from .network import Network, enumerate_extreme_fis, maximize_fis_objective


class TightnessError(ValueError):
    pass


# exact arithmetic in Q(2^(1/L)) ---------------------------------------------------


class DyadicSurd:
    """``sum_k coeffs[k] * 2^(k/L)`` with rational coefficients.

    ``t^L - 2`` is irreducible over the rationals (Eisenstein at 2), so the
    coefficient vector is a canonical form and equality is exact.
    """

    __slots__ = ("L", "coeffs")

    def __init__(self, L: int, coeffs: Sequence):
        self.L = L
        self.coeffs = tuple(Fraction(c) for c in coeffs)
        if len(self.coeffs) != L:
            raise ValueError("coefficient vector must have length L")

    @classmethod
    def rational(cls, L: int, x) -> "DyadicSurd":
        return cls(L, [Fraction(x)] + [Fraction(0)] * (L - 1))

    @classmethod
    def pow2(cls, L: int, exponent: Fraction) -> "DyadicSurd":
        """``2^exponent``; the exponent's denominator must divide ``L``."""
        m = Fraction(exponent) * L
        if m.denominator != 1:
            raise TightnessError(f"2^{exponent} is outside Q(2^(1/{L}))")
        q, r = divmod(int(m), L)
        coeffs = [Fraction(0)] * L
        coeffs[r] = Fraction(2) ** q
        return cls(L, coeffs)

    def _same(self, other):
        if isinstance(other, DyadicSurd):
            if other.L != self.L:
                raise ValueError("mismatched fields")
            return other
        return DyadicSurd.rational(self.L, other)

    def __add__(self, other):
        other = self._same(other)
        return DyadicSurd(self.L, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return DyadicSurd(self.L, [-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-self._same(other))

    def __rsub__(self, other):
        return self._same(other) - self

    def __mul__(self, other):
        other = self._same(other)
        L = self.L
        out = [Fraction(0)] * L
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                if b == 0:
                    continue
                k = i + j
                if k >= L:
                    out[k - L] += 2 * a * b
                else:
                    out[k] += a * b
        return DyadicSurd(L, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, (DyadicSurd, int, Fraction)):
            return NotImplemented
        return self.coeffs == self._same(other).coeffs

    __hash__ = None

    def __float__(self):
        return float(sum(float(c) * 2 ** (k / self.L) for k, c in enumerate(self.coeffs)))

    def __repr__(self):
        return f"DyadicSurd({float(self)!r})"


# target parsing ------------------------------------------------------------------

_POW_RE = re.compile(r"^\s*2\s*\^\s*\(?\s*(-?\s*[0-9]+(?:\s*/\s*[0-9]+)?)\s*\)?\s*$")


def exponent_of(p) -> Fraction | float:
    """``-log2 p`` as an exact rational when ``p`` is written ``2^(-u/v)`` or is ``2^(-k)``; else a float.

    Accepts strings such as ``"2^-3/2"``, ``"1/4"``, ``"0.3"``, Fractions and floats.
    """
    if isinstance(p, str):
        m = _POW_RE.match(p)
        if m:
            e = -Fraction(m.group(1).replace(" ", ""))
            if e < 0:
                raise TightnessError(f"target {p!r} exceeds 1")
            return e
        try:
            p = Fraction(p.strip())
        except ValueError:
            p = float(p)
    if is_exact(p):
        p = Fraction(p)
        if not 0 < p <= 1:
            raise TightnessError(f"targets must lie in (0, 1], got {p}")
        if p.numerator == 1 and p.denominator & (p.denominator - 1) == 0:
            return Fraction(p.denominator.bit_length() - 1)
        return -math.log2(p)
    p = float(p)
    if not 0 < p <= 1:
        raise TightnessError(f"targets must lie in (0, 1], got {p}")
    return -math.log2(p)


# certificate ----------------------------------------------------------------------


@dataclass(frozen=True)
class TightnessCertificate:
    net: Network
    exponents: tuple  # e_j = -log2 p_j
    eta: tuple[Fraction, ...]
    source_costs: tuple[Fraction, ...]  # c_i per constraint set (sources, then isolated parties)
    slack_parties: tuple[int, ...]  # E: incident costs exceed the party's exponent
    tight_parties: tuple[int, ...]  # F
    splits: dict  # (constraint index, party) -> d_i^(j)
    exact: bool

    @property
    def field_degree(self) -> int:
        return lcm_of_denominators([*self.exponents, *self.source_costs, *self.splits.values()]) if self.exact else 0

    def to_dict(self) -> dict:
        fmt = format_number if self.exact else float
        return {
            "network": self.net.to_dict(),
            "exponents": [fmt(e) for e in self.exponents],
            "eta": [format_number(e) for e in self.eta],
            "source_costs": [fmt(c) for c in self.source_costs],
            "slack_parties": list(self.slack_parties),
            "tight_parties": list(self.tight_parties),
            "splits": [[i, j, fmt(d)] for (i, j), d in sorted(self.splits.items())],
            "exact": self.exact,
            "bernoulli": [f"2^-{format_number(c)}" for c in self.source_costs] if self.exact
            else [2.0 ** -float(c) for c in self.source_costs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TightnessCertificate":
        exact = bool(d["exact"])
        conv = Fraction if exact else float
        return cls(
            Network.from_dict(d["network"]),
            tuple(conv(e) for e in d["exponents"]),
            tuple(Fraction(e) for e in d["eta"]),
            tuple(conv(c) for c in d["source_costs"]),
            tuple(d["slack_parties"]),
            tuple(d["tight_parties"]),
            {(int(i), int(j)): conv(v) for i, j, v in d["splits"]},
            exact,
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "TightnessCertificate":
        return cls.from_dict(json.loads(Path(path).read_text()))


def build_certificate(net: Network, targets: Sequence, *, backend: str | None = None) -> TightnessCertificate:
    """Solve the primal/dual LPs for ``targets`` and fix the per-party splits.

    ``backend="exact"`` requires every target to be a rational power of 2;
    ``"float"`` accepts any target in (0, 1]; ``None`` picks exact when possible.
    """
    if len(targets) != net.n:
        raise TightnessError(f"expected {net.n} targets, got {len(targets)}")
    exps = [exponent_of(p) for p in targets]
    exact = all(isinstance(e, Fraction) for e in exps)
    if backend == "exact" and not exact:
        raise TightnessError("exact path needs every target of the form 2^(-u/v)")
    if backend == "float":
        exact = False
    costs = [Fraction(e) if exact else Fraction(float(e)) for e in exps]
    opt = maximize_fis_objective(net, costs)
    sets = net.constraint_sets
    c = list(opt.dual)
    slack, tight = [], []
    for j in range(net.n):
        inc = [i for i, s in enumerate(sets) if j in s]
        (slack if sum(c[i] for i in inc) > costs[j] else tight).append(j)
    splits = {}
    for j in range(net.n):
        inc = [i for i, s in enumerate(sets) if j in s]
        if j in tight:
            for i in inc:
                splits[(i, j)] = c[i]
        else:
            need = costs[j]
            for i in inc:
                d = min(c[i], need)
                splits[(i, j)] = d
                need -= d
    for i, s in enumerate(sets):
        if c[i] > 0 and not any(j in tight for j in s):
            raise TightnessError(f"source {i} has positive cost but no tight party")
    if not exact:
        exps = [float(e) for e in exps]
        c = [float(x) for x in c]
        splits = {k: float(v) for k, v in splits.items()}
    return TightnessCertificate(net, tuple(exps), tuple(opt.eta), tuple(c), tuple(slack), tuple(tight), splits, exact)


def _source_law(levels: dict, c, pow2):
    """Joint law of a source's bits via one uniform threshold.

    ``X = [U <= 2^-c]`` and ``Y^(j) = [U <= 2^-d_j]``; since ``d_j <= c`` this gives
    ``Y^(j) >= X`` with the required marginals. Returns ``[(prob, parties with Y = 1)]``.
    """
    cuts = sorted(set([c, *levels.values()]), reverse=True)  # exponents, largest first = smallest threshold
    out = []
    prev = None
    for k, e in enumerate(cuts):
        lo = pow2(-cuts[k - 1]) if k else 0
        prob = pow2(-e) - lo
        ones = tuple(j for j, d in levels.items() if d <= e)
        out.append((prob, ones))
        prev = e
    top = 1 - pow2(-prev) if prev is not None else 1
    out.append((top, ()))
    return out


def joint_distribution(cert: TightnessCertificate):
    """Exact (or float) table of ``P(a_1..a_n)`` as a dict ``outcome -> probability``."""
    n = cert.net.n
    sets = cert.net.constraint_sets
    if cert.exact:
        L = cert.field_degree

        def pow2(e):
            return DyadicSurd.pow2(L, Fraction(e))
        zero = DyadicSurd.rational(L, 0)
    else:
        def pow2(e):
            return 2.0 ** float(e)
        zero = 0.0
    laws = []
    for i, s in enumerate(sets):
        levels = {j: cert.splits[(i, j)] for j in s}
        if any(d > cert.source_costs[i] for d in levels.values()):
            raise TightnessError(f"split exceeds the source cost on constraint {i}")
        laws.append(_source_law(levels, cert.source_costs[i], pow2))
    table = {}
    for combo in itertools.product(*laws):
        prob = None
        ones_count = [0] * n
        for p, ones in combo:
            prob = p if prob is None else prob * p
            for j in ones:
                ones_count[j] += 1
        if prob is None:
            prob = pow2(0)
        outcome = tuple(int(ones_count[j] == sum(1 for s in sets if j in s)) for j in range(n))
        table[outcome] = table.get(outcome, zero) + prob
    return table


@dataclass(frozen=True)
class VerificationReport:
    marginals_ok: bool
    saturation_ok: bool
    finner_ok: bool
    all_ones: object
    bound: object
    marginals: tuple
    messages: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return self.marginals_ok and self.saturation_ok and self.finner_ok

    def to_dict(self) -> dict:
        return {"passed": self.passed, "marginals_ok": self.marginals_ok, "saturation_ok": self.saturation_ok,
                "finner_ok": self.finner_ok, "all_ones": float(self.all_ones), "bound": float(self.bound),
                "marginals": [float(m) for m in self.marginals], "messages": list(self.messages)}


def verify_certificate(cert: TightnessCertificate, *, tol: float = LOG_GAP_TOL) -> VerificationReport:
    """Rebuild the joint law from the certificate and check marginals, saturation and every Finner inequality."""
    n = cert.net.n
    table = joint_distribution(cert)
    msgs = []
    if cert.exact:
        L = cert.field_degree

        def pow2(e):
            return DyadicSurd.pow2(L, Fraction(e))

        def same(a, b):
            return a == b
        zero = DyadicSurd.rational(L, 0)
    else:
        def pow2(e):
            return 2.0 ** float(e)

        def same(a, b):
            return abs(float(a) - float(b)) <= tol
        zero = 0.0
    marg = []
    for j in range(n):
        m = zero
        for outcome, p in table.items():
            if outcome[j] == 1:
                m = m + p
        marg.append(m)
    marginals_ok = True
    for j in range(n):
        if not same(marg[j], pow2(-cert.exponents[j])):
            marginals_ok = False
            msgs.append(f"party {j}: P(A=1) = {float(marg[j]):.12g}, target {2.0 ** -float(cert.exponents[j]):.12g}")
    total = sum((p for p in table.values()), zero)
    if not same(total, pow2(0)):
        marginals_ok = False
        msgs.append("joint law is not normalized")
    ones = table.get((1,) * n, zero)
    weighted = sum((e * x for e, x in zip(cert.eta, cert.exponents)), Fraction(0) if cert.exact else 0.0)
    bound = pow2(-weighted)
    saturation_ok = same(ones, bound)
    if not saturation_ok:
        msgs.append(f"P(1..1) = {float(ones):.12g} differs from the bound {float(bound):.12g}")
    arr = np.zeros((2,) * n)
    for outcome, p in table.items():
        arr[outcome] = float(p)
    P = JointDistribution(arr, "float", check=False)
    rep = check_probability_form(cert.net, P, enumerate_extreme_fis(cert.net), tol=tol)
    finner_ok = not rep.violated
    if not finner_ok:
        msgs.append(f"Finner inequality violated at {rep.worst.eta}, outcome {rep.worst.outcome}")
    return VerificationReport(marginals_ok, saturation_ok, finner_ok, ones, bound, tuple(marg), tuple(msgs))


def certificate_distribution(cert: TightnessCertificate) -> JointDistribution:
    """Float view of the constructed distribution (for export and inspection)."""
    arr = np.zeros((2,) * cert.net.n)
    for outcome, p in joint_distribution(cert).items():
        arr[outcome] = float(p)
    return JointDistribution(arr, "float", check=False)


def perturbed(cert: TightnessCertificate, source: int = 0, delta=Fraction(1, 7)) -> TightnessCertificate:
    """Negative control: raise one source cost (and its splits) without re-solving."""
    costs = list(cert.source_costs)
    costs[source] = costs[source] + delta
    splits = {k: (v + delta if k[0] == source and v == cert.source_costs[source] else v) for k, v in cert.splits.items()}
    return TightnessCertificate(cert.net, cert.exponents, cert.eta, tuple(costs), cert.slack_parties,
                                cert.tight_parties, splits, cert.exact)


def random_dyadic_targets(rng: np.random.Generator, n: int, *, max_num: int = 6, denominators=(1, 2, 3, 4)) -> list[str]:
    """Targets ``2^(-u/v)`` as strings."""
    out = []
    for _ in range(n):
        v = int(rng.choice(denominators))
        u = int(rng.integers(0, max_num * v + 1))
        out.append(f"2^-{Fraction(u, v)}")
    return out
