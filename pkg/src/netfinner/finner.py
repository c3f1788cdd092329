"""Finner inequalities for network distributions: checks, region scans, topology tests."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from ._exact import is_exact, lcm_of_denominators
from .distributions import JointDistribution, check_bilocal_factorization, pq, r_mix
from .network import Network, enumerate_extreme_fis, is_fis

LOG_GAP_TOL = 1e-9


class FinnerError(ValueError):
    pass


@dataclass(frozen=True)
class FinnerEntry:
    eta: tuple
    outcome: tuple  # None marks a party summed out (marginal form)
    lhs: float
    rhs: float
    log_gap: float
    violated: bool


@dataclass
class FinnerReport:
    entries: list[FinnerEntry]
    exact: bool
    tol: float
    verdict: str = field(init=False)
    worst: FinnerEntry | None = field(init=False)

    def __post_init__(self):
        live = [e for e in self.entries if e.lhs > 0]
        self.worst = max(live, key=lambda e: (e.violated, e.log_gap), default=None)
        self.verdict = "violated" if any(e.violated for e in self.entries) else "satisfied"

    @property
    def violated(self) -> bool:
        return self.verdict == "violated"

    def violations(self) -> list[FinnerEntry]:
        return [e for e in self.entries if e.violated]

    def to_dict(self) -> dict:
        def ent(e):
            return {
                "eta": [str(x) if is_exact(x) else x for x in e.eta],
                "outcome": list(e.outcome),
                "lhs": e.lhs,
                "rhs": e.rhs,
                "log_gap": e.log_gap if math.isfinite(e.log_gap) else str(e.log_gap),
                "violated": e.violated,
            }

        return {
            "verdict": self.verdict,
            "exact": self.exact,
            "tol": self.tol,
            "worst": ent(self.worst) if self.worst else None,
            "violations": [ent(e) for e in self.violations()],
        }


def _exact_violates(lhs: Fraction, margs: Sequence[Fraction], eta: Sequence[Fraction]) -> bool:
    """``lhs > prod m_j^eta_j`` decided by raising both sides to the lcm of the exponent denominators."""
    L = lcm_of_denominators(eta)
    rhs = Fraction(1)
    for m, e in zip(margs, eta):
        k = e * L
        assert k.denominator == 1
        rhs *= Fraction(m) ** int(k)
    return Fraction(lhs) ** L > rhs


def _entry(lhs, margs, eta, tol, exact, outcome) -> FinnerEntry:
    eta_f = [float(e) for e in eta]
    lhs_f = float(lhs)
    rhs_f = math.prod(float(m) ** e for m, e in zip(margs, eta_f) if e != 0)
    if lhs == 0:
        return FinnerEntry(tuple(eta), outcome, 0.0, rhs_f, -math.inf, False)
    if any(m == 0 for m, e in zip(margs, eta_f) if e != 0):
        # positive joint probability under a zero marginal: inconsistent input
        return FinnerEntry(tuple(eta), outcome, lhs_f, 0.0, math.inf, True)
    gap = math.log(lhs_f) - sum(e * math.log(float(m)) for m, e in zip(margs, eta_f) if e != 0)
    violated = _exact_violates(lhs, margs, eta) if exact else gap > tol
    return FinnerEntry(tuple(eta), outcome, lhs_f, rhs_f, gap, violated)


def _resolve_fis(net: Network, P: JointDistribution, fis):
    if P.n != net.n:
        raise FinnerError(f"distribution has {P.n} parties, network has {net.n}")
    if fis is None:
        return list(enumerate_extreme_fis(net))
    out = []
    for eta in fis:
        eta = tuple(Fraction(e) if is_exact(e) else float(e) for e in eta)
        if not is_fis(net, eta):
            raise FinnerError(f"{eta} is not a fractional independent set of the network")
        out.append(eta)
    return out


def check_probability_form(
    net: Network,
    P: JointDistribution,
    fis: Sequence[Sequence] | None = None,
    *,
    tol: float = LOG_GAP_TOL,
    backend: str | None = None,
    marginal_forms: bool = False,
) -> FinnerReport:
    """Check ``P(a) <= prod_j P_j(a_j)^eta_j`` for every outcome and every supplied FIS.

    ``fis`` defaults to the extreme points of the FIS polytope. The comparison is
    exact when ``P`` is rational and all weights are rational, unless
    ``backend="float"``. With ``marginal_forms`` each FIS is also checked on the
    marginal over its support (constant functions on the zero-weight parties).
    """
    etas = _resolve_fis(net, P, fis)
    margs = P.marginals()
    entries = []
    for eta in etas:
        exact = backend != "float" and P.exact and all(is_exact(e) for e in eta)
        for a in P.outcomes():
            m = [margs[j][a[j]] for j in range(P.n)]
            entries.append(_entry(P[a], m, eta, tol, exact, a))
        support = [j for j in range(P.n) if eta[j] != 0]
        if marginal_forms and 0 < len(support) < P.n:
            Q = P.marginal(support)
            for b in Q.outcomes():
                m = [margs[j][bj] for j, bj in zip(support, b)]
                full = [None] * P.n
                for j, bj in zip(support, b):
                    full[j] = bj
                e = _entry(Q[b], m, [eta[j] for j in support], tol, exact, tuple(full))
                entries.append(replace(e, eta=tuple(eta)))
    exact_all = backend != "float" and P.exact and all(is_exact(e) for eta in etas for e in eta)
    return FinnerReport(entries, exact_all, tol)


@dataclass(frozen=True)
class FunctionFormResult:
    lhs: float
    rhs: float
    violated: bool


def weighted_norm(f: np.ndarray, weights: np.ndarray, eta: float) -> float:
    """``(E f^(1/eta))^eta`` under ``weights``; the sup over the support when ``eta == 0``."""
    f = np.asarray(f, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if eta == 0:
        supp = weights > 0
        return float(f[supp].max()) if supp.any() else 0.0
    return float(np.dot(weights, f ** (1.0 / eta)) ** eta)


def check_function_form(
    net: Network | None,
    P: JointDistribution,
    eta: Sequence,
    functions: Sequence[Sequence[float]],
    *,
    tol: float = LOG_GAP_TOL,
) -> FunctionFormResult:
    """Compare ``<prod_j f_j>`` with ``prod_j ||f_j||_{1/eta_j}`` (norms under the marginals)."""
    if net is not None:
        if net.n != P.n:
            raise FinnerError(f"distribution has {P.n} parties, network has {net.n}")
        if not is_fis(net, list(eta)):
            raise FinnerError(f"{tuple(eta)} is not a fractional independent set of the network")
    if len(functions) != P.n or len(eta) != P.n:
        raise FinnerError("need one function and one weight per party")
    fs = [np.asarray(f, dtype=float) for f in functions]
    for j, f in enumerate(fs):
        if f.shape != (P.alphabets[j],):
            raise FinnerError(f"function {j} has shape {f.shape}, expected ({P.alphabets[j]},)")
        if np.any(f < 0):
            raise FinnerError("functions must be non-negative")
    table = P.table.astype(float)
    lhs = table
    for j, f in enumerate(fs):
        shape = [1] * P.n
        shape[j] = -1
        lhs = lhs * f.reshape(shape)
    lhs = float(lhs.sum())
    margs = [m.astype(float) for m in P.marginals()]
    rhs = math.prod(weighted_norm(f, m, float(e)) for f, m, e in zip(fs, margs, eta))
    if lhs == 0:
        violated = False
    elif rhs == 0:
        violated = True
    else:
        violated = math.log(lhs) - math.log(rhs) > tol
    return FunctionFormResult(lhs, rhs, violated)


# batched evaluation for scans ----------------------------------------------


def batch_log_gaps(tables: np.ndarray, etas: Sequence[Sequence]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Worst Finner log-gap per distribution for a stack of float tables.

    ``tables`` has shape ``(N, k_1, ..., k_n)``. Returns ``(gap, lhs, rhs)`` for
    the worst (FIS, outcome) of each distribution.
    """
    tables = np.asarray(tables, dtype=float)
    N, n = tables.shape[0], tables.ndim - 1
    with np.errstate(divide="ignore", invalid="ignore"):
        log_p = np.log(tables)
        log_m = []
        for j in range(n):
            axes = tuple(k for k in range(1, n + 1) if k != j + 1)
            m = tables.sum(axis=axes)
            shape = [N] + [1] * n
            shape[j + 1] = -1
            log_m.append(np.log(m).reshape(shape))
        best_gap = np.full(N, -np.inf)
        best_lhs = np.zeros(N)
        best_rhs = np.zeros(N)
        for eta in etas:
            log_rhs = np.zeros_like(tables)
            for j, e in enumerate(eta):
                if e != 0:
                    log_rhs = log_rhs + float(e) * log_m[j]
            gap = np.where(tables > 0, log_p - log_rhs, -np.inf).reshape(N, -1)
            idx = gap.argmax(axis=1)
            g = gap[np.arange(N), idx]
            better = g > best_gap
            best_gap = np.where(better, g, best_gap)
            best_lhs = np.where(better, tables.reshape(N, -1)[np.arange(N), idx], best_lhs)
            best_rhs = np.where(better, np.exp(log_rhs.reshape(N, -1)[np.arange(N), idx]), best_rhs)
    return best_gap, best_lhs, best_rhs


def _chunked(fn, n_items: int, jobs: int):
    if jobs <= 1 or n_items < 2 * jobs:
        return fn(0, n_items)
    bounds = np.linspace(0, n_items, jobs + 1).astype(int)
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        parts = list(ex.map(lambda k: fn(bounds[k], bounds[k + 1]), range(jobs)))
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(len(parts[0])))


def pq_boundary(p):
    """``1 + p - 2 p^(2/3)``: above this ``q`` the outcome-000 inequality fails."""
    p = np.asarray(p, dtype=float)
    return 1 + p - 2 * np.cbrt(p) ** 2


def pq_analytic_violation(p, q):
    """Closed-form violation of the triangle inequality for ``P_{p,q}``.

    Outcome 000 fails when ``q > 1 + p - 2 p^(2/3)`` and, by the symmetric
    argument, outcome 111 fails when ``p > 1 + q - 2 q^(2/3)``.
    """
    return (np.asarray(q) > pq_boundary(p) + 1e-12) | (np.asarray(p) > pq_boundary(q) + 1e-12)


@dataclass
class RegionScan:
    """Grid scan of a distribution family against the triangle inequality."""

    params: dict[str, np.ndarray]
    verdict: np.ndarray  # bool, True = violated
    lhs: np.ndarray
    rhs: np.ndarray
    log_gap: np.ndarray
    analytic_boundary: np.ndarray
    analytic_verdict: np.ndarray
    grid_n: int

    def __len__(self):
        return len(self.verdict)

    def rows(self):
        names = list(self.params)
        for k in range(len(self)):
            yield [*(float(self.params[nm][k]) for nm in names), "violated" if self.verdict[k] else "satisfied",
                   float(self.lhs[k]), float(self.rhs[k]), float(self.analytic_boundary[k])]

    def to_csv(self, target=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([*self.params, "verdict", "lhs", "rhs", "analytic_boundary"])
        for row in self.rows():
            writer.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])
        text = buf.getvalue()
        if target is not None:
            with open(target, "w", newline="") as fh:
                fh.write(text)
        return text


def _triangle_etas():
    return list(enumerate_extreme_fis(Network.triangle()))


def pq_tables(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    p, q = np.asarray(p, float), np.asarray(q, float)
    t = np.repeat(((1 - p - q) / 6)[:, None], 8, axis=1)
    t[:, 0], t[:, 7] = p, q
    return t.reshape(-1, 2, 2, 2)


def r_tables(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, float)
    t = np.repeat(((1 - r) / 8)[:, None], 8, axis=1)
    t[:, 7] += r
    return t.reshape(-1, 2, 2, 2)


def scan_pq_region(grid_n: int, *, tol: float = LOG_GAP_TOL, jobs: int = 1) -> RegionScan:
    """Check ``P_{p,q}`` on the lattice ``p, q in {0, 1/grid_n, ..., 1}`` with ``p + q <= 1``."""
    if grid_n < 2:
        raise FinnerError("grid_n must be at least 2")
    i, j = np.meshgrid(np.arange(grid_n + 1), np.arange(grid_n + 1), indexing="ij")
    keep = (i + j) <= grid_n
    p, q = i[keep] / grid_n, j[keep] / grid_n
    etas = _triangle_etas()
    gap, lhs, rhs = _chunked(lambda a, b: batch_log_gaps(pq_tables(p[a:b], q[a:b]), etas), len(p), jobs)
    return RegionScan({"p": p, "q": q}, gap > tol, lhs, rhs, gap, pq_boundary(p),
                      pq_analytic_violation(p, q), grid_n)


def scan_r_line(grid_n: int, *, tol: float = LOG_GAP_TOL, jobs: int = 1) -> RegionScan:
    """Check ``r d_111 + (1-r) P_u`` for ``r in {0, 1/grid_n, ..., 1}``."""
    if grid_n < 2:
        raise FinnerError("grid_n must be at least 2")
    r = np.arange(grid_n + 1) / grid_n
    etas = _triangle_etas()
    gap, lhs, rhs = _chunked(lambda a, b: batch_log_gaps(r_tables(r[a:b]), etas), len(r), jobs)
    analytic = (r > 7 / 8) & (r < 1)
    return RegionScan({"r": r}, gap > tol, lhs, rhs, gap, np.full(len(r), 7 / 8), analytic, grid_n)


def violation_interval(scan: RegionScan) -> tuple[float, float] | None:
    """Smallest and largest violated parameter of a one-parameter scan."""
    (name,) = scan.params
    v = scan.params[name][scan.verdict]
    return (float(v.min()), float(v.max())) if len(v) else None


def check_pq(p, q, **kw) -> FinnerReport:
    return check_probability_form(Network.triangle(), pq(p, q), **kw)


def check_r(r, **kw) -> FinnerReport:
    return check_probability_form(Network.triangle(), r_mix(r), **kw)


# topology certification ----------------------------------------------------


@dataclass
class TopologyVerdict:
    name: str
    status: str  # "ruled_out" | "compatible_so_far"
    witness: FinnerEntry | None
    report: FinnerReport
    factorization: object = None
    note: str = ""

    def to_dict(self) -> dict:
        d = {"network": self.name, "status": self.status, "note": self.note}
        if self.witness is not None:
            d["witness"] = {"eta": [str(e) for e in self.witness.eta], "outcome": list(self.witness.outcome),
                            "lhs": self.witness.lhs, "rhs": self.witness.rhs}
        if self.factorization is not None:
            dev = self.factorization.max_deviation
            d["bilocal_factorization"] = {"max_deviation": str(dev) if is_exact(dev) else float(dev),
                                          "passed": self.factorization.passed}
        return d


COMPATIBLE_NOTE = "no Finner violation found; this is a necessary condition only and does not establish achievability"


def _is_bilocality_type(net: Network) -> bool:
    if net.n != 3 or len(net.sources) != 2 or not net.bipartite_only:
        return False
    return {frozenset(s) for s in net.sources} == {frozenset((0, 1)), frozenset((1, 2))}


def certify_topology(
    P: JointDistribution,
    candidates: Mapping[str, Network] | Sequence[Network],
    *,
    tol: float = LOG_GAP_TOL,
    backend: str | None = None,
) -> list[TopologyVerdict]:
    """Rule out candidate networks whose Finner inequalities ``P`` violates."""
    if not isinstance(candidates, Mapping):
        candidates = {f"network{k}": net for k, net in enumerate(candidates)}
    out = []
    for name, net in candidates.items():
        if net.n != P.n:
            raise FinnerError(f"candidate {name!r} has {net.n} parties, distribution has {P.n}")
        rep = check_probability_form(net, P, tol=tol, backend=backend, marginal_forms=True)
        fact = check_bilocal_factorization(P, tol=max(tol, 1e-12)) if _is_bilocality_type(net) else None
        ruled = rep.violated or (fact is not None and not fact.passed)
        witness = rep.worst if rep.violated else None
        out.append(TopologyVerdict(name, "ruled_out" if ruled else "compatible_so_far", witness, rep, fact,
                                   "" if ruled else COMPATIBLE_NOTE))
    return out
