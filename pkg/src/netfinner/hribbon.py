"""Hypercontractivity-ribbon membership tests.

A point ``eta`` lies in the ribbon of ``P`` when ``<prod_j f_j> <= prod_j ||f_j||_{1/eta_j}``
for all functions, equivalently when ``I(U; A_1..A_n) >= sum_j eta_j I(U; A_j)``
for every auxiliary ``U``. Both routes below search for a violation; finding
none only means ``member_up_to_search``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from . import infotheory
from .distributions import JointDistribution
from .finner import LOG_GAP_TOL, check_function_form, check_probability_form
from .network import Network, enumerate_extreme_fis

MEMBER = "member"
MEMBER_UP_TO_SEARCH = "member_up_to_search"
NOT_MEMBER = "not_member"


@dataclass(frozen=True)
class RibbonVerdict:
    status: str
    point: tuple[float, ...]
    route: str  # "norms" | "mutual_information" | "finner"
    value: float | None = None  # best log-ratio (norms) or deficit in bits (MI)
    witness: dict | None = field(default=None)

    @property
    def member(self) -> bool:
        return self.status != NOT_MEMBER

    def to_dict(self) -> dict:
        return {"status": self.status, "point": [float(x) for x in self.point], "route": self.route,
                "value": self.value, "witness": self.witness}


def _check_point(P: JointDistribution, point) -> tuple[float, ...]:
    point = tuple(float(x) for x in point)
    if len(point) != P.n:
        raise ValueError(f"point has {len(point)} entries for {P.n} parties")
    if any(not 0 <= x <= 1 for x in point):
        raise ValueError("ribbon points must lie in [0, 1]^n")
    return point


def _forced(point) -> bool:
    """With at most one positive coordinate the inequality holds for every distribution."""
    return sum(1 for x in point if x > 0) <= 1


# norm route --------------------------------------------------------------------


def _expand(f, j, n):
    shape = [1] * n
    shape[j] = -1
    return np.asarray(f).reshape(shape)


def _log_ratio(table, margs, fs, point) -> float:
    n = table.ndim
    lhs = table
    for j, f in enumerate(fs):
        lhs = lhs * _expand(f, j, n)
    lhs = lhs.sum()
    if lhs <= 0:
        return -math.inf
    log_rhs = 0.0
    for f, m, e in zip(fs, margs, point):
        supp = m > 0
        if e == 0:
            norm = f[supp].max()
        else:
            norm = float(m @ f ** (1 / e)) ** e
        if norm <= 0:
            return math.inf
        log_rhs += math.log(norm)
    return math.log(lhs) - log_rhs


def _best_response(table, margs, fs, j, e):
    """Optimal non-negative ``f_j`` for the ratio with the other functions fixed."""
    n = table.ndim
    w = table
    for k, f in enumerate(fs):
        if k != j:
            w = w * _expand(f, k, n)
    axes = tuple(k for k in range(n) if k != j)
    weight = w.sum(axis=axes)  # = P_j(a) * E[prod_{k != j} f_k | a]
    m = margs[j]
    psi = np.where(m > 0, weight / np.where(m > 0, m, 1), 0.0)
    if psi.max() <= 0:
        return fs[j]
    if e >= 1:
        out = (psi == psi.max()).astype(float)
    elif e == 0:
        out = (m > 0).astype(float)
    else:
        out = (psi / psi.max()) ** (e / (1 - e))
    return out


def falsify_by_norms(P: JointDistribution, point, *, restarts: int = 20, iters: int = 200, seed: int = 0,
                     tol: float = LOG_GAP_TOL) -> RibbonVerdict:
    """Alternating best-response search for functions violating the norm inequality.

    Starts from every combination of single-outcome indicators (when there are
    at most 4096) plus ``restarts`` random non-negative starts. A violation is
    re-checked with the Finner function-form evaluator before it is reported.
    """
    point = _check_point(P, point)
    if _forced(point):
        return RibbonVerdict(MEMBER, point, "norms", None)
    table = P.table.astype(float)
    margs = [m.astype(float) for m in P.marginals()]
    n = P.n
    rng = np.random.default_rng(seed)
    starts = []
    if math.prod(P.alphabets) <= 4096:
        for outcome in P.outcomes():
            starts.append([np.eye(k)[a] for k, a in zip(P.alphabets, outcome)])
    for _ in range(restarts):
        starts.append([rng.random(k) for k in P.alphabets])
    best = (-math.inf, None)
    for fs in starts:
        fs = [f.copy() for f in fs]
        prev = _log_ratio(table, margs, fs, point)
        for _ in range(iters):
            for j in range(n):
                fs[j] = _best_response(table, margs, fs, j, point[j])
            cur = _log_ratio(table, margs, fs, point)
            if cur - prev < 1e-14:
                prev = max(cur, prev)
                break
            prev = cur
        if prev > best[0]:
            best = (prev, [f.copy() for f in fs])
        if prev > tol:
            check = check_function_form(None, P, point, fs, tol=tol)
            if check.violated:
                witness = {"functions": [f.tolist() for f in fs], "lhs": check.lhs, "rhs": check.rhs}
                return RibbonVerdict(NOT_MEMBER, point, "norms", prev, witness)
    return RibbonVerdict(MEMBER_UP_TO_SEARCH, point, "norms", best[0])


# mutual-information route --------------------------------------------------------


def channel_deficit(P: JointDistribution, channel: np.ndarray, point) -> float:
    """``sum_j eta_j I(U;A_j) - I(U;A_1..A_n)`` in bits for ``channel[x..., u] = Q(u|x)``."""
    table = P.table.astype(float)
    joint = table[..., None] * channel
    atoms = {idx: p for idx, p in np.ndenumerate(joint) if p > 0}
    n = P.n
    u = [n]
    total = -infotheory.mutual_information(atoms, u, list(range(n)))
    for j, e in enumerate(point):
        if e:
            total += e * infotheory.mutual_information(atoms, u, [j])
    return total


def _softmax(theta):
    z = theta - theta.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _deficit_and_grad(theta, px, margs, point, shape, k):
    """Deficit (nats) and its gradient with respect to the logits."""
    n = len(shape)
    th = theta.reshape(-1, k)
    Q = _softmax(th).reshape(*shape, k)
    pxu = px[..., None] * Q
    qu = pxu.reshape(-1, k).sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_qu = np.log(qu)
        G = -(np.log(Q) - log_qu)
        val = -np.sum(np.where(pxu > 0, pxu * (np.log(Q) - log_qu), 0.0))
        for j, e in enumerate(point):
            if e == 0:
                continue
            axes = tuple(a for a in range(n) if a != j)
            pju = pxu.sum(axis=axes)  # (k_j, k)
            qj = np.where(margs[j][:, None] > 0, pju / margs[j][:, None], 0.0)
            lr = np.where(qj > 0, np.log(qj) - log_qu, 0.0)
            val += e * np.sum(np.where(pju > 0, pju * lr, 0.0))
            G = G + e * _expand(lr, j, n + 1).reshape([*(shape[a] if a == j else 1 for a in range(n)), k])
    G = px[..., None] * G
    G = G.reshape(-1, k)
    Qf = Q.reshape(-1, k)
    grad = Qf * (G - (Qf * G).sum(axis=1, keepdims=True))
    return val, grad.ravel()


def _structured_channels(shape, k):
    """Deterministic channels: ``U`` copies the whole outcome, or one party's output."""
    size = math.prod(shape)
    out = []
    if k >= size:
        ch = np.zeros((*shape, k))
        for i, idx in enumerate(np.ndindex(*shape)):
            ch[idx + (i,)] = 1.0
        out.append(ch)
    for j, kj in enumerate(shape):
        if k >= kj:
            ch = np.zeros((*shape, k))
            for idx in np.ndindex(*shape):
                ch[idx + (idx[j],)] = 1.0
            out.append(ch)
    return out


def falsify_by_mutual_information(P: JointDistribution, point, *, u_cap: int | None = None, restarts: int = 20,
                                  seed: int = 0, tol: float = LOG_GAP_TOL, maxiter: int = 500) -> RibbonVerdict:
    """Search channels ``Q(u|x)`` maximizing ``sum_j eta_j I(U;A_j) - I(U;A)``; positive means not a member.

    Copy channels are tried first, then ``restarts`` random softmax channels are
    improved with L-BFGS. Any positive deficit is recomputed from entropies.
    """
    point = _check_point(P, point)
    if _forced(point):
        return RibbonVerdict(MEMBER, point, "mutual_information", None)
    shape = P.alphabets
    k = u_cap or math.prod(shape)
    if k < 2:
        raise ValueError("the auxiliary variable needs at least two values")
    px = P.table.astype(float)
    margs = [m.astype(float) for m in P.marginals()]
    best = (-math.inf, None)

    def consider(ch):
        nonlocal best
        d = channel_deficit(P, ch, point)
        if d > best[0]:
            best = (d, ch)
        return d > tol

    for ch in _structured_channels(shape, k):
        if consider(ch):
            break
    else:
        rng = np.random.default_rng(seed)
        for _ in range(restarts):
            theta0 = rng.normal(scale=2.0, size=math.prod(shape) * k)
            res = minimize(lambda th: tuple(-v for v in _deficit_and_grad(th, px, margs, point, shape, k)),
                           theta0, jac=True, method="L-BFGS-B", options={"maxiter": maxiter})
            ch = _softmax(res.x.reshape(-1, k)).reshape(*shape, k)
            if consider(ch):
                break
    d, ch = best
    if d > tol:
        witness = {"channel": ch.tolist(), "deficit_bits": d}
        return RibbonVerdict(NOT_MEMBER, point, "mutual_information", d, witness)
    return RibbonVerdict(MEMBER_UP_TO_SEARCH, point, "mutual_information", d)


# adapter over the Finner checker ------------------------------------------------


def finner_as_ribbon(net: Network, P: JointDistribution, *, tol: float = LOG_GAP_TOL) -> list[RibbonVerdict]:
    """One verdict per extreme FIS: a violated probability-form inequality is an indicator-function witness."""
    out = []
    for eta in enumerate_extreme_fis(net):
        point = tuple(float(e) for e in eta)
        rep = check_probability_form(net, P, [eta], tol=tol)
        if rep.violated:
            w = rep.worst
            fs = [np.eye(k)[a].tolist() for k, a in zip(P.alphabets, w.outcome)]
            out.append(RibbonVerdict(NOT_MEMBER, point, "finner", float(w.log_gap),
                                     {"functions": fs, "outcome": list(w.outcome)}))
        else:
            status = MEMBER if _forced(point) else MEMBER_UP_TO_SEARCH
            out.append(RibbonVerdict(status, point, "finner", None))
    return out


def coarsen(P: JointDistribution, maps: Sequence[Sequence[int]]) -> JointDistribution:
    """Apply deterministic relabelings ``a_j -> maps[j][a_j]`` to every party."""
    sizes = [max(m) + 1 for m in maps]
    table = np.zeros(sizes, dtype=object if P.exact else float)
    if P.exact:
        table[...] = 0
    for outcome in P.outcomes():
        table[tuple(m[a] for m, a in zip(maps, outcome))] += P[outcome]
    return JointDistribution(table, P.backend)


def tensor_square(P: JointDistribution) -> JointDistribution:
    """Two independent copies, each party holding the pair of its outputs."""
    n = P.n
    t = np.multiply.outer(P.table, P.table)
    order = [ax for j in range(n) for ax in (j, n + j)]
    t = np.transpose(t, order).reshape([k * k for k in P.alphabets])
    return JointDistribution(t, P.backend, check=False)
