"""Acceptance checks, one PASS/FAIL line each.

Run under pytest (lines are printed even with output capture on) or directly:
``python tests/test_acceptance.py``.
"""

import itertools
import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from netfinner import boxworld, cube, hribbon, quantum, tightness
from netfinner.distributions import check_bilocal_factorization, ghz, r_mix, uniform, w
from netfinner.finner import check_function_form, check_probability_form, pq_boundary, scan_pq_region, scan_r_line, \
    violation_interval
from netfinner.network import HALF, Network, enumerate_extreme_fis

F = Fraction
TRI = Network.triangle()


class Outcome:
    def __init__(self, ok: bool, detail: str, seconds: float, budget: float | None):
        self.ok = ok and (budget is None or seconds < budget)
        self.detail = detail
        self.seconds = seconds
        self.budget = budget

    def line(self, key: str, title: str) -> str:
        budget = f", budget {self.budget:g} s" if self.budget is not None else ""
        return f"{'PASS' if self.ok else 'FAIL'} [{key}] {title}: {self.detail} ({self.seconds:.4f} s{budget})"


def timed(fn):
    t = time.perf_counter()
    ok, detail = fn()
    return ok, detail, time.perf_counter() - t


def grid_vertices_oracle(net):
    """Feasible points of {0, 1/2, 1}^n that are not the midpoint of two other feasible grid points."""
    rows = [[1 if j in s else 0 for j in range(net.n)] for s in net.constraint_sets]
    grid = [p for p in itertools.product((F(0), HALF, F(1)), repeat=net.n)
            if all(sum(r[j] * p[j] for j in range(net.n)) <= 1 for r in rows)]
    feasible = set(grid)
    out = set()
    for p in grid:
        dirs = [d for d in itertools.product((-HALF, F(0), HALF), repeat=net.n) if any(d)]
        if not any(tuple(a + b for a, b in zip(p, d)) in feasible and tuple(a - b for a, b in zip(p, d)) in feasible
                   for d in dirs):
            out.add(p)
    return out


# criteria ---------------------------------------------------------------------------


def criterion_1():
    want = {(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (HALF, HALF, HALF)}
    ok, detail, dt = timed(lambda: (set(enumerate_extreme_fis(TRI)) == want, ""))
    oracle = grid_vertices_oracle(TRI)
    ok = ok and oracle == want
    return Outcome(ok, f"5 vertices, grid oracle agrees={oracle == want}", dt, 1e-3)


def criterion_2():
    def run():
        rep = check_probability_form(TRI, ghz())
        e = next(x for x in rep.entries if x.eta == (HALF,) * 3 and x.outcome == (0, 0, 0))
        gap_ok = abs((e.lhs - e.rhs) - (0.5 - 1 / math.sqrt(8))) < 1e-12
        squared = F(1, 2) ** 2 == F(1, 4) and F(1, 2) ** 3 == F(1, 8) and F(1, 4) > F(1, 8)
        return rep.violated and rep.exact and e.violated and gap_ok and squared, \
            f"lhs-rhs={e.lhs - e.rhs:.12f}, squared form 1/4 > 1/8"
    ok, detail, dt = timed(run)
    return Outcome(ok, detail, dt, 1.0)


def criterion_3():
    grid = 400
    h = 1 / grid
    t = time.perf_counter()
    scan = scan_pq_region(grid, tol=1e-9)
    dt = time.perf_counter() - t
    p, q = scan.params["p"], scan.params["q"]
    # f is decreasing on [0, 1], so over the cell [p - h, p + h] it ranges over [f(p + h), f(p - h)]
    lo = pq_boundary(np.clip(p + h, 0, 1))
    hi = pq_boundary(np.clip(p - h, 0, 1))
    straddle = (q + h >= lo) & (q - h <= hi)
    one_sided = q > pq_boundary(p)
    disagree = (scan.verdict != one_sided) & ~straddle
    mirrored = p > pq_boundary(q)
    implication = bool(np.all(scan.verdict[one_sided & ~straddle]))
    two_branch = bool(np.all(scan.verdict[~straddle] == scan.analytic_verdict[~straddle]))
    detail = (f"{int(disagree.sum())} of {len(scan)} non-straddling cells disagree with the one-sided curve "
              f"(all in the outcome-111 branch p > 1+q-2q^(2/3): {bool(np.all(mirrored[disagree]))}); "
              f"one-sided implication holds={implication}; two-branch boundary agrees={two_branch}")
    return Outcome(not disagree.any(), detail, dt, 5.0)


def criterion_4():
    def run():
        grid = 4096
        scan = scan_r_line(grid, tol=1e-9)
        lo, hi = violation_interval(scan)
        cell = 1 / grid
        interval_ok = abs(lo - 7 / 8) <= cell and abs(hi - 1) <= cell and not scan.verdict[-1]
        P = r_mix(F(7, 8))
        rep = check_probability_form(TRI, P)
        equality = P[0, 0, 0] == F(1, 64) and P.party_marginal(0)[0] == F(1, 16) and F(1, 64) ** 2 == F(1, 16) ** 3
        return interval_ok and equality and rep.exact and not rep.violated, \
            f"violated r in [{lo:.6f}, {hi:.6f}], exact equality at r=7/8"
    ok, detail, dt = timed(run)
    return Outcome(ok, detail, dt, 2.0)


def criterion_5():
    def run():
        worst, bad, count = -math.inf, 0, 0
        for d in (2, 3):
            for seed in range(1000):
                P = quantum.evaluate_quantum(quantum.random_strategy(TRI, d, seed))
                rep = check_probability_form(TRI, P, tol=1e-9)
                worst = max(worst, rep.worst.log_gap)
                bad += rep.violated
                count += 1
        swap = check_bilocal_factorization(quantum.evaluate_quantum(quantum.entanglement_swapping()), tol=1e-10)
        return bad == 0 and swap.passed, \
            f"{count} strategies, {bad} violations, max log-gap {worst:.3g}; swapping deviation {float(swap.max_deviation):.2g}"
    ok, detail, dt = timed(run)
    return Outcome(ok, detail, dt, 60.0)


_BOX_CACHE = {}


def _deterministic(programs) -> bool:
    return all(len(dist) == 1 for prog in programs for dist in prog._cache.values())


def criterion_6():
    def run():
        bad, exact = 0, 0
        for seed in range(500):
            boxnet, programs = boxworld.random_wiring(seed)
            P, td = boxworld.evaluate_wiring(boxnet, programs, check_order=True)
            exact += P.exact
            bad += check_probability_form(TRI, P).violated
            _BOX_CACHE[seed] = (td, _deterministic(programs))
        boxnet, programs = boxworld.pr_parity_wiring()
        P, _ = boxworld.evaluate_wiring(boxnet, programs)
        parity = all(P[abc] == (F(1, 4) if sum(abc) % 2 == 0 else 0) for abc in itertools.product(range(2), repeat=3))
        return bad == 0 and parity and exact == 500, \
            f"500 wirings ({exact} exact), {bad} violations; PR parity wiring gives 1/4 on even strings={parity}"
    ok, detail, dt = timed(run)
    return Outcome(ok, detail, dt, 120.0)


def criterion_7():
    def run():
        if not _BOX_CACHE:
            for seed in range(500):
                boxnet, programs = boxworld.random_wiring(seed)
                _, td = boxworld.evaluate_wiring(boxnet, programs)
                _BOX_CACHE[seed] = (td, _deterministic(programs))
        cases = [td for td, det in _BOX_CACHE.values() if det]
        boxnet, programs = boxworld.pr_parity_wiring()
        cases.append(boxworld.evaluate_wiring(boxnet, programs)[1])
        worst_gap, worst_mi, items = F(0), 0.0, 0
        for td in cases:
            rep = boxworld.check_ns_lemmas(td)
            items += len(rep.items)
            worst_gap = max(worst_gap, rep.max_gap)
            worst_mi = max(worst_mi, rep.max_information)
        return worst_gap == 0 and worst_mi < 1e-12, \
            f"{len(cases)} deterministic-program transcript laws, {items} identities, " \
            f"max rational independence gap {worst_gap} (so every MI is exactly 0), float MI <= {worst_mi:.2g} bits"
    ok, detail, dt = timed(run)
    return Outcome(ok, detail, dt, None)


def criterion_8():
    def run():
        cert = tightness.build_certificate(TRI, [F(1, 4)] * 3)
        rep = tightness.verify_certificate(cert)
        L = cert.field_degree
        tri_ok = rep.passed and rep.all_ones == tightness.DyadicSurd.rational(L, F(1, 8))
        nets = [TRI, Network.path(3), Network.cycle(4)]
        rng = np.random.default_rng(2024)
        passed = 0
        for k in range(50):
            net = nets[k % 3]
            cert = tightness.build_certificate(net, tightness.random_dyadic_targets(rng, net.n))
            rep = tightness.verify_certificate(cert)
            passed += cert.exact and rep.passed and rep.all_ones == rep.bound
        return tri_ok and passed == 50, f"triangle P(111)=1/8 exact; {passed}/50 random dyadic certificates exact"
    ok, detail, dt = timed(run)
    return Outcome(ok, detail, dt, 10.0)


def criterion_9():
    def run():
        pt = (0.5, 0.5, 0.5)
        a = hribbon.falsify_by_norms(ghz(), pt)
        a_ok = a.status == hribbon.NOT_MEMBER and check_function_form(None, ghz(), pt, a.witness["functions"]).violated
        b = hribbon.falsify_by_mutual_information(ghz(), pt)
        deficit = hribbon.channel_deficit(ghz(), np.array(b.witness["channel"]), pt) if b.witness else -math.inf
        b_ok = b.status == hribbon.NOT_MEMBER and deficit >= 0.5 - 1e-9
        c = hribbon.falsify_by_norms(uniform(), (1, 1, 1), restarts=100)
        d = hribbon.falsify_by_mutual_information(uniform(), (1, 1, 1), restarts=100)
        c_ok = c.status == d.status == hribbon.MEMBER_UP_TO_SEARCH
        return a_ok and b_ok and c_ok, \
            f"GHZ half point: norm witness re-verified={a_ok}, MI deficit {deficit:.6f} bits; " \
            f"uniform at (1,1,1): {c.status} / {d.status} over 100 restarts"
    ok, detail, dt = timed(run)
    return Outcome(ok, detail, dt, 30.0)


def criterion_10():
    def run():
        rng = np.random.default_rng(10)
        bad = 0
        for _ in range(10_000):
            bad += check_probability_form(TRI, cube.evaluate_cube(cube.random_strategy(rng))).violated
        ts = [F(0), F(1, 4), F(1, 2), F(3, 4), F(1)]
        agree = 0
        for k in range(20):
            s = cube.random_strategy(np.random.default_rng(1000 + k))
            P = cube.evaluate_cube(s)
            agree += all(cube.contract(P, s, t).agree for t in ts)
        rank = cube.generator_span_rank()
        return bad == 0 and agree == 20 and rank == 7, \
            f"10000 strategies, {bad} violations; contraction exact on {agree}/20 strategies x 5 values of t; span rank {rank}"
    ok, detail, dt = timed(run)
    return Outcome(ok, detail, dt, 60.0)


def criterion_11():
    def run():
        out = []
        for name, target in (("GHZ", ghz()), ("W", w())):
            res = cube.grid_search(target, 2, 2)
            out.append((name, res.exact_hit, res.distance))
        ok = all(not hit and dist > 0 for _, hit, dist in out)
        return ok, "; ".join(f"{n}: min L1 distance {d}" for n, _, d in out)
    ok, detail, dt = timed(run)
    return Outcome(ok, detail, dt, 300.0)


CRITERIA = [
    ("1", "triangle extreme FIS", criterion_1),
    ("2", "GHZ violates the triangle inequality", criterion_2),
    ("3", "P_{p,q} boundary scan at 400x400", criterion_3),
    ("4", "r-mixture violation interval at grid 4096", criterion_4),
    ("5", "quantum strategies satisfy every extreme-FIS inequality", criterion_5),
    ("6", "NS-box wirings satisfy the triangle inequality", criterion_6),
    ("7", "no-signaling conditional-independence identities", criterion_7),
    ("8", "tightness certificates", criterion_8),
    ("9", "hypercontractivity-ribbon anchors", criterion_9),
    ("10", "cube strategies, contraction and generator rank", criterion_10),
    ("11", "cube grid search misses GHZ and W", criterion_11),
]


@pytest.mark.parametrize("key,title,fn", CRITERIA, ids=[f"criterion_{k}" for k, _, _ in CRITERIA])
def test_acceptance(key, title, fn, capsys):
    result = fn()
    with capsys.disabled():
        print("\n" + result.line(key, title))
    assert result.ok, result.detail


if __name__ == "__main__":
    failed = 0
    for key, title, fn in CRITERIA:
        result = fn()
        failed += not result.ok
        print(result.line(key, title), flush=True)
    sys.exit(1 if failed else 0)
