import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netfinner.distributions import JointDistribution, ghz, pq, product, r_mix, uniform, w
from netfinner.finner import check_function_form
from netfinner.hribbon import (
    MEMBER,
    MEMBER_UP_TO_SEARCH,
    NOT_MEMBER,
    channel_deficit,
    coarsen,
    falsify_by_mutual_information,
    falsify_by_norms,
    finner_as_ribbon,
    tensor_square,
)
from netfinner.network import Network

F = Fraction
GRID = (0, 0.25, 0.5, 0.75, 1)


def copy_first_party(P):
    ch = np.zeros((*P.alphabets, P.alphabets[0]))
    for idx in np.ndindex(*P.alphabets):
        ch[idx + (idx[0],)] = 1
    return ch


def test_ghz_half_point_norm_witness():
    v = falsify_by_norms(ghz(), (0.5, 0.5, 0.5))
    assert v.status == NOT_MEMBER
    fs = v.witness["functions"]
    res = check_function_form(None, ghz(), (0.5, 0.5, 0.5), fs)
    assert res.violated and res.lhs > res.rhs
    # indicator witness, by hand: 1/2 against (1/2)^(3/2)
    ind = check_function_form(None, ghz(), (0.5, 0.5, 0.5), [[1, 0]] * 3)
    assert ind.lhs == pytest.approx(0.5) and ind.rhs == pytest.approx(0.353553, abs=1e-6)


def test_ghz_half_point_copy_channel_deficit():
    # U = shared bit: 3 * 1/2 * 1 bit - 1 bit
    assert channel_deficit(ghz(), copy_first_party(ghz()), (0.5, 0.5, 0.5)) == pytest.approx(0.5, abs=1e-12)
    v = falsify_by_mutual_information(ghz(), (0.5, 0.5, 0.5))
    assert v.status == NOT_MEMBER and v.value >= 0.5 - 1e-9
    assert channel_deficit(ghz(), np.array(v.witness["channel"]), (0.5, 0.5, 0.5)) == pytest.approx(v.value)


def test_ghz_third_point_is_on_the_boundary():
    assert falsify_by_norms(ghz(), (1 / 3,) * 3).status == MEMBER_UP_TO_SEARCH
    assert falsify_by_mutual_information(ghz(), (1 / 3,) * 3).status == MEMBER_UP_TO_SEARCH


def test_uniform_full_cube_corner():
    assert falsify_by_norms(uniform(), (1, 1, 1), restarts=30).status == MEMBER_UP_TO_SEARCH
    assert falsify_by_mutual_information(uniform(), (1, 1, 1), restarts=10).status == MEMBER_UP_TO_SEARCH


@pytest.mark.parametrize("route", [falsify_by_norms, falsify_by_mutual_information])
def test_ghz_ribbon_is_the_half_cube_on_a_grid(route):
    # membership iff alpha + beta + gamma <= 1
    for pt in itertools.product(GRID, repeat=3):
        v = route(ghz(), pt, restarts=3)
        assert (v.status == NOT_MEMBER) == (sum(pt) > 1), pt


@pytest.mark.parametrize("route", [falsify_by_norms, falsify_by_mutual_information])
def test_forced_points_are_members(route):
    P = pq(F(1, 8), F(7, 10))
    assert route(P, (0, 0, 0)).status == MEMBER
    assert route(P, (0, 1, 0)).status == MEMBER


def test_point_validation():
    with pytest.raises(ValueError):
        falsify_by_norms(ghz(), (0.5, 0.5))
    with pytest.raises(ValueError):
        falsify_by_mutual_information(ghz(), (1.5, 0, 0))
    with pytest.raises(ValueError):
        falsify_by_mutual_information(ghz(), (0.5, 0.5, 0.5), u_cap=1)


@st.composite
def product_distributions(draw):
    margs = []
    for _ in range(3):
        k = draw(st.integers(2, 3))
        ws = draw(st.lists(st.integers(1, 6), min_size=k, max_size=k))
        margs.append([F(x, sum(ws)) for x in ws])
    return product(margs)


@settings(max_examples=15, deadline=None)
@given(product_distributions(), st.tuples(*[st.sampled_from(GRID)] * 3))
def test_product_distributions_are_in_every_ribbon(P, pt):
    assert falsify_by_mutual_information(P, pt, restarts=2, u_cap=4).member
    assert falsify_by_norms(P, pt, restarts=3).member


def test_finner_adapter():
    tri = Network.triangle()
    by_point = {v.point: v for v in finner_as_ribbon(tri, ghz())}
    assert by_point[(0.5, 0.5, 0.5)].status == NOT_MEMBER
    assert by_point[(0.5, 0.5, 0.5)].witness["outcome"] in ([0, 0, 0], [1, 1, 1])
    assert by_point[(1.0, 0.0, 0.0)].status == MEMBER
    assert all(v.member for v in finner_as_ribbon(tri, uniform()))
    assert by_point[(0.0, 0.0, 0.0)].status == MEMBER
    assert {v.point: v.status for v in finner_as_ribbon(tri, w())}[(0.5, 0.5, 0.5)] == MEMBER_UP_TO_SEARCH


CORPUS = {
    "ghz": ghz(),
    "w": w(),
    "uniform": uniform(),
    "pq": pq(F(1, 8), F(7, 10)),
    "r": r_mix(F(9, 10)),
}
POINTS = [(0.5, 0.5, 0.5), (0.75, 0.75, 0.25), (1, 1, 1), (0.3, 0.3, 0.3), (0.9, 0.9, 0.9)]


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_both_routes_agree_on_corpus(name):
    P = CORPUS[name]
    for pt in POINTS:
        a = falsify_by_norms(P, pt)
        b = falsify_by_mutual_information(P, pt)
        assert a.status == b.status, pt


def random_binary(seed):
    rng = np.random.default_rng(seed)
    ws = rng.integers(0, 6, size=8)
    ws[0] += 1
    return JointDistribution(np.array([F(int(x), int(ws.sum())) for x in ws], dtype=object).reshape(2, 2, 2))


@pytest.mark.parametrize("seed", range(8))
def test_coarsening_witness_pulls_back(seed):
    rng = np.random.default_rng(100 + seed)
    ws = [int(x) + 1 for x in rng.integers(0, 5, size=27)]
    P = JointDistribution(np.array([F(x, sum(ws)) for x in ws], dtype=object).reshape(3, 3, 3))
    maps = [[int(x) for x in rng.integers(0, 2, size=3)] for _ in range(3)]
    for m in maps:
        m[0], m[1] = 0, 1  # keep both coarse labels in use
    Q = coarsen(P, maps)
    assert sum(Q.table.flat) == 1
    for pt in [(0.75, 0.75, 0.75), (1, 1, 0.5), (1, 1, 1)]:
        v = falsify_by_norms(Q, pt)
        if v.status == NOT_MEMBER:
            fs = [np.asarray(f)[m] for f, m in zip(v.witness["functions"], maps)]
            assert check_function_form(None, P, pt, fs).violated


@pytest.mark.parametrize("seed", range(6))
def test_witness_transfers_to_larger_points(seed):
    P = random_binary(seed)
    for pt in itertools.product(GRID, repeat=3):
        v = falsify_by_norms(P, pt, restarts=2)
        if v.status != NOT_MEMBER:
            continue
        for bigger in itertools.product(GRID, repeat=3):
            if all(b >= a for a, b in zip(pt, bigger)):
                assert check_function_form(None, P, bigger, v.witness["functions"]).violated


@pytest.mark.parametrize("seed", range(4))
def test_search_verdicts_form_a_down_set(seed):
    P = random_binary(seed)
    status = {pt: falsify_by_norms(P, pt, restarts=3).member for pt in itertools.product(GRID, repeat=3)}
    for pt, ok in status.items():
        if ok:
            for smaller in itertools.product(GRID, repeat=3):
                if all(s <= a for s, a in zip(smaller, pt)):
                    assert status[smaller], (pt, smaller)


def test_tensor_square_keeps_ghz_verdicts():
    sq = tensor_square(ghz())
    assert sq.alphabets == (4, 4, 4)
    assert sum(sq.table.flat) == 1
    assert falsify_by_norms(sq, (0.5, 0.5, 0.5)).status == NOT_MEMBER
    assert falsify_by_norms(sq, (1 / 3,) * 3, restarts=10).status == MEMBER_UP_TO_SEARCH
    assert falsify_by_mutual_information(sq, (1 / 3,) * 3, u_cap=4, restarts=3).status == MEMBER_UP_TO_SEARCH


def test_verdict_serializes():
    d = falsify_by_norms(ghz(), (0.5, 0.5, 0.5)).to_dict()
    assert d["status"] == NOT_MEMBER and d["route"] == "norms" and len(d["witness"]["functions"]) == 3
    assert math.isfinite(d["value"])
