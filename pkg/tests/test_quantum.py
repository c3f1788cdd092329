import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netfinner.distributions import check_bilocal_factorization
from netfinner.finner import check_probability_form
from netfinner.network import Network
from netfinner.quantum import (
    PartyMeasurement,
    QuantumError,
    QuantumSource,
    QuantumStrategy,
    entanglement_swapping,
    evaluate_dense,
    evaluate_quantum,
    observable_expectation,
    random_strategy,
    second_moment,
    triangle_parity,
)

TRI = Network.triangle()
COMP = PartyMeasurement.projective(np.eye(2), [0, 1], 2)


def test_product_sources_give_deterministic_outputs():
    comp4 = PartyMeasurement.projective(np.eye(4), [0, 1, 2, 3], 4)
    qs = QuantumStrategy(TRI, (QuantumSource.product(2),) * 3, (comp4,) * 3)
    P = evaluate_quantum(qs)
    assert P[0, 0, 0] == pytest.approx(1, abs=1e-12)
    assert P.table.sum() == pytest.approx(1)


def test_entanglement_swapping_factorizes():
    P = evaluate_quantum(entanglement_swapping())
    assert P.alphabets == (2, 4, 2)
    rep = check_bilocal_factorization(P, tol=1e-10)
    assert rep.passed and rep.max_deviation < 1e-10
    # conditioned on a Bell outcome the outer qubits are perfectly (anti)correlated
    assert P[0, 0, 0] == pytest.approx(1 / 8, abs=1e-12)
    assert P[0, 0, 1] == pytest.approx(0, abs=1e-12)


def test_triangle_parity_matches_hand_enumeration():
    P = evaluate_quantum(triangle_parity())
    for abc in itertools.product(range(2), repeat=3):
        want = 0.25 if sum(abc) % 2 == 0 else 0.0
        assert P[abc] == pytest.approx(want, abs=1e-12)
    assert evaluate_dense(triangle_parity()).table == pytest.approx(P.table, abs=1e-12)
    assert not check_probability_form(TRI, P).violated


@pytest.mark.parametrize("net", [TRI, Network.bilocality(), Network.path(4), Network.cycle(4)], ids=["triangle", "bilocality", "path4", "cycle4"])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_contraction_matches_dense_oracle(net, d):
    if d == 3 and net.n > 3:
        pytest.skip("dense state too large")
    qs = random_strategy(net, d, seed=7)
    assert evaluate_quantum(qs).table == pytest.approx(evaluate_dense(qs).table, abs=1e-12)


def test_dimension_one_is_deterministic():
    P = evaluate_quantum(random_strategy(TRI, 1, seed=4))
    assert sorted(P.table.ravel())[-1] == pytest.approx(1)


def test_seed_determinism():
    a, b = random_strategy(TRI, 2, seed=9), random_strategy(TRI, 2, seed=9)
    assert a.to_dict() == b.to_dict()
    assert random_strategy(TRI, 2, seed=10).to_dict() != a.to_dict()


def test_invalid_inputs():
    with pytest.raises(QuantumError):
        QuantumSource(np.array([0.5, 0.5]))
    with pytest.raises(QuantumError):
        PartyMeasurement(np.array([np.eye(2), np.eye(2)]))  # sums to 2I
    with pytest.raises(QuantumError):
        PartyMeasurement(np.array([[[0, 1], [0, 0]], [[1, -1], [0, 1]]]))  # not Hermitian
    with pytest.raises(QuantumError):
        PartyMeasurement(np.array([[[2, 0], [0, 0]], [[-1, 0], [0, 1]]]))  # not PSD
    with pytest.raises(QuantumError):
        QuantumStrategy(TRI, (QuantumSource.maximally_entangled(2),) * 3, (COMP,) * 3)  # needs 4x4 operators
    with pytest.raises(QuantumError):
        QuantumStrategy(Network.common_source(3), (QuantumSource.product(2),), (COMP,) * 3)
    with pytest.raises(QuantumError):
        random_strategy(TRI, 0, seed=1)


def test_povm_is_accepted():
    # trine-like three-outcome POVM on a qubit
    vs = [np.array([math.cos(t), math.sin(t)]) for t in (0, 2 * math.pi / 3, 4 * math.pi / 3)]
    ops = np.array([2 / 3 * np.outer(v, v) for v in vs])
    m = PartyMeasurement(ops)
    qs = QuantumStrategy(Network.bilocality(), (QuantumSource.maximally_entangled(2),) * 2,
                         (m, PartyMeasurement.projective(np.eye(4), range(4), 4), COMP))
    P = evaluate_quantum(qs)
    assert P.table.sum() == pytest.approx(1)
    assert P.table == pytest.approx(evaluate_dense(qs).table, abs=1e-12)


def test_json_round_trip(tmp_path):
    qs = random_strategy(TRI, 2, seed=3)
    path = tmp_path / "q.json"
    path.write_text(json.dumps(qs.to_dict()))
    back = QuantumStrategy.load(path)
    assert evaluate_quantum(back).table == pytest.approx(evaluate_quantum(qs).table, abs=1e-14)


def test_observable_constants_and_indicators():
    qs = random_strategy(TRI, 2, seed=12)
    P = evaluate_quantum(qs)
    assert observable_expectation(qs, [[1, 1]] * 3) == pytest.approx(1, abs=1e-12)
    target = (1, 0, 1)
    ind = [np.eye(2)[a] for a in target]
    assert observable_expectation(qs, ind) == pytest.approx(P[target], abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_observable_expectation_matches_distribution_and_norm_bound(seed):
    qs = random_strategy(TRI, 2, seed=seed)
    P = evaluate_quantum(qs)
    rng = np.random.default_rng(seed)
    fs = [rng.normal(size=2) for _ in range(3)]
    direct = sum(P[a] * fs[0][a[0]] * fs[1][a[1]] * fs[2][a[2]] for a in itertools.product(range(2), repeat=3))
    val = observable_expectation(qs, fs)
    assert val == pytest.approx(direct, abs=1e-10)
    norms = [math.sqrt(sum(P.party_marginal(j)[a] * f[a] ** 2 for a in range(2))) for j, f in enumerate(fs)]
    assert val <= math.prod(norms) + 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([2, 3]))
def test_second_moment_matches_marginal(seed, d):
    qs = random_strategy(TRI, d, seed=seed)
    P = evaluate_quantum(qs)
    f = np.random.default_rng(seed).normal(size=2)
    for j in range(3):
        want = sum(P.party_marginal(j)[a] * f[a] ** 2 for a in range(2))
        assert second_moment(qs, j, f) == pytest.approx(want, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([2, 3]))
def test_random_strategies_satisfy_every_extreme_fis_inequality(seed, d):
    P = evaluate_quantum(random_strategy(TRI, d, seed=seed))
    assert not check_probability_form(TRI, P, tol=1e-9).violated
