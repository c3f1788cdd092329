import json

import numpy as np
import pytest

from netfinner.boxworld import pr_parity_wiring, wiring_to_dict
from netfinner.cli import EXIT_ERROR, EXIT_OK, EXIT_VIOLATED, main
from netfinner.cube import UNIFORM, CubeStrategy
from netfinner.distributions import ghz, uniform
from netfinner.network import Network
from netfinner.quantum import random_strategy


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


@pytest.fixture
def files(tmp_path):
    Network.triangle().save(tmp_path / "triangle.json")
    Network.bilocality().save(tmp_path / "biloc.json")
    ghz().save(tmp_path / "ghz.json")
    uniform().save(tmp_path / "uniform.json")
    return tmp_path


def test_check_ghz_triangle(files, capsys):
    code, out = run(["check", "--network", str(files / "triangle.json"), "--dist", str(files / "ghz.json")], capsys)
    assert code == EXIT_VIOLATED
    rep = json.loads(out)
    assert rep["verdict"] == "violated" and tuple(rep["worst"]["outcome"]) in ((0, 0, 0), (1, 1, 1))


def test_check_uniform_triangle(files, capsys):
    code, _ = run(["check", "--network", str(files / "triangle.json"), "--dist", str(files / "uniform.json")], capsys)
    assert code == EXIT_OK


def test_check_ghz_bilocality(files, capsys):
    code, out = run(["check", "--network", str(files / "biloc.json"), "--dist", str(files / "ghz.json")], capsys)
    assert code == EXIT_VIOLATED
    assert json.loads(out)["worst"]["eta"] == ["1", "0", "1"]


def test_builtin_names_and_out_flag(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, printed = run(["check", "--network", "triangle", "--dist", "pq:1/8,7/10", "--out", str(out)], capsys)
    assert code == EXIT_VIOLATED and printed == ""
    assert json.loads(out.read_text())["verdict"] == "violated"


def test_fis(capsys):
    code, out = run(["fis", "--network", "triangle"], capsys)
    assert code == EXIT_OK
    assert sorted(map(tuple, json.loads(out)["vertices"])) == sorted(
        [("0", "0", "0"), ("1", "0", "0"), ("0", "1", "0"), ("0", "0", "1"), ("1/2", "1/2", "1/2")])


def test_scans_are_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["scan-pq", "--grid", "40", "--out", str(a)]) == EXIT_OK
    assert main(["scan-pq", "--grid", "40", "--out", str(b), "--jobs", "2"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    code, out = run(["scan-r", "--grid", "64"], capsys)
    assert code == EXIT_OK
    assert out.splitlines()[0].startswith("r,")
    assert len(out.splitlines()) == 66


def test_simulate_uniform_cube(tmp_path, capsys):
    path = tmp_path / "cube.json"
    path.write_text(json.dumps(CubeStrategy.constant((UNIFORM,) * 3).to_dict()))
    code, out = run(["simulate", "cube", "--strategy", str(path), "--check"], capsys)
    assert code == EXIT_OK
    probs = json.loads(out)["distribution"]["probabilities"]
    assert probs == ["1/8"] * 8


def test_simulate_pr_wiring(tmp_path, capsys):
    path = tmp_path / "w.json"
    path.write_text(json.dumps(wiring_to_dict(*pr_parity_wiring())))
    code, out = run(["simulate", "boxworld", "--strategy", str(path), "--check"], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["distribution"]["probabilities"] == ["1/4", "0", "0", "1/4", "0", "1/4", "1/4", "0"]


def test_simulate_quantum_dimension_one(tmp_path, capsys):
    path = tmp_path / "q.json"
    path.write_text(json.dumps(random_strategy(Network.triangle(), 1, seed=2).to_dict()))
    code, out = run(["simulate", "quantum", "--strategy", str(path), "--check"], capsys)
    assert code == EXIT_OK
    assert max(json.loads(out)["distribution"]["probabilities"]) == pytest.approx(1)


def test_simulate_random_is_seeded(capsys):
    _, a = run(["simulate", "quantum", "--seed", "5"], capsys)
    _, b = run(["simulate", "quantum", "--seed", "5"], capsys)
    assert a == b


def test_hr(capsys):
    code, out = run(["hr", "--dist", "ghz", "--point", "1/2,1/2,1/2", "--restarts", "3"], capsys)
    assert code == EXIT_VIOLATED
    assert [v["status"] for v in json.loads(out)["verdicts"]] == ["not_member", "not_member"]
    code, _ = run(["hr", "--dist", "uniform", "--point", "1,1,1", "--route", "norms", "--restarts", "3"], capsys)
    assert code == EXIT_OK


def test_tightness(capsys):
    code, out = run(["tightness", "--network", "triangle", "--targets", "1/4,1/4,1/4"], capsys)
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["verification"]["passed"]
    assert data["verification"]["all_ones"] == pytest.approx(1 / 8)
    assert data["certificate"]["eta"] == ["1/2", "1/2", "1/2"]


def test_topology_ghz(capsys):
    code, out = run(["topology", "--dist", "ghz", "--candidates", "triangle", "bilocality", "common-source"], capsys)
    assert code == EXIT_OK
    status = {v["network"]: v["status"] for v in json.loads(out)["candidates"]}
    assert status == {"triangle": "ruled_out", "bilocality": "ruled_out", "common-source": "compatible_so_far"}


def test_topology_counts_file(tmp_path, capsys):
    rng = np.random.default_rng(0)
    counts = np.bincount(rng.integers(0, 8, size=10 ** 6), minlength=8)
    path = tmp_path / "counts.json"
    path.write_text(json.dumps({"alphabets": [2, 2, 2], "counts": counts.tolist()}))
    code, out = run(["topology", "--dist", str(path), "--candidates", "triangle"], capsys)
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["samples"] == 10 ** 6
    assert data["statistical_margin"] == pytest.approx(1e-3)
    assert data["candidates"][0]["status"] == "compatible_so_far"


def test_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["topology", "--dist", str(bad), "--candidates", "triangle"]) == EXIT_ERROR
    assert main(["check", "--network", "nowhere.json", "--dist", "ghz"]) == EXIT_ERROR
    assert main(["check", "--network", "triangle", "--dist", "ghz", "--tol", "0"]) == EXIT_ERROR
    assert main(["check", "--network", "triangle"]) == EXIT_ERROR
    assert main(["tightness", "--network", "triangle", "--targets", "0,1,1"]) == EXIT_ERROR
    assert main(["bogus"]) == EXIT_ERROR
    assert main(["scan-r", "--grid", "8", "--out", str(tmp_path / "missing" / "x.csv")]) == EXIT_ERROR
    capsys.readouterr()
