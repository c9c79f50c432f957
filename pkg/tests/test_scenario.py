import copy
import json

import pytest

from cscoherent.exceptions import ConfigError
from cscoherent.scenario import DEFAULT_TOLERANCES, load_scenario, parse_scenario

BASE = {
    "model": {"variant": "A", "N": 2, "lambda": 1},
    "schedule": {"M": "1", "w2": "1", "tau": "pi"},
    "trajectory": {"mode": "explicit", "u0": 1, "udot0": 0, "v0": 0, "vdot0": 2},
    "quantum": {"m": 1, "n": 0},
}


def doc(**changes):
    d = copy.deepcopy(BASE)
    for path, value in changes.items():
        block, _, key = path.partition("__")
        if key:
            d[block][key] = value
        else:
            d[block] = value
    return d


def test_minimal_scenario():
    scn = parse_scenario(doc())
    assert scn.model.N == 2 and scn.state.label.m == 1
    assert scn.tolerances == DEFAULT_TOLERANCES
    traj = scn.build_trajectory()
    assert traj.omega == pytest.approx(2.0)


@pytest.mark.parametrize("changes", [
    {"extra": 1},
    {"model__lamda": 1},
    {"schedule__period": 1},
    {"trajectory__u1": 0},
    {"quantum__mm": 0},
    {"quadrature": {"point_per_dim": 8}},
    {"tolerances": {"eigen": 1e-3}},
])
def test_unknown_keys_rejected(changes):
    with pytest.raises(ConfigError):
        parse_scenario(doc(**changes))


@pytest.mark.parametrize("changes", [
    {"tolerances": {"eigen_residual": 0}},
    {"tolerances": {"eigen_residual": -1e-3}},
    {"suites": ["eigen", "nope"]},
    {"trajectory": {"mode": "other"}},
    {"trajectory": {"mode": "explicit", "u0": 1}},
    {"model__variant": "Z"},
    {"schedule__w2": "1 + cos(t"},
    {"quantum": {"level": 1}},
    {"quadrature": {"time_nodes": 63}},
    {"quadrature": {"method": "grid"}},
    {"phase": {"dressing_rule": "whatever"}},
    {"sweep": {"parameter": "mass", "values": [1]}},
])
def test_invalid_values_rejected(changes):
    with pytest.raises(ConfigError):
        parse_scenario(doc(**changes))


def test_states_list_and_polynomial():
    d = doc(model={"variant": "A", "N": 3, "lambda": 2},
            quantum={"states": [{"m": 0}, {"m": 1, "k": 3, "polynomial": {"centered_power_sum": 3}}]})
    scn = parse_scenario(d)
    assert len(scn.states) == 2 and scn.states[1].poly.degree == 3
    d["quantum"]["m"] = 1
    with pytest.raises(ConfigError):
        parse_scenario(d)


def test_polynomial_records():
    d = doc(model={"variant": "A", "N": 2, "lambda": 1},
            quantum={"k": 2, "polynomial": [{"exponents": [2, 0], "coeff": 0.5}, {"exponents": [1, 1], "coeff": -1}]})
    assert parse_scenario(d).state.poly.degree == 2


def test_overrides():
    scn = parse_scenario(doc()).with_seed(9).with_threads(3).with_strict()
    assert scn.quadrature.seed == 9 and scn.quadrature.threads == 3 and scn.quadrature.strict


def test_load_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_scenario(p)
    with pytest.raises(ConfigError):
        load_scenario(tmp_path / "missing.json")
    p.write_text(json.dumps(BASE))
    assert load_scenario(p).model.variant == "A"


def test_corpus_parses():
    from pathlib import Path
    files = sorted((Path(__file__).parent.parent / "scenarios").glob("*.json"))
    assert files
    for f in files:
        load_scenario(f)
