import json
import math
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdiscrim.ensemble import (
    Ensemble,
    Povm,
    StructuredEnsemble,
    effective_dimension,
    structured_to_ensemble,
)
from qdiscrim.errors import BadPovm, BadPrior, BadState, DimMismatch, ParseError, ValidationError
from qdiscrim.exact import max_commutator
from qdiscrim.io import (
    dumps,
    ensemble_from_doc,
    ensemble_to_doc,
    format_real,
    load_ensemble,
    load_povm,
    parse_document,
    povm_from_doc,
    save_ensemble,
    save_povm,
)
from qdiscrim.sampling import (
    PortableRng,
    random_commuting_ensemble,
    random_ensemble,
    random_structured,
    random_unitary,
    trial_seed,
)

ZERO = np.diag([1.0, 0.0])
ONE = np.diag([0.0, 1.0])
DATA = resources.files("qdiscrim") / "data"


def test_valid_ensemble_is_read_only():
    e = Ensemble((ZERO, ONE), [0.5, 0.5])
    assert e.m == 2 and e.dim == 2
    with pytest.raises(ValueError):
        e.states[0][0, 0] = 2
    np.testing.assert_allclose(e.average_state(), np.eye(2) / 2)


@pytest.mark.parametrize(
    "states, priors, error",
    [
        ((ZERO, ONE), [0.49, 0.49], BadPrior),
        ((ZERO, ONE), [1.0, 0.0], BadPrior),
        ((ZERO, ONE), [0.5, 0.5, 0.0], BadPrior),
        ((ZERO, ONE), [np.nan, 0.5], BadPrior),
        ((2 * ZERO, ONE), [0.5, 0.5], BadState),
        ((np.array([[1, 1], [0, 0]]), ONE), [0.5, 0.5], BadState),
        ((np.diag([1.5, -0.5]), ONE), [0.5, 0.5], BadState),
        ((ZERO, np.eye(3) / 3), [0.5, 0.5], DimMismatch),
        ((ZERO,), [1.0], ValidationError),
    ],
)
def test_invalid_ensembles(states, priors, error):
    with pytest.raises(error):
        Ensemble(states, priors)


def test_bad_state_carries_index():
    with pytest.raises(BadState) as info:
        Ensemble((ZERO, 2 * ONE), [0.5, 0.5])
    assert info.value.index == 1


def test_povm_validation():
    Povm((ZERO, ONE))
    with pytest.raises(ValidationError):
        Povm((ZERO, ZERO))
    with pytest.raises(ValidationError):
        Povm((np.diag([1.5, 0.0]), np.diag([-0.5, 1.0])))
    with pytest.raises(BadPovm):
        Povm((ZERO, ONE), kind="other")


def test_structured_embedding():
    e = structured_to_ensemble(StructuredEnsemble(np.array([0.5, 1 / 3, 1 / 4]), np.full(3, 1 / 3)))
    assert e.dim == 4
    np.testing.assert_allclose(np.diag(e.states[1]).real, [1 / 3, 0, 2 / 3, 0])
    assert max_commutator(e) == 0.0
    with pytest.raises(ValidationError):
        StructuredEnsemble(np.array([1.2, 0.3]), np.array([0.5, 0.5]))


def test_effective_dimension():
    assert effective_dimension(Ensemble((ZERO, ZERO), [0.5, 0.5])) == 1
    plus = np.full((2, 2), 0.5)
    assert effective_dimension(Ensemble((ZERO, plus), [0.5, 0.5])) == 2


def test_format_real():
    assert format_real(0.1) == "0.10000000000000001"
    assert format_real(1.0) == "1.0"
    assert format_real(-0.0) == "-0.0"
    assert format_real(math.inf) == '"inf"'
    for x in (1 / 3, 2.0**-1074, 1e300, math.pi):
        assert float(format_real(x)) == x


def test_dumps_keeps_order():
    text = dumps({"b": 1, "a": [0.5, [1.0, 0.0]], "c": {"z": True, "y": None}}, indent=None)
    assert text == '{"b": 1, "a": [0.5, [1.0, 0.0]], "c": {"z": true, "y": null}}'
    assert json.loads(dumps({"k": [[1.0, 2.0], [3.0, 4.0]]}))["k"][1] == [3.0, 4.0]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**63), st.integers(2, 4), st.integers(2, 4))
def test_round_trip_is_bit_exact(seed, m, dim):
    e = random_ensemble(seed, m, dim)
    back = ensemble_from_doc(parse_document(dumps(ensemble_to_doc(e))))
    assert back == e
    for a, b in zip(e.states, back.states):
        assert a.tobytes() == b.tobytes()
    assert e.priors.tobytes() == back.priors.tobytes()


def test_file_round_trip(tmp_path):
    e = random_ensemble(7, 3, 3)
    save_ensemble(e, tmp_path / "e.json")
    assert load_ensemble(tmp_path / "e.json") == e
    first = (tmp_path / "e.json").read_bytes()
    save_ensemble(load_ensemble(tmp_path / "e.json"), tmp_path / "f.json")
    assert (tmp_path / "f.json").read_bytes() == first
    povm = Povm((ZERO, ONE))
    save_povm(povm, tmp_path / "p.json")
    assert load_povm(tmp_path / "p.json") == povm


def test_parse_errors_name_location(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "dim": 2,\n  "priors": [0.5, 0.5\n')
    with pytest.raises(ParseError) as info:
        load_ensemble(path)
    assert info.value.line is not None
    doc = ensemble_to_doc(Ensemble((ZERO, ONE), [0.5, 0.5]))
    doc["states"][1][2] = [0.0]
    with pytest.raises(ParseError, match=r"states\[1\]\[2\]"):
        ensemble_from_doc(doc)
    with pytest.raises(ParseError, match="dim"):
        ensemble_from_doc({"dim": "two", "priors": [], "states": []})


def test_priors_summing_to_098_rejected_from_file():
    doc = ensemble_to_doc(Ensemble((ZERO, ONE), [0.5, 0.5]))
    doc["priors"] = [0.49, 0.49]
    with pytest.raises(BadPrior):
        ensemble_from_doc(doc)


def test_povm_file_accepts_states_key():
    doc = {"dim": 2, "kind": "ambiguous", "states": [[[1, 0], [0, 0], [0, 0], [0, 0]], [[0, 0], [0, 0], [0, 0], [1, 0]]]}
    assert len(povm_from_doc(doc)) == 2


@pytest.mark.parametrize("name", ["ex1", "ex2", "ex3", "ex4", "ex5", "ex6", "two_state"])
def test_shipped_fixtures_load(name):
    e = load_ensemble(DATA / f"{name}.json")
    assert e.m in (2, 3)


def test_generator_follows_documented_algorithm():
    rng = PortableRng(123)
    ref = np.random.Generator(np.random.PCG64(123))
    u1, u2 = ref.random(), ref.random()
    r = math.sqrt(-2 * math.log(1 - u1))
    assert rng.normal() == r * math.cos(2 * math.pi * u2)
    assert rng.normal() == r * math.sin(2 * math.pi * u2)
    assert rng.uniform() == ref.random()
    assert rng.exponential() == -math.log(1 - ref.random())


def test_random_instances_are_deterministic():
    assert random_ensemble(5, 3, 2) == random_ensemble(5, 3, 2)
    assert random_ensemble(5, 3, 2) != random_ensemble(6, 3, 2)
    assert random_structured(9, 4) == random_structured(9, 4)
    assert trial_seed(0, 1) != trial_seed(1, 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**63), st.integers(2, 5), st.integers(2, 5))
def test_commuting_generator_commutes(seed, m, dim):
    e = random_commuting_ensemble(seed, m, dim)
    assert max_commutator(e) <= 1e-12
    u = random_unitary(PortableRng(seed), dim)
    assert np.abs(u.conj().T @ u - np.eye(dim)).max() <= 1e-12


def test_general_generator_does_not_commute():
    assert max_commutator(random_ensemble(1, 3, 3)) > 1e-3
