import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cssr.alphabet import Alphabet
from cssr.errors import AlphabetMismatch, InvalidDistribution, ParseError, ValidationError, WordSpaceTooLarge
from cssr.machine import (
    CausalStateMachine,
    Edge,
    MachineState,
    ProcessSpec,
    check_same_alphabet,
    deserialize,
    entropy_rate,
    generate,
    serialize,
    stationary_distribution,
    to_dot,
    word_distribution,
)
from cssr.processes import even_process, iid_process, period_two_process

from oracles import brute_word_distribution, eig_stationary, random_unifilar

AB = Alphabet(("A", "B"))


def even_machine(p=0.5):
    return CausalStateMachine(
        AB,
        (
            MachineState(0, ((0,),), (50, 50), (p, 1 - p), (0, 1), 60),
            MachineState(1, ((0, 1),), (0, 30), (0.0, 1.0), (None, 0), 30),
        ),
        {"lmax": 4, "alpha": 0.001},
    )


def single_state():
    return CausalStateMachine(AB, (MachineState(0, ((),), (5, 5), (0.5, 0.5), (0, 0)),))


# stationary distribution


def test_even_stationary():
    assert np.allclose(stationary_distribution(even_process()).pi, [2 / 3, 1 / 3], atol=1e-12)
    assert np.allclose(stationary_distribution(even_machine()).pi, [2 / 3, 1 / 3], atol=1e-12)


def test_trivial_stationaries():
    assert np.allclose(stationary_distribution(single_state()).pi, [1.0])
    assert np.allclose(stationary_distribution(period_two_process()).pi, [0.5, 0.5])


def test_large_chain_uses_power_iteration():
    rng = np.random.default_rng(0)
    spec = random_unifilar(rng, 80)
    assert np.allclose(stationary_distribution(spec).pi, eig_stationary(spec), atol=1e-10)


def test_absorption_weighting_for_specs():
    # state 0 leaks into two absorbing states with probabilities 0.25 / 0.75
    spec = ProcessSpec(
        AB,
        ((Edge(0, 0.25, 1), Edge(1, 0.75, 2)), (Edge(0, 1.0, 1),), (Edge(1, 1.0, 2),)),
        (1.0, 0.0, 0.0),
    )
    s = stationary_distribution(spec)
    assert s.mixed
    assert np.allclose(s.pi, [0.0, 0.25, 0.75])


def test_occupancy_weighting_for_machines():
    m = CausalStateMachine(
        AB,
        (
            MachineState(0, ((0,),), (9, 0), (1.0, 0.0), (0, None), 100),
            MachineState(1, ((1,),), (0, 9), (0.0, 1.0), (None, 1), 300),
        ),
    )
    assert np.allclose(stationary_distribution(m).pi, [0.25, 0.75])
    assert word_distribution(m, 2).prob((1, 1)) == pytest.approx(0.75)


# word distributions


def test_even_word_probabilities():
    for model in (even_process(), even_machine()):
        w1 = word_distribution(model, 1)
        assert w1.prob((0,)) == pytest.approx(1 / 3, abs=1e-12)
        assert w1.prob((1,)) == pytest.approx(2 / 3, abs=1e-12)
        assert word_distribution(model, 2).prob((0, 0)) == pytest.approx(1 / 6, abs=1e-12)
        assert word_distribution(model, 3).prob((0, 1, 0)) == 0.0


def test_as_dict_keys():
    d = word_distribution(even_process(), 2).as_dict(AB)
    assert list(d) == ["AA", "AB", "BA", "BB"]


def test_word_space_guard():
    with pytest.raises(WordSpaceTooLarge):
        word_distribution(even_machine(), 25)


@pytest.mark.parametrize("W", range(1, 9))
def test_unifilar_fast_path_matches_brute_force(W):
    m = even_machine(0.37)
    pi = stationary_distribution(m).pi
    brute = brute_word_distribution(m.as_process_spec(), W, pi)
    fast = word_distribution(m, W)
    assert max(abs(fast.prob(w) - p) for w, p in brute.items()) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(2, 3), st.integers(1, 6))
def test_word_distribution_marginal_consistency(seed, m, k, W):
    spec = random_unifilar(np.random.default_rng(seed), m, k)
    a = word_distribution(spec, W).probs.reshape(-1, k).sum(axis=1)
    b = word_distribution(spec, W - 1).probs if W > 1 else np.ones(1)
    assert np.allclose(a, b, atol=1e-12)
    assert word_distribution(spec, 1).probs.sum() == pytest.approx(1.0, abs=1e-12)


# entropy rate


def test_entropy_rates():
    assert entropy_rate(even_process()) == pytest.approx(2 / 3, abs=1e-12)
    assert entropy_rate(iid_process()) == pytest.approx(1.0, abs=1e-12)
    assert entropy_rate(period_two_process()) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(2, 4))
def test_entropy_rate_bounded(seed, m, k):
    spec = random_unifilar(np.random.default_rng(seed), m, k)
    assert 0 <= entropy_rate(spec) <= math.log2(k) + 1e-12


# generation


def test_generate_reproducible():
    a = generate(even_process(), 1000, 42)
    assert a == generate(even_process(), 1000, 42)
    assert a != generate(even_process(), 1000, 43)


def test_period_two_output():
    s = "".join(AB.decode(generate(period_two_process(), 10, 3).data.tolist()))
    assert s in ("ABABABABAB", "BABABABABA")


def test_even_output_never_contains_aba():
    s = "".join(AB.decode(generate(even_process(), 50_000, 5).data.tolist()))
    assert "ABA" not in s


def test_generate_frequencies_match_word_distribution():
    n = 1_000_000
    data = generate(even_process(), n, 9).data
    p_a = float(np.mean(data == 0))
    assert abs(p_a - 1 / 3) <= 3 * math.sqrt((1 / 3) * (2 / 3) / n)
    codes = data[:-2] * 4 + data[1:-1] * 2 + data[2:]
    freq = np.bincount(codes, minlength=8) / (n - 2)
    p = word_distribution(even_process(), 3).probs
    sigma = np.sqrt(p * (1 - p) / (n - 2))
    assert np.all(np.abs(freq - p) <= 4 * sigma + 1e-15)


# serialization


def test_round_trip_is_identity():
    m = even_machine(0.1 + 0.2)
    text = serialize(m)
    back = deserialize(text)
    assert back == m
    assert serialize(back) == text


def _doc(**changes):
    doc = json.loads(serialize(even_machine()))
    for path, value in changes.items():
        i, key = path.split(".")
        doc["states"][int(i)][key] = value
    return doc


def test_rejects_bad_emission():
    with pytest.raises(ParseError) as exc:
        deserialize(json.dumps(_doc(**{"0.emission": [0.45, 0.45]})))
    assert exc.value.field == "states[0].emission"


def test_rejects_duplicate_transition():
    text = serialize(even_machine()).replace('"A": 0', '"A": 0, "A": 1', 1)
    with pytest.raises(ParseError):
        deserialize(text)


def test_rejects_dangling_target():
    with pytest.raises(ParseError):
        deserialize(json.dumps(_doc(**{"0.transitions": {"A": 0, "B": 7}})))


def test_rejects_malformed_json_with_line():
    with pytest.raises(ParseError) as exc:
        deserialize('{\n  "format": "cssr-machine",\n  oops\n}')
    assert exc.value.line == 3


def test_rejects_missing_field():
    doc = _doc()
    del doc["states"][1]["counts"]
    with pytest.raises(ParseError) as exc:
        deserialize(json.dumps(doc))
    assert "states[1]" in str(exc.value)


def test_machine_invariants():
    with pytest.raises(InvalidDistribution):
        CausalStateMachine(AB, (MachineState(0, ((),), (1, 1), (0.5, 0.4), (0, 0)),))
    with pytest.raises(ValidationError):
        CausalStateMachine(AB, (MachineState(0, ((),), (1, 0), (1.0, 0.0), (0, 0)),))


def test_alphabet_mismatch():
    other = iid_process(symbols=("0", "1"))
    with pytest.raises(AlphabetMismatch):
        check_same_alphabet(other, even_machine())


# DOT


def _count(dot):
    nodes = [l for l in dot.splitlines() if "[label=" in l and "->" not in l]
    edges = [l for l in dot.splitlines() if "->" in l]
    return len(nodes), len(edges)


def test_dot_counts():
    assert _count(to_dot(even_machine())) == (2, 3)
    assert _count(to_dot(even_process())) == (2, 3)
    assert _count(to_dot(single_state())) == (1, 2)
    one_edge = CausalStateMachine(AB, (MachineState(0, ((),), (3, 0), (1.0, 0.0), (0, None)),))
    assert _count(to_dot(one_edge)) == (1, 1)


def test_dot_labels():
    dot = to_dot(even_machine())
    assert '"A | 0.5"' in dot and '"B | 1"' in dot
