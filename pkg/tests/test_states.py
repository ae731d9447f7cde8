import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import poisson

from nxent.probability import number_dist
from nxent.states import (
    FockVector,
    StateSpecError,
    coherent_state,
    fock_state,
    load_state,
    mixed,
    parse_state,
    random_mixture,
    random_state,
    state_to_spec,
)


def test_fock_examples():
    assert fock_state(0, 5).coeffs.tolist() == [1, 0, 0, 0, 0, 0]
    assert fock_state(3, 3).coeffs.tolist() == [0, 0, 0, 1]
    with pytest.raises(StateSpecError):
        fock_state(4, 3)


def test_coherent_zero_is_vacuum():
    np.testing.assert_array_equal(coherent_state(0, 10).coeffs, fock_state(0, 10).coeffs)


def untruncated_mean_number(a, terms=200):
    # Poisson mean from an explicit sum with an upper bound on the dropped tail
    lam = abs(a) ** 2
    total = math.fsum(n * math.exp(-lam + n * math.log(lam) - math.lgamma(n + 1))
                      for n in range(1, terms))
    tail_bound = terms * math.exp(-lam + terms * math.log(lam) - math.lgamma(terms + 1)) * 2
    return total, tail_bound


def test_coherent_mean_number():
    f = coherent_state(1.0, 40)
    mean, tail = untruncated_mean_number(1.0)
    assert tail < 1e-12
    got = float(number_dist(f).probs @ np.arange(41))
    assert got == pytest.approx(mean, abs=1e-6)
    assert got == pytest.approx(1.0, abs=1e-6)


def test_coherent_poisson_statistics():
    f = coherent_state(2j, 60)
    assert np.sum(np.abs(f.coeffs) ** 2) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(number_dist(f).probs, poisson.pmf(np.arange(61), 4.0), atol=1e-6)


def test_coherent_truncation_guard():
    with pytest.raises(StateSpecError, match="N >= 16"):
        coherent_state(2.0, 10)


def test_random_state_deterministic_and_normalized():
    a, b = random_state(11, 7), random_state(11, 7)
    np.testing.assert_array_equal(a.coeffs, b.coeffs)
    assert not np.array_equal(a.coeffs, random_state(12, 7).coeffs)
    assert np.sum(np.abs(a.coeffs) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_random_state_uniform_sphere_moment():
    # for a uniform unit vector in C^(N+1), |c_0|^2 ~ Beta(1, N): mean 1/(N+1)
    N, trials = 3, 10_000
    s0 = np.array([abs(random_state(seed, N).coeffs[0]) ** 2 for seed in range(trials)])
    var = N / ((N + 1) ** 2 * (N + 2))
    assert abs(s0.mean() - 0.25) < 3 * math.sqrt(var / trials)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32), N=st.integers(0, 40))
def test_construction_keeps_unit_norm(seed, N):
    f = random_state(seed, N)
    assert abs(np.sum(np.abs(f.coeffs) ** 2) - 1) <= 1e-12


def test_unnormalized_vector_rejected():
    with pytest.raises(StateSpecError):
        FockVector([1.0, 1.0])
    with pytest.raises(StateSpecError):
        FockVector([])


def test_mixture_examples():
    f = random_state(1, 4)
    m = mixed([(1.0, f)])
    assert m.components[0][1] is f
    half = mixed([(0.5, fock_state(0, 1)), (0.5, fock_state(1, 1))])
    np.testing.assert_allclose(number_dist(half).probs, [0.5, 0.5])
    with pytest.raises(StateSpecError):
        mixed([(0.7, f), (0.4, random_state(2, 4))])
    with pytest.raises(StateSpecError):
        mixed([])
    with pytest.raises(StateSpecError):
        mixed([(1.2, f), (-0.2, f)])


def test_mixture_weights_renormalized_exactly():
    f = random_state(1, 2)
    m = mixed([(0.5 + 4e-10, f), (0.5, f)])
    assert math.fsum(m.weights) == 1.0


def test_mixture_number_distribution_is_linear():
    m = random_mixture(9, 6, ncomp=4)
    expect = sum(w * np.abs(f.coeffs) ** 2 for w, f in m.components)
    np.testing.assert_allclose(number_dist(m).probs, expect, atol=1e-15)


def test_parse_all_kinds(tmp_path):
    assert parse_state({"kind": "fock", "n": 2, "N": 4}).coeffs[2] == 1
    coh = parse_state({"kind": "coherent", "alpha": [0.0, 1.0], "N": 20})
    np.testing.assert_allclose(coh.coeffs, coherent_state(1j, 20).coeffs)
    sup = parse_state({"kind": "superposition", "coeffs": [[1, 0], [0, 1]]})
    np.testing.assert_allclose(sup.coeffs, np.array([1, 1j]) / math.sqrt(2))
    mix = parse_state({"kind": "mixture", "components": [
        {"weight": 0.25, "state": {"kind": "fock", "n": 0, "N": 2}},
        {"weight": 0.75, "state": {"kind": "fock", "n": 2, "N": 2}},
    ]})
    np.testing.assert_allclose(number_dist(mix).probs, [0.25, 0, 0.75])
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"kind": "fock", "n": 1, "N": 1}))
    assert load_state(path).coeffs[1] == 1


@pytest.mark.parametrize("spec", [
    {"kind": "squeezed", "r": 1},
    {"kind": "fock", "n": 1},
    {"kind": "fock", "n": 1.5, "N": 3},
    {"kind": "coherent", "alpha": [1, 2, 3], "N": 40},
    {"kind": "superposition", "coeffs": []},
    {"kind": "superposition", "coeffs": [[1, 0], [1, 0]], "normalize": False},
    [1, 2],
])
def test_parse_rejects(spec):
    with pytest.raises(StateSpecError):
        parse_state(spec)


def test_malformed_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(StateSpecError):
        load_state(path)


def test_spec_round_trip():
    for state in (random_state(3, 5), random_mixture(4, 3)):
        back = parse_state(json.loads(json.dumps(state_to_spec(state))))
        np.testing.assert_array_equal(number_dist(back).probs, number_dist(state).probs)
