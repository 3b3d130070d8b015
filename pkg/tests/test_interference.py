import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qneuron.interference import (
    amplitude_sum,
    delta_for_budget,
    modsq_gap_bound,
    probability,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
amplitudes = st.builds(complex, finite, finite)


def naive_sum(zs):
    re = im = 0.0
    for z in zs:
        re, im = re + z.real, im + z.imag
    return complex(re, im)


@pytest.mark.parametrize(
    "z, expected",
    [(3 + 4j, 25.0), (0j, 0.0), (complex(1 / math.sqrt(2), -1 / math.sqrt(2)), 1.0)],
)
def test_probability_examples(z, expected):
    assert probability(z) == pytest.approx(expected, abs=1e-15)


def test_amplitude_sum_examples():
    assert amplitude_sum([1 + 0j, -1 + 0j]) == 0j
    assert amplitude_sum([1 + 0j, 1 + 0j]) == 2 + 0j
    assert amplitude_sum([]) == 0j


def test_amplitude_sum_matches_fold():
    rng = np.random.default_rng(3)
    zs = [complex(*rng.normal(size=2)) for _ in range(4)]
    assert amplitude_sum(zs) == naive_sum(zs)


def test_amplitude_sum_rejects_non_finite():
    with pytest.raises(ValueError):
        amplitude_sum([1 + 0j, complex(float("nan"), 0)])
    with pytest.raises(ValueError):
        amplitude_sum([complex(float("inf"), 1)])


def test_modsq_gap_bound_examples():
    assert modsq_gap_bound(1 + 0j, 0j) == 1.0
    z = 0.3 - 2.1j
    assert modsq_gap_bound(z, z) == 0.0


def test_modsq_gap_bound_disk_pairs():
    rng = np.random.default_rng(0)
    r = 10 * np.sqrt(rng.uniform(size=(1000, 2)))
    phi = rng.uniform(0, 2 * np.pi, size=(1000, 2))
    pts = r * np.exp(1j * phi)
    for z, z1 in pts:
        gap = abs(probability(z) - probability(z1))
        assert gap <= modsq_gap_bound(z, z1) * (1 + 1e-12) + 1e-12


@given(amplitudes)
def test_single_element_sum(z):
    assert probability(amplitude_sum([z])) == probability(z)


@given(amplitudes, amplitudes)
def test_gap_bound_property(z, z1):
    gap = abs(probability(z) - probability(z1))
    assert gap <= modsq_gap_bound(z, z1) * (1 + 1e-12) + 1e-9


@given(st.lists(amplitudes, min_size=1, max_size=20), st.randoms(use_true_random=False))
def test_sum_permutation_invariant(zs, rnd):
    shuffled = list(zs)
    rnd.shuffle(shuffled)
    a, b = amplitude_sum(zs), amplitude_sum(shuffled)
    scale = sum(abs(z) for z in zs)
    assert abs(a - b) <= 1e-12 * max(scale, 1.0)


@given(st.floats(0, 1e6), st.floats(1e-9, 1e3))
def test_delta_for_budget_solves_quadratic(radius, budget):
    delta = delta_for_budget(radius, budget)
    assert delta > 0
    assert delta * (2 * radius + delta) == pytest.approx(budget, rel=1e-9)


def test_delta_for_budget_rejects_bad_input():
    with pytest.raises(ValueError):
        delta_for_budget(-1.0, 0.1)
    with pytest.raises(ValueError):
        delta_for_budget(1.0, 0.0)
