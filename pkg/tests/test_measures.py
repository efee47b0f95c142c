import json
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import BINARY, SKEW, TRI, UNIFORM2, UNIFORM3
from fsdim.measures import (Alphabet, AlphabetMismatch, ProbMeasure, SymbolSeq, cross_cost_rate,
                            cumulative_self_information, divergence_formula_value, entropy, kl_divergence,
                            load_measure, self_information, word_probability)

mpmath.mp.dps = 40


def mp_entropy(probs):
    return float(-sum(mpmath.mpf(p.numerator) / p.denominator * mpmath.log(mpmath.mpf(p.numerator) / p.denominator, 2)
                      for p in probs))


def mp_kl(a, b):
    return float(sum(mpmath.mpf(p.numerator) / p.denominator
                     * mpmath.log((mpmath.mpf(p.numerator) / p.denominator) / (mpmath.mpf(q.numerator) / q.denominator), 2)
                     for p, q in zip(a, b)))


def seq(measure, text):
    return SymbolSeq.from_string(measure.alphabet, text)


@st.composite
def rational_measures(draw, size=None):
    m = size if size is not None else draw(st.integers(2, 5))
    weights = draw(st.lists(st.integers(1, 50), min_size=m, max_size=m))
    total = sum(weights)
    return ProbMeasure.of([Fraction(x, total) for x in weights])


@st.composite
def measure_pairs(draw):
    m = draw(st.integers(2, 5))
    a = draw(rational_measures(m))
    b = a if draw(st.booleans()) and draw(st.booleans()) else draw(rational_measures(m))
    return a, b


class TestAlphabet:
    def test_index_roundtrip(self):
        a = Alphabet(("x", "y", "z"))
        assert a.size == 3
        assert [a.index(a.symbol(i)) for i in range(3)] == [0, 1, 2]

    @pytest.mark.parametrize("symbols", [("0",), ("0", "0"), ("ab", "c"), ("0", " ")])
    def test_rejects_bad_symbol_sets(self, symbols):
        with pytest.raises(ValueError):
            Alphabet(symbols)


class TestProbMeasure:
    def test_rejects_nonpositive_or_unnormalised(self):
        with pytest.raises(ValueError, match="strictly"):
            ProbMeasure.of(["1", "0"])
        with pytest.raises(ValueError, match="sum to exactly 1"):
            ProbMeasure.of(["1/2", "1/3"])
        with pytest.raises(ValueError):
            ProbMeasure.of(["1"])

    def test_decimal_strings_are_exact(self):
        m = ProbMeasure.of(["0.1", "0.9"])
        assert m.probs == (Fraction(1, 10), Fraction(9, 10))

    def test_load_config(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"alphabet": ["a", "b"], "probs": ["3/4", "1/4"]}))
        m = load_measure(path)
        assert m.alphabet.symbols == ("a", "b") and m.probs == SKEW.probs
        path.write_text('{"probs": ["3/4", "1/4"]}')
        assert load_measure(path).alphabet == BINARY

    def test_load_config_errors_name_the_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ValueError, match="bad.json"):
            load_measure(path)


@pytest.mark.parametrize("measure, expected", [
    (UNIFORM2, 1.0),
    (ProbMeasure.uniform(4), 2.0),
    (SKEW, 0.811278),
])
def test_entropy_examples(measure, expected):
    assert entropy(measure) == pytest.approx(expected, abs=5e-7)
    assert entropy(measure) == pytest.approx(mp_entropy(measure.probs), abs=1e-12)


@pytest.mark.parametrize("a, b, expected", [
    (UNIFORM2, UNIFORM2, 0.0),
    (SKEW, UNIFORM2, 0.188722),
    (UNIFORM2, SKEW, 0.207519),
])
def test_kl_examples(a, b, expected):
    assert kl_divergence(a, b) == pytest.approx(expected, abs=5e-7)
    assert kl_divergence(a, b) == pytest.approx(mp_kl(a.probs, b.probs), abs=1e-12)


def test_alphabet_mismatch():
    with pytest.raises(AlphabetMismatch):
        kl_divergence(UNIFORM2, UNIFORM3)
    with pytest.raises(AlphabetMismatch):
        self_information(UNIFORM2, SymbolSeq.from_string(UNIFORM3.alphabet, "012"))


@pytest.mark.parametrize("measure, text, expected", [
    (UNIFORM2, "0101", 4.0),
    (SKEW, "00", 0.830075),
    (SKEW, "", 0.0),
    (UNIFORM3, "", 0.0),
])
def test_self_information_examples(measure, text, expected):
    assert self_information(measure, seq(measure, text)) == pytest.approx(expected, abs=5e-7)


@pytest.mark.parametrize("measure, text, expected", [
    (UNIFORM2, "010", Fraction(1, 8)),
    (SKEW, "01", Fraction(3, 16)),
    (SKEW, "", Fraction(1)),
])
def test_word_probability_examples(measure, text, expected):
    assert word_probability(measure, seq(measure, text)) == expected


@pytest.mark.parametrize("a, b, expected", [
    (SKEW, SKEW, 1.0),
    (TRI, TRI, 1.0),
    (SKEW, UNIFORM2, 0.811278),
    (UNIFORM2, SKEW, 0.828144),
    (TRI, UNIFORM3, 0.946395),
])
def test_divergence_formula_examples(a, b, expected):
    value = divergence_formula_value(a, b)
    assert value == pytest.approx(expected, abs=5e-7)
    h = mp_entropy(a.probs)
    assert value == pytest.approx(h / (h + mp_kl(a.probs, b.probs)), abs=1e-12)


@pytest.mark.parametrize("a, b, expected", [
    (UNIFORM2, UNIFORM2, 1.0),
    (SKEW, UNIFORM2, 1.0),
    (UNIFORM2, SKEW, 1.207519),
])
def test_cross_cost_rate_examples(a, b, expected):
    assert cross_cost_rate(a, b) == pytest.approx(expected, abs=5e-7)


@settings(max_examples=1000, deadline=None)
@given(measure_pairs())
def test_gibbs_inequality(pair):
    a, b = pair
    d = kl_divergence(a, b)
    if a.probs == b.probs:
        assert d == 0.0
    else:
        assert d > 0.0


@settings(max_examples=300, deadline=None)
@given(measure_pairs())
def test_cross_cost_decomposition(pair):
    a, b = pair
    assert abs(cross_cost_rate(a, b) - (entropy(a) + kl_divergence(a, b))) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(measure_pairs())
def test_divergence_formula_range(pair):
    a, b = pair
    v = divergence_formula_value(a, b)
    assert 0 < v <= 1
    assert (v == 1.0) == (a.probs == b.probs)


@settings(max_examples=200, deadline=None)
@given(rational_measures(), st.data())
def test_self_information_additivity(beta, data):
    u = data.draw(st.lists(st.integers(0, beta.size - 1), max_size=10_000))
    v = data.draw(st.lists(st.integers(0, beta.size - 1), max_size=10_000))
    su, sv = SymbolSeq(beta.alphabet, u), SymbolSeq(beta.alphabet, v)
    assert abs(self_information(beta, su + sv) - self_information(beta, su) - self_information(beta, sv)) <= 1e-9


@settings(max_examples=300, deadline=None)
@given(rational_measures(), st.data())
def test_self_information_matches_word_probability(alpha, data):
    w = SymbolSeq(alpha.alphabet, data.draw(st.lists(st.integers(0, alpha.size - 1), max_size=64)))
    p = word_probability(alpha, w)
    exact = float(-mpmath.log(mpmath.mpf(p.numerator) / p.denominator, 2))
    assert abs(self_information(alpha, w) - exact) <= 1e-9


@settings(max_examples=200, deadline=None)
@given(rational_measures(), st.data())
def test_self_information_bounds(beta, data):
    w = SymbolSeq(beta.alphabet, data.draw(st.lists(st.integers(0, beta.size - 1), max_size=500)))
    info = self_information(beta, w)
    n = len(w)
    assert n * beta.costs.min() - 1e-9 <= info <= n * beta.costs.max() + 1e-9


def test_long_sequence_sum_matches_exact_oracle():
    rng = np.random.default_rng(3)
    w = SymbolSeq(TRI.alphabet, rng.integers(0, 3, size=2_000_000))
    counts = np.bincount(w.data, minlength=3)
    exact = sum(mpmath.mpf(int(c)) * -mpmath.log(mpmath.mpf(p.numerator) / p.denominator, 2)
                for c, p in zip(counts, TRI.probs))
    assert abs(self_information(TRI, w) - float(exact)) <= 1e-6


def test_cumulative_self_information_matches_prefixes():
    rng = np.random.default_rng(5)
    w = SymbolSeq(SKEW.alphabet, rng.integers(0, 2, size=5000))
    lengths = [0, 1, 17, 2500, 5000]
    got = cumulative_self_information(SKEW, w, lengths)
    want = [self_information(SKEW, w[:n]) for n in lengths]
    assert np.allclose(got, want, rtol=0, atol=1e-9)


def test_kl_is_asymmetric():
    assert not math.isclose(kl_divergence(SKEW, UNIFORM2), kl_divergence(UNIFORM2, SKEW))
