import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import rooted_dags
from taxsim import data_path
from taxsim.probmodel import (
    EmptyModelError,
    MonotonicityError,
    ProbabilityError,
    count_corpus,
    count_weighted,
    dump_probabilities,
    load_probabilities,
    to_probability,
)
from taxsim.taxonomy import UnknownConceptError, load_taxonomy

CHAIN = "A\t\ta\nB\tA\tb\nC\tB\tc\n"


def test_dime_credits_its_ancestors(coin_taxonomy):
    ft = count_corpus(coin_taxonomy, ["dime"])
    assert ft.as_dict() == {"CASH": 1, "COIN": 1, "CREDIT_CARD": 0, "DIME": 1,
                            "MEDIUM_OF_EXCHANGE": 1, "NICKEL": 0}
    assert ft.total_n == 1


def test_empty_stream(coin_taxonomy):
    ft = count_corpus(coin_taxonomy, [])
    assert ft.total_n == 0 and not ft.freq.any()
    with pytest.raises(EmptyModelError):
        to_probability(ft)


def test_lemma_map_and_skips(coin_taxonomy):
    a = count_corpus(coin_taxonomy, ["dimes", "zebra", "zebra"], {"dimes": "dime"})
    b = count_corpus(coin_taxonomy, ["dime"])
    np.testing.assert_array_equal(a.freq, b.freq)
    assert a.total_n == 1
    assert a.skipped == {"zebra": 2}


def test_coin_corpus_probabilities(coin_taxonomy):
    tokens = data_path("coin_corpus.txt").read_text().split()
    assert len(tokens) == 8
    m = to_probability(count_corpus(coin_taxonomy, tokens))
    assert m.prob("COIN") == 0.25
    assert m.info("COIN") == 2.0
    assert m.prob("MEDIUM_OF_EXCHANGE") == 1.0 and m.info("MEDIUM_OF_EXCHANGE") == 0.0


def test_half_is_one_bit():
    t = load_taxonomy(CHAIN)
    m = to_probability(count_weighted(t, [("a", 1), ("b", 1)]))
    assert m.info("B") == 1.0
    assert m.prob("C") == 0 and math.isinf(m.info("C"))


def test_polysemous_word_counts_each_class_once():
    t = load_taxonomy("R\t\t\nX\tR\tw\nY\tR\tw\n")
    ft = count_corpus(t, ["w"])
    assert ft["R"] == 1 and ft["X"] == 1 and ft["Y"] == 1
    assert ft.total_n == 1


def test_fallback_not_used_in_counting():
    t = load_taxonomy("THING\t\t\nX\tTHING\tx\n", fallback="THING")
    ft = count_corpus(t, ["x", "zebra"])
    assert ft.total_n == 1 and ft["THING"] == 1


def test_merge_disjoint_streams(coin_taxonomy):
    a = count_corpus(coin_taxonomy, ["dime", "cash"])
    b = count_corpus(coin_taxonomy, ["nickel", "nope"])
    c = count_corpus(coin_taxonomy, ["dime", "cash", "nickel", "nope"])
    merged = a + b
    np.testing.assert_array_equal(merged.freq, c.freq)
    assert merged.total_n == c.total_n and merged.skipped == c.skipped


def test_medical_published_values(medical):
    _, m = medical
    assert m.info("HEALTH_PROFESSIONAL") == 8.844
    assert m.info("PERSON") == 2.005
    assert m.prob("HEALTH_PROFESSIONAL") < m.prob("PERSON")


def test_monotonicity_violation_names_edge():
    t = load_taxonomy(CHAIN)
    with pytest.raises(MonotonicityError) as e:
        load_probabilities(t, "A\tp=0.5\nB\tp=0.75\nC\tp=0.1\n")
    assert e.value.edge == ("B", "A")


def test_ic_chain_recovers_p_exactly():
    t = load_taxonomy(CHAIN)
    m = load_probabilities(t, "A\tic=0\nB\tic=1\nC\tic=3\n")
    assert m.p.tolist() == [1.0, 0.5, 0.125]
    assert m.info("C") == 3


@pytest.mark.parametrize("text", ["A\tp:1\nB\tp:0.5\n", "A\t1\nB\t0.5\n", "A\tic:0\nB\tic:1\n"])
def test_alternate_value_syntax(text):
    m = load_probabilities(load_taxonomy(CHAIN), text)
    assert m.prob("B") == 0.5 and m.prob("C") == 0


@pytest.mark.parametrize("text, exc", [
    ("Z\tp=0.5\n", UnknownConceptError),
    ("A\tp=1.5\n", ProbabilityError),
    ("A\tic=-1\n", ProbabilityError),
    ("A\tp=abc\n", ProbabilityError),
    ("A p=1\n", ProbabilityError),
])
def test_probability_file_errors(text, exc):
    with pytest.raises(exc):
        load_probabilities(load_taxonomy(CHAIN), text)


def test_virtual_root_defaults_to_one():
    t = load_taxonomy("A\t\t\nB\t\t\n", virtual_root=True)
    m = load_probabilities(t, "A\tp=0.5\nB\tp=0.5\n")
    assert m.info("__TOP__") == 0.0


def test_dump_round_trip(coin_taxonomy):
    m = to_probability(count_corpus(coin_taxonomy, data_path("coin_corpus.txt").read_text().split()))
    for kind in ("p", "ic"):
        buf = io.StringIO()
        dump_probabilities(m, buf, kind)
        back = load_probabilities(coin_taxonomy, buf.getvalue())
        np.testing.assert_allclose(back.p, m.p, rtol=1e-15)


corpora = st.lists(st.sampled_from(["a", "b", "c", "d", "e", "zz"]), max_size=40)


@settings(max_examples=120, deadline=None)
@given(rooted_dags(max_nodes=12), corpora)
def test_counting_invariants(dag, tokens):
    t, parents = dag
    ft = count_corpus(t, tokens)
    assert ft.total_n == sum(1 for w in tokens if w in t.sense_index)
    for c, ps in parents.items():
        for p in ps:
            assert ft[c] <= ft[p]
    if ft.total_n == 0:
        return
    m = to_probability(ft)
    m.check_monotone()
    (top,) = t.roots
    assert m.prob(top) == 1.0 and m.info(top) == 0.0
    assert np.array_equal(np.isinf(m.ic), m.p == 0)
    pos = m.p > 0
    order = np.argsort(m.p[pos])
    assert np.all(np.diff(m.ic[pos][order]) <= 0)


@settings(max_examples=60, deadline=None)
@given(rooted_dags(max_nodes=10), corpora, st.sampled_from([math.e, 10.0, 3.0]))
def test_base_change_scales_ic(dag, tokens, base):
    t, _ = dag
    ft = count_corpus(t, tokens)
    if ft.total_n == 0:
        return
    m2 = to_probability(ft)
    mb = m2.with_base(base)
    finite = np.isfinite(m2.ic) & (m2.ic > 0)
    np.testing.assert_allclose(mb.ic[finite] / m2.ic[finite], math.log(2) / math.log(base), rtol=1e-12)
    assert np.array_equal(np.isinf(mb.ic), np.isinf(m2.ic))
