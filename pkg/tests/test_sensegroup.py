import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dags, random_model
from taxsim.probmodel import load_probabilities
from taxsim.sensegroup import (
    EVALUATION,
    PRESENTATION,
    AnnotationError,
    disambiguate_group,
    filter_senses,
    random_baseline,
    read_annotations,
    scale_confidence,
    score_filtering,
    score_selection,
)
from taxsim.taxonomy import load_taxonomy

SIX = [f"S{k}" for k in range(1, 7)]
SIX_ANN = "".join(f"item1\tw\t{s}\t{'correct' if s in ('S1', 'S2') else 'incorrect'}\n" for s in SIX)


def six_partition(included):
    return {("item1", "w", s): s in included for s in SIX}


def test_doctor_nurse_actor(medical):
    _, m = medical
    gr = disambiguate_group(m, ["doctor", "nurse", "actor"])
    phi = {s: p for _, s, p in gr.items()}
    assert phi["DOCTOR1"] == phi["NURSE1"] == phi["ACTOR1"] == 1.0
    expected = 2.005 / (8.844 + 2.005)
    assert phi["DOCTOR2"] == pytest.approx(expected, abs=1e-12)
    assert phi["NURSE2"] == pytest.approx(expected, abs=1e-12)
    assert round(phi["DOCTOR2"], 4) == 0.1848
    assert gr.pairs[(0, 1)] == (8.844, ("HEALTH_PROFESSIONAL",))
    assert gr.normalization.tolist() == [8.844 + 2.005, 8.844 + 2.005, 2 * 2.005]


def test_group_with_no_shared_ancestry_is_uniform():
    t = load_taxonomy("A\t\t\nA1\tA\tx\nA2\tA\tx\nB\t\t\nB1\tB\ty\nB2\tB\ty\nB3\tB\ty\n")
    m = load_probabilities(t, "A\tp=0.5\nA1\tp=0.25\nA2\tp=0.25\nB\tp=0.5\nB1\tp=0.1\nB2\tp=0.1\nB3\tp=0.1\n")
    gr = disambiguate_group(m, ["x", "y"])
    assert gr.normalization.tolist() == [0.0, 0.0]
    assert [p for *_, p in gr.items()] == [0.5, 0.5] + [1 / 3] * 3


def test_duplicates_and_unknown_words(medical, caplog):
    _, m = medical
    gr = disambiguate_group(m, ["doctor", "nurse", "doctor", "zebra"])
    assert gr.words == ("doctor", "nurse")
    assert gr.excluded == ("zebra",)
    assert "duplicate" in caplog.text and "zebra" in caplog.text


@pytest.mark.parametrize("phi, level", [(0.0, 1), (1.0, 5), (0.185, 1), (0.2, 2), (0.7999, 4), (0.8, 5)])
def test_scale_confidence(phi, level):
    assert scale_confidence(phi) == level


def test_scale_confidence_range():
    with pytest.raises(ValueError):
        scale_confidence(1.01)


def test_filter_modes(medical):
    _, m = medical
    gr = disambiguate_group(m, ["doctor", "nurse", "actor"])
    presentation = filter_senses(gr, *PRESENTATION)
    assert all(presentation.values())
    evaluation = filter_senses(gr, *EVALUATION)
    assert [s for (_, _, s), inc in evaluation.items() if not inc] == ["DOCTOR2", "NURSE2"]
    assert not filter_senses(gr, 0.19, 1)[("", "doctor", "DOCTOR2")]
    with pytest.raises(ValueError):
        filter_senses(gr, 0.1, 6)


def test_low_phi_excluded_at_threshold():
    t = load_taxonomy("R\t\t\nH\tR\t\n" + "".join(f"X{k}\tR\tx\n" for k in range(19)) + "XH\tH\tx\nY\tH\ty\n")
    ic = "R\tic=0\nH\tic=3\n" + "".join(f"X{k}\tic=5\n" for k in range(19)) + "XH\tic=5\nY\tic=5\n"
    gr = disambiguate_group(load_probabilities(t, ic), ["x", "y"])
    phi = dict(((w, s), p) for w, s, p in gr.items())
    assert phi[("x", "XH")] == 1.0
    part = filter_senses(gr, 0.1, 1)
    assert part[("", "x", "XH")]


def test_hand_fixture_selection_and_filtering():
    ann = read_annotations(SIX_ANN)
    part = six_partition({"S1", "S2", "S3"})
    sel = score_selection(part, ann)
    assert (sel.precision, sel.recall) == (2 / 3, 1.0)
    fil = score_filtering(part, ann)
    assert (fil.precision, fil.recall) == (1.0, 3 / 4)


def test_selection_identities():
    ann = read_annotations(SIX_ANN)
    exact = six_partition({"S1", "S2"})
    assert score_selection(exact, ann) == score_filtering(exact, ann)
    assert score_selection(exact, ann).precision == 1.0 and score_selection(exact, ann).recall == 1.0
    everything = six_partition(set(SIX))
    sel = score_selection(everything, ann)
    assert (sel.precision, sel.recall) == (2 / 6, 1.0)
    fil = score_filtering(everything, ann)
    assert fil.precision is None and fil.recall == 0.0
    nothing = six_partition(set())
    sel = score_selection(nothing, ann)
    assert sel.precision is None and sel.recall == 0.0


def test_unknown_items_skipped_and_unannotated_rejected():
    ann = read_annotations(SIX_ANN + "item2\tunknown\n")
    part = six_partition({"S1"})
    part[("item2", "v", "T1")] = True
    assert score_selection(part, ann).precision == 1.0
    part[("item3", "v", "T1")] = True
    with pytest.raises(AnnotationError):
        score_selection(part, ann)


def test_annotation_parse_errors():
    with pytest.raises(AnnotationError, match="line 2"):
        read_annotations("i\tw\ts\tcorrect\ni\tw\ts\tmaybe\n")


FIVE_ITEMS = [(f"i{n}", [("w", f"S{n}_{k}") for k in range(size)]) for n, size in enumerate([2, 3, 1, 4, 2])]


def five_ann():
    lines = []
    for item, senses in FIVE_ITEMS:
        for k, (w, s) in enumerate(senses):
            lines.append(f"{item}\t{w}\t{s}\t{'correct' if k == 0 else 'incorrect'}\n")
    return read_annotations("".join(lines))


def test_random_baseline_within_binomial_band():
    total = sum(len(s) for _, s in FIVE_ITEMS)
    target = 1.3
    q = min(1.0, target / (total / len(FIVE_ITEMS)))
    runs = 10
    sigma = math.sqrt(total * q * (1 - q) / runs)
    res = random_baseline(FIVE_ITEMS, five_ann(), target, runs=runs, seed=0)
    assert res.inclusion_prob == q
    assert abs(res.mean_included - q * total) <= 2 * sigma
    again = random_baseline(FIVE_ITEMS, five_ann(), target, runs=runs, seed=0)
    assert again == res


def test_random_baseline_limits():
    ann = five_ann()
    everything = random_baseline(FIVE_ITEMS, ann, 10.0, runs=3, seed=1)
    assert everything.inclusion_prob == 1.0 and everything.selection.recall == 1.0
    nothing = random_baseline(FIVE_ITEMS, ann, 1e-12, runs=3, seed=1)
    assert nothing.mean_included == 0 and nothing.selection.recall == 0.0
    assert nothing.selection.precision is None
    with pytest.raises(ValueError):
        random_baseline(FIVE_ITEMS, ann, 0.0)


# -- properties ------------------------------------------------------------

VOCAB = ("a", "b", "c", "d", "e")


@st.composite
def groups(draw):
    t, _ = draw(dags(min_nodes=2, max_nodes=10, vocab=VOCAB))
    m = random_model(t, np.random.default_rng(draw(st.integers(0, 2**32 - 1))))
    words = draw(st.lists(st.sampled_from(VOCAB), min_size=2, max_size=5, unique=True))
    return m, words


@settings(max_examples=120)
@given(groups(), st.randoms(use_true_random=False))
def test_group_invariants(mw, rnd):
    m, words = mw
    t = m.taxonomy
    gr = disambiguate_group(m, words)
    for i, w in enumerate(gr.words):
        phi = np.asarray(gr.phi[i])
        assert np.all((phi >= 0) & (phi <= 1))
        assert np.all(gr.support[i] <= gr.normalization[i] + 1e-12)
        incident = [v for (a, b), (v, _) in gr.pairs.items() if i in (a, b)]
        assert gr.normalization[i] == pytest.approx(math.fsum(incident), abs=1e-12)
        if len(gr.senses[i]) == 1 and gr.normalization[i] > 0:
            assert phi[0] == 1.0
        if gr.normalization[i] == 0:
            assert np.allclose(phi, 1 / len(phi))
    for (i, j), (v, mis) in gr.pairs.items():
        for side in (i, j):
            under = sum(1 for s in gr.senses[side] if set(t.subsumers(s)) & set(mis))
            assert under >= 1 or v == 0
    # permutation of the input list leaves every confidence unchanged
    shuffled = list(words)
    rnd.shuffle(shuffled)
    again = disambiguate_group(m, shuffled)
    assert {(w, s): p for w, s, p in gr.items()} == pytest.approx({(w, s): p for w, s, p in again.items()})
    # a log-base change scales support and normalization alike
    scaled = disambiguate_group(m.with_base(10.0), words)
    assert {(w, s): p for w, s, p in gr.items()} == pytest.approx({(w, s): p for w, s, p in scaled.items()})
