"""Sense confidences for groups of related nouns, plus selection/filtering scores."""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .probmodel import ProbabilityModel
from .similarity import wsim

log = logging.getLogger(__name__)

LEVELS = 5
PRESENTATION = (0.1, 1)
EVALUATION = (0.0, 3)


class AnnotationError(ValueError):
    pass


@dataclass
class GroupResult:
    words: tuple
    senses: tuple                # senses[i] is the tuple of concept ids for words[i]
    support: list                # support[i][k]
    normalization: np.ndarray
    phi: list                    # phi[i][k]
    pairs: dict = field(default_factory=dict)    # (i, j) -> (v_ij, most informative subsumers)
    excluded: tuple = ()         # words with no senses

    def confidence(self, word: str, sense: str) -> float:
        i = self.words.index(word)
        return float(self.phi[i][self.senses[i].index(sense)])

    def items(self):
        """Yield ``(word, sense, phi)`` in input order."""
        for i, w in enumerate(self.words):
            for k, s in enumerate(self.senses[i]):
                yield w, s, float(self.phi[i][k])


def disambiguate_group(m: ProbabilityModel, words: Sequence[str]) -> GroupResult:
    """Credit each sense with the similarity of every pair whose shared subsumer covers it.

    For each pair of words, the pair's similarity is added to the
    normalization of both words and to the support of every sense lying under
    one of the pair's most informative subsumers. A sense's confidence is its
    support over its word's normalization, or uniform when that is zero.
    """
    t = m.taxonomy
    seen = []
    for w in words:
        if w in seen:
            log.warning("duplicate word %r collapsed", w)
        else:
            seen.append(w)
    kept = [w for w in seen if t.senses(w)]
    excluded = tuple(w for w in seen if not t.senses(w))
    for w in excluded:
        log.warning("word %r has no senses; left out of the group", w)

    senses = tuple(t.senses(w) for w in kept)
    closures = [[set(t.subsumers(s)) for s in ss] for ss in senses]
    support = [np.zeros(len(ss)) for ss in senses]
    norm = np.zeros(len(kept))
    pairs = {}
    for i in range(len(kept)):
        for j in range(i + 1, len(kept)):
            res = wsim(m, kept[i], kept[j])
            v = res.value
            pairs[(i, j)] = (v, res.subsumers)
            mis = set(res.subsumers)
            for k, anc in enumerate(closures[i]):
                if anc & mis:
                    support[i][k] += v
            for k, anc in enumerate(closures[j]):
                if anc & mis:
                    support[j][k] += v
            norm[i] += v
            norm[j] += v

    phi = []
    for i, ss in enumerate(senses):
        if norm[i] > 0.0:
            phi.append(support[i] / norm[i])
        else:
            phi.append(np.full(len(ss), 1.0 / len(ss)))
    return GroupResult(tuple(kept), senses, support, norm, phi, pairs, excluded)


def scale_confidence(phi: float, levels: int = LEVELS) -> int:
    """Map [0, 1] onto 1..levels with equal-width bins; 1.0 lands in the top bin."""
    if not 0.0 <= phi <= 1.0:
        raise ValueError(f"confidence {phi!r} outside [0, 1]")
    return min(levels, 1 + math.floor(phi * levels))


def filter_senses(gr: GroupResult, threshold: float = PRESENTATION[0], min_level: int = PRESENTATION[1],
                  item: str = "") -> dict:
    """Partition senses: ``{(item, word, sense): included}``."""
    if not 1 <= min_level <= LEVELS:
        raise ValueError(f"min_level must be in 1..{LEVELS}")
    return {
        (item, w, s): phi >= threshold and scale_confidence(phi) >= min_level
        for w, s, phi in gr.items()
    }


@dataclass
class SenseAnnotation:
    """Reference labels: ``labels[item][(word, sense)]`` is True for correct senses."""

    labels: dict = field(default_factory=dict)
    known: dict = field(default_factory=dict)

    def is_known(self, item: str) -> bool:
        return self.known.get(item, True)

    def correct_count(self, item: str) -> int:
        return sum(self.labels.get(item, {}).values())


def read_annotations(source: TextIO | str) -> SenseAnnotation:
    """Parse ``item<TAB>word<TAB>sense<TAB>correct|incorrect`` and ``item<TAB>known|unknown``."""
    if isinstance(source, str):
        source = io.StringIO(source)
    ann = SenseAnnotation()
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\r\n")
        if not line or line.startswith("#"):
            continue
        f = line.split("\t")
        if len(f) == 2 and f[1] in ("known", "unknown"):
            ann.known[f[0]] = f[1] == "known"
        elif len(f) == 4 and f[3] in ("correct", "incorrect"):
            ann.labels.setdefault(f[0], {})[(f[1], f[2])] = f[3] == "correct"
        else:
            raise AnnotationError(f"line {lineno}: unrecognized annotation record")
    return ann


@dataclass(frozen=True)
class PR:
    precision: float | None
    recall: float | None


def _ratio(num, den):
    return num / den if den else None


def _tally(partition: Mapping, ann: SenseAnnotation):
    """Counts of (included, correct) combinations over known, scored items."""
    items = {key[0] for key in partition}
    tally = {(True, True): 0, (True, False): 0, (False, True): 0, (False, False): 0}
    for key, included in partition.items():
        item, word, sense = key
        if not ann.is_known(item):
            continue
        label = ann.labels.get(item, {}).get((word, sense))
        if label is None:
            raise AnnotationError(f"sense {sense!r} of {word!r} in item {item!r} is not annotated")
        tally[(bool(included), label)] += 1
    # annotated senses the method never listed count as excluded
    for item in items:
        if not ann.is_known(item):
            continue
        for (word, sense), label in ann.labels.get(item, {}).items():
            if (item, word, sense) not in partition:
                tally[(False, label)] += 1
    return tally


def score_selection(partition: Mapping, ann: SenseAnnotation) -> PR:
    n = _tally(partition, ann)
    correct_included = n[(True, True)]
    return PR(_ratio(correct_included, n[(True, True)] + n[(True, False)]),
              _ratio(correct_included, n[(True, True)] + n[(False, True)]))


def score_filtering(partition: Mapping, ann: SenseAnnotation) -> PR:
    n = _tally(partition, ann)
    correct_excluded = n[(False, False)]
    return PR(_ratio(correct_excluded, n[(False, True)] + n[(False, False)]),
              _ratio(correct_excluded, n[(True, False)] + n[(False, False)]))


@dataclass(frozen=True)
class BaselineResult:
    inclusion_prob: float
    selection: PR
    filtering: PR
    mean_included: float


def _mean_defined(values):
    vals = [v for v in values if v is not None]
    return sum(vals) / len(vals) if vals else None


def random_baseline(items: Iterable[tuple[str, Sequence[tuple[str, str]]]], ann: SenseAnnotation,
                    target_avg: float, runs: int = 10, seed: int | None = 0) -> BaselineResult:
    """Include each sense independently so the expected senses per item match ``target_avg``.

    ``items`` holds ``(item_id, [(word, sense), ...])``. Metrics are averaged
    over ``runs`` draws from a generator seeded with ``seed``; runs where a
    metric is undefined are left out of its average.
    """
    if target_avg <= 0:
        raise ValueError("target_avg must be positive")
    items = [(item, list(senses)) for item, senses in items if ann.is_known(item)]
    total = sum(len(s) for _, s in items)
    if not items or total == 0:
        raise ValueError("no known items with senses")
    q = min(1.0, target_avg / (total / len(items)))
    rng = np.random.default_rng(seed)
    sel, fil, included = [], [], []
    for _ in range(runs):
        draws = rng.random(total) < q
        partition = {}
        k = 0
        for item, senses in items:
            for word, sense in senses:
                partition[(item, word, sense)] = bool(draws[k])
                k += 1
        sel.append(score_selection(partition, ann))
        fil.append(score_filtering(partition, ann))
        included.append(int(draws.sum()))
    return BaselineResult(
        q,
        PR(_mean_defined(r.precision for r in sel), _mean_defined(r.recall for r in sel)),
        PR(_mean_defined(r.precision for r in fil), _mean_defined(r.recall for r in fil)),
        float(np.mean(included)),
    )
