"""Selectional association from directed predicate-argument co-occurrences.

The association of a predicate word ``w`` with class ``c`` is the share of
the relative entropy ``D(p(C|w) || p(C))`` contributed by ``c``. Class
distributions are estimated by splitting each argument's count evenly over
its senses and crediting every subsumer of each sense; ``p(C|w)`` and the
prior ``p(C)`` are normalized over the same inventory of credited classes.
"""

from __future__ import annotations

import io
import logging
from collections import Counter, defaultdict
from typing import Iterable, TextIO

import numpy as np

from .taxonomy import Taxonomy

log = logging.getLogger(__name__)


class SelectionError(ValueError):
    pass


class UnseenWordError(SelectionError, KeyError):
    __str__ = ValueError.__str__


class InconsistentModelError(SelectionError):
    pass


class CoocModel:
    """Immutable class-conditional and prior distributions for predicate words."""

    def __init__(self, taxonomy: Taxonomy, pair_counts: dict, class_freq: dict, skipped: Counter):
        self.taxonomy = taxonomy
        self.pair_counts = pair_counts
        self.class_freq = class_freq
        self.skipped = skipped
        self.word_total = {w: float(f.sum()) for w, f in class_freq.items()}
        totals = np.zeros(len(taxonomy), dtype=np.float64)
        for f in class_freq.values():
            totals += f
        mass = totals.sum()
        self.prior = totals / mass if mass > 0 else totals
        self.inventory = np.flatnonzero(self.prior > 0)
        self._kl_cache = {}

    def conditional(self, w: str) -> np.ndarray:
        f = self.class_freq.get(w)
        if f is None or self.word_total[w] <= 0:
            raise UnseenWordError(f"predicate {w!r} has no co-occurrence data")
        return f / self.word_total[w]

    def _terms(self, w: str) -> np.ndarray:
        """Per-class relative-entropy terms over the inventory, cached per word."""
        terms = self._kl_cache.get(w)
        if terms is None:
            cond = self.conditional(w)
            terms = np.zeros(len(self.taxonomy), dtype=np.float64)
            pos = cond > 0
            if np.any(pos & (self.prior == 0)):
                raise InconsistentModelError(f"{w!r} predicts a class with zero prior")
            terms[pos] = cond[pos] * np.log(cond[pos] / self.prior[pos])
            self._kl_cache[w] = terms
        return terms

    def kl(self, w: str) -> float:
        return float(self._terms(w).sum())

    def association(self, w: str, c: str) -> float:
        return sel_assoc_class(self, w, c)


def ingest_pairs(t: Taxonomy, pairs: Iterable[tuple]) -> CoocModel:
    """Build a :class:`CoocModel` from ``(predicate, argument[, count])`` tuples."""
    pair_counts = defaultdict(float)
    class_freq = {}
    skipped = Counter()
    for rec in pairs:
        pred, arg = rec[0], rec[1]
        count = float(rec[2]) if len(rec) > 2 else 1.0
        if count < 0:
            raise ValueError(f"negative count for ({pred!r}, {arg!r})")
        senses = t.senses(arg)
        if not senses:
            skipped[arg] += count
            continue
        pair_counts[(pred, arg)] += count
        f = class_freq.get(pred)
        if f is None:
            f = class_freq[pred] = np.zeros(len(t), dtype=np.float64)
        share = count / len(senses)
        for s in senses:
            f[t.ancestors_of(t.index(s))] += share
    if skipped:
        log.info("skipped %d argument tokens with no senses", sum(skipped.values()))
    return CoocModel(t, dict(pair_counts), class_freq, skipped)


def read_pairs(source: TextIO | str):
    """Yield ``(predicate, argument, count)`` from ``pred<TAB>arg[<TAB>count]`` lines."""
    if isinstance(source, str):
        source = io.StringIO(source)
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\r\n")
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) == 2:
            yield fields[0], fields[1], 1.0
        elif len(fields) == 3:
            try:
                yield fields[0], fields[1], float(fields[2])
            except ValueError:
                raise SelectionError(f"line {lineno}: bad count {fields[2]!r}") from None
        else:
            raise SelectionError(f"line {lineno}: expected predicate<TAB>argument[<TAB>count]")


def sel_assoc_class(cm: CoocModel, w: str, c: str) -> float:
    terms = cm._terms(w)
    d = terms.sum()
    if d <= 0:
        return 0.0
    return float(terms[cm.taxonomy.index(c)] / d)


def sel_assoc_word(cm: CoocModel, w1: str, w2: str) -> float:
    """Best association of ``w1`` with any class containing a sense of ``w2``."""
    t = cm.taxonomy
    senses = t.senses(w2)
    if not senses:
        cm._terms(w1)  # still surface an unseen predicate
        return 0.0
    classes = np.unique(np.concatenate([t.ancestors_of(t.index(s)) for s in senses]))
    terms = cm._terms(w1)
    d = terms.sum()
    if d <= 0:
        return 0.0
    return float(terms[classes].max() / d)


def best_class(cm: CoocModel, w1: str, w2: str) -> str | None:
    """The class realizing :func:`sel_assoc_word` (first in id order on ties)."""
    t = cm.taxonomy
    senses = t.senses(w2)
    if not senses:
        return None
    classes = np.unique(np.concatenate([t.ancestors_of(t.index(s)) for s in senses]))
    terms = cm._terms(w1)
    return t.ids[classes[np.argmax(terms[classes])]]
