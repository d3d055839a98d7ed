"""Concept frequencies, relative-frequency probabilities, and information content."""

from __future__ import annotations

import io
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, TextIO

import numpy as np

from . import _kernels
from .taxonomy import Taxonomy, TaxonomyError, UnknownConceptError

DEFAULT_BASE = 2.0
_MONOTONE_RTOL = 1e-12


class ProbabilityError(ValueError):
    pass


class EmptyModelError(ProbabilityError):
    pass


class MonotonicityError(ProbabilityError):
    def __init__(self, child, parent, p_child, p_parent):
        super().__init__(f"p({child})={p_child!r} exceeds p({parent})={p_parent!r} on edge {child} -> {parent}")
        self.edge = (child, parent)


@dataclass
class FrequencyTable:
    """Propagated concept frequencies over one taxonomy.

    ``freq`` is indexed like ``taxonomy.ids``. Tables built from disjoint
    streams over the same taxonomy combine with ``+``.
    """

    taxonomy: Taxonomy
    freq: np.ndarray
    total_n: float = 0.0
    skipped: Counter = field(default_factory=Counter)

    def __getitem__(self, cid: str) -> float:
        return float(self.freq[self.taxonomy.index(cid)])

    def __add__(self, other: "FrequencyTable") -> "FrequencyTable":
        if other.taxonomy is not self.taxonomy:
            raise ValueError("frequency tables belong to different taxonomies")
        return FrequencyTable(self.taxonomy, self.freq + other.freq,
                              self.total_n + other.total_n, self.skipped + other.skipped)

    def as_dict(self) -> dict:
        return dict(zip(self.taxonomy.ids, self.freq.tolist()))


def _word_closures(t: Taxonomy, words):
    """CSR of the union of subsumers over all senses of each word (no fallback)."""
    ptr = [0]
    chunks = []
    for w in words:
        senses = [t.index(c) for c in t.sense_index.get(w, ())]
        anc = np.unique(np.concatenate([t.ancestors_of(i) for i in senses])) if senses else np.zeros(0, np.int64)
        chunks.append(anc.astype(np.int64))
        ptr.append(ptr[-1] + anc.size)
    idx = np.concatenate(chunks) if chunks else np.zeros(0, np.int64)
    return np.asarray(ptr, dtype=np.int64), idx


def count_weighted(t: Taxonomy, counts: Iterable[tuple[str, float]],
                   lemma_map: Mapping[str, str] | None = None) -> FrequencyTable:
    """Credit each (word, count) to every class that contains the word.

    A word counts once toward each subsuming class even when several of its
    senses share that class. Words outside the taxonomy are skipped and
    tallied in ``skipped``; the fallback concept is not used here.
    """
    lemma_map = lemma_map or {}
    totals = Counter()
    skipped = Counter()
    for word, count in counts:
        if count < 0:
            raise ValueError(f"negative count for {word!r}")
        word = lemma_map.get(word, word)
        if word in t.sense_index:
            totals[word] += count
        else:
            skipped[word] += count
    words = list(totals)
    ptr, idx = _word_closures(t, words)
    weights = np.array([totals[w] for w in words], dtype=np.float64)
    freq = np.zeros(len(t), dtype=np.float64)
    _kernels.active.scatter_add(ptr, idx, weights, freq)
    return FrequencyTable(t, freq, float(weights.sum()), skipped)


def count_corpus(t: Taxonomy, tokens: Iterable[str],
                 lemma_map: Mapping[str, str] | None = None) -> FrequencyTable:
    """Count a token stream; each in-taxonomy token adds 1 to N."""
    return count_weighted(t, Counter(tokens).items(), lemma_map)


class ProbabilityModel:
    """Per-concept probability and information content in a fixed log base.

    Concepts with probability 0 carry ``+inf`` information content; similarity
    code treats such subsumers as unusable.
    """

    def __init__(self, taxonomy: Taxonomy, p: np.ndarray, log_base: float = DEFAULT_BASE,
                 exact_ic: Mapping[int, float] | None = None):
        if log_base <= 0 or log_base == 1:
            raise ValueError(f"invalid log base {log_base!r}")
        self.taxonomy = taxonomy
        self.p = np.asarray(p, dtype=np.float64)
        self.p.setflags(write=False)
        self.log_base = float(log_base)
        with np.errstate(divide="ignore"):
            ic = -np.log(self.p) / math.log(self.log_base)
        ic[self.p == 0] = np.inf
        # -log(1) is -0.0; keep the top at a clean 0
        ic[ic == 0] = 0.0
        # values read as information content are kept verbatim rather than round-tripped through p
        self._exact = dict(exact_ic or {})
        for i, value in self._exact.items():
            ic[i] = value
        self.ic = ic
        self.ic.setflags(write=False)

    def prob(self, cid: str) -> float:
        return float(self.p[self.taxonomy.index(cid)])

    def info(self, cid: str) -> float:
        return float(self.ic[self.taxonomy.index(cid)])

    def with_base(self, base: float) -> "ProbabilityModel":
        """Same probabilities, information content rescaled to ``base``."""
        if not self._exact:
            return ProbabilityModel(self.taxonomy, self.p, base)
        scale = math.log(self.log_base) / math.log(base)
        return ProbabilityModel(self.taxonomy, self.p, base,
                                {i: v * scale for i, v in self._exact.items()})

    def check_monotone(self):
        t = self.taxonomy
        for i, parents in enumerate(t.parent_index):
            for j in parents:
                if self.p[i] > self.p[j] * (1 + _MONOTONE_RTOL):
                    raise MonotonicityError(t.ids[i], t.ids[j], float(self.p[i]), float(self.p[j]))


def to_probability(ft: FrequencyTable, base: float = DEFAULT_BASE) -> ProbabilityModel:
    if ft.total_n <= 0:
        raise EmptyModelError("no in-taxonomy tokens were counted")
    return ProbabilityModel(ft.taxonomy, ft.freq / ft.total_n, base)


def _parse_value(text, base, lineno):
    for prefix, kind in (("p=", "p"), ("p:", "p"), ("ic=", "ic"), ("ic:", "ic")):
        if text.startswith(prefix):
            text, mode = text[len(prefix):], kind
            break
    else:
        mode = "p"
    try:
        value = float(text)
    except ValueError:
        raise ProbabilityError(f"line {lineno}: bad numeric value {text!r}") from None
    if mode == "ic":
        if value < 0 or math.isnan(value):
            raise ProbabilityError(f"line {lineno}: information content must be >= 0")
        return "ic", value
    if not 0.0 <= value <= 1.0:
        raise ProbabilityError(f"line {lineno}: probability {value!r} outside [0, 1]")
    return "p", value


def load_probabilities(t: Taxonomy, source: TextIO | str, base: float = DEFAULT_BASE) -> ProbabilityModel:
    """Read ``concept<TAB>p=<real>`` / ``concept<TAB>ic=<real>`` records.

    A bare number is read as a probability. Concepts not listed get p = 0,
    except a virtual root, which gets p = 1. Information content values are
    interpreted in ``base``. The result is checked for monotonicity.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    p = np.zeros(len(t), dtype=np.float64)
    exact = {}
    if t.virtual_root is not None:
        p[t.index(t.virtual_root)] = 1.0
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\r\n")
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ProbabilityError(f"line {lineno}: expected concept<TAB>value")
        cid, value = fields
        if cid not in t:
            raise UnknownConceptError(cid)
        kind, value = _parse_value(value.strip(), base, lineno)
        i = t.index(cid)
        if kind == "ic":
            p[i] = 0.0 if math.isinf(value) else base ** (-value)
            exact[i] = value
        else:
            p[i] = value
            exact.pop(i, None)
    model = ProbabilityModel(t, p, base, exact)
    model.check_monotone()
    return model


def dump_probabilities(model: ProbabilityModel, out: TextIO, kind: str = "p"):
    for cid, p, ic in zip(model.taxonomy.ids, model.p.tolist(), model.ic.tolist()):
        if kind == "ic":
            out.write(f"{cid}\tic={ic!r}\n" if math.isfinite(ic) else f"{cid}\tic=inf\n")
        else:
            out.write(f"{cid}\tp={p!r}\n")


__all__ = [
    "DEFAULT_BASE", "EmptyModelError", "FrequencyTable", "MonotonicityError", "ProbabilityError",
    "ProbabilityModel", "TaxonomyError", "count_corpus", "count_weighted", "dump_probabilities",
    "load_probabilities", "to_probability",
]
