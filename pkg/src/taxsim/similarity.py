"""Concept- and word-level similarity measures.

Information-based measures (shared information content, 1 - p, Lin) take a
:class:`~taxsim.probmodel.ProbabilityModel`; structural ones (edge counting,
normalized path length, Wu-Palmer) need only the taxonomy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import _kernels
from .probmodel import ProbabilityModel
from .taxonomy import Taxonomy

CONCEPT_MEASURES = ("resnik", "prob", "lin", "wupalmer")


class SimilarityError(ValueError):
    pass


class DegenerateModelError(SimilarityError):
    """Every shared subsumer has zero probability."""


class NoPathError(SimilarityError):
    pass


@dataclass(frozen=True)
class SimilarityResult:
    value: float
    subsumers: tuple = ()
    sense_pair: tuple | None = None

    def __float__(self):
        return self.value


def _shared(t: Taxonomy, i: int, j: int):
    a = t.ancestors_of(i)
    ia, _ = _kernels.active.intersect(a, t.ancestors_of(j))
    return a[ia]


def _usable(score: np.ndarray, ic: np.ndarray) -> np.ndarray:
    out = np.array(score, dtype=np.float64)
    out[~np.isfinite(ic)] = -np.inf
    return out


def _argmax_concepts(m: ProbabilityModel, c1: str, c2: str, score: np.ndarray) -> SimilarityResult:
    t = m.taxonomy
    common = _shared(t, t.index(c1), t.index(c2))
    if common.size == 0:
        return SimilarityResult(0.0)
    vals = score[common]
    ok = np.isfinite(vals)
    if not ok.any():
        raise DegenerateModelError(f"all common subsumers of {c1} and {c2} have zero probability")
    best = vals[ok].max()
    winners = tuple(t.ids[k] for k in common[vals == best])
    return SimilarityResult(float(best), winners)


def sim_resnik(m: ProbabilityModel, c1: str, c2: str) -> SimilarityResult:
    """Information content of the most informative common subsumer."""
    return _argmax_concepts(m, c1, c2, _usable(m.ic, m.ic))


def sim_prob(m: ProbabilityModel, c1: str, c2: str) -> SimilarityResult:
    return _argmax_concepts(m, c1, c2, _usable(1.0 - m.p, m.ic))


def sim_lin(m: ProbabilityModel, c1: str, c2: str) -> float:
    """Shared information normalized by the information in both concepts.

    Evaluated for each common ancestor separately and maximized, which equals
    ``2 * ic(mis) / (ic(c1) + ic(c2))``. Two top concepts score 1.
    """
    i1, i2 = m.info(c1), m.info(c2)
    if math.isinf(i1) or math.isinf(i2):
        raise DegenerateModelError(f"zero-probability concept in ({c1}, {c2})")
    mis = sim_resnik(m, c1, c2)
    if not mis.subsumers:
        return 0.0
    denom = i1 + i2
    if denom == 0:
        return 1.0
    return 2.0 * mis.value / denom


def sim_wupalmer(t: Taxonomy, c1: str, c2: str) -> float:
    """Depth-normalized similarity with depths counted in nodes (root = 1)."""
    i, j = t.index(c1), t.index(c2)
    sl1 = slice(t.anc_ptr[i], t.anc_ptr[i + 1])
    sl2 = slice(t.anc_ptr[j], t.anc_ptr[j + 1])
    ia, ib = _kernels.active.intersect(t.anc_idx[sl1], t.anc_idx[sl2])
    if ia.size == 0:
        raise NoPathError(f"{c1} and {c2} share no subsumer")
    common = t.anc_idx[sl1][ia]
    d3 = t.depth[common] + 1
    deepest = d3 == d3.max()
    # among equally deep subsumers take the one closest to both concepts
    legs = (t.anc_dist[sl1][ia] + t.anc_dist[sl2][ib])[deepest]
    depth3 = float(d3.max())
    return 2.0 * depth3 / (2.0 * depth3 + float(legs.min()))


def deepest_subsumers(t: Taxonomy, c1: str, c2: str) -> tuple:
    common = _shared(t, t.index(c1), t.index(c2))
    if common.size == 0:
        return ()
    d = t.depth[common]
    return tuple(t.ids[k] for k in common[d == d.max()])


def _senses(t: Taxonomy, word: str) -> np.ndarray:
    return t.sense_indices(word)


def _word_argmax(m: ProbabilityModel, w1: str, w2: str, score: np.ndarray) -> SimilarityResult:
    t = m.taxonomy
    s1, s2 = _senses(t, w1), _senses(t, w2)
    if s1.size == 0 or s2.size == 0:
        return SimilarityResult(0.0)
    best, _ = _kernels.active.best_common_score(t.anc_ptr, t.anc_idx, s1, s2, score)
    if not np.isfinite(best):
        # disjoint sub-taxonomies, or only zero-probability subsumers
        return SimilarityResult(0.0)
    subsumers = set()
    pair = None
    for a in s1:
        for b in s2:
            common = _shared(t, a, b)
            hits = common[score[common] == best]
            if hits.size:
                subsumers.update(hits.tolist())
                if pair is None:
                    pair = (t.ids[a], t.ids[b])
    return SimilarityResult(float(best), tuple(t.ids[k] for k in sorted(subsumers)), pair)


def _word_pairwise(t: Taxonomy, w1: str, w2: str, fn) -> SimilarityResult:
    best, pair = None, None
    for a in t.senses(w1):
        for b in t.senses(w2):
            try:
                v = fn(a, b)
            except (NoPathError, DegenerateModelError):
                continue
            if best is None or v > best:
                best, pair = v, (a, b)
    if best is None:
        return SimilarityResult(0.0)
    return SimilarityResult(float(best), (), pair)


def wsim(m: ProbabilityModel, w1: str, w2: str, measure: str = "resnik") -> SimilarityResult:
    """Word similarity: the best concept similarity over all sense pairs.

    For ``resnik`` and ``prob`` the subsumers are every most informative
    subsumer reached by any maximizing sense pair; ``sense_pair`` is the
    first maximizing pair in id order. Sense pairs whose shared subsumers all
    have zero probability are skipped.
    """
    t = m.taxonomy
    if measure == "resnik":
        return _word_argmax(m, w1, w2, _usable(m.ic, m.ic))
    if measure == "prob":
        return _word_argmax(m, w1, w2, _usable(1.0 - m.p, m.ic))
    if measure == "lin":
        res = _word_pairwise(t, w1, w2, lambda a, b: sim_lin(m, a, b))
        if res.sense_pair:
            res = SimilarityResult(res.value, sim_resnik(m, *res.sense_pair).subsumers, res.sense_pair)
        return res
    if measure == "wupalmer":
        res = _word_pairwise(t, w1, w2, lambda a, b: sim_wupalmer(t, a, b))
        if res.sense_pair:
            res = SimilarityResult(res.value, deepest_subsumers(t, *res.sense_pair), res.sense_pair)
        return res
    raise ValueError(f"unknown concept measure {measure!r}; expected one of {CONCEPT_MEASURES}")


def min_sense_path(t: Taxonomy, w1: str, w2: str, via_top: bool = False):
    """Shortest path over all sense pairs as ``(length, (c1, c2))``.

    Returns ``(None, None)`` if no pair is connected. With ``via_top`` and no
    virtual root in ``t``, a path may also climb to a synthetic top node
    above every root.
    """
    s1, s2 = _senses(t, w1), _senses(t, w2)
    if s1.size == 0 or s2.size == 0:
        return None, None
    d, p, q = _kernels.active.min_pair_dist(t.anc_ptr, t.anc_idx, t.anc_dist, s1, s2)
    best = None if d < 0 else (int(d), (t.ids[s1[p]], t.ids[s2[q]]))
    if via_top and t.virtual_root is None:
        d1 = t.depth[s1] + 1
        d2 = t.depth[s2] + 1
        top = int(d1.min() + d2.min())
        if best is None or top < best[0]:
            best = (top, (t.ids[s1[d1.argmin()]], t.ids[s2[d2.argmin()]]))
    return best if best is not None else (None, None)


def edge_max(t: Taxonomy, via_top: bool = False) -> int:
    """Maximum depth used by edge measures (one deeper when a top is synthesized)."""
    return t.max_depth() + (1 if via_top and t.virtual_root is None else 0)


def wsim_edge(t: Taxonomy, w1: str, w2: str, variant: str = "assert-zero") -> float:
    """``2 * MAX`` minus the shortest sense-pair path; 0 when disconnected."""
    if variant not in ("assert-zero", "virtual-top"):
        raise ValueError(f"unknown edge variant {variant!r}")
    via_top = variant == "virtual-top"
    length, _ = min_sense_path(t, w1, w2, via_top)
    if length is None:
        return 0.0
    return float(2 * edge_max(t, via_top) - length)


def wsim_lc(t: Taxonomy, w1: str, w2: str, base: float = 2.0, variant: str = "assert-zero") -> float:
    """Negative log of path length over ``2 * MAX``, path length clamped to 1."""
    via_top = variant == "virtual-top"
    length, _ = min_sense_path(t, w1, w2, via_top)
    if length is None:
        raise NoPathError(f"no connected sense pair for {w1!r}, {w2!r}")
    span = 2 * edge_max(t, via_top)
    if span == 0:
        raise NoPathError("taxonomy has no depth; path-length ratio undefined")
    return -math.log(max(length, 1) / span) / math.log(base)


@dataclass(frozen=True)
class WeightFunction:
    """Raw nonnegative concept weights; ``default`` covers unlisted concepts."""

    weights: Mapping[str, float] = field(default_factory=dict)
    default: float = 0.0

    def raw(self, cid: str) -> float:
        w = self.weights.get(cid, self.default)
        if w < 0 or math.isnan(w):
            raise ValueError(f"weight for {cid} must be nonnegative, got {w!r}")
        return w

    def normalize(self, concepts) -> tuple[dict, bool]:
        """Weights over ``concepts`` summing to 1, plus whether the uniform fallback was used."""
        concepts = list(concepts)
        if not concepts:
            return {}, False
        raw = {c: self.raw(c) for c in concepts}
        total = math.fsum(raw.values())
        if total == 0:
            return {c: 1.0 / len(concepts) for c in concepts}, True
        return {c: w / total for c, w in raw.items()}, False


@dataclass(frozen=True)
class WeightedSimilarity:
    value: float
    alpha: dict
    uniform_fallback: bool = False


def shared_concepts(t: Taxonomy, w1: str, w2: str) -> tuple:
    """Concepts subsuming some sense of ``w1`` and some sense of ``w2``."""
    def closure(word):
        senses = _senses(t, word)
        if senses.size == 0:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate([t.ancestors_of(s) for s in senses]))
    common = np.intersect1d(closure(w1), closure(w2), assume_unique=True)
    return tuple(t.ids[k] for k in common)


def wsim_weighted(m: ProbabilityModel, w1: str, w2: str, alpha: WeightFunction) -> WeightedSimilarity:
    """Alpha-weighted sum of information content over all shared concepts.

    Shared concepts with zero probability are left out before normalizing.
    """
    concepts = [c for c in shared_concepts(m.taxonomy, w1, w2) if math.isfinite(m.info(c))]
    weights, fallback = alpha.normalize(concepts)
    value = math.fsum(a * m.info(c) for c, a in weights.items())
    return WeightedSimilarity(value, weights, fallback)


WORD_MEASURES = ("resnik", "prob", "lin", "wup", "edge", "edge-vtop", "lc")


def word_measure(m: ProbabilityModel, w1: str, w2: str, measure: str) -> float:
    """Dispatch by CLI measure name; path-based measures return 0 when disconnected."""
    t = m.taxonomy
    if measure in ("resnik", "prob", "lin"):
        return wsim(m, w1, w2, measure).value
    if measure == "wup":
        return wsim(m, w1, w2, "wupalmer").value
    if measure == "edge":
        return wsim_edge(t, w1, w2, "assert-zero")
    if measure == "edge-vtop":
        return wsim_edge(t, w1, w2, "virtual-top")
    if measure == "lc":
        try:
            return wsim_lc(t, w1, w2, m.log_base)
        except NoPathError:
            return 0.0
    raise ValueError(f"unknown measure {measure!r}; expected one of {WORD_MEASURES}")
