"""Correlation of similarity ratings with human judgments."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence, TextIO

import numpy as np

from .probmodel import ProbabilityModel
from .similarity import WORD_MEASURES, word_measure

PUBLISHED_COLUMNS = {
    "wsim": "Information content",
    "wsim_p": "Probability",
    "wsim_edge": "Edge-counting",
}
REPLICATION = "Human judgments (replication)"


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class EvalPair:
    word1: str
    word2: str
    mc_mean: float
    repl_mean: float | None = None
    published: dict = field(default_factory=dict)


@dataclass
class CorrelationReport:
    correlations: dict           # label -> r
    n: int
    excluded: list = field(default_factory=list)

    def format(self) -> str:
        lines = ["Similarity method\tCorrelation"]
        for label, r in self.correlations.items():
            lines.append(f"{label}\tr = {r:.4f}")
        lines.append(f"# items: {self.n}")
        for w1, w2 in self.excluded:
            lines.append(f"# excluded: {w1} {w2}")
        return "\n".join(lines)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise EvalError("pearson needs two vectors of equal length")
    if x.size < 2:
        raise EvalError("pearson needs at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise EvalError("correlation undefined for a constant vector")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def load_published(source: TextIO | None = None) -> list[EvalPair]:
    """The 28 Miller-Charles rows with the published per-item similarities."""
    if source is None:
        text = resources.files("taxsim").joinpath("data/mc_ratings.csv").read_text(encoding="utf-8")
        source = io.StringIO(text)
    pairs = []
    for row in csv.DictReader(source):
        pairs.append(EvalPair(
            row["word1"], row["word2"], float(row["mc_mean"]), float(row["repl_mean"]),
            {k: float(row[k]) for k in PUBLISHED_COLUMNS},
        ))
    return pairs


def eval_published(pairs: Sequence[EvalPair] | None = None) -> CorrelationReport:
    pairs = load_published() if pairs is None else pairs
    gold = [p.mc_mean for p in pairs]
    corr = {REPLICATION: pearson([p.repl_mean for p in pairs], gold)}
    for col, label in PUBLISHED_COLUMNS.items():
        corr[label] = pearson([p.published[col] for p in pairs], gold)
    return CorrelationReport(corr, len(pairs))


def read_gold_pairs(source: TextIO | str) -> list[tuple[str, str, float]]:
    """``word1,word2,rating`` rows; a header row and extra columns are allowed."""
    if isinstance(source, str):
        source = io.StringIO(source)
    out = []
    for row in csv.reader(source):
        if not row or row[0].startswith("#"):
            continue
        try:
            out.append((row[0].strip(), row[1].strip(), float(row[2])))
        except (IndexError, ValueError):
            if not out and len(row) >= 3:
                continue  # header
            raise EvalError(f"malformed gold pair row {row!r}") from None
    return out


def eval_live(m: ProbabilityModel, pairs: Iterable[tuple[str, str, float]], measure: str = "resnik",
              label: str | None = None) -> CorrelationReport:
    """Score each pair with ``measure`` and correlate against the gold ratings.

    Pairs with a word missing from the taxonomy's sense index are excluded
    (the fallback concept does not rescue them).
    """
    if measure not in WORD_MEASURES:
        raise EvalError(f"unknown measure {measure!r}")
    t = m.taxonomy
    scores, gold, excluded = [], [], []
    for w1, w2, rating in pairs:
        if w1 not in t.sense_index or w2 not in t.sense_index:
            excluded.append((w1, w2))
            continue
        scores.append(word_measure(m, w1, w2, measure))
        gold.append(rating)
    if len(scores) < 2:
        raise EvalError(f"only {len(scores)} scorable pair(s); need at least 2")
    return CorrelationReport({label or measure: pearson(scores, gold)}, len(scores), excluded)
