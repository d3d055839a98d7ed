"""Bracketing of ``n1 and n2 n3`` and ``n0 n1 and n2 n3`` noun phrases.

Each rule returns a :class:`SubDecision`; combiners (back-off, voting,
default) fold sub-decisions into a final :class:`Decision`.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

from .probmodel import ProbabilityModel
from .selection import CoocModel, SelectionError, sel_assoc_class, sel_assoc_word
from .similarity import WeightFunction, shared_concepts, wsim, wsim_weighted


class Choice(str, enum.Enum):
    CONJOIN12 = "12"
    CONJOIN13 = "13"
    UNDECIDED = "undecided"


class Number(str, enum.Enum):
    SINGULAR = "sg"
    PLURAL = "pl"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, tag: str) -> "Number":
        tag = tag.strip().lower()
        if tag in ("sg", "s", "singular"):
            return cls.SINGULAR
        if tag in ("pl", "p", "plural"):
            return cls.PLURAL
        if tag in ("?", "unk", "unknown", "-", ""):
            return cls.UNKNOWN
        raise ValueError(f"unknown number tag {tag!r}")


def guess_number(word: str, lexicon: Mapping[str, str] | None = None) -> Number:
    """Lexicon lookup, then a final ``-s`` means plural."""
    if lexicon and word in lexicon:
        return Number.parse(lexicon[word])
    if word.endswith("s") and not word.endswith("ss"):
        return Number.PLURAL
    return Number.SINGULAR


@dataclass(frozen=True)
class CoordinationPhrase:
    n1: str
    n2: str
    n3: str
    n0: str | None = None
    numbers: tuple = (Number.UNKNOWN, Number.UNKNOWN, Number.UNKNOWN)

    def __post_init__(self):
        if not (self.n1 and self.n2 and self.n3):
            raise ValueError("n1, n2 and n3 must be non-empty")
        if len(self.numbers) != 3:
            raise ValueError("numbers must tag n1, n2, n3")
        object.__setattr__(self, "numbers", tuple(Number(n) for n in self.numbers))

    @property
    def four_noun(self) -> bool:
        return bool(self.n0)


@dataclass(frozen=True)
class Thresholds:
    tau: float = 2.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.tau < self.sigma:
            raise ValueError(f"tau ({self.tau}) must be >= sigma ({self.sigma})")


@dataclass(frozen=True)
class SubDecision:
    strategy: str
    choice: Choice
    scores: dict = field(default_factory=dict)
    evaluated: bool = True


@dataclass(frozen=True)
class Decision:
    choice: Choice
    strategy: str | None = None
    evidence: tuple = ()
    defaulted: bool = False


def number_rule(p: CoordinationPhrase) -> SubDecision:
    a, b, c = p.numbers
    scores = {"n1": a.value, "n2": b.value, "n3": c.value}
    if Number.UNKNOWN in (a, b, c):
        return SubDecision("number", Choice.UNDECIDED, scores)
    if a == b and a != c:
        return SubDecision("number", Choice.CONJOIN12, scores)
    if a == c and a != b:
        return SubDecision("number", Choice.CONJOIN13, scores)
    return SubDecision("number", Choice.UNDECIDED, scores)


def _compare(strategy, v12, v13, scores) -> SubDecision:
    if v12 > v13:
        return SubDecision(strategy, Choice.CONJOIN12, scores)
    if v13 > v12:
        return SubDecision(strategy, Choice.CONJOIN13, scores)
    return SubDecision(strategy, Choice.UNDECIDED, scores)


def similarity_rule(m: ProbabilityModel, p: CoordinationPhrase) -> SubDecision:
    s12 = wsim(m, p.n1, p.n2).value
    s13 = wsim(m, p.n1, p.n3).value
    return _compare("similarity", s12, s13, {"wsim12": s12, "wsim13": s13})


def modification_rule(cm: CoocModel, p: CoordinationPhrase, th: Thresholds = Thresholds()) -> SubDecision:
    """Strong n1/n3 modification favors conjoining n1 and n2; weak favors n1 and n3.

    Either direction below sigma decides Conjoin13 before the tau test, so
    raising tau never turns a decision into Conjoin13.
    """
    scores = {}
    for key, (w1, w2) in (("A13", (p.n1, p.n3)), ("A31", (p.n3, p.n1))):
        try:
            scores[key] = sel_assoc_word(cm, w1, w2)
        except SelectionError:
            pass
    vals = list(scores.values())
    if any(v < th.sigma for v in vals):
        return SubDecision("modification", Choice.CONJOIN13, scores)
    if any(v > th.tau for v in vals):
        return SubDecision("modification", Choice.CONJOIN12, scores)
    return SubDecision("modification", Choice.UNDECIDED, scores)


def _context_alpha(cm: CoocModel, context: Sequence[str | None], concepts) -> WeightFunction:
    """Raw weight per concept: the largest association any context word has with it."""
    weights = {}
    for c in concepts:
        best = 0.0
        for w in context:
            if not w:
                continue
            try:
                best = max(best, sel_assoc_class(cm, w, c))
            except SelectionError:
                continue
        weights[c] = best
    return WeightFunction(weights)


def weighted_similarity_rule(m: ProbabilityModel, cm: CoocModel, p: CoordinationPhrase) -> SubDecision:
    t = m.taxonomy
    a12 = _context_alpha(cm, (p.n0, p.n3), shared_concepts(t, p.n1, p.n2))
    a13 = _context_alpha(cm, (p.n0, p.n2), shared_concepts(t, p.n1, p.n3))
    r12 = wsim_weighted(m, p.n1, p.n2, a12)
    r13 = wsim_weighted(m, p.n1, p.n3, a13)
    scores = {"wsim_a12": r12.value, "wsim_a13": r13.value}
    return _compare("weighted-sim", r12.value, r13.value, scores)


Rule = tuple[str, Callable[[CoordinationPhrase], SubDecision]]


def resolve_backoff(p: CoordinationPhrase, rules: Sequence[Rule]) -> Decision:
    """First rule that is not undecided wins; later rules are recorded unevaluated."""
    evidence = []
    winner = None
    for name, rule in rules:
        if winner is not None:
            evidence.append(SubDecision(name, Choice.UNDECIDED, {}, evaluated=False))
            continue
        sub = rule(p)
        evidence.append(sub)
        if sub.choice is not Choice.UNDECIDED:
            winner = sub
    if winner is None:
        return Decision(Choice.UNDECIDED, None, tuple(evidence))
    return Decision(winner.choice, winner.strategy, tuple(evidence))


def vote(subs: Sequence[SubDecision]) -> Choice:
    tally = Counter(s.choice for s in subs if s.choice is not Choice.UNDECIDED)
    if tally[Choice.CONJOIN12] > tally[Choice.CONJOIN13]:
        return Choice.CONJOIN12
    if tally[Choice.CONJOIN13] > tally[Choice.CONJOIN12]:
        return Choice.CONJOIN13
    return Choice.UNDECIDED


def resolve_vote(p: CoordinationPhrase, rules: Sequence[Rule]) -> Decision:
    """Majority among decided rules; ties and no votes are undecided."""
    evidence = tuple(rule(p) for _, rule in rules)
    choice = vote(evidence)
    return Decision(choice, None if choice is Choice.UNDECIDED else "vote", evidence)


def apply_default(d: Decision, default: Choice) -> Decision:
    default = Choice(default)
    if default is Choice.UNDECIDED:
        raise ValueError("default must be Conjoin12 or Conjoin13")
    if d.choice is not Choice.UNDECIDED:
        return d
    return replace(d, choice=default, strategy="default", defaulted=True)


@dataclass
class Resolver:
    """Bundles the models a phrase needs and builds the standard rule orders."""

    model: ProbabilityModel | None = None
    cooc: CoocModel | None = None
    thresholds: Thresholds = field(default_factory=Thresholds)

    def rules(self, p: CoordinationPhrase) -> list:
        rules = [("number", number_rule)]
        if p.four_noun:
            if self.model is not None and self.cooc is not None:
                rules.append(("weighted-sim", lambda q: weighted_similarity_rule(self.model, self.cooc, q)))
            return rules
        if self.cooc is not None:
            rules.append(("modification", lambda q: modification_rule(self.cooc, q, self.thresholds)))
        if self.model is not None:
            rules.append(("similarity", lambda q: similarity_rule(self.model, q)))
        return rules

    def resolve(self, p: CoordinationPhrase, combiner: str = "backoff",
                default: Choice | str | None = None) -> Decision:
        rules = self.rules(p)
        if combiner == "backoff":
            d = resolve_backoff(p, rules)
        elif combiner == "vote":
            d = resolve_vote(p, rules)
        else:
            raise ValueError(f"unknown combiner {combiner!r}")
        if default is not None:
            d = apply_default(d, Choice(default))
        return d
