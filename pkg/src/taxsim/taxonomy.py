"""IS-A concept DAG: loading, validation, and structural queries.

Concepts are stored in lexicographic id order, so integer index order and
string order coincide and every set-valued answer comes back sorted.
"""

from __future__ import annotations

import io
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Iterable, Mapping, TextIO

import numpy as np

from . import _kernels

VIRTUAL_ROOT = "__TOP__"
_FORBIDDEN = ("\t", ",", "\n", "\r")


class TaxonomyError(ValueError):
    """Raised for malformed or inconsistent taxonomy input."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CycleError(TaxonomyError):
    def __init__(self, child, parent):
        super().__init__(f"cycle through edge {child} -> {parent}")
        self.edge = (child, parent)


class UnknownConceptError(TaxonomyError, KeyError):
    def __init__(self, concept):
        super().__init__(f"unknown concept id {concept!r}")
        self.concept = concept

    __str__ = ValueError.__str__


@dataclass(frozen=True)
class Concept:
    id: str
    parents: frozenset
    words: frozenset


def _check_id(cid, line=None):
    if not cid or any(ch in cid for ch in _FORBIDDEN):
        raise TaxonomyError(f"invalid concept id {cid!r}", line)


class Taxonomy:
    """Immutable IS-A DAG with a word-to-sense index.

    Build one with :func:`load_taxonomy` or :meth:`from_records`. All derived
    structures (ancestor closure, depths) are computed once at construction,
    so instances are safe to share between threads.
    """

    def __init__(self, concepts: Mapping[str, Concept], virtual_root: str | None = None,
                 fallback_concept: str | None = None):
        self.concepts = dict(sorted(concepts.items()))
        self.ids = tuple(self.concepts)
        self._index = {cid: i for i, cid in enumerate(self.ids)}
        self.virtual_root = virtual_root
        if fallback_concept is not None and fallback_concept not in self._index:
            raise UnknownConceptError(fallback_concept)
        self.fallback_concept = fallback_concept

        index = defaultdict(set)
        for c in self.concepts.values():
            for w in c.words:
                index[w].add(c.id)
        self.sense_index = {w: tuple(sorted(s)) for w, s in sorted(index.items())}
        self.roots = tuple(cid for cid, c in self.concepts.items() if not c.parents)

        self._build_arrays()

    # -- construction -----------------------------------------------------

    @classmethod
    def from_records(cls, records: Iterable[tuple], virtual_root=False, fallback=None):
        """Build from ``(id, parents, words)`` triples."""
        concepts = {}
        for cid, parents, words in records:
            _check_id(cid)
            if cid in concepts:
                raise TaxonomyError(f"duplicate concept id {cid!r}")
            concepts[cid] = Concept(cid, frozenset(parents), frozenset(words))
        return cls._validated(concepts, virtual_root, fallback)

    @classmethod
    def _validated(cls, concepts, virtual_root, fallback, lines=None):
        lines = lines or {}
        for c in concepts.values():
            if c.id in c.parents:
                raise CycleError(c.id, c.id)
            for p in sorted(c.parents):
                if p not in concepts:
                    raise TaxonomyError(f"dangling parent id {p!r} of {c.id!r}", lines.get(c.id))
        _topological_order(concepts)
        if virtual_root:
            if VIRTUAL_ROOT in concepts:
                raise TaxonomyError(f"concept id {VIRTUAL_ROOT!r} is reserved for the virtual root")
            concepts = {
                cid: (Concept(cid, frozenset([VIRTUAL_ROOT]), c.words) if not c.parents else c)
                for cid, c in concepts.items()
            }
            concepts[VIRTUAL_ROOT] = Concept(VIRTUAL_ROOT, frozenset(), frozenset())
        return cls(concepts, VIRTUAL_ROOT if virtual_root else None, fallback)

    def _build_arrays(self):
        n = len(self.ids)
        order = _topological_order(self.concepts)
        k = _kernels.active
        ptr = np.zeros(n + 1, dtype=np.int64)
        anc_idx = [None] * n
        anc_dist = [None] * n
        depth = np.zeros(n, dtype=np.int64)
        self.parent_index = [
            np.array(sorted(self._index[p] for p in self.concepts[cid].parents), dtype=np.int64)
            for cid in self.ids
        ]
        for cid in order:
            i = self._index[cid]
            parents = self.parent_index[i]
            if parents.size == 0:
                anc_idx[i] = np.array([i], dtype=np.int64)
                anc_dist[i] = np.zeros(1, dtype=np.int64)
                continue
            depth[i] = 1 + depth[parents].min()
            idx = np.concatenate([[i]] + [anc_idx[p] for p in parents]).astype(np.int64)
            dist = np.concatenate([[0]] + [anc_dist[p] + 1 for p in parents]).astype(np.int64)
            anc_idx[i], anc_dist[i] = k.dedupe_min(idx, dist)
        for i in range(n):
            ptr[i + 1] = ptr[i] + anc_idx[i].size
        self.anc_ptr = ptr
        self.anc_idx = np.concatenate(anc_idx) if n else np.zeros(0, dtype=np.int64)
        self.anc_dist = np.concatenate(anc_dist) if n else np.zeros(0, dtype=np.int64)
        self.depth = depth
        self._max_depth = int(depth.max()) if n else 0
        for arr in (self.anc_ptr, self.anc_idx, self.anc_dist, self.depth):
            arr.setflags(write=False)

    # -- index helpers ----------------------------------------------------

    def __len__(self):
        return len(self.ids)

    def __contains__(self, cid):
        return cid in self._index

    def index(self, cid: str) -> int:
        try:
            return self._index[cid]
        except KeyError:
            raise UnknownConceptError(cid) from None

    def ancestors_of(self, i: int) -> np.ndarray:
        return self.anc_idx[self.anc_ptr[i]:self.anc_ptr[i + 1]]

    def sense_indices(self, word: str) -> np.ndarray:
        return np.array([self._index[c] for c in self.senses(word)], dtype=np.int64)

    # -- queries ----------------------------------------------------------

    def senses(self, word: str) -> tuple:
        found = self.sense_index.get(word, ())
        if not found and self.fallback_concept is not None:
            return (self.fallback_concept,)
        return found

    def subsumers(self, cid: str) -> tuple:
        """Reflexive-transitive ancestors of ``cid`` in id order."""
        return tuple(self.ids[j] for j in self.ancestors_of(self.index(cid)))

    def common_subsumers(self, c1: str, c2: str) -> tuple:
        a = self.ancestors_of(self.index(c1))
        b = self.ancestors_of(self.index(c2))
        ia, _ = _kernels.active.intersect(a, b)
        return tuple(self.ids[j] for j in a[ia])

    def shortest_path_edges(self, c1: str, c2: str) -> int | None:
        """Fewest IS-A edges on an up-then-down path, or None if disconnected."""
        i, j = self.index(c1), self.index(c2)
        sl1 = slice(self.anc_ptr[i], self.anc_ptr[i + 1])
        sl2 = slice(self.anc_ptr[j], self.anc_ptr[j + 1])
        d = _kernels.active.min_common_dist(self.anc_idx[sl1], self.anc_dist[sl1],
                                            self.anc_idx[sl2], self.anc_dist[sl2])
        return None if d < 0 else int(d)

    def depth_edges(self, cid: str) -> int:
        return int(self.depth[self.index(cid)])

    def max_depth(self) -> int:
        return self._max_depth

    def distance_to_ancestor(self, cid: str, ancestor: str) -> int | None:
        i, a = self.index(cid), self.index(ancestor)
        anc = self.ancestors_of(i)
        pos = np.searchsorted(anc, a)
        if pos < anc.size and anc[pos] == a:
            return int(self.anc_dist[self.anc_ptr[i] + pos])
        return None

    def __repr__(self):
        return (f"Taxonomy({len(self)} concepts, {len(self.sense_index)} words, "
                f"roots={list(self.roots)!r})")


def _topological_order(concepts: Mapping[str, Concept]) -> list:
    """Parents-first order (Kahn); raises CycleError naming one edge on a cycle."""
    children = defaultdict(list)
    pending = {}
    for cid, c in concepts.items():
        pending[cid] = len(c.parents)
        for p in c.parents:
            children[p].append(cid)
    queue = deque(sorted(cid for cid, n in pending.items() if n == 0))
    order = []
    while queue:
        cid = queue.popleft()
        order.append(cid)
        for ch in sorted(children[cid]):
            pending[ch] -= 1
            if pending[ch] == 0:
                queue.append(ch)
    if len(order) < len(concepts):
        stuck = {cid for cid, n in pending.items() if n > 0}
        # every stuck node has a stuck parent, so walking parents must revisit a node
        cur = min(stuck)
        seen = set()
        while cur not in seen:
            seen.add(cur)
            nxt = min(p for p in concepts[cur].parents if p in stuck)
            if nxt in seen:
                raise CycleError(cur, nxt)
            cur = nxt
        raise CycleError(cur, cur)  # pragma: no cover
    return order


def _split_list(field, line):
    if field == "":
        return []
    items = field.split(",")
    if any(item == "" for item in items):
        raise TaxonomyError(f"empty item in list {field!r}", line)
    return items


def load_taxonomy(source: TextIO | str, virtual_root: bool = False,
                  fallback: str | None = None) -> Taxonomy:
    """Parse ``concept_id<TAB>parent_ids<TAB>words`` records.

    ``source`` is a text stream or a string holding the file contents.
    Lines starting with ``#`` and blank lines are skipped. Fields are taken
    verbatim apart from the trailing newline.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    concepts = {}
    lines = {}
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\r\n")
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) > 3:
            raise TaxonomyError(f"expected at most 3 tab-separated fields, got {len(fields)}", lineno)
        fields += [""] * (3 - len(fields))
        cid, parents, words = fields
        _check_id(cid, lineno)
        if cid in concepts:
            raise TaxonomyError(f"duplicate concept id {cid!r}", lineno)
        parent_ids = _split_list(parents, lineno)
        for p in parent_ids:
            _check_id(p, lineno)
        concepts[cid] = Concept(cid, frozenset(parent_ids), frozenset(_split_list(words, lineno)))
        lines[cid] = lineno
    if not concepts:
        raise TaxonomyError("taxonomy is empty")
    return Taxonomy._validated(concepts, virtual_root, fallback, lines)
