import itertools
import random
from collections import deque

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from taxsim import load_fixture
from taxsim.taxonomy import Taxonomy


# numba compiles on first call; wall-clock deadlines would flag that as flaky
settings.register_profile("taxsim", deadline=None, derandomize=True)
settings.load_profile("taxsim")


# -- fixtures -------------------------------------------------------------

@pytest.fixture(scope="session")
def medical():
    return load_fixture("medical")


@pytest.fixture(scope="session")
def narcotics():
    return load_fixture("narcotics")


@pytest.fixture(scope="session")
def coin_taxonomy():
    t, _ = load_fixture("coin")
    return t


# -- independent oracles --------------------------------------------------

def naive_ancestors(parents, c):
    """Reflexive ancestors by plain set recursion."""
    out = {c}
    for p in parents[c]:
        out |= naive_ancestors(parents, p)
    return out


def naive_common(parents, a, b):
    return naive_ancestors(parents, a) & naive_ancestors(parents, b)


def updown_bfs(parents, a, b):
    """Fewest edges from a to b climbing first, then descending; None if unreachable."""
    children = {c: [] for c in parents}
    for c, ps in parents.items():
        for p in ps:
            children[p].append(c)
    start = (a, "up")
    seen = {start: 0}
    queue = deque([start])
    while queue:
        node, phase = queue.popleft()
        d = seen[node, phase]
        if node == b:
            return d
        moves = [(c, "down") for c in children[node]]
        if phase == "up":
            moves += [(p, "up") for p in parents[node]]
        for nxt in moves:
            if nxt not in seen:
                seen[nxt] = d + 1
                queue.append(nxt)
    return None


def root_depth(parents, c):
    """Fewest edges from c up to any root."""
    if not parents[c]:
        return 0
    return 1 + min(root_depth(parents, p) for p in parents[c])


# -- DAG builders ---------------------------------------------------------

def labels(n, rng=None):
    names = [f"N{i:02d}" for i in range(n)]
    if rng is not None:
        rng.shuffle(names)
    return names


def build(parent_lists, names, words=None):
    """Taxonomy from ``parent_lists[i]`` (indices < i); returns (taxonomy, parents-by-name)."""
    parents = {names[i]: {names[j] for j in ps} for i, ps in enumerate(parent_lists)}
    words = words or {}
    records = [(c, sorted(ps), words.get(c, ())) for c, ps in parents.items()]
    return Taxonomy.from_records(records), parents


def all_dags(n):
    """Every DAG on n nodes whose topological order is 0..n-1 (2**(n(n-1)/2) of them)."""
    slots = [(i, j) for i in range(n) for j in range(i)]
    for mask in range(1 << len(slots)):
        plists = [[] for _ in range(n)]
        for bit, (i, j) in enumerate(slots):
            if mask >> bit & 1:
                plists[i].append(j)
        yield plists


def random_dag(rng, n, max_parents=3, p_root=0.05):
    plists = [[]]
    for i in range(1, n):
        if rng.random() < p_root:
            plists.append([])
        else:
            k = rng.randint(1, min(max_parents, i))
            plists.append(rng.sample(range(i), k))
    return plists


@st.composite
def dags(draw, min_nodes=1, max_nodes=12, max_parents=3, vocab=("a", "b", "c", "d", "e")):
    """Hypothesis strategy: (taxonomy, parents-by-name) with random words on nodes."""
    n = draw(st.integers(min_nodes, max_nodes))
    plists = [[]]
    for i in range(1, n):
        plists.append(draw(st.lists(st.integers(0, i - 1), max_size=max_parents, unique=True)))
    perm = draw(st.permutations(range(n)))
    names = [f"N{k:02d}" for k in perm]
    words = {
        names[i]: draw(st.lists(st.sampled_from(vocab), max_size=2, unique=True))
        for i in range(n)
    }
    return build(plists, names, words)


@st.composite
def rooted_dags(draw, **kw):
    """Like :func:`dags` but every non-first node has at least one parent, so node 0 tops all."""
    n = draw(st.integers(kw.pop("min_nodes", 1), kw.pop("max_nodes", 12)))
    vocab = kw.pop("vocab", ("a", "b", "c", "d", "e"))
    plists = [[]]
    for i in range(1, n):
        plists.append(draw(st.lists(st.integers(0, i - 1), min_size=1, max_size=3, unique=True)))
    perm = draw(st.permutations(range(n)))
    names = [f"N{k:02d}" for k in perm]
    words = {names[i]: draw(st.lists(st.sampled_from(vocab), max_size=2, unique=True)) for i in range(n)}
    return build(plists, names, words)


def random_model(t, rng):
    """A monotone probability model: counts on nodes propagated to all ancestors."""
    from taxsim.probmodel import ProbabilityModel
    own = rng.integers(1, 20, size=len(t)).astype(float)
    freq = np.zeros(len(t))
    for i in range(len(t)):
        freq[t.ancestors_of(i)] += own[i]
    return ProbabilityModel(t, freq / own.sum())


def pairs_of(items):
    return itertools.product(items, repeat=2)


__all__ = ["naive_ancestors", "naive_common", "updown_bfs", "root_depth", "labels", "build",
           "all_dags", "random_dag", "dags", "rooted_dags", "random_model", "random"]
