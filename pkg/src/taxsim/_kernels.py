"""Inner loops over CSR ancestor closures.

Every kernel exists twice: a loop form compiled with numba's ``@njit`` and a
vectorized numpy form. Set ``TAXSIM_DISABLE_NUMBA=1`` (or run without numba
installed) to bind the numpy forms. Both forms are importable directly as
``loop_kernels`` / ``numpy_kernels`` so tests and benchmarks can compare them.

Array conventions: an ancestor closure is ``(ptr, idx, dist)`` where the
ancestors of node ``i`` are ``idx[ptr[i]:ptr[i+1]]`` (sorted ascending, self
included) and ``dist`` holds the minimum number of upward edges to each.
"""

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

NO_PATH = -1


def _env_disabled():
    return os.environ.get("TAXSIM_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = numba is not None and not _env_disabled()


# --------------------------------------------------------------------------
# loop forms (numba-compilable; also valid plain Python)
# --------------------------------------------------------------------------

def _dedupe_min_loop(idx, dist):
    n = idx.shape[0]
    if n == 0:
        return idx.copy(), dist.copy()
    order = np.argsort(idx, kind="mergesort")
    out_idx = np.empty(n, dtype=idx.dtype)
    out_dist = np.empty(n, dtype=dist.dtype)
    k = 0
    for t in range(n):
        j = order[t]
        if k > 0 and out_idx[k - 1] == idx[j]:
            if dist[j] < out_dist[k - 1]:
                out_dist[k - 1] = dist[j]
        else:
            out_idx[k] = idx[j]
            out_dist[k] = dist[j]
            k += 1
    return out_idx[:k].copy(), out_dist[:k].copy()


def _intersect_loop(a, b):
    na = a.shape[0]
    nb = b.shape[0]
    m = min(na, nb)
    ia = np.empty(m, dtype=np.int64)
    ib = np.empty(m, dtype=np.int64)
    i = 0
    j = 0
    k = 0
    while i < na and j < nb:
        if a[i] == b[j]:
            ia[k] = i
            ib[k] = j
            k += 1
            i += 1
            j += 1
        elif a[i] < b[j]:
            i += 1
        else:
            j += 1
    return ia[:k].copy(), ib[:k].copy()


def _min_common_dist_loop(a_idx, a_dist, b_idx, b_dist):
    na = a_idx.shape[0]
    nb = b_idx.shape[0]
    best = -1
    i = 0
    j = 0
    while i < na and j < nb:
        if a_idx[i] == b_idx[j]:
            s = a_dist[i] + b_dist[j]
            if best < 0 or s < best:
                best = s
            i += 1
            j += 1
        elif a_idx[i] < b_idx[j]:
            i += 1
        else:
            j += 1
    return best


def _best_common_score_loop(ptr, idx, senses1, senses2, score):
    # returns (best finite score or -inf, whether any common ancestor exists)
    best = -np.inf
    shared = False
    for s1 in senses1:
        a0 = ptr[s1]
        a1 = ptr[s1 + 1]
        for s2 in senses2:
            b0 = ptr[s2]
            b1 = ptr[s2 + 1]
            i = a0
            j = b0
            while i < a1 and j < b1:
                x = idx[i]
                y = idx[j]
                if x == y:
                    shared = True
                    v = score[x]
                    if v > best and v != np.inf:
                        best = v
                    i += 1
                    j += 1
                elif x < y:
                    i += 1
                else:
                    j += 1
    return best, shared


def _min_pair_dist_loop(ptr, idx, dist, senses1, senses2):
    best = -1
    bi = -1
    bj = -1
    for p in range(senses1.shape[0]):
        s1 = senses1[p]
        for q in range(senses2.shape[0]):
            s2 = senses2[q]
            i = ptr[s1]
            j = ptr[s2]
            while i < ptr[s1 + 1] and j < ptr[s2 + 1]:
                if idx[i] == idx[j]:
                    d = dist[i] + dist[j]
                    if best < 0 or d < best:
                        best = d
                        bi = p
                        bj = q
                    i += 1
                    j += 1
                elif idx[i] < idx[j]:
                    i += 1
                else:
                    j += 1
    return best, bi, bj


def _scatter_add_loop(ptr, idx, weights, out):
    for w in range(weights.shape[0]):
        c = weights[w]
        if c == 0.0:
            continue
        for t in range(ptr[w], ptr[w + 1]):
            out[idx[t]] += c
    return out


# --------------------------------------------------------------------------
# numpy forms
# --------------------------------------------------------------------------

def _dedupe_min_np(idx, dist):
    if idx.size == 0:
        return idx.copy(), dist.copy()
    order = np.lexsort((dist, idx))
    idx_s = idx[order]
    keep = np.ones(idx_s.size, dtype=bool)
    keep[1:] = idx_s[1:] != idx_s[:-1]
    return idx_s[keep], dist[order][keep]


def _intersect_np(a, b):
    _, ia, ib = np.intersect1d(a, b, assume_unique=True, return_indices=True)
    return ia.astype(np.int64), ib.astype(np.int64)


def _min_common_dist_np(a_idx, a_dist, b_idx, b_dist):
    ia, ib = _intersect_np(a_idx, b_idx)
    if ia.size == 0:
        return NO_PATH
    return int((a_dist[ia] + b_dist[ib]).min())


def _best_common_score_np(ptr, idx, senses1, senses2, score):
    best = -np.inf
    shared = False
    for s1 in senses1:
        a = idx[ptr[s1]:ptr[s1 + 1]]
        for s2 in senses2:
            common = np.intersect1d(a, idx[ptr[s2]:ptr[s2 + 1]], assume_unique=True)
            if common.size == 0:
                continue
            shared = True
            vals = score[common]
            vals = vals[np.isfinite(vals)]
            if vals.size:
                best = max(best, float(vals.max()))
    return best, shared


def _min_pair_dist_np(ptr, idx, dist, senses1, senses2):
    best, bi, bj = NO_PATH, -1, -1
    for p, s1 in enumerate(senses1):
        sl1 = slice(ptr[s1], ptr[s1 + 1])
        for q, s2 in enumerate(senses2):
            sl2 = slice(ptr[s2], ptr[s2 + 1])
            d = _min_common_dist_np(idx[sl1], dist[sl1], idx[sl2], dist[sl2])
            if d >= 0 and (best < 0 or d < best):
                best, bi, bj = d, p, q
    return best, bi, bj


def _scatter_add_np(ptr, idx, weights, out):
    counts = np.diff(ptr)
    np.add.at(out, idx, np.repeat(weights, counts))
    return out


numpy_kernels = SimpleNamespace(
    dedupe_min=_dedupe_min_np,
    intersect=_intersect_np,
    min_common_dist=_min_common_dist_np,
    best_common_score=_best_common_score_np,
    min_pair_dist=_min_pair_dist_np,
    scatter_add=_scatter_add_np,
)

if numba is not None:
    _jit = numba.njit(cache=True, nogil=True)
    loop_kernels = SimpleNamespace(
        dedupe_min=_jit(_dedupe_min_loop),
        intersect=_jit(_intersect_loop),
        min_common_dist=_jit(_min_common_dist_loop),
        best_common_score=_jit(_best_common_score_loop),
        min_pair_dist=_jit(_min_pair_dist_loop),
        scatter_add=_jit(_scatter_add_loop),
    )
else:  # pragma: no cover
    loop_kernels = SimpleNamespace(
        dedupe_min=_dedupe_min_loop,
        intersect=_intersect_loop,
        min_common_dist=_min_common_dist_loop,
        best_common_score=_best_common_score_loop,
        min_pair_dist=_min_pair_dist_loop,
        scatter_add=_scatter_add_loop,
    )

active = loop_kernels if USE_NUMBA else numpy_kernels
