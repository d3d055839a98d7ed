"""Compare the numba loop kernels with the numpy kernels on a large random DAG.

    python3 benchmarks/bench_kernels.py --nodes 8000 --queries 5000

Both backends run in one process by swapping ``taxsim._kernels.active``;
numba compilation happens in a warm-up pass before timing.
"""

import argparse
import random
import time

import numpy as np

from taxsim import _kernels
from taxsim.probmodel import count_weighted, to_probability
from taxsim.similarity import min_sense_path, wsim
from taxsim.taxonomy import Taxonomy


def random_records(rng, n, max_parents, vocab):
    records = [("C0", (), ())]
    for i in range(1, n):
        k = rng.randint(1, min(max_parents, i))
        parents = tuple(f"C{j}" for j in rng.sample(range(max(0, i - 2000), i), min(k, i)))
        words = (f"w{rng.randrange(vocab)}",) if rng.random() < 0.8 else ()
        records.append((f"C{i}", parents, words))
    return records


def run(backend, records, vocab, queries, seed):
    _kernels.active = backend
    timings = {}
    t0 = time.perf_counter()
    t = Taxonomy.from_records(records)
    timings["closure"] = time.perf_counter() - t0

    words = [w for w in (f"w{i}" for i in range(vocab)) if w in t.sense_index]
    rng = random.Random(seed)
    counts = [(w, rng.randint(1, 50)) for w in words]
    m = to_probability(count_weighted(t, counts))
    pairs = [(rng.choice(words), rng.choice(words)) for _ in range(queries)]

    t0 = time.perf_counter()
    ic = [wsim(m, a, b).value for a, b in pairs]
    timings["resnik"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    paths = [min_sense_path(t, a, b)[0] for a, b in pairs]
    timings["path"] = time.perf_counter() - t0
    return timings, np.asarray(ic), paths, t.anc_idx.size


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=8000)
    ap.add_argument("--max-parents", type=int, default=3)
    ap.add_argument("--vocab", type=int, default=2000)
    ap.add_argument("--queries", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    records = random_records(random.Random(args.seed), args.nodes, args.max_parents, args.vocab)
    warm = records[:200]
    run(_kernels.loop_kernels, warm, args.vocab, 50, args.seed)

    results = {}
    for name, backend in (("numba", _kernels.loop_kernels), ("numpy", _kernels.numpy_kernels)):
        results[name] = run(backend, records, args.vocab, args.queries, args.seed)

    (tn, icn, pn, size), (tp, icp, pp, _) = results["numba"], results["numpy"]
    assert np.array_equal(icn, icp) and pn == pp, "backends disagree"
    print(f"nodes={args.nodes} closure entries={size} queries={args.queries}")
    print("stage\tnumba_s\tnumpy_s\tspeedup")
    for stage in tn:
        print(f"{stage}\t{tn[stage]:.3f}\t{tp[stage]:.3f}\t{tp[stage] / tn[stage]:.2f}x")


if __name__ == "__main__":
    main()
