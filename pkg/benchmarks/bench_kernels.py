"""Compiled vs pure-Python kernels on the t=5 neighbourhood graph.

    python3 benchmarks/bench_kernels.py [--repeat N] [--kernels scan cliques svp cross] [--json out.json]

Each kernel runs on both backends with identical inputs; outputs are
compared before timings are reported.  The python backend needs a couple
of minutes in total.
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from prepgraph import kernels
from prepgraph.cliques import find_triple_cliques
from prepgraph.code import CodeParams
from prepgraph.graph import build_n0_graph


def _time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=1)
    ap.add_argument("--kernels", nargs="+", default=["scan", "cliques", "svp", "cross"],
                    choices=["scan", "cliques", "svp", "cross"])
    ap.add_argument("--json", default=None, help="write results here")
    args = ap.parse_args(argv)

    if "compiled" not in kernels.available():
        print("compiled extension not built; run `python3 setup.py build_ext --inplace` first")
        return 1
    params = CodeParams.from_t(5)
    g = build_n0_graph(params)
    tc = find_triple_cliques(g)
    rng = np.random.default_rng(0)
    pick = rng.integers(len(tc), size=(2000, 2))
    A = tc.members[pick[:, 0]].astype(np.int32)
    B = tc.members[pick[:, 1]].astype(np.int32)

    jobs = {
        "scan": lambda k: k.scan_w6(params.keys, params.valid_preparata, 0, 0, params.n),
        "cliques": lambda k: k.triple_cliques(g.indptr, g.indices, 0, 14, 20),
        "svp": lambda k: k.shared_vertex_profiles(g.indptr, g.indices, tc.vertex_cliques, tc.members, 0),
        "cross": lambda k: k.cross_counts(g.indptr, g.indices, A, B),
    }
    rows = []
    print(f"{'kernel':<10}{'compiled s':>12}{'python s':>12}{'speedup':>10}  outputs")
    for name in args.kernels:
        tc_s, out_c = _time(lambda: jobs[name](kernels.backend("compiled")), args.repeat)
        tp_s, out_p = _time(lambda: jobs[name](kernels.backend("python")), args.repeat)
        same = _same(out_c, out_p)
        rows.append({"kernel": name, "compiled_s": tc_s, "python_s": tp_s, "same_output": bool(same)})
        print(f"{name:<10}{tc_s:>12.3f}{tp_s:>12.3f}{tp_s / tc_s:>9.1f}x  {'identical' if same else 'DIFFER'}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0 if all(r["same_output"] for r in rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
