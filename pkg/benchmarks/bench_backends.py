"""Compare the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_backends.py [--vertices N] [--edges M] [--repeat R]

Kernel timings run in-process against both implementation tables. The
end-to-end timing runs generation in a child process per backend (the
backend is fixed at import time by PROPGEN_DISABLE_NUMBA) and also checks
that both produce the same graph.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from propgen import kernels

CHILD = r"""
import hashlib, json, sys, time
from propgen import kernels
from propgen.augmentation import augment
from propgen.dataio import generate_role_based
from propgen.estimation import estimate_edge_distribution, estimate_label_distribution
from propgen.generation import GenerationConfig, generate
n, m = int(sys.argv[1]), int(sys.argv[2])
src = augment(generate_role_based(2000, 90000, seed=7), 4)
p_l, p_c = estimate_label_distribution(src), estimate_edge_distribution(src)
generate(p_l, p_c, GenerationConfig(1000, 5000, seed=0))
t = time.perf_counter()
g = generate(p_l, p_c, GenerationConfig(n, m, seed=0)).graph
dt = time.perf_counter() - t
h = hashlib.sha256(g.labels.tobytes() + g.edges.tobytes()).hexdigest()
print(json.dumps({"backend": kernels.backend(), "seconds": dt, "sha256": h}))
"""


def best_of(fn, repeat):
    out = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t)
    return min(out)


def kernel_table(n, m, repeat):
    if kernels.numba_impl is None:
        print("numba unavailable or disabled; kernel comparison skipped")
        return
    rng = np.random.default_rng(0)
    k = 16
    cats = rng.integers(0, k, size=n)
    w = rng.random(k * (k + 1) // 2)
    a, b = np.triu_indices(k)
    a, b = a.astype(np.int64), b.astype(np.int64)
    col = rng.integers(0, w.shape[0], size=m)
    coin = rng.random(m)
    r_u, r_v = rng.random(m), rng.random(m)

    rows = []
    for name, impl in (("numpy", kernels.numpy_impl), ("numba", kernels.numba_impl)):
        offsets, members = impl["pool_members"](cats, k)
        prob, alias = impl["alias_build"](w)
        idx = impl["alias_draw"](prob, alias, col, coin)
        impl["candidate_keys"](idx, a, b, offsets, members, r_u, r_v, n)  # warm
        rows.append((name, {
            "pool_members": best_of(lambda: impl["pool_members"](cats, k), repeat),
            "alias_draw": best_of(lambda: impl["alias_draw"](prob, alias, col, coin), repeat),
            "candidate_keys": best_of(
                lambda: impl["candidate_keys"](idx, a, b, offsets, members, r_u, r_v, n), repeat),
        }))
    print(f"kernels, n={n} vertices, {m} draws (best of {repeat}):")
    for kname in rows[0][1]:
        t_np, t_nb = rows[0][1][kname], rows[1][1][kname]
        print(f"  {kname:15s} numpy {t_np * 1e3:8.1f} ms   numba {t_nb * 1e3:8.1f} ms   x{t_np / t_nb:5.2f}")


def end_to_end(n, m):
    results = []
    for disable in ("0", "1"):
        env = dict(os.environ, PROPGEN_DISABLE_NUMBA=disable)
        out = subprocess.run([sys.executable, "-c", CHILD, str(n), str(m)], env=env,
                             capture_output=True, text=True, check=True)
        results.append(json.loads(out.stdout.strip().splitlines()[-1]))
    print(f"generation, {n} vertices / {m} edges / 16 categories:")
    for r in results:
        print(f"  {r['backend']:6s} {r['seconds']:7.2f} s")
    same = len({r["sha256"] for r in results}) == 1
    print(f"  identical output: {same}")
    return same


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--vertices", type=int, default=1_000_000)
    ap.add_argument("--edges", type=int, default=5_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    kernel_table(args.vertices, args.edges, args.repeat)
    return 0 if end_to_end(args.vertices, args.edges) else 1


if __name__ == "__main__":
    sys.exit(main())
