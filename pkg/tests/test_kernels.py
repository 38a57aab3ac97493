"""The numba and numpy kernel paths must agree bit for bit."""

import os
import subprocess
import sys

import numpy as np
import pytest

from propgen import kernels

pytestmark = pytest.mark.skipif(kernels.numba_impl is None, reason="numba path disabled")


def implied_distribution(prob, alias):
    """Exact probability of each outcome under an alias table."""
    k = prob.shape[0]
    out = prob.copy()
    for j in range(k):
        out[alias[j]] += 1.0 - prob[j]
    return out / k


@pytest.mark.parametrize("seed", range(5))
def test_alias_build_agrees_and_is_exact(seed):
    rng = np.random.default_rng(seed)
    w = rng.random(int(rng.integers(1, 300))) ** 3
    w[rng.random(w.shape[0]) < 0.2] = 0.0
    if w.sum() == 0:
        w[0] = 1.0
    p_np, a_np = kernels.numpy_impl["alias_build"](w)
    p_nb, a_nb = kernels.numba_impl["alias_build"](w)
    assert np.array_equal(p_np, p_nb) and np.array_equal(a_np, a_nb)
    np.testing.assert_allclose(implied_distribution(p_np, a_np), w / w.sum(), atol=1e-12)


def test_alias_draw_agrees():
    rng = np.random.default_rng(3)
    prob, alias = kernels.alias_build(rng.random(50))
    col = rng.integers(0, 50, size=100_000)
    coin = rng.random(100_000)
    assert np.array_equal(
        kernels.numpy_impl["alias_draw"](prob, alias, col, coin),
        kernels.numba_impl["alias_draw"](prob, alias, col, coin),
    )


@pytest.mark.parametrize("seed", range(4))
def test_candidate_keys_agree(seed):
    rng = np.random.default_rng(seed)
    n_cat = 6
    cats = rng.integers(0, n_cat, size=40)
    cats[cats == 5] = 4            # category 5 empty
    cats[np.flatnonzero(cats == 3)[1:]] = 2   # category 3 has at most one vertex
    offsets, members = kernels.numpy_impl["pool_members"](cats, n_cat)
    o2, m2 = kernels.numba_impl["pool_members"](cats, np.int64(n_cat))
    assert np.array_equal(offsets, o2) and np.array_equal(members, m2)
    pa = np.array([0, 0, 1, 3, 2, 5, 4], dtype=np.int64)
    pb = np.array([0, 1, 2, 3, 4, 5, 4], dtype=np.int64)
    n = 50_000
    idx = rng.integers(0, pa.shape[0], size=n)
    r_u, r_v = rng.random(n), rng.random(n)
    args = (idx, pa, pb, offsets, members, r_u, r_v, np.int64(40))
    k_np = kernels.numpy_impl["candidate_keys"](*args)
    k_nb = kernels.numba_impl["candidate_keys"](*args)
    assert np.array_equal(k_np, k_nb)
    assert np.all(k_np[pa[idx] == 5] == kernels.EMPTY_POOL)
    starved = (pa[idx] == 3) & (np.count_nonzero(cats == 3) == 1)
    assert np.all(k_np[starved] == kernels.SELF_LOOP)
    ok = k_np >= 0
    u, v = k_np[ok] // 40, k_np[ok] % 40
    assert np.all(u < v)
    a, b = pa[idx[ok]], pb[idx[ok]]
    assert np.all(np.sort(np.stack([cats[u], cats[v]], 1), 1) == np.stack([a, b], 1))


def test_diagonal_draws_are_uniform_over_distinct_pairs():
    cats = np.zeros(4, dtype=np.int64)
    offsets, members = kernels.pool_members(cats, 1)
    n = 600_000
    rng = np.random.default_rng(0)
    keys = kernels.candidate_keys(np.zeros(n, np.int64), np.array([0]), np.array([0]),
                                  offsets, members, rng.random(n), rng.random(n), 4)
    freq = np.unique(keys, return_counts=True)[1] / n
    assert freq.shape == (6,)
    assert np.all(np.abs(freq - 1 / 6) < 0.003)


def test_numpy_backend_process_matches(tmp_path):
    code = (
        "import sys, hashlib\n"
        "from propgen import kernels\n"
        "from propgen.dataio import generate_role_based\n"
        "from propgen.generation import GenerationConfig, sim_attr_graph\n"
        "g = sim_attr_graph(generate_role_based(500, 6000, seed=3), GenerationConfig(800, 9000, seed=5)).graph\n"
        "print(kernels.backend(), hashlib.sha256(g.labels.tobytes() + g.edges.tobytes()).hexdigest())\n"
    )
    outs = {}
    for flag in ("0", "1"):
        env = dict(os.environ, PROPGEN_DISABLE_NUMBA=flag)
        r = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        name, digest = r.stdout.split()
        outs[name] = digest
    assert set(outs) == {"numba", "numpy"}
    assert outs["numba"] == outs["numpy"]
