"""Hot inner loops: alias tables, alias draws and candidate-edge mapping.

Every kernel exists twice: a pure numpy/Python version and a numba ``@njit``
version compiled from the same loop source. Both consume the same uniform
and integer arrays produced by ``numpy.random.Generator``, so the two paths
return bit-identical results for a given seed.

Set ``PROPGEN_DISABLE_NUMBA=1`` to force the numpy path (numba is also
skipped automatically when it is not importable).
"""

import os

import numpy as np

EMPTY_POOL = -2
SELF_LOOP = -1

_DISABLE = os.environ.get("PROPGEN_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLE


# --------------------------------------------------------------------------
# Loop sources. These run as plain Python in the fallback path (alias build
# only) and are compiled by numba otherwise.
# --------------------------------------------------------------------------

def _alias_build_loop(weights):
    k = weights.shape[0]
    prob = np.zeros(k, dtype=np.float64)
    alias = np.arange(k, dtype=np.int64)
    total = 0.0
    for i in range(k):
        total += weights[i]
    scaled = np.empty(k, dtype=np.float64)
    small = np.empty(k, dtype=np.int64)
    large = np.empty(k, dtype=np.int64)
    ns = 0
    nl = 0
    for i in range(k):
        scaled[i] = weights[i] * k / total
        if scaled[i] < 1.0:
            small[ns] = i
            ns += 1
        else:
            large[nl] = i
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        s = small[ns]
        nl -= 1
        g = large[nl]
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            small[ns] = g
            ns += 1
        else:
            large[nl] = g
            nl += 1
    # leftovers are 1 up to rounding
    while nl > 0:
        nl -= 1
        prob[large[nl]] = 1.0
    while ns > 0:
        ns -= 1
        prob[small[ns]] = 1.0
    return prob, alias


def _alias_draw_loop(prob, alias, col, coin):
    n = col.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        c = col[i]
        if coin[i] < prob[c]:
            out[i] = c
        else:
            out[i] = alias[c]
    return out


def _candidate_keys_loop(pair_idx, pair_a, pair_b, offsets, members, r_u, r_v, n_vertices):
    n = pair_idx.shape[0]
    keys = np.empty(n, dtype=np.int64)
    for i in range(n):
        p = pair_idx[i]
        a = pair_a[p]
        b = pair_b[p]
        sa = offsets[a + 1] - offsets[a]
        sb = offsets[b + 1] - offsets[b]
        if sa == 0 or sb == 0:
            keys[i] = EMPTY_POOL
            continue
        if a == b:
            if sa < 2:
                keys[i] = SELF_LOOP
                continue
            iu = np.int64(r_u[i] * sa)
            if iu > sa - 1:
                iu = sa - 1
            iv = np.int64(r_v[i] * (sa - 1))
            if iv > sa - 2:
                iv = sa - 2
            if iv >= iu:
                iv += 1
        else:
            iu = np.int64(r_u[i] * sa)
            if iu > sa - 1:
                iu = sa - 1
            iv = np.int64(r_v[i] * sb)
            if iv > sb - 1:
                iv = sb - 1
        u = members[offsets[a] + iu]
        v = members[offsets[b] + iv]
        if u < v:
            keys[i] = u * n_vertices + v
        elif v < u:
            keys[i] = v * n_vertices + u
        else:
            keys[i] = SELF_LOOP
    return keys


def _pool_members_loop(cats, n_categories):
    n = cats.shape[0]
    offsets = np.zeros(n_categories + 1, dtype=np.int64)
    for i in range(n):
        offsets[cats[i] + 1] += 1
    for c in range(n_categories):
        offsets[c + 1] += offsets[c]
    fill = offsets[:-1].copy()
    members = np.empty(n, dtype=np.int64)
    for i in range(n):
        c = cats[i]
        members[fill[c]] = i
        fill[c] += 1
    return offsets, members


# --------------------------------------------------------------------------
# numpy fallback
# --------------------------------------------------------------------------

def _alias_draw_np(prob, alias, col, coin):
    return np.where(coin < prob[col], col, alias[col])


def _candidate_keys_np(pair_idx, pair_a, pair_b, offsets, members, r_u, r_v, n_vertices):
    a = pair_a[pair_idx]
    b = pair_b[pair_idx]
    start_a = offsets[a]
    start_b = offsets[b]
    sa = offsets[a + 1] - start_a
    sb = offsets[b + 1] - start_b
    diag = a == b
    empty = (sa == 0) | (sb == 0)
    starved = diag & (sa < 2) & ~empty
    ok = ~(empty | starved)

    iu = np.minimum((r_u * sa).astype(np.int64), sa - 1)
    vsize = np.where(diag, sa - 1, sb)
    iv = np.minimum((r_v * vsize).astype(np.int64), vsize - 1)
    iv = np.where(diag & (iv >= iu), iv + 1, iv)

    keys = np.full(pair_idx.shape[0], EMPTY_POOL, dtype=np.int64)
    keys[starved] = SELF_LOOP
    u = members[(start_a + iu)[ok]]
    v = members[(start_b + iv)[ok]]
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    keys[ok] = np.where(lo == hi, SELF_LOOP, lo * n_vertices + hi)
    return keys


def _pool_members_np(cats, n_categories):
    offsets = np.zeros(n_categories + 1, dtype=np.int64)
    np.cumsum(np.bincount(cats, minlength=n_categories), out=offsets[1:])
    members = np.argsort(cats, kind="stable").astype(np.int64)
    return offsets, members


numpy_impl = {
    "pool_members": _pool_members_np,
    "alias_build": _alias_build_loop,
    "alias_draw": _alias_draw_np,
    "candidate_keys": _candidate_keys_np,
}

numba_impl = None
if HAVE_NUMBA and not _DISABLE:
    _jit = numba.njit(cache=True, nogil=True)
    numba_impl = {
        "pool_members": _jit(_pool_members_loop),
        "alias_build": _jit(_alias_build_loop),
        "alias_draw": _jit(_alias_draw_loop),
        "candidate_keys": _jit(_candidate_keys_loop),
    }

_active = numba_impl if USE_NUMBA else numpy_impl


def alias_build(weights):
    """Vose alias table for non-negative ``weights`` (need not be normalised).

    Returns ``(prob, alias)``: draw column ``c`` uniformly, keep it when a
    uniform coin is below ``prob[c]``, otherwise take ``alias[c]``.
    """
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] == 0:
        raise ValueError("alias table needs a non-empty 1-d weight vector")
    if not np.all(np.isfinite(w)) or np.any(w < 0) or not w.sum() > 0:
        raise ValueError("alias weights must be finite, non-negative, and not all zero")
    return _active["alias_build"](w)


def alias_draw(prob, alias, col, coin):
    return _active["alias_draw"](prob, alias, col, coin)


def candidate_keys(pair_idx, pair_a, pair_b, offsets, members, r_u, r_v, n_vertices):
    """Map drawn edge-category indices to canonical edge keys ``u * n + v``.

    Rejected candidates carry ``SELF_LOOP`` (diagonal pool smaller than 2) or
    ``EMPTY_POOL`` (an endpoint category has no vertices).
    """
    return _active["candidate_keys"](
        pair_idx, pair_a, pair_b, offsets, members, r_u, r_v, np.int64(n_vertices)
    )


def pool_members(cats, n_categories):
    """Counting sort of vertex ids by category: ``(offsets, members)`` in CSR form."""
    return _active["pool_members"](np.ascontiguousarray(cats, dtype=np.int64), np.int64(n_categories))


def backend():
    return "numba" if USE_NUMBA else "numpy"
