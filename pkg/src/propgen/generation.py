"""Target-graph generation from fitted label and edge-category distributions.

Vertices get label categories drawn from the label distribution. Edges are
drawn one candidate at a time: an edge category from the edge distribution,
then one vertex uniformly from each endpoint category's pool. Candidates that
would be self loops, duplicates, or hit an empty pool are rejected and the
stream continues until exactly ``m_t`` distinct edges are accepted.

The accepted edge set is always "the first ``m_t`` distinct valid candidates
of the stream", so drawing candidates in large vectorised batches gives the
same graph as drawing them one at a time.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import SaturationError
from .estimation import (
    CategoricalDistribution,
    EdgeCategoryDistribution,
    FittedModel,
    Sampler,
    estimate_edge_distribution,
    estimate_label_distribution,
)
from .graph_model import LabelSchema, PropertyGraph, decode_categories, encode_labels

CHUNK = 1 << 20


@dataclass(frozen=True)
class GenerationConfig:
    n_t: int
    m_t: int
    seed: int = 0
    max_attempt_factor: int = 100
    threads: int = 1

    def __post_init__(self):
        if self.n_t < 2:
            raise ValueError(f"n_t must be at least 2, got {self.n_t}")
        if self.m_t < 1:
            raise ValueError(f"m_t must be at least 1, got {self.m_t}")
        if self.m_t > self.n_t * (self.n_t - 1) // 2:
            raise ValueError(f"m_t={self.m_t} exceeds the {self.n_t * (self.n_t - 1) // 2} possible edges")
        if self.max_attempt_factor < 1:
            raise ValueError("max_attempt_factor must be positive")
        if self.threads < 1:
            raise ValueError("threads must be positive")
        if self.n_t >= 3_000_000_000:
            raise ValueError("n_t too large for 64-bit edge keys")


@dataclass(eq=False)
class GenerationReport:
    graph: PropertyGraph
    rejected_self: int = 0
    rejected_duplicate: int = 0
    rejected_empty_pool: int = 0
    attempts: int = 0
    timings: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "vertices": self.graph.vertex_count,
            "edges": self.graph.edge_count,
            "attempts": self.attempts,
            "rejected_self": self.rejected_self,
            "rejected_duplicate": self.rejected_duplicate,
            "rejected_empty_pool": self.rejected_empty_pool,
            "timings": dict(self.timings),
        }


@dataclass(frozen=True, eq=False)
class CategoryPools:
    """Category -> vertex ids, stored CSR-style.

    Vertices of category ``c`` are ``members[offsets[c]:offsets[c + 1]]`` in
    ascending order.
    """

    offsets: np.ndarray
    members: np.ndarray

    def __getitem__(self, category: int) -> np.ndarray:
        return self.members[self.offsets[category]:self.offsets[category + 1]]

    def sizes(self) -> np.ndarray:
        return np.diff(self.offsets)

    def as_dict(self) -> dict[int, list[int]]:
        sizes = self.sizes()
        return {int(c): self[c].tolist() for c in np.flatnonzero(sizes)}


def sample_vertex_categories(p_l: CategoricalDistribution, n_t: int, seed=None) -> np.ndarray:
    return Sampler(p_l, seed).draw(n_t)


def sample_vertex_labels(p_l: CategoricalDistribution, n_t: int, seed=None) -> np.ndarray:
    """``n_t`` independent label vectors drawn from ``p_l``, as an ``(n_t, M)`` array."""
    return decode_categories(sample_vertex_categories(p_l, n_t, seed), p_l.schema)


def build_category_pools(labels, schema: LabelSchema) -> CategoryPools:
    """Group vertex ids by category. ``labels`` may be an (n, M) label array or category ids."""
    labels = np.asarray(labels)
    cats = labels if labels.ndim == 1 else encode_labels(labels, schema)
    offsets, members = kernels.pool_members(cats, schema.n_categories)
    return CategoryPools(offsets, members)


def _edge_seed_sequences(seed, workers: int) -> list[np.random.SeedSequence]:
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return root.spawn(workers)


def draw_candidate_keys(sampler: Sampler, pools: CategoryPools, n_vertices: int,
                        size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` candidate edge keys from one RNG stream, drawn in bounded chunks."""
    out = np.empty(size, dtype=np.int64)
    for lo in range(0, size, CHUNK):
        k = min(CHUNK, size - lo)
        pair_idx = sampler.draw_indices(k, rng)
        r_u = rng.random(k)
        r_v = rng.random(k)
        out[lo:lo + k] = kernels.candidate_keys(
            pair_idx, sampler.pair_a, sampler.pair_b, pools.offsets, pools.members,
            r_u, r_v, n_vertices,
        )
    return out


def collect_unique_keys(draw: Callable[[int, int], np.ndarray], m_t: int, cap: int):
    """Accept the first ``m_t`` distinct non-negative keys of a candidate stream.

    ``draw(round_index, size)`` returns the next ``size`` candidates (negative
    values are rejections coded as in :mod:`propgen.kernels`). Returns the
    sorted accepted keys and a dict of rejection counts.
    """
    batches = []
    total = 0
    round_idx = 0
    unique_found = 0
    while True:
        if round_idx == 0:
            size = int(math.ceil(m_t * 1.02)) + 16
        else:
            rate = unique_found / total if unique_found else 0.0
            need = m_t - unique_found
            size = int(math.ceil(need / max(rate, 0.01) * 1.1)) + 16
        size = min(size, cap - total)
        if size <= 0:
            keys = np.concatenate(batches) if batches else np.empty(0, np.int64)
            raise SaturationError(
                f"could not place {m_t} distinct edges within {cap} attempts",
                accepted=unique_found,
                attempts=total,
                rejected_self=int(np.count_nonzero(keys == kernels.SELF_LOOP)),
                rejected_empty_pool=int(np.count_nonzero(keys == kernels.EMPTY_POOL)),
                rejected_duplicate=int(total - unique_found
                                       - np.count_nonzero(keys == kernels.SELF_LOOP)
                                       - np.count_nonzero(keys == kernels.EMPTY_POOL)),
            )
        batches.append(draw(round_idx, size))
        total += size
        round_idx += 1
        keys = batches[0] if len(batches) == 1 else np.concatenate(batches)
        if len(batches) > 1:
            batches = [keys]

        valid = keys >= 0
        all_valid = bool(valid.all())
        if all_valid:
            uniq, first = np.unique(keys, return_index=True)
        else:
            pos = np.flatnonzero(valid)
            uniq, first = np.unique(keys[pos], return_index=True)
            first = pos[first]
        unique_found = uniq.shape[0]
        if unique_found < m_t:
            continue
        if unique_found == m_t:
            cutoff = int(first.max())
            accepted = uniq
        else:
            cutoff = int(np.partition(first, m_t - 1)[m_t - 1])
            accepted = uniq[first <= cutoff]
        attempts = cutoff + 1
        head = keys[:attempts]
        n_self = int(np.count_nonzero(head == kernels.SELF_LOOP))
        n_empty = int(np.count_nonzero(head == kernels.EMPTY_POOL))
        stats = {
            "attempts": attempts,
            "rejected_self": n_self,
            "rejected_empty_pool": n_empty,
            "rejected_duplicate": attempts - m_t - n_self - n_empty,
        }
        return accepted, stats


def _edge_sampler(p_c: EdgeCategoryDistribution) -> Sampler:
    s = Sampler(p_c)
    s.pair_a = np.ascontiguousarray(p_c.pairs[:, 0])
    s.pair_b = np.ascontiguousarray(p_c.pairs[:, 1])
    return s


def sample_edges(p_c: EdgeCategoryDistribution, pools: CategoryPools, cfg: GenerationConfig,
                 seed=None):
    """Draw exactly ``cfg.m_t`` distinct undirected edges.

    With ``cfg.threads == 1`` the candidate stream comes from one RNG stream.
    With ``k`` threads, the first round is split across ``k`` workers with
    independent streams (concatenated in worker order) and later top-up
    rounds are drawn by worker 0 alone, so output is deterministic for a
    given ``(seed, threads)`` pair.

    Returns ``(edges, stats)`` where ``edges`` is a sorted ``(m_t, 2)`` array.
    Raises :class:`SaturationError` after ``max_attempt_factor * m_t``
    candidates.
    """
    seed = cfg.seed if seed is None else seed
    n = int(pools.members.shape[0])
    sampler = _edge_sampler(p_c)
    workers = cfg.threads
    rngs = [np.random.default_rng(ss) for ss in _edge_seed_sequences(seed, workers)]

    def draw(round_idx, size):
        if workers == 1 or round_idx > 0:
            return draw_candidate_keys(sampler, pools, n, size, rngs[0])
        base, extra = divmod(size, workers)
        sizes = [base + (1 if w < extra else 0) for w in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(
                lambda w: draw_candidate_keys(sampler, pools, n, sizes[w], rngs[w]),
                range(workers),
            ))
        return np.concatenate(parts)

    keys, stats = collect_unique_keys(draw, cfg.m_t, cfg.max_attempt_factor * cfg.m_t)
    edges = np.empty((keys.shape[0], 2), dtype=np.int64)
    np.floor_divide(keys, n, out=edges[:, 0])
    np.remainder(keys, n, out=edges[:, 1])
    return edges, stats


def generate(p_l: CategoricalDistribution, p_c: EdgeCategoryDistribution,
             cfg: GenerationConfig) -> GenerationReport:
    """Sample a target graph of ``cfg.n_t`` vertices and ``cfg.m_t`` edges."""
    if p_l.schema != p_c.schema:
        raise ValueError("label and edge distributions use different schemas")
    label_ss, edge_ss = np.random.SeedSequence(cfg.seed).spawn(2)
    t0 = time.perf_counter()
    cats = sample_vertex_categories(p_l, cfg.n_t, label_ss)
    t1 = time.perf_counter()
    pools = build_category_pools(cats, p_l.schema)
    t2 = time.perf_counter()
    edges, stats = sample_edges(p_c, pools, cfg, seed=edge_ss)
    t3 = time.perf_counter()
    graph = PropertyGraph(p_l.schema, decode_categories(cats, p_l.schema), edges)
    t4 = time.perf_counter()
    return GenerationReport(
        graph,
        rejected_self=stats["rejected_self"],
        rejected_duplicate=stats["rejected_duplicate"],
        rejected_empty_pool=stats["rejected_empty_pool"],
        attempts=stats["attempts"],
        timings={
            "vertex_labels_s": t1 - t0,
            "pools_s": t2 - t1,
            "edges_s": t3 - t2,
            "assemble_s": t4 - t3,
            "backend": kernels.backend(),
        },
    )


def generate_from_model(model: FittedModel, cfg: GenerationConfig) -> GenerationReport:
    return generate(model.label_dist, model.edge_dist, cfg)


def sim_attr_graph(source: PropertyGraph, cfg: GenerationConfig) -> GenerationReport:
    """Fit both distributions on ``source`` and generate a target graph from them."""
    t0 = time.perf_counter()
    p_l = estimate_label_distribution(source)
    p_c = estimate_edge_distribution(source)
    fit_s = time.perf_counter() - t0
    report = generate(p_l, p_c, cfg)
    report.timings["fit_s"] = fit_s
    return report


def scaled_sizes(n_source: int, m_source: int, vertex_scale: float, edge_scale: float) -> tuple[int, int]:
    if vertex_scale < 1 or edge_scale < 1:
        raise ValueError("expansion scales must be at least 1")
    return int(round(vertex_scale * n_source)), int(round(edge_scale * m_source))


def expand(source: PropertyGraph, vertex_scale: float, edge_scale: float, seed=0,
           **cfg_kwargs) -> GenerationReport:
    """Regenerate ``source`` with vertex and edge counts multiplied by the given scales."""
    n_t, m_t = scaled_sizes(source.vertex_count, source.edge_count, vertex_scale, edge_scale)
    return sim_attr_graph(source, GenerationConfig(n_t, m_t, seed, **cfg_kwargs))
