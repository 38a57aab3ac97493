"""Maximum-likelihood label and edge-category distributions, alias samplers, and model persistence.

Both estimators count with exact integers and only divide when ``probs`` is
read, so marginalisation and oracle comparisons can be done on counts
without any float error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from . import kernels
from .errors import EstimationError, SchemaError
from .graph_model import LabelSchema, PropertyGraph, encode_labels

MODEL_FORMAT = "propgen-model"
MODEL_VERSION = 1


@dataclass(frozen=True, eq=False)
class CategoricalDistribution:
    """Distribution over the ``schema.n_categories`` label categories.

    ``counts`` holds integer counts for estimated distributions or arbitrary
    non-negative weights for user-supplied ones.
    """

    schema: LabelSchema
    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.shape != (self.schema.n_categories,):
            raise SchemaError(f"expected {self.schema.n_categories} counts, got shape {c.shape}")
        if np.any(c < 0) or not c.sum() > 0:
            raise EstimationError("distribution weights must be non-negative with positive total")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    @property
    def support(self) -> int:
        return self.schema.n_categories

    @property
    def total(self):
        return self.counts.sum()

    @property
    def probs(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    def exact_probs(self) -> list[Fraction]:
        tot = int(self.counts.sum())
        return [Fraction(int(c), tot) for c in self.counts]


@dataclass(frozen=True, eq=False)
class EdgeCategoryDistribution:
    """Sparse distribution over unordered category pairs ``(j, j')`` with ``j <= j'``.

    ``pairs`` is a sorted ``(K, 2)`` array of distinct canonical pairs and
    ``counts`` the matching weights; zero-mass pairs are not stored.
    """

    schema: LabelSchema
    pairs: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        counts = np.asarray(self.counts)
        if counts.shape != (pairs.shape[0],):
            raise SchemaError("pairs and counts differ in length")
        if np.any(counts < 0) or not counts.sum() > 0:
            raise EstimationError("edge-category weights must be non-negative with positive total")
        n = self.schema.n_categories
        if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
            raise SchemaError(f"edge category refers to a category outside [0, {n})")
        pairs, counts = _aggregate_pairs(pairs, counts, n)
        keep = counts > 0
        pairs, counts = pairs[keep], counts[keep]
        pairs.flags.writeable = False
        counts.flags.writeable = False
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_mapping(cls, schema: LabelSchema, mapping: dict) -> "EdgeCategoryDistribution":
        items = list(mapping.items())
        pairs = np.array([p for p, _ in items], dtype=np.int64).reshape(-1, 2)
        weights = np.array([w for _, w in items])
        return cls(schema, pairs, weights)

    @property
    def total(self):
        return self.counts.sum()

    @property
    def probs(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    def as_dict(self) -> dict[tuple[int, int], float]:
        return {(int(a), int(b)): float(p) for (a, b), p in zip(self.pairs, self.probs)}

    def count_dict(self) -> dict[tuple[int, int], int]:
        return {(int(a), int(b)): c.item() for (a, b), c in zip(self.pairs, self.counts)}


def _aggregate_pairs(pairs: np.ndarray, weights: np.ndarray, n_categories: int):
    """Canonicalise pairs to ``j <= j'`` and sum weights of repeated pairs."""
    if pairs.shape[0] == 0:
        return pairs.copy(), np.asarray(weights).copy()
    canon = np.sort(pairs, axis=1)
    if n_categories <= 2**31:
        keys = canon[:, 0] * np.int64(n_categories) + canon[:, 1]
        uniq, inv = np.unique(keys, return_inverse=True)
        out_pairs = np.stack([uniq // n_categories, uniq % n_categories], axis=1)
    else:
        out_pairs, inv = np.unique(canon, axis=0, return_inverse=True)
    inv = inv.ravel()
    w = np.asarray(weights)
    if np.issubdtype(w.dtype, np.integer):
        # float accumulation is exact while totals stay below 2**53
        if w.sum() >= 2**53:
            raise EstimationError("edge counts too large for exact accumulation")
        out_counts = np.rint(
            np.bincount(inv, weights=w.astype(np.float64), minlength=out_pairs.shape[0])
        ).astype(np.int64)
    else:
        out_counts = np.bincount(inv, weights=w.astype(np.float64), minlength=out_pairs.shape[0])
    return out_pairs.astype(np.int64), out_counts


def estimate_label_distribution(g: PropertyGraph, chunk_size: Optional[int] = None) -> CategoricalDistribution:
    """Fraction of vertices in each label category.

    With ``chunk_size`` the counts are reduced over vertex chunks; the result
    does not depend on the partitioning.
    """
    if g.vertex_count < 1:
        raise EstimationError("cannot estimate a label distribution from a graph with no vertices")
    cats = g.categories()
    n = g.schema.n_categories
    step = chunk_size or cats.shape[0]
    counts = np.zeros(n, dtype=np.int64)
    for lo in range(0, cats.shape[0], step):
        counts += np.bincount(cats[lo:lo + step], minlength=n)
    return CategoricalDistribution(g.schema, counts)


def edge_category_pairs(g: PropertyGraph) -> np.ndarray:
    """Per-edge canonical ``(j, j')`` category pairs, shape ``(m, 2)``."""
    cats = g.categories()
    ends = cats[g.edges]
    return np.sort(ends, axis=1)


def estimate_edge_distribution(g: PropertyGraph, chunk_size: Optional[int] = None) -> EdgeCategoryDistribution:
    """Fraction of edges joining each unordered pair of label categories."""
    if g.edge_count < 1:
        raise EstimationError("cannot estimate an edge-category distribution from an edgeless graph")
    pairs = edge_category_pairs(g)
    n = g.schema.n_categories
    step = chunk_size or pairs.shape[0]
    parts_p, parts_c = [], []
    for lo in range(0, pairs.shape[0], step):
        p, c = _aggregate_pairs(pairs[lo:lo + step], np.ones(min(step, pairs.shape[0] - lo), dtype=np.int64), n)
        parts_p.append(p)
        parts_c.append(c)
    p, c = _aggregate_pairs(np.concatenate(parts_p), np.concatenate(parts_c), n)
    return EdgeCategoryDistribution(g.schema, p, c)


class Sampler:
    """O(1)-per-draw alias sampler over a distribution's non-zero support.

    ``draw`` returns category ids for a :class:`CategoricalDistribution` and
    ``(n, 2)`` category pairs for an :class:`EdgeCategoryDistribution`.
    """

    def __init__(self, dist, seed=None):
        if isinstance(dist, EdgeCategoryDistribution):
            self.values = dist.pairs
            weights = dist.counts
        elif isinstance(dist, CategoricalDistribution):
            support = np.flatnonzero(dist.counts)
            self.values = support
            weights = dist.counts[support]
        else:
            weights = np.asarray(dist, dtype=np.float64)
            support = np.flatnonzero(weights)
            self.values = support
            weights = weights[support]
        self.prob, self.alias = kernels.alias_build(np.asarray(weights, dtype=np.float64))
        self.rng = np.random.default_rng(seed)

    def __len__(self):
        return self.prob.shape[0]

    def draw_indices(self, n: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        """Indices into ``values``; ``rng`` defaults to the sampler's own stream."""
        rng = self.rng if rng is None else rng
        col = rng.integers(0, self.prob.shape[0], size=n, dtype=np.int64)
        coin = rng.random(n)
        return kernels.alias_draw(self.prob, self.alias, col, coin)

    def draw(self, n: int) -> np.ndarray:
        return self.values[self.draw_indices(n)]


def build_sampler(dist, seed=None) -> Sampler:
    return Sampler(dist, seed)


def _drop_digit(cids: np.ndarray, schema: LabelSchema, index: int) -> np.ndarray:
    r = schema.radix[index]
    size = schema.sizes[index]
    return (cids // (r * size)) * r + cids % r


def marginalize(dist, label_index: int):
    """Sum out one label.

    For an edge distribution the label is summed out of both endpoints.
    Integer counts stay integer, so the reduction is exact.
    """
    schema = dist.schema
    if not 0 <= label_index < len(schema):
        raise IndexError(f"label index {label_index} out of range for {len(schema)} labels")
    reduced = schema.drop(label_index) if len(schema) > 1 else None
    if reduced is None:
        raise SchemaError("cannot marginalise the only label of a schema")
    if isinstance(dist, CategoricalDistribution):
        counts = np.asarray(dist.counts).reshape(schema.sizes).sum(axis=label_index).ravel()
        return CategoricalDistribution(reduced, counts)
    if isinstance(dist, EdgeCategoryDistribution):
        pairs = _drop_digit(dist.pairs, schema, label_index)
        return EdgeCategoryDistribution(reduced, pairs, dist.counts)
    raise TypeError(f"cannot marginalise {type(dist).__name__}")


def total_variation(p, q) -> float:
    """Half the L1 distance between two distributions.

    Accepts probability arrays of equal length, two
    :class:`CategoricalDistribution` objects, or two
    :class:`EdgeCategoryDistribution` objects (aligned on their pair keys).
    """
    if isinstance(p, EdgeCategoryDistribution) or isinstance(q, EdgeCategoryDistribution):
        if not (isinstance(p, EdgeCategoryDistribution) and isinstance(q, EdgeCategoryDistribution)):
            raise ValueError("cannot compare an edge distribution with a non-edge distribution")
        if p.schema.n_categories != q.schema.n_categories:
            raise ValueError("edge distributions are over different category supports")
        pd, qd = p.as_dict(), q.as_dict()
        keys = set(pd) | set(qd)
        return 0.5 * sum(abs(pd.get(k, 0.0) - qd.get(k, 0.0)) for k in keys)
    pa = p.probs if isinstance(p, CategoricalDistribution) else np.asarray(p, dtype=np.float64)
    qa = q.probs if isinstance(q, CategoricalDistribution) else np.asarray(q, dtype=np.float64)
    if pa.shape != qa.shape:
        raise ValueError(f"support mismatch: {pa.shape} vs {qa.shape}")
    return float(0.5 * np.abs(pa - qa).sum())


# --------------------------------------------------------------------------
# Model persistence
# --------------------------------------------------------------------------

@dataclass(eq=False)
class FittedModel:
    """Everything generation needs, detached from the source graph."""

    label_dist: CategoricalDistribution
    edge_dist: EdgeCategoryDistribution
    source_vertices: int
    source_edges: int
    degree_counts: Optional[np.ndarray] = None
    augmentation: Optional[dict] = None
    meta: dict = field(default_factory=dict)

    @property
    def schema(self) -> LabelSchema:
        return self.label_dist.schema

    def to_dict(self) -> dict:
        def num(x):
            return x.item() if hasattr(x, "item") else x

        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "schema": self.schema.to_dict(),
            "source": {"vertices": self.source_vertices, "edges": self.source_edges},
            "label_counts": [num(c) for c in self.label_dist.counts],
            "label_probs": [float(p) for p in self.label_dist.probs],
            "edge_pairs": [
                [int(a), int(b), num(c), float(p)]
                for (a, b), c, p in zip(self.edge_dist.pairs, self.edge_dist.counts, self.edge_dist.probs)
            ],
            "degree_counts": None if self.degree_counts is None else [int(c) for c in self.degree_counts],
            "augmentation": self.augmentation,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FittedModel":
        if d.get("format") != MODEL_FORMAT:
            raise SchemaError(f"not a {MODEL_FORMAT} document")
        schema = LabelSchema.from_dict(d["schema"])
        label_counts = np.asarray(d["label_counts"])
        rows = d["edge_pairs"]
        pairs = np.array([[r[0], r[1]] for r in rows], dtype=np.int64).reshape(-1, 2)
        counts = np.asarray([r[2] for r in rows])
        deg = d.get("degree_counts")
        return cls(
            CategoricalDistribution(schema, label_counts),
            EdgeCategoryDistribution(schema, pairs, counts),
            int(d["source"]["vertices"]),
            int(d["source"]["edges"]),
            None if deg is None else np.asarray(deg, dtype=np.int64),
            d.get("augmentation"),
            d.get("meta", {}),
        )


def fit(g: PropertyGraph, augmentation: Optional[dict] = None) -> FittedModel:
    from .graph_model import degree_sequence

    return FittedModel(
        estimate_label_distribution(g),
        estimate_edge_distribution(g),
        g.vertex_count,
        g.edge_count,
        np.bincount(degree_sequence(g)),
        augmentation,
    )


def save_model(model: FittedModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path) -> FittedModel:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid model JSON: {exc}") from None
    return FittedModel.from_dict(d)


Distribution = Union[CategoricalDistribution, EdgeCategoryDistribution]
