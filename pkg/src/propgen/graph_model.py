"""Property-graph and label-schema types, plus the mixed-radix category encoding.

A joint label assignment (one value per label) is flattened into a single
integer *category id*. Label 0 is the most significant digit, so the encoding
matches C-order reshaping of a dense count vector to ``schema.sizes``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import SchemaError

MAX_CATEGORIES = 2**32


@dataclass(frozen=True)
class Label:
    name: str
    size: int
    value_names: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if int(self.size) < 1:
            raise SchemaError(f"label {self.name!r} must have at least one value")
        object.__setattr__(self, "size", int(self.size))
        if self.value_names is not None:
            names = tuple(str(v) for v in self.value_names)
            if len(names) != self.size:
                raise SchemaError(
                    f"label {self.name!r}: {len(names)} value names for {self.size} values"
                )
            object.__setattr__(self, "value_names", names)


@dataclass(frozen=True)
class LabelSchema:
    """Ordered labels, each with a finite integer domain ``0..size-1``."""

    labels: tuple[Label, ...]
    n_categories: int = field(init=False)
    radix: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels:
            raise SchemaError("a schema needs at least one label")
        names = [lab.name for lab in labels]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate label names in {names}")
        n = 1
        for lab in labels:
            n *= lab.size
        if n > MAX_CATEGORIES:
            raise SchemaError(
                f"schema has {n} label categories; at most {MAX_CATEGORIES} are supported"
            )
        radix = []
        r = 1
        for lab in reversed(labels):
            radix.append(r)
            r *= lab.size
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "n_categories", n)
        object.__setattr__(self, "radix", tuple(reversed(radix)))

    @classmethod
    def from_sizes(cls, sizes: Sequence[int], names: Optional[Sequence[str]] = None) -> "LabelSchema":
        if names is None:
            names = [f"label{k + 1}" for k in range(len(sizes))]
        if len(names) != len(sizes):
            raise SchemaError("names and sizes differ in length")
        return cls(tuple(Label(str(nm), int(sz)) for nm, sz in zip(names, sizes)))

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(lab.size for lab in self.labels)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(lab.name for lab in self.labels)

    def __len__(self):
        return len(self.labels)

    def drop(self, index: int) -> "LabelSchema":
        if not 0 <= index < len(self.labels):
            raise IndexError(f"label index {index} out of range for {len(self.labels)} labels")
        return LabelSchema(self.labels[:index] + self.labels[index + 1:])

    def append(self, label: Label) -> "LabelSchema":
        return LabelSchema(self.labels + (label,))

    def to_dict(self) -> dict:
        out = []
        for lab in self.labels:
            d = {"name": lab.name, "size": lab.size}
            if lab.value_names is not None:
                d["values"] = list(lab.value_names)
            out.append(d)
        return {"labels": out}

    @classmethod
    def from_dict(cls, d: dict) -> "LabelSchema":
        try:
            return cls(tuple(
                Label(str(x["name"]), int(x["size"]),
                      tuple(x["values"]) if x.get("values") is not None else None)
                for x in d["labels"]
            ))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed schema document: {exc}") from None


def encode_label_vector(values: Sequence[int], schema: LabelSchema) -> int:
    if len(values) != len(schema):
        raise SchemaError(f"label vector has {len(values)} entries, schema has {len(schema)}")
    cid = 0
    for k, (v, lab) in enumerate(zip(values, schema.labels)):
        v = int(v)
        if not 0 <= v < lab.size:
            raise SchemaError(f"value {v} outside domain of label {lab.name!r} (size {lab.size})")
        cid += v * schema.radix[k]
    return cid


def decode_category(cid: int, schema: LabelSchema) -> tuple[int, ...]:
    cid = int(cid)
    if not 0 <= cid < schema.n_categories:
        raise IndexError(f"category id {cid} outside [0, {schema.n_categories})")
    return tuple(int(cid // r % lab.size) for r, lab in zip(schema.radix, schema.labels))


def encode_labels(labels: np.ndarray, schema: LabelSchema) -> np.ndarray:
    """Vectorised :func:`encode_label_vector` over an ``(n, M)`` label array."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 2 or labels.shape[1] != len(schema):
        raise SchemaError(f"expected label array of shape (n, {len(schema)}), got {labels.shape}")
    sizes = np.asarray(schema.sizes, dtype=np.int64)
    if labels.size and (labels.min() < 0 or np.any(labels >= sizes)):
        raise SchemaError("label array contains values outside their domains")
    return labels @ np.asarray(schema.radix, dtype=np.int64)


def decode_categories(cids: np.ndarray, schema: LabelSchema) -> np.ndarray:
    cids = np.asarray(cids, dtype=np.int64)
    radix = np.asarray(schema.radix, dtype=np.int64)
    sizes = np.asarray(schema.sizes, dtype=np.int64)
    return (cids[:, None] // radix) % sizes


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class PropertyGraph:
    """Undirected simple graph with one label vector per vertex.

    ``labels`` is an ``(n, M)`` integer array and ``edges`` an ``(m, 2)``
    integer array. Arrays are made read-only on construction. Use
    :meth:`from_edges` to canonicalise arbitrary edge input.
    """

    schema: LabelSchema
    labels: np.ndarray
    edges: np.ndarray

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64, copy=True)
        if labels.ndim == 1 and (len(self.schema) == 1 or labels.size == 0):
            labels = labels.reshape(-1, len(self.schema))
        edges = np.array(self.edges, dtype=np.int64, copy=True).reshape(-1, 2)
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "edges", _frozen(edges))

    @classmethod
    def from_edges(cls, schema: LabelSchema, labels, edges) -> "PropertyGraph":
        """Build a graph, canonicalising edges to sorted unique ``(min, max)`` pairs.

        Self loops are dropped.
        """
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        e = np.sort(e, axis=1)
        e = e[e[:, 0] != e[:, 1]]
        if e.size:
            e = np.unique(e, axis=0)
        return cls(schema, labels, e)

    @property
    def vertex_count(self) -> int:
        return int(self.labels.shape[0])

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    def categories(self) -> np.ndarray:
        return encode_labels(self.labels, self.schema)

    def __eq__(self, other):
        if not isinstance(other, PropertyGraph):
            return NotImplemented
        return (
            self.schema == other.schema
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.edges, other.edges)
        )

    __hash__ = None

    def __repr__(self):
        return (f"PropertyGraph(vertices={self.vertex_count}, edges={self.edge_count}, "
                f"labels={list(self.schema.names)})")


def degree_sequence(g: PropertyGraph) -> np.ndarray:
    return np.bincount(g.edges.ravel(), minlength=g.vertex_count).astype(np.int64)


def _out_of_range(e: np.ndarray, n: int) -> bool:
    return bool(e.size) and bool((e < 0).any() or (e >= n).any())


def validate(g: PropertyGraph) -> list[str]:
    """Return every invariant violation found in ``g``; an empty list means valid."""
    problems = []
    n = g.labels.shape[0]
    if g.labels.ndim != 2 or g.labels.shape[1] != len(g.schema):
        problems.append(f"labels shape {g.labels.shape} does not match {len(g.schema)} labels")
    else:
        for k, lab in enumerate(g.schema.labels):
            col = g.labels[:, k]
            bad = np.flatnonzero((col < 0) | (col >= lab.size))
            for i in bad:
                problems.append(
                    f"vertex {i}: label {lab.name!r} value {col[i]} outside [0, {lab.size})"
                )
    e = g.edges
    if e.ndim != 2 or e.shape[1] != 2:
        problems.append(f"edges shape {e.shape} is not (m, 2)")
        return problems
    for i in np.flatnonzero(e[:, 0] == e[:, 1]):
        problems.append(f"edge {i}: self loop on vertex {e[i, 0]}")
    for i in np.flatnonzero((e < 0).any(axis=1) | (e >= n).any(axis=1)):
        problems.append(f"edge {i}: endpoint outside [0, {n})")
    if e.shape[0] > 1 and not _out_of_range(e, n):
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        keys = np.sort(lo * np.int64(max(n, 1)) + hi)
        dup = np.unique(keys[1:][keys[1:] == keys[:-1]])
        for k in dup:
            c = int(np.count_nonzero(keys == k))
            problems.append(f"edge {(int(k // n), int(k % n))} appears {c} times")
    return problems
