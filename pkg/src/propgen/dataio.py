"""Graph bundles on disk, SNAP ego-net ingestion, and synthetic source fixtures.

A bundle is three files sharing a prefix:

``<prefix>.vertices.csv``
    header ``id,<label1>,...,<labelM>``, one row per vertex.
``<prefix>.edges.txt``
    ``u v`` per line, whitespace separated, undirected.
``<prefix>.schema.json``
    label names, domain sizes and optional value names.
"""

from __future__ import annotations

import json
import re
import warnings
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DataFormatError, GraphDataWarning, SchemaError
from .estimation import EdgeCategoryDistribution, Sampler
from .generation import (
    GenerationConfig,
    build_category_pools,
    collect_unique_keys,
    sample_edges,
)
from .graph_model import Label, LabelSchema, PropertyGraph, decode_categories, validate

VERTEX_SUFFIX = ".vertices.csv"
EDGE_SUFFIX = ".edges.txt"
SCHEMA_SUFFIX = ".schema.json"


def bundle_paths(prefix) -> tuple[str, str, str]:
    prefix = str(prefix)
    return prefix + VERTEX_SUFFIX, prefix + EDGE_SUFFIX, prefix + SCHEMA_SUFFIX


def _default_schema_path(vertex_path) -> str:
    s = str(vertex_path)
    if s.endswith(VERTEX_SUFFIX):
        return s[: -len(VERTEX_SUFFIX)] + SCHEMA_SUFFIX
    return s + SCHEMA_SUFFIX


def save_property_graph(g: PropertyGraph, vertex_path, edge_path, schema_path=None) -> None:
    """Write ``g`` in canonical order: vertices ascending, edges as sorted ``(min, max)`` rows."""
    problems = validate(g)
    if problems:
        raise SchemaError(f"refusing to save an invalid graph: {problems[0]}")
    schema_path = schema_path or _default_schema_path(vertex_path)
    with open(schema_path, "w") as fh:
        json.dump(g.schema.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")

    ids = np.arange(g.vertex_count, dtype=np.int64)[:, None]
    table = np.hstack([ids, g.labels])
    with open(vertex_path, "w", newline="") as fh:
        fh.write(",".join(("id",) + g.schema.names) + "\n")
        _write_int_rows(fh, table, ",")

    e = np.sort(g.edges, axis=1)
    order = np.lexsort((e[:, 1], e[:, 0]))
    with open(edge_path, "w") as fh:
        _write_int_rows(fh, e[order], " ")


def _write_int_rows(fh, table: np.ndarray, sep: str, chunk: int = 1 << 18) -> None:
    cols = table.shape[1]
    fmt = sep.join(["%d"] * cols) + "\n"
    for lo in range(0, table.shape[0], chunk):
        block = table[lo:lo + chunk]
        fh.write((fmt * block.shape[0]) % tuple(block.ravel().tolist()))


def load_schema(path) -> LabelSchema:
    try:
        with open(path) as fh:
            return LabelSchema.from_dict(json.load(fh))
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"invalid schema JSON: {exc.msg}", path=path, line=exc.lineno) from None


def _parse_int_table(path, expected_cols: Optional[int], sep: Optional[str], skip_header: bool):
    """Parse integer rows; raise with the offending line number on the first bad row."""
    with open(path) as fh:
        text = fh.read()
    lines = text.splitlines()
    start = 1 if skip_header else 0
    rows = []
    for lineno in range(start, len(lines)):
        raw = lines[lineno].strip()
        if not raw or raw.startswith("#"):
            continue
        parts = raw.split(sep) if sep else raw.split()
        if expected_cols is not None and len(parts) != expected_cols:
            raise DataFormatError(
                f"expected {expected_cols} fields, found {len(parts)}", path=path, line=lineno + 1
            )
        try:
            rows.append([int(p) for p in parts])
        except ValueError:
            raise DataFormatError(f"non-integer field in {raw!r}", path=path, line=lineno + 1) from None
    if not rows:
        return np.empty((0, expected_cols or 0), dtype=np.int64)
    return np.asarray(rows, dtype=np.int64)


def _edge_line_numbers(path) -> list[int]:
    out = []
    with open(path) as fh:
        for i, line in enumerate(fh, 1):
            s = line.strip()
            if s and not s.startswith("#"):
                out.append(i)
    return out


def load_property_graph(vertex_path, edge_path, schema_path=None) -> PropertyGraph:
    """Load a bundle written by :func:`save_property_graph` (or hand-made in the same format).

    Vertex ids in the table may be any distinct integers; they are mapped to
    ``0..n-1`` in ascending id order. Self loops and duplicate edges are
    dropped, each kind reported by one :class:`GraphDataWarning`.
    """
    schema_path = schema_path or _default_schema_path(vertex_path)
    schema = load_schema(schema_path)
    with open(vertex_path) as fh:
        header = fh.readline().strip().split(",")
    if header[:1] != ["id"] or tuple(header[1:]) != schema.names:
        raise DataFormatError(
            f"vertex header {header} does not match schema labels {list(schema.names)}",
            path=vertex_path, line=1,
        )
    table = _parse_int_table(vertex_path, len(schema) + 1, ",", skip_header=True)
    ids = table[:, 0]
    labels = table[:, 1:]
    order = np.argsort(ids, kind="stable")
    sorted_ids = ids[order]
    if sorted_ids.size > 1 and np.any(sorted_ids[1:] == sorted_ids[:-1]):
        dup = sorted_ids[1:][sorted_ids[1:] == sorted_ids[:-1]][0]
        raise DataFormatError(f"vertex id {dup} appears more than once", path=vertex_path)
    labels = labels[order]
    sizes = np.asarray(schema.sizes)
    bad = np.flatnonzero(((labels < 0) | (labels >= sizes)).any(axis=1))
    if bad.size:
        # data rows start on line 2, in file order
        row = order[bad[0]]
        raise SchemaError(f"{vertex_path}:{row + 2}: label value outside its declared domain")

    edges = _parse_int_table(edge_path, 2, None, skip_header=False)
    if edges.shape[0]:
        pos = np.searchsorted(sorted_ids, edges)
        pos_c = np.minimum(pos, max(sorted_ids.size - 1, 0))
        found = (sorted_ids.size > 0) & (sorted_ids[pos_c] == edges) if sorted_ids.size else np.zeros_like(edges, bool)
        missing = np.flatnonzero(~found.all(axis=1))
        if missing.size:
            lineno = _edge_line_numbers(edge_path)[missing[0]]
            r = edges[missing[0]]
            raise DataFormatError(
                f"edge ({r[0]}, {r[1]}) references an unknown vertex", path=edge_path, line=lineno
            )
        edges = pos
    canon = np.sort(edges, axis=1)
    loops = int(np.count_nonzero(canon[:, 0] == canon[:, 1]))
    canon = canon[canon[:, 0] != canon[:, 1]]
    uniq = np.unique(canon, axis=0) if canon.size else canon.reshape(0, 2)
    dups = canon.shape[0] - uniq.shape[0]
    if loops:
        warnings.warn(GraphDataWarning(f"{edge_path}: dropped {loops} self-loop edge(s)", loops), stacklevel=2)
    if dups:
        warnings.warn(GraphDataWarning(f"{edge_path}: dropped {dups} duplicate edge(s)", dups), stacklevel=2)
    return PropertyGraph(schema, labels, uniq)


def save_bundle(g: PropertyGraph, prefix) -> tuple[str, str, str]:
    paths = bundle_paths(prefix)
    Path(paths[0]).parent.mkdir(parents=True, exist_ok=True)
    save_property_graph(g, *paths)
    return paths


def load_bundle(prefix) -> PropertyGraph:
    return load_property_graph(*bundle_paths(prefix))


# --------------------------------------------------------------------------
# SNAP ego-nets
# --------------------------------------------------------------------------

def _ego_ids(directory: Path) -> list[str]:
    egos = sorted(p.name[: -len(".featnames")] for p in directory.glob("*.featnames"))
    return sorted(egos, key=lambda s: (len(s), s))


def _read_featnames(path: Path) -> dict[str, int]:
    names = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            idx, _, name = line.partition(" ")
            try:
                names[name.strip()] = int(idx)
            except ValueError:
                raise DataFormatError("feature index is not an integer", path=path, line=lineno) from None
    return names


def common_feature_names(directory) -> list[str]:
    """Feature names present in every ego-net's ``.featnames`` file."""
    directory = Path(directory)
    sets = [set(_read_featnames(directory / f"{e}.featnames")) for e in _ego_ids(directory)]
    if not sets:
        return []
    return sorted(set.intersection(*sets))


def load_snap_ego_nets(directory, selected_feature_names: Sequence[str]) -> PropertyGraph:
    """Merge SNAP ego-nets into one property graph with the selected binary features as labels.

    The ego vertex is joined to every vertex listed in its ``.feat`` file, as
    in the published layout. Feature values are OR-ed across ego-nets; a
    vertex that never appears in an ego-net carrying a selected feature gets
    0 and is counted in a :class:`GraphDataWarning`.
    """
    names = list(selected_feature_names)
    if not names:
        raise SchemaError("select at least one feature")
    directory = Path(directory)
    egos = _ego_ids(directory)
    if not egos:
        raise DataFormatError(f"no *.featnames files found in {directory}")

    values: dict[int, np.ndarray] = {}
    known = {}  # vertex -> bool mask of features observed
    edge_chunks = []
    any_feature = np.zeros(len(names), dtype=bool)

    def observe(vertex: int, row: np.ndarray, have: np.ndarray):
        if vertex not in values:
            values[vertex] = np.zeros(len(names), dtype=np.int64)
            known[vertex] = np.zeros(len(names), dtype=bool)
        values[vertex] |= row
        known[vertex] |= have

    for ego in egos:
        fmap = _read_featnames(directory / f"{ego}.featnames")
        cols = np.array([fmap.get(nm, -1) for nm in names])
        have = cols >= 0
        any_feature |= have
        ego_id = int(ego)
        feat_path = directory / f"{ego}.feat"
        members = []
        if feat_path.exists():
            with open(feat_path) as fh:
                for lineno, line in enumerate(fh, 1):
                    parts = line.split()
                    if not parts:
                        continue
                    try:
                        row = [int(x) for x in parts]
                    except ValueError:
                        raise DataFormatError("non-integer feature row", path=feat_path, line=lineno) from None
                    if len(row) - 1 != len(fmap):
                        raise DataFormatError(
                            f"expected {len(fmap)} features, found {len(row) - 1}",
                            path=feat_path, line=lineno,
                        )
                    feats = np.asarray(row[1:], dtype=np.int64)
                    vals = np.where(have, feats[np.maximum(cols, 0)], 0)
                    observe(row[0], vals, have)
                    members.append(row[0])
        egofeat = directory / f"{ego}.egofeat"
        if egofeat.exists():
            with open(egofeat) as fh:
                parts = fh.read().split()
            try:
                feats = np.asarray([int(x) for x in parts], dtype=np.int64)
            except ValueError:
                raise DataFormatError("non-integer ego feature row", path=egofeat, line=1) from None
            if feats.shape[0] != len(fmap):
                raise DataFormatError(
                    f"expected {len(fmap)} features, found {feats.shape[0]}", path=egofeat, line=1
                )
            observe(ego_id, np.where(have, feats[np.maximum(cols, 0)], 0), have)
        else:
            observe(ego_id, np.zeros(len(names), np.int64), np.zeros(len(names), bool))
        if members:
            edge_chunks.append(np.column_stack([np.full(len(members), ego_id), members]))
        edge_path = directory / f"{ego}.edges"
        if edge_path.exists():
            e = _parse_int_table(edge_path, 2, None, skip_header=False)
            if e.size:
                edge_chunks.append(e)
                for v in np.unique(e):
                    v = int(v)
                    if v not in values:
                        observe(v, np.zeros(len(names), np.int64), np.zeros(len(names), bool))

    missing_names = [nm for nm, ok in zip(names, any_feature) if not ok]
    if len(missing_names) == len(names):
        raise SchemaError(f"none of the selected features {names} occur in {directory}")
    if missing_names:
        warnings.warn(GraphDataWarning(f"features never observed: {missing_names}", len(missing_names)),
                      stacklevel=2)

    ids = np.array(sorted(values), dtype=np.int64)
    labels = np.stack([values[v] for v in ids]) if ids.size else np.empty((0, len(names)), np.int64)
    seen = np.stack([known[v] for v in ids]) if ids.size else np.empty((0, len(names)), bool)
    n_missing = int(np.count_nonzero(~seen.all(axis=1)))
    if n_missing:
        warnings.warn(
            GraphDataWarning(f"{n_missing} vertices lack at least one selected feature; defaulted to 0",
                             n_missing),
            stacklevel=2,
        )
    if np.any((labels < 0) | (labels > 1)):
        raise DataFormatError("selected features must be binary")
    edges = np.concatenate(edge_chunks) if edge_chunks else np.empty((0, 2), np.int64)
    edges = np.searchsorted(ids, edges)
    schema = LabelSchema(tuple(Label(_label_name(nm), 2) for nm in names))
    return PropertyGraph.from_edges(schema, labels, edges)


def _label_name(feature_name: str) -> str:
    return re.sub(r"[^0-9A-Za-z_]+", "_", feature_name).strip("_") or "feature"


# --------------------------------------------------------------------------
# Synthetic fixtures
# --------------------------------------------------------------------------

def role_schema() -> LabelSchema:
    return LabelSchema((
        Label("role", 2, ("SERVER", "CLIENT")),
        Label("zone", 2, ("INTERNAL", "EXTERNAL")),
    ))


def default_role_affinity(schema: Optional[LabelSchema] = None) -> EdgeCategoryDistribution:
    """Server-client pairs dominate; same-role pairs are rare.

    Category id is ``2 * role + zone`` (role 0 = SERVER).
    """
    schema = schema or role_schema()
    weights = {
        (0, 2): 30, (1, 3): 30,           # server-client, same zone
        (0, 3): 15, (1, 2): 15,           # server-client, across zones
        (0, 0): 2, (1, 1): 2, (0, 1): 2,  # server-server
        (2, 2): 1, (3, 3): 1, (2, 3): 2,  # client-client
    }
    return EdgeCategoryDistribution.from_mapping(schema, weights)


def generate_role_based(n: int = 2000, m: int = 90000, schema: Optional[LabelSchema] = None,
                        affinity: Optional[EdgeCategoryDistribution] = None, seed=0) -> PropertyGraph:
    """Role-based source graph whose structure is fully explained by its labels.

    Vertices are spread uniformly over label categories; edges come from the
    same candidate machinery the generator uses, with ``affinity`` as the
    edge-category distribution.
    """
    schema = schema or role_schema()
    affinity = affinity or default_role_affinity(schema)
    if affinity.schema != schema:
        raise SchemaError("affinity distribution uses a different schema")
    label_ss, edge_ss = np.random.SeedSequence(seed).spawn(2)
    cats = np.random.default_rng(label_ss).integers(0, schema.n_categories, size=n)
    cfg = GenerationConfig(n, m, 0)
    pools = build_category_pools(cats, schema)
    edges, _ = sample_edges(affinity, pools, cfg, seed=edge_ss)
    return PropertyGraph(schema, decode_categories(cats, schema), edges)


def generate_heavy_tailed(n: int = 4000, m: int = 88000, n_labels: int = 4, exponent: float = 2.3,
                          max_degree: Optional[int] = None, label_p: Optional[Sequence[float]] = None,
                          seed=0) -> PropertyGraph:
    """Chung-Lu graph with power-law expected degrees and structure-blind binary labels.

    Expected degrees follow ``w_i ~ (i + 1) ** (-1 / (exponent - 1))``, scaled
    to mean ``2m / n`` and capped at ``max_degree`` (default ``n // 4``).
    Labels are independent Bernoulli draws, so they carry no information
    about the topology.
    """
    label_ss, edge_ss = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(label_ss)
    if label_p is None:
        label_p = [0.5, 0.35, 0.6, 0.25, 0.45, 0.55][:n_labels] + [0.5] * max(0, n_labels - 6)
    labels = (rng.random((n, n_labels)) < np.asarray(label_p)).astype(np.int64)

    max_degree = max_degree or max(2, n // 4)
    w = (np.arange(n) + 1.0) ** (-1.0 / (exponent - 1.0))
    for _ in range(50):
        w *= (2.0 * m / n) / w.mean()
        w = np.minimum(w, max_degree)
    w = np.maximum(w, 1.0)
    w = w[rng.permutation(n)]

    cfg = GenerationConfig(n, m, 0)
    sampler = Sampler(w)
    erng = np.random.default_rng(edge_ss)

    def draw(_round, size):
        u = sampler.values[sampler.draw_indices(size, erng)]
        v = sampler.values[sampler.draw_indices(size, erng)]
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        return np.where(lo == hi, -1, lo * np.int64(n) + hi)

    keys, _ = collect_unique_keys(draw, m, cfg.max_attempt_factor * m)
    edges = np.stack([keys // n, keys % n], axis=1)
    schema = LabelSchema.from_sizes([2] * n_labels, [f"attr{k + 1}" for k in range(n_labels)])
    return PropertyGraph(schema, labels, edges)


def load_affinity(path, schema: LabelSchema) -> EdgeCategoryDistribution:
    """Affinity JSON: ``{"pairs": [[j, j2, weight], ...]}`` over category ids of ``schema``."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"invalid affinity JSON: {exc.msg}", path=path, line=exc.lineno) from None
    try:
        rows = doc["pairs"]
        mapping = {}
        for a, b, wgt in rows:
            key = (min(int(a), int(b)), max(int(a), int(b)))
            mapping[key] = mapping.get(key, 0) + float(wgt)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"malformed affinity document: {exc}", path=path) from None
    return EdgeCategoryDistribution.from_mapping(schema, mapping)
