"""Degree distributions, CCDFs and the Jensen-Shannon divergence (base 2)."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import EstimationError
from .graph_model import PropertyGraph, degree_sequence


@dataclass(frozen=True, eq=False)
class DegreePmf:
    """``probs[d]`` is the fraction of vertices with degree ``d``."""

    probs: np.ndarray

    @property
    def max_degree(self) -> int:
        return self.probs.shape[0] - 1

    def padded(self, length: int) -> np.ndarray:
        out = np.zeros(max(length, self.probs.shape[0]))
        out[: self.probs.shape[0]] = self.probs
        return out


def pmf_from_degrees(degrees) -> DegreePmf:
    degrees = np.asarray(degrees, dtype=np.int64)
    if degrees.size == 0:
        raise EstimationError("degree pmf of an empty vertex set is undefined")
    counts = np.bincount(degrees)
    return DegreePmf(counts / degrees.size)


def degree_pmf(g: PropertyGraph) -> DegreePmf:
    if g.vertex_count < 1:
        raise EstimationError("degree pmf of a graph with no vertices is undefined")
    return pmf_from_degrees(degree_sequence(g))


def scaled_degree_pmf(g: PropertyGraph, factor: float) -> DegreePmf:
    """Degree pmf after multiplying every degree by ``factor`` and rounding.

    Used to compare distribution *shapes* between graphs of different
    mean degree, e.g. a source and its expansion.
    """
    d = degree_sequence(g)
    return pmf_from_degrees(np.rint(d * factor).astype(np.int64))


def ccdf(p: DegreePmf) -> np.ndarray:
    """``out[d] = P(degree >= d)`` for ``d = 0..max_degree``."""
    tail = np.cumsum(p.probs[::-1])[::-1]
    tail = np.minimum(tail, 1.0)
    tail[0] = 1.0
    return tail


def _entropy_bits(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def jsd(p, q) -> float:
    """Jensen-Shannon divergence in bits between two pmfs, zero-padding to a common support."""
    pa = p.probs if isinstance(p, DegreePmf) else np.asarray(p, dtype=np.float64)
    qa = q.probs if isinstance(q, DegreePmf) else np.asarray(q, dtype=np.float64)
    n = max(pa.shape[0], qa.shape[0])
    pp = np.zeros(n)
    qq = np.zeros(n)
    pp[: pa.shape[0]] = pa
    qq[: qa.shape[0]] = qa
    m = 0.5 * (pp + qq)
    val = _entropy_bits(m) - 0.5 * (_entropy_bits(pp) + _entropy_bits(qq))
    return float(min(max(val, 0.0), 1.0))


def degree_jsd(source: PropertyGraph, target: PropertyGraph) -> float:
    return jsd(degree_pmf(source), degree_pmf(target))


def mean_degree(g: PropertyGraph) -> float:
    return 2.0 * g.edge_count / g.vertex_count


def normalized_degree_jsd(source: PropertyGraph, target: PropertyGraph) -> float:
    """JSD after rescaling the target's degrees to the source's mean degree."""
    md = mean_degree(target)
    factor = mean_degree(source) / md if md > 0 else 1.0
    return jsd(degree_pmf(source), scaled_degree_pmf(target, factor))


def write_ccdf_csv(p: DegreePmf, path) -> None:
    values = ccdf(p)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["degree", "ccdf"])
        for d, v in enumerate(values):
            w.writerow([d, repr(float(v))])
