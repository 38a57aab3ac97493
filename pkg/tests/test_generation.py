from collections import Counter

import numpy as np
import pytest

from propgen.errors import SaturationError
from propgen.estimation import (
    CategoricalDistribution,
    EdgeCategoryDistribution,
    estimate_edge_distribution,
    estimate_label_distribution,
    total_variation,
)
from propgen.generation import (
    GenerationConfig,
    build_category_pools,
    expand,
    generate,
    sample_edges,
    sample_vertex_labels,
    sim_attr_graph,
)
from propgen.graph_model import LabelSchema, PropertyGraph, validate
from propgen.metrics import degree_jsd, normalized_degree_jsd


def test_sample_vertex_labels_point_mass():
    s = LabelSchema.from_sizes([2, 3])
    d = CategoricalDistribution(s, np.array([0, 0, 0, 0, 1, 0]))
    labels = sample_vertex_labels(d, 5, seed=1)
    assert labels.tolist() == [[1, 1]] * 5


def test_sample_vertex_labels_uniform_concentration():
    s = LabelSchema.from_sizes([2, 2])
    d = CategoricalDistribution(s, np.ones(4, dtype=np.int64))
    labels = sample_vertex_labels(d, 10**6, seed=12)
    freq = np.bincount(labels @ np.array([2, 1]), minlength=4) / 10**6
    assert np.all((freq >= 0.2485) & (freq <= 0.2515))


def test_sample_vertex_labels_deterministic():
    s = LabelSchema.from_sizes([3])
    d = CategoricalDistribution(s, np.array([1, 2, 3]))
    assert np.array_equal(sample_vertex_labels(d, 100, 4), sample_vertex_labels(d, 100, 4))


def test_build_category_pools():
    s = LabelSchema.from_sizes([2])
    pools = build_category_pools(np.array([[0], [1], [0]]), s)
    assert pools.as_dict() == {0: [0, 2], 1: [1]}
    same = build_category_pools(np.zeros((7, 1), dtype=np.int64), s)
    assert same.as_dict() == {0: list(range(7))}
    assert same.sizes().sum() == 7


def _pc(sizes, mapping):
    s = LabelSchema.from_sizes(sizes)
    return s, EdgeCategoryDistribution.from_mapping(s, mapping)


def test_sample_edges_forced():
    s, pc = _pc([2], {(0, 1): 1.0})
    pools = build_category_pools(np.array([0, 1]), s)
    edges, stats = sample_edges(pc, pools, GenerationConfig(2, 1, seed=0))
    assert edges.tolist() == [[0, 1]]
    assert stats["attempts"] == 1


def test_sample_edges_saturates_on_singleton_diagonal():
    s, pc = _pc([2], {(0, 0): 1.0})
    pools = build_category_pools(np.array([0, 1]), s)
    with pytest.raises(SaturationError) as info:
        sample_edges(pc, pools, GenerationConfig(2, 1, seed=0))
    assert info.value.rejected_self == 100
    assert info.value.accepted == 0


def test_sample_edges_triangle():
    s, pc = _pc([1], {(0, 0): 1.0})
    pools = build_category_pools(np.zeros(3, dtype=np.int64), s)
    for seed in range(20):
        edges, stats = sample_edges(pc, pools, GenerationConfig(3, 3, seed=seed))
        assert edges.tolist() == [[0, 1], [0, 2], [1, 2]]
        assert stats["attempts"] == 3 + stats["rejected_duplicate"]


def test_empty_pool_rejections_counted():
    s, pc = _pc([3], {(0, 1): 1, (0, 2): 1})
    pools = build_category_pools(np.array([0, 0, 1, 1, 0, 1]), s)
    edges, stats = sample_edges(pc, pools, GenerationConfig(6, 5, seed=3))
    assert edges.shape == (5, 2)
    assert stats["rejected_empty_pool"] > 0


def test_single_edge_source_regenerates_isomorphically():
    s = LabelSchema.from_sizes([2])
    src = PropertyGraph(s, [[0], [1]], [[0, 1]])
    # labels are drawn i.i.d., so both vertices land in one category half the time
    ok = 0
    for seed in range(20):
        try:
            out = sim_attr_graph(src, GenerationConfig(2, 1, seed)).graph
        except SaturationError as exc:
            assert exc.rejected_empty_pool == exc.attempts
            continue
        ok += 1
        assert out.edges.tolist() == [[0, 1]]
        assert sorted(out.labels[:, 0].tolist()) == [0, 1]
    assert ok > 0


def test_output_valid_and_exact_size(role_fixture):
    r = sim_attr_graph(role_fixture, GenerationConfig(1500, 40000, 2))
    assert validate(r.graph) == []
    assert r.graph.vertex_count == 1500 and r.graph.edge_count == 40000
    assert r.attempts == 40000 + r.rejected_duplicate + r.rejected_self + r.rejected_empty_pool


def test_end_to_end_determinism(role_fixture):
    a = sim_attr_graph(role_fixture, GenerationConfig(2000, 90000, 5)).graph
    b = sim_attr_graph(role_fixture, GenerationConfig(2000, 90000, 5)).graph
    c = sim_attr_graph(role_fixture, GenerationConfig(2000, 90000, 6)).graph
    assert a == b
    assert a != c


def test_threaded_determinism_per_worker_count(role_fixture):
    cfg3 = GenerationConfig(2000, 90000, 5, threads=3)
    a = sim_attr_graph(role_fixture, cfg3).graph
    b = sim_attr_graph(role_fixture, cfg3).graph
    assert a == b
    assert validate(a) == [] and a.edge_count == 90000
    single = sim_attr_graph(role_fixture, GenerationConfig(2000, 90000, 5)).graph
    assert np.array_equal(a.labels, single.labels)


def test_regeneration_preserves_label_distribution(role_fixture):
    src = role_fixture
    pl = estimate_label_distribution(src)
    out = sim_attr_graph(src, GenerationConfig(10**4, 90000, 8)).graph
    assert total_variation(pl, estimate_label_distribution(out)) <= 0.02


def test_edge_categories_follow_pc_when_pools_abundant():
    s = LabelSchema.from_sizes([2, 2])
    weights = {(0, 0): 1, (0, 1): 3, (1, 3): 2, (2, 3): 4, (3, 3): 1, (0, 2): 2}
    pc = EdgeCategoryDistribution.from_mapping(s, weights)
    pl = CategoricalDistribution(s, np.ones(4, dtype=np.int64))
    out = generate(pl, pc, GenerationConfig(20000, 10**5, 9)).graph
    assert total_variation(estimate_edge_distribution(out), pc) <= 0.02


def test_role_regeneration_jsd(role_fixture):
    out = sim_attr_graph(role_fixture, GenerationConfig(2000, 90000, 1)).graph
    assert degree_jsd(role_fixture, out) <= 0.08


def test_expand_sizes_and_shape(role_fixture):
    r = expand(role_fixture, 10, 12.5, seed=0)
    assert (r.graph.vertex_count, r.graph.edge_count) == (20000, 1125000)
    assert normalized_degree_jsd(role_fixture, r.graph) <= 0.1
    same = expand(role_fixture, 1, 1, seed=4).graph
    assert same == sim_attr_graph(role_fixture, GenerationConfig(2000, 90000, 4)).graph
    with pytest.raises(ValueError):
        expand(role_fixture, 0.5, 1)


def test_config_validation():
    with pytest.raises(ValueError):
        GenerationConfig(1, 1)
    with pytest.raises(ValueError):
        GenerationConfig(3, 4)
    with pytest.raises(ValueError):
        GenerationConfig(3, 0)
