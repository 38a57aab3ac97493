import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from propgen.errors import SchemaError
from propgen.graph_model import (
    Label,
    LabelSchema,
    PropertyGraph,
    decode_categories,
    decode_category,
    degree_sequence,
    encode_label_vector,
    encode_labels,
    validate,
)

from conftest import random_graph


def test_encode_examples(schema23):
    assert encode_label_vector((0, 0), schema23) == 0
    assert encode_label_vector((1, 2), schema23) == 5


def test_decode_examples(schema23):
    assert decode_category(5, schema23) == (1, 2)
    assert decode_category(0, schema23) == (0, 0)
    income_education = LabelSchema.from_sizes([6, 4], ["income_range", "education_level"])
    assert income_education.n_categories == 24
    assert decode_category(23, income_education) == (5, 3)


def test_encode_out_of_domain(schema23):
    with pytest.raises(SchemaError):
        encode_label_vector((2, 0), schema23)
    with pytest.raises(SchemaError):
        encode_label_vector((0,), schema23)


def test_decode_out_of_range(schema23):
    with pytest.raises(IndexError):
        decode_category(6, schema23)
    with pytest.raises(IndexError):
        decode_category(-1, schema23)


def test_schema_rejects_bad_input():
    with pytest.raises(SchemaError):
        LabelSchema(())
    with pytest.raises(SchemaError):
        Label("x", 0)
    with pytest.raises(SchemaError):
        LabelSchema.from_sizes([2, 2], ["a", "a"])
    with pytest.raises(SchemaError):
        LabelSchema.from_sizes([2**16, 2**16, 2])
    assert LabelSchema.from_sizes([2**16, 2**16]).n_categories == 2**32


def test_schema_dict_round_trip():
    s = LabelSchema((Label("role", 2, ("SERVER", "CLIENT")), Label("zone", 3)))
    assert LabelSchema.from_dict(s.to_dict()) == s


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=1, max_size=4))
def test_encode_decode_bijection(sizes):
    s = LabelSchema.from_sizes(sizes)
    ids = np.arange(s.n_categories)
    vecs = decode_categories(ids, s)
    assert np.array_equal(encode_labels(vecs, s), ids)
    for cid in range(s.n_categories):
        assert encode_label_vector(decode_category(cid, s), s) == cid
        assert tuple(vecs[cid]) == decode_category(cid, s)


def test_degree_sequence_examples(triangle, path3):
    empty = PropertyGraph(LabelSchema.from_sizes([1]), [[0]] * 3, np.empty((0, 2)))
    assert degree_sequence(empty).tolist() == [0, 0, 0]
    assert degree_sequence(triangle).tolist() == [2, 2, 2]
    assert degree_sequence(path3).tolist() == [1, 2, 1]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_degree_sum_is_twice_edges(seed):
    g = random_graph(np.random.default_rng(seed))
    assert degree_sequence(g).sum() == 2 * g.edge_count
    assert validate(g) == []


def test_validate_examples(triangle):
    assert validate(triangle) == []
    s = triangle.schema
    loop = PropertyGraph(s, [[0], [0]], [[0, 0], [0, 1]])
    assert any("self loop" in p for p in validate(loop))
    bad_label = PropertyGraph(s, [[0], [2]], [[0, 1]])
    assert any("outside" in p for p in validate(bad_label))
    dup = PropertyGraph(s, [[0], [1]], [[0, 1], [1, 0]])
    assert any("appears 2 times" in p for p in validate(dup))
    dangling = PropertyGraph(s, [[0], [1]], [[0, 5]])
    assert any("endpoint" in p for p in validate(dangling))


def test_from_edges_canonicalises():
    s = LabelSchema.from_sizes([1])
    g = PropertyGraph.from_edges(s, [[0]] * 3, [[2, 1], [1, 2], [0, 0], [0, 1]])
    assert g.edges.tolist() == [[0, 1], [1, 2]]


def test_graph_is_read_only(triangle):
    with pytest.raises(ValueError):
        triangle.edges[0, 0] = 2
