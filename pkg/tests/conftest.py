import numpy as np
import pytest

from propgen.dataio import generate_heavy_tailed, generate_role_based
from propgen.graph_model import LabelSchema, PropertyGraph

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def role_fixture():
    return generate_role_based(2000, 90000, seed=7)


@pytest.fixture(scope="session")
def heavy_fixture():
    return generate_heavy_tailed(4000, 88000, seed=11)


@pytest.fixture
def schema23():
    return LabelSchema.from_sizes([2, 3])


@pytest.fixture
def triangle():
    s = LabelSchema.from_sizes([2])
    return PropertyGraph(s, [[0], [0], [0]], [[0, 1], [0, 2], [1, 2]])


@pytest.fixture
def path3():
    s = LabelSchema.from_sizes([2])
    return PropertyGraph(s, [[0], [1], [0]], [[0, 1], [1, 2]])


@pytest.fixture
def record_criterion():
    def record(name, passed, detail=""):
        ACCEPTANCE_RESULTS.append((name, bool(passed), detail))
        return passed
    return record


def random_graph(rng: np.random.Generator, max_vertices=20, max_labels=3, max_size=3):
    n = int(rng.integers(1, max_vertices + 1))
    sizes = [int(x) for x in rng.integers(1, max_size + 1, size=int(rng.integers(1, max_labels + 1)))]
    schema = LabelSchema.from_sizes(sizes)
    labels = np.column_stack([rng.integers(0, s, size=n) for s in sizes])
    possible = [(u, v) for u in range(n) for v in range(u + 1, n)]
    k = int(rng.integers(0, len(possible) + 1)) if possible else 0
    chosen = rng.choice(len(possible), size=k, replace=False) if k else []
    edges = [possible[i] for i in chosen]
    return PropertyGraph.from_edges(schema, labels, np.array(edges, dtype=np.int64).reshape(-1, 2))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
