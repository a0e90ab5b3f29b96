import numpy as np
import pytest

from netextremes.graph import DirectedGraph


def graph_from_edges(n, edges):
    g = DirectedGraph.with_nodes(n)
    for s, d in edges:
        g.add_edge(s, d)
    return g


def chain(n):
    return graph_from_edges(n, [(i, i + 1) for i in range(n - 1)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
