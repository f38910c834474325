"""Tests for series/parallel replacements and exact enumeration on small graphs."""

import math

import numpy as np
import pytest

from arbor_rcm.errors import GuardExceededError, InvalidInputError
from arbor_rcm.services.reduction import (
    WeightedGraph,
    check_guard,
    cluster_counts,
    connection_probability,
    effective_edge,
    marginals,
    parallel_reduce,
    rc_distribution,
    reduce_graph,
    series_reduce,
)


def path(probs: list[float]) -> WeightedGraph:
    return WeightedGraph(
        vertices=len(probs) + 1, edges=tuple((i, i + 1) for i in range(len(probs))), probs=tuple(probs)
    )


def star(probs: list[float]) -> WeightedGraph:
    return WeightedGraph(
        vertices=len(probs) + 1, edges=tuple((0, i + 1) for i in range(len(probs))), probs=tuple(probs)
    )


def bundle(probs: list[float]) -> WeightedGraph:
    return WeightedGraph(vertices=2, edges=((0, 1),) * len(probs), probs=tuple(probs))


def two_point(graph: WeightedGraph, q: float, u: int, v: int) -> float:
    """Effective parameter of the u-v connection, from full enumeration."""
    return effective_edge(q, connection_probability(graph, q, u, v))


class TestLaws:
    """Tests for the closed-form replacements."""

    def test_series_equal_halves(self):
        """Two halves in series at q = 2 act as one edge of 0.2."""
        assert series_reduce(0.5, 0.5, 2.0) == pytest.approx(0.2, abs=1e-15)

    @pytest.mark.parametrize("p1,p2", [(0.3, 0.8), (0.5, 0.5), (1.0, 0.4)])
    def test_series_percolation(self, p1: float, p2: float):
        """At q = 1 series edges multiply."""
        assert series_reduce(p1, p2, 1.0) == pytest.approx(p1 * p2, abs=1e-15)

    def test_parallel(self):
        """Parallel edges: 1 - (1 - p1)(1 - p2)."""
        assert parallel_reduce(0.3, 0.5) == pytest.approx(0.65, abs=1e-15)

    def test_series_with_closed_edge(self):
        """A closed edge blocks the series."""
        assert series_reduce(0.0, 0.7, 3.0) == 0.0

    def test_rejects_bad_parameters(self):
        with pytest.raises(InvalidInputError):
            series_reduce(1.2, 0.5, 2.0)
        with pytest.raises(InvalidInputError):
            series_reduce(0.2, 0.5, 0.0)
        with pytest.raises(InvalidInputError):
            parallel_reduce(-0.1, 0.5)


class TestAgainstEnumeration:
    """Replacements reproduce brute-force two-point laws."""

    @pytest.mark.parametrize("q", [0.5, 1.0, 2.0, 4.0])
    @pytest.mark.parametrize("size", [2, 3, 4, 5])
    def test_path(self, q: float, size: int):
        """Repeated series replacement on a path."""
        probs = [0.3, 0.55, 0.8, 0.45, 0.65][:size]
        expected = probs[0]
        for p in probs[1:]:
            expected = series_reduce(expected, p, q)
        assert two_point(path(probs), q, 0, size) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("q", [0.5, 2.0, 4.0])
    @pytest.mark.parametrize("size", [2, 3, 4, 5])
    def test_star(self, q: float, size: int):
        """Two edges through a centre of degree 2."""
        probs = [0.3, 0.55, 0.8, 0.45, 0.65][:size]
        expected = series_reduce(probs[0], probs[1], q)
        assert two_point(star(probs), q, 1, 2) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("q", [0.5, 2.0, 4.0])
    @pytest.mark.parametrize("size", [2, 3, 5])
    def test_bundle(self, q: float, size: int):
        """Repeated parallel replacement on a bundle."""
        probs = [0.3, 0.55, 0.8, 0.45, 0.65][:size]
        expected = probs[0]
        for p in probs[1:]:
            expected = parallel_reduce(expected, p)
        assert two_point(bundle(probs), q, 0, 1) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("q", [1.0, 2.0, 3.5])
    def test_reduce_graph_on_triangle_with_tail(self, q: float):
        """The reduced graph keeps the connection law of the terminals."""
        graph = WeightedGraph(
            vertices=4,
            edges=((0, 1), (1, 2), (0, 2), (2, 3)),
            probs=(0.4, 0.7, 0.5, 0.9),
        )
        reduced = reduce_graph(graph, q, terminals=[0, 1])
        assert reduced.vertices == 2
        assert reduced.size == 1
        assert reduced.labels == (0, 1)
        assert reduced.probs[0] == pytest.approx(two_point(graph, q, 0, 1), abs=1e-12)

    def test_reduce_graph_keeps_terminals(self):
        """Terminals survive the reduction in order."""
        reduced = reduce_graph(path([0.5, 0.5, 0.5]), 2.0, terminals=[0, 2, 3])
        assert reduced.labels == (0, 2, 3)
        assert reduced.size == 2


class TestEnumeration:
    """Tests for cluster counts and the exact law."""

    def test_cluster_counts_path(self):
        """Component counts of every configuration of a path."""
        counts = cluster_counts(3, [(0, 1), (1, 2)])
        assert counts.tolist() == [3, 2, 2, 1]

    def test_links_merge_before_counting(self):
        """Linked vertices start in one component."""
        counts = cluster_counts(3, [(0, 1)], links=[(1, 2)])
        assert counts.tolist() == [2, 1]

    def test_chunks_in_workers_match(self):
        """Pooled chunks reproduce the inline counts."""
        edges = [(i, i + 1) for i in range(17)]
        inline = cluster_counts(18, edges)
        pooled = cluster_counts(18, edges, workers=2)
        assert np.array_equal(inline, pooled)

    def test_distribution_normalized(self):
        probs, log_z = rc_distribution(star([0.3, 0.6, 0.9]), 2.5)
        assert math.fsum(probs) == pytest.approx(1.0, abs=1e-12)
        assert (probs > 0).all()
        assert math.isfinite(log_z)

    def test_product_measure_at_q_one(self):
        """q = 1 gives independent edges."""
        probs, log_z = rc_distribution(path([0.3, 0.6]), 1.0)
        assert log_z == pytest.approx(0.0, abs=1e-12)
        assert marginals(probs, 2) == pytest.approx([0.3, 0.6], abs=1e-12)

    def test_tree_marginals_are_pi(self):
        """Without cycles every edge has density pi."""
        probs, _ = rc_distribution(star([0.5, 0.5, 0.5]), 2.0)
        assert marginals(probs, 3) == pytest.approx([1.0 / 3.0] * 3, abs=1e-12)

    def test_closed_edge_never_opens(self):
        probs, _ = rc_distribution(path([0.0, 0.5]), 2.0)
        assert marginals(probs, 2)[0] == 0.0

    def test_guard(self):
        """Graphs above the enumeration guard are refused."""
        check_guard(24)
        with pytest.raises(GuardExceededError):
            check_guard(25)
        with pytest.raises(GuardExceededError):
            check_guard(6, guard=5)

    def test_graph_validation(self):
        with pytest.raises(InvalidInputError):
            WeightedGraph(vertices=2, edges=((0, 2),), probs=(0.5,))
        with pytest.raises(InvalidInputError):
            WeightedGraph(vertices=2, edges=((0, 1),), probs=())

    def test_effective_edge_inverts_single_edge(self):
        """effective_edge recovers a single edge from its connection probability."""
        s = 0.37
        q = 3.0
        assert effective_edge(q, s / (s + q * (1 - s))) == pytest.approx(s, abs=1e-15)
