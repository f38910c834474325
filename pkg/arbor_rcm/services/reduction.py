"""Series/parallel replacements and exact random-cluster enumeration on small graphs.

Both replacements preserve the random-cluster law of every retained edge:
a bundle of parallel edges acts as one edge open iff any member is, and a
path through a vertex of degree 2 acts as one edge open iff its endpoints
are joined along it.
"""

import logging
import math
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from arbor_rcm.config import get_settings
from arbor_rcm.errors import GuardExceededError, InvalidInputError
from arbor_rcm.services.parallel import ordered_map
from arbor_rcm.services.unionfind import DisjointSet

logger = logging.getLogger(__name__)

# configurations per enumeration task
CHUNK = 1 << 16


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise InvalidInputError(f"{name}={value} is not in [0,1]")


def parallel_reduce(p1: float, p2: float) -> float:
    """Two edges between the same pair of vertices."""
    _check_unit("p1", p1)
    _check_unit("p2", p2)
    return 1.0 - (1.0 - p1) * (1.0 - p2)


def series_reduce(p1: float, p2: float, q: float) -> float:
    """Two edges meeting at a vertex of degree 2.

    The middle vertex contributes an extra factor q exactly when both edges
    are closed, which is where q enters the denominator.
    """
    _check_unit("p1", p1)
    _check_unit("p2", p2)
    if q <= 0:
        raise InvalidInputError(f"q must be positive, got {q}")
    num = p1 * p2
    den = num + p1 * (1 - p2) + (1 - p1) * p2 + q * (1 - p1) * (1 - p2)
    return num / den


@dataclass(frozen=True)
class WeightedGraph:
    """Finite multigraph with a random-cluster parameter on every edge."""

    vertices: int
    edges: tuple[tuple[int, int], ...]
    probs: tuple[float, ...]
    labels: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if len(self.edges) != len(self.probs):
            raise InvalidInputError("every edge needs exactly one parameter")
        for u, v in self.edges:
            if not (0 <= u < self.vertices and 0 <= v < self.vertices):
                raise InvalidInputError(f"edge ({u},{v}) leaves the vertex range")
        for p in self.probs:
            _check_unit("p", p)

    @property
    def size(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return sum((a == v) + (b == v) for a, b in self.edges)


def _cluster_counts(
    vertices: int,
    edges: Sequence[tuple[int, int]],
    links: Sequence[tuple[int, int]],
    start: int,
    stop: int,
) -> np.ndarray:
    """Component counts for configurations start..stop-1 (bit i = edge i open)."""
    base = DisjointSet(vertices)
    for a, b in links:
        base.union(a, b)

    counts = np.empty(stop - start, dtype=np.int64)
    for offset, omega in enumerate(range(start, stop)):
        ds = base.copy()
        bits = omega
        i = 0
        while bits:
            if bits & 1:
                ds.union(*edges[i])
            bits >>= 1
            i += 1
        counts[offset] = ds.components
    return counts


def cluster_counts(
    vertices: int,
    edges: Sequence[tuple[int, int]],
    links: Sequence[tuple[int, int]] = (),
    workers: int = 1,
) -> np.ndarray:
    """Component count of every configuration of ``edges``, index = bitmask.

    ``links`` are pairs of vertices identified before any edge is opened.
    """
    total = 1 << len(edges)
    tasks = [
        (vertices, tuple(edges), tuple(links), start, min(start + CHUNK, total))
        for start in range(0, total, CHUNK)
    ]
    parts = ordered_map(_cluster_counts, tasks, workers=workers)
    return np.concatenate(parts)


def edge_open(size: int, edge: int) -> np.ndarray:
    """Mask over all 2^size bitmasks: is ``edge`` open?"""
    omegas = np.arange(1 << size, dtype=np.int64)
    return ((omegas >> edge) & 1).astype(bool)


def log_weights(probs: Sequence[float], q: float, counts: np.ndarray) -> np.ndarray:
    """log of prod p_e^w (1-p_e)^(1-w) q^k for every configuration."""
    logw = counts * math.log(q)
    for e, p in enumerate(probs):
        log_open = math.log(p) if p > 0.0 else -np.inf
        log_closed = math.log1p(-p) if p < 1.0 else -np.inf
        # select rather than multiply: 0 * -inf is nan
        logw = logw + np.where(edge_open(len(probs), e), log_open, log_closed)
    return logw


def check_guard(size: int, guard: int | None = None) -> None:
    guard = get_settings().enumeration_guard if guard is None else guard
    if size > guard:
        raise GuardExceededError(f"{size} edges exceed the enumeration guard of {guard} (2^{size} configurations)")


def rc_distribution(
    graph: WeightedGraph,
    q: float,
    links: Iterable[tuple[int, int]] = (),
    workers: int = 1,
) -> tuple[np.ndarray, float]:
    """Exact random-cluster law of ``graph``: (probability per bitmask, log Z)."""
    if q <= 0:
        raise InvalidInputError(f"q must be positive, got {q}")
    check_guard(graph.size)
    counts = cluster_counts(graph.vertices, graph.edges, tuple(links), workers=workers)
    logw = log_weights(graph.probs, q, counts)
    log_z = float(logsumexp(logw))
    probs = np.exp(logw - log_z)
    logger.debug(f"Enumerated {len(probs)} configurations, log Z = {log_z:.6f}")
    return probs, log_z


def marginals(probs: np.ndarray, size: int) -> np.ndarray:
    """Open probability of each edge under a table over bitmasks."""
    return np.array([math.fsum(probs[edge_open(size, e)]) for e in range(size)])


def connection_probability(
    graph: WeightedGraph,
    q: float,
    u: int,
    v: int,
    links: Iterable[tuple[int, int]] = (),
) -> float:
    """P(u <-> v) under the random-cluster law of ``graph``."""
    links = tuple(links)
    probs, _ = rc_distribution(graph, q, links)
    total = []
    for omega, weight in enumerate(probs):
        ds = DisjointSet(graph.vertices)
        for a, b in links:
            ds.union(a, b)
        for i, (a, b) in enumerate(graph.edges):
            if omega >> i & 1:
                ds.union(a, b)
        if ds.connected(u, v):
            total.append(weight)
    return math.fsum(total)


def effective_edge(q: float, connection: float) -> float:
    """Inverse of the single-edge law: the parameter s with s/(s + q(1-s)) = connection."""
    if connection >= 1.0:
        return 1.0
    return q * connection / (1.0 - connection + q * connection)


def reduce_graph(graph: WeightedGraph, q: float, terminals: Iterable[int]) -> WeightedGraph:
    """Apply series, parallel and pendant-edge removals until none applies.

    Non-terminal vertices of degree 1 are dropped with their edge (such an
    edge is an independent Bernoulli(pi) and does not touch the rest). The
    result keeps the terminals, relabelled in increasing order; ``labels``
    holds the original vertex id of each remaining vertex.
    """
    terminals = set(terminals)
    edges: list[tuple[int, int, float]] = [(u, v, p) for (u, v), p in zip(graph.edges, graph.probs)]
    alive = set(range(graph.vertices))
    changed = True
    while changed:
        changed = False

        # self-loops never change a cluster count
        kept = [(u, v, p) for u, v, p in edges if u != v]
        changed |= len(kept) != len(edges)
        edges = kept

        bundles: dict[tuple[int, int], list[float]] = defaultdict(list)
        for u, v, p in edges:
            bundles[(min(u, v), max(u, v))].append(p)
        if any(len(ps) > 1 for ps in bundles.values()):
            merged = []
            for (u, v), ps in bundles.items():
                acc = ps[0]
                for p in ps[1:]:
                    acc = parallel_reduce(acc, p)
                merged.append((u, v, acc))
            edges = merged
            changed = True
            continue

        incident: dict[int, list[int]] = defaultdict(list)
        for i, (u, v, _) in enumerate(edges):
            incident[u].append(i)
            incident[v].append(i)
        for w in sorted(alive - terminals):
            around = incident.get(w, [])
            if len(around) == 0:
                alive.discard(w)
                changed = True
                break
            if len(around) == 1:
                del edges[around[0]]
                alive.discard(w)
                changed = True
                break
            if len(around) == 2:
                i, j = around
                u = edges[i][0] if edges[i][1] == w else edges[i][1]
                v = edges[j][0] if edges[j][1] == w else edges[j][1]
                s = series_reduce(edges[i][2], edges[j][2], q)
                edges = [e for idx, e in enumerate(edges) if idx not in (i, j)]
                edges.append((u, v, s))
                alive.discard(w)
                changed = True
                break

    order = sorted(alive)
    relabel = {old: new for new, old in enumerate(order)}
    logger.debug(f"Reduced {graph.vertices} vertices / {graph.size} edges to {len(order)} / {len(edges)}")
    return WeightedGraph(
        vertices=len(order),
        edges=tuple((relabel[u], relabel[v]) for u, v, _ in edges),
        probs=tuple(p for _, _, p in edges),
        labels=tuple(order),
    )
