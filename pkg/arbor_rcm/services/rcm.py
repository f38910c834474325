"""Finite-volume random-cluster measures on boxes of T_m' with ray-relation boundaries.

Outside a box the boundary condition is one of two tails: every edge open
(xi = 1) or every edge closed. With the open tail each boundary vertex
carries open rays in every direction of its cone, so two boundary vertices
share a cluster exactly when their cones hold equivalent rays; that is the
identification ``boundary_identification`` returns. With the closed tail no
rays are open and the relation never acts.
"""

import csv
import io
import logging
import math
from collections import Counter
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from arbor_rcm.config import get_settings
from arbor_rcm.errors import InvalidInputError, NonMonotoneEventError
from arbor_rcm.models.box import EdgeConfig, ExactTable, RcSpec, TreeBox
from arbor_rcm.models.relation import RayRelation, stem_count
from arbor_rcm.models.results import DependenceResult, EdgeMarginals, ReducedTree, SandwichResult
from arbor_rcm.services import analytic, pgf, rays
from arbor_rcm.services.parallel import ordered_map
from arbor_rcm.services.random import stream_generator
from arbor_rcm.services.reduction import (
    WeightedGraph,
    check_guard,
    cluster_counts,
    log_weights,
    marginals,
    parallel_reduce,
    rc_distribution,
    series_reduce,
)
from arbor_rcm.services.unionfind import DisjointSet

logger = logging.getLogger(__name__)

__all__ = [
    "tree_box",
    "cluster_count",
    "exact_distribution",
    "edge_marginals",
    "conditional_edge_prob",
    "conditional_edge_table",
    "heat_bath_chain",
    "run_chains",
    "series_reduce",
    "parallel_reduce",
    "reduce_to_attachment_tree",
    "dependence_test",
    "sandwich_check",
    "free_measure_is_rc",
    "induced_links",
    "dlr_check",
    "product_measure_table",
    "table_to_csv",
]

DEPENDENCE_THRESHOLD = 1e-9
SANDWICH_SLACK = 1e-12
BATCHES = 20
# largest box whose single-edge conditionals are tabulated (2^16 configurations)
CHAIN_TABLE_EDGES = 16


def tree_box(m: int, n: int) -> TreeBox:
    """Lambda_n of T_m' in breadth-first order."""
    if m < 2:
        raise InvalidInputError(f"m={m} must be at least 2")
    if n < 1:
        raise InvalidInputError(f"n={n} must be at least 1")
    parent = [-1]
    depth = [0]
    level_start = [0, 1]
    previous = range(0, 1)
    for d in range(1, n + 1):
        start = len(parent)
        for u in previous:
            for _ in range(m + 1 if d == 1 else m):
                parent.append(u)
                depth.append(d)
        previous = range(start, len(parent))
        level_start.append(len(parent))
    box = TreeBox(m=m, n=n, parent=tuple(parent), depth=tuple(depth), level_start=tuple(level_start))
    if len(box.boundary) != stem_count(m, n):
        raise AssertionError("boundary size mismatch")
    return box


def _relation_on(box: TreeBox, relation: RayRelation) -> RayRelation:
    if relation.is_free or relation.k <= box.n:
        return relation
    return rays.coarsen_to_box(relation, box.n)


def boundary_links(box: TreeBox, spec: RcSpec) -> list[tuple[int, int]]:
    """Vertex pairs merged by the boundary condition."""
    if spec.xi_tail == "all_closed" or spec.relation.is_free:
        return []
    classes = rays.boundary_identification(_relation_on(box, spec.relation), box.n, box.m)
    first: dict[int, int] = {}
    links = []
    for v, cls in zip(box.boundary, classes):
        if cls in first:
            links.append((first[cls], v))
        else:
            first[cls] = v
    return links


def _check_config(box: TreeBox, omega: EdgeConfig) -> None:
    if not 0 <= omega < (1 << box.edge_count):
        raise InvalidInputError(f"configuration {omega} does not index the {box.edge_count} edges of the box")


def _joined(box: TreeBox, omega: EdgeConfig, links: Iterable[tuple[int, int]], skip: int = -1) -> DisjointSet:
    ds = DisjointSet(box.vertices)
    for a, b in links:
        ds.union(a, b)
    for i, (a, b) in enumerate(box.edges):
        if i != skip and omega >> i & 1:
            ds.union(a, b)
    return ds


def cluster_count(box: TreeBox, omega: EdgeConfig, spec: RcSpec) -> int:
    """Number of open clusters, counting boundary identifications."""
    _check_config(box, omega)
    return _joined(box, omega, boundary_links(box, spec)).components


def _graph(box: TreeBox, p: float) -> WeightedGraph:
    return WeightedGraph(vertices=box.vertices, edges=box.edges, probs=(p,) * box.edge_count)


def exact_distribution(
    box: TreeBox,
    spec: RcSpec,
    links: Sequence[tuple[int, int]] | None = None,
    workers: int | None = None,
) -> ExactTable:
    """Enumerate every configuration of the box.

    ``links`` overrides the boundary identifications derived from ``spec``
    (used for boundaries induced by an enclosing box).
    """
    links = boundary_links(box, spec) if links is None else list(links)
    workers = get_settings().threads if workers is None else workers
    probs, log_z = rc_distribution(_graph(box, spec.p), spec.q, links, workers=workers)
    logger.debug(f"Exact table on Lambda_{box.n} (m={box.m}): {box.edge_count} edges, log Z = {log_z:.6f}")
    return ExactTable(probs=probs, log_z=log_z, edge_count=box.edge_count)


def product_measure_table(box: TreeBox, density: float) -> ExactTable:
    """Independent edges with the given density."""
    check_guard(box.edge_count)
    logw = log_weights((density,) * box.edge_count, 1.0, np.zeros(1 << box.edge_count))
    return ExactTable(probs=np.exp(logw), log_z=0.0, edge_count=box.edge_count)


def conditional_edge_prob(box: TreeBox, spec: RcSpec, e: int, rest: EdgeConfig, links=None) -> float:
    """P(e open | all other edges), the bit of e in ``rest`` being ignored.

    p when the endpoints of e are joined without it, pi(p, q) otherwise.
    """
    if not 0 <= e < box.edge_count:
        raise InvalidInputError(f"edge {e} is not an edge of the box")
    _check_config(box, rest)
    links = boundary_links(box, spec) if links is None else links
    a, b = box.edges[e]
    if _joined(box, rest, links, skip=e).connected(a, b):
        return spec.p
    return analytic.pi(spec.p, spec.q)


def conditional_edge_table(box: TreeBox, spec: RcSpec, links=None) -> list[list[float]]:
    """P(e open | rest) for every edge e and every configuration, ``table[e][omega]``.

    The endpoints of e are joined off e exactly when opening e leaves the
    cluster count unchanged.
    """
    links = boundary_links(box, spec) if links is None else links
    size = box.edge_count
    counts = cluster_counts(box.vertices, box.edges, links)
    omegas = np.arange(1 << size, dtype=np.int64)
    pi = analytic.pi(spec.p, spec.q)
    table = []
    for e in range(size):
        bit = 1 << e
        joined = counts[omegas & ~bit] == counts[omegas | bit]
        table.append(np.where(joined, spec.p, pi).tolist())
    return table


@dataclass(frozen=True)
class ChainRun:
    """Outcome of one heat-bath chain."""

    config: EdgeConfig
    open_counts: np.ndarray
    batch_means: np.ndarray
    sweeps: int
    burn_in: int


def _bits(omega: EdgeConfig, size: int) -> list[int]:
    return [(omega >> e) & 1 for e in range(size)]


def heat_bath_chain(box: TreeBox, spec: RcSpec, sweeps: int, seed: int, chain: int = 0) -> ChainRun:
    """Systematic-scan single-edge heat bath.

    Starts from the all-open configuration; the first ``sweeps // 10`` sweeps
    are discarded from the recorded edge frequencies. Boxes with at most
    ``CHAIN_TABLE_EDGES`` edges look conditionals up in a precomputed table;
    larger ones rebuild the clusters at every update.
    """
    if sweeps < 1:
        raise InvalidInputError(f"sweeps={sweeps} must be at least 1")
    if not 0.0 < spec.p < 1.0:
        raise InvalidInputError(f"p={spec.p} gives a reducible chain; use exact_distribution")
    if spec.q < 1.0:
        logger.warning(f"Heat bath requested for q={spec.q} < 1; no monotonicity guarantees apply")

    links = boundary_links(box, spec)
    size = box.edge_count
    if size <= CHAIN_TABLE_EDGES:
        table = conditional_edge_table(box, spec, links)

        def open_prob(e: int, omega: EdgeConfig) -> float:
            return table[e][omega]

    else:
        pi = analytic.pi(spec.p, spec.q)

        def open_prob(e: int, omega: EdgeConfig) -> float:
            a, b = box.edges[e]
            return spec.p if _joined(box, omega, links, skip=e).connected(a, b) else pi

    rng = stream_generator(seed, chain)
    omega = (1 << size) - 1
    burn_in = sweeps // 10
    recorded = sweeps - burn_in
    batches = min(BATCHES, max(recorded, 1))
    per_batch = max(recorded // batches, 1)
    visits = [Counter() for _ in range(batches)]

    chunk = 1024
    uniforms: list[list[float]] = []
    row = 0
    for sweep in range(sweeps):
        if row == len(uniforms):
            uniforms = rng.random((chunk, size)).tolist()
            row = 0
        u = uniforms[row]
        row += 1
        for e in range(size):
            if u[e] < open_prob(e, omega):
                omega |= 1 << e
            else:
                omega &= ~(1 << e)
        if sweep >= burn_in:
            visits[min((sweep - burn_in) // per_batch, batches - 1)][omega] += 1

    batch_totals = np.zeros((batches, size))
    for batch, seen in enumerate(visits):
        for state, times in seen.items():
            batch_totals[batch] += times * np.array(_bits(state, size), dtype=float)
    sizes = np.array([per_batch] * (batches - 1) + [recorded - per_batch * (batches - 1)], dtype=float)
    return ChainRun(
        config=omega,
        open_counts=batch_totals.sum(axis=0),
        batch_means=batch_totals / sizes[:, None],
        sweeps=sweeps,
        burn_in=burn_in,
    )


def run_chains(
    box: TreeBox,
    spec: RcSpec,
    sweeps: int,
    chains: int = 1,
    seed: int | None = None,
    workers: int | None = None,
) -> EdgeMarginals:
    """Independently seeded heat-bath chains pooled into marginal estimates.

    Standard errors come from batch means across all chains.
    """
    settings = get_settings()
    seed = settings.seed if seed is None else seed
    workers = settings.threads if workers is None else workers
    tasks = [(box, spec, sweeps, seed, c) for c in range(chains)]
    runs = ordered_map(heat_bath_chain, tasks, workers=workers)
    recorded = sum(r.sweeps - r.burn_in for r in runs)
    values = np.sum([r.open_counts for r in runs], axis=0) / recorded
    batch_means = np.concatenate([r.batch_means for r in runs])
    if len(batch_means) > 1:
        std_errors = batch_means.std(axis=0, ddof=1) / math.sqrt(len(batch_means))
    else:
        std_errors = np.full(box.edge_count, math.nan)
    logger.info(f"Heat bath on Lambda_{box.n}: {chains} chain(s) x {sweeps} sweep(s)")
    return EdgeMarginals(
        method="chain",
        values=values.tolist(),
        std_errors=std_errors.tolist(),
        sweeps=sweeps,
        chains=chains,
    )


def edge_marginals(
    box: TreeBox,
    spec: RcSpec,
    sweeps: int = 100_000,
    chains: int = 1,
    seed: int | None = None,
    method: str = "auto",
) -> EdgeMarginals:
    """Exact marginals when the box passes the enumeration guard, else heat-bath estimates."""
    if method == "auto":
        method = "exact" if box.edge_count <= get_settings().enumeration_guard else "chain"
    if method == "exact":
        table = exact_distribution(box, spec)
        return EdgeMarginals(method="exact", values=marginals(table.probs, box.edge_count).tolist())
    if method == "chain":
        return run_chains(box, spec, sweeps, chains=chains, seed=seed)
    raise InvalidInputError(f"unknown marginal method {method!r}")


# ---------------------------------------------------------------------------
# Reductions and boundary distinguishability
# ---------------------------------------------------------------------------


def reduce_to_attachment_tree(
    m: int,
    p: float,
    q: float,
    k: int,
    n: int,
    relation: RayRelation | None = None,
) -> ReducedTree:
    """Collapse every depth-k subtree of the wired Lambda_n into one attachment edge.

    The subtree below x together with its identified boundary is a
    series-parallel network between x and the boundary, so it acts as a
    single edge [x, x'> with parameter r(n - k); x' endpoints are then
    identified according to the relation at depth k.
    """
    if n < k:
        raise InvalidInputError(f"n={n} is below k={k}")
    relation = rays.wired(m) if relation is None else relation
    if not relation.is_free and relation.k > k:
        raise InvalidInputError(f"relation depth {relation.k} exceeds the attachment depth {k}")
    box = tree_box(m, k)
    attachment = analytic.attachment_parameter(m, p, q, n - k)
    classes = rays.boundary_identification(relation, k, m)
    first = box.vertices
    return ReducedTree(
        m=m,
        k=k,
        n=n,
        p=p,
        q=q,
        attachment=attachment,
        vertices=box.vertices + len(box.boundary),
        tree_edges=list(box.edges),
        attachment_edges=[(x, first + i) for i, x in enumerate(box.boundary)],
        attachment_classes=list(classes),
    )


def attachment_graph(
    reduced: ReducedTree,
    keep: Iterable[int] | None = None,
    p_att: float | None = None,
) -> tuple[WeightedGraph, list[tuple[int, int]]]:
    """Weighted graph and identification links of a reduced tree.

    ``keep`` restricts the attachment edges (by boundary position) that are
    present; the others are conditioned closed, which removes them.
    """
    p_att = reduced.attachment if p_att is None else p_att
    keep = range(len(reduced.attachment_edges)) if keep is None else sorted(set(keep))
    edges = list(reduced.tree_edges)
    probs = [reduced.p] * len(edges)
    for i in keep:
        edges.append(reduced.attachment_edges[i])
        probs.append(p_att)
    first: dict[int, int] = {}
    links = []
    for i in keep:
        cls = reduced.attachment_classes[i]
        endpoint = reduced.attachment_edges[i][1]
        if cls in first:
            links.append((first[cls], endpoint))
        else:
            first[cls] = endpoint
    graph = WeightedGraph(vertices=reduced.vertices, edges=tuple(edges), probs=tuple(probs))
    return graph, links


def dependence_test(
    m: int,
    p: float,
    q: float,
    relation: RayRelation,
    x: int,
    y: int,
    p_att: float,
    k: int | None = None,
) -> DependenceResult:
    """Does the state of e_y inform e_x once every other attachment is closed?

    ``x`` and ``y`` are positions on the depth-k boundary. The attachment
    edges e_x, e_y lie on a common cycle exactly when x ~_k y.
    """
    if q <= 0:
        raise InvalidInputError(f"q={q} must be positive")
    if not 0.0 < p_att < 1.0:
        raise InvalidInputError(f"p_att={p_att} is not in (0,1)")
    if k is None:
        if relation.is_free:
            raise InvalidInputError("the free relation needs an explicit depth k")
        k = relation.k
    size = stem_count(m, k)
    if x == y or not (0 <= x < size and 0 <= y < size):
        raise InvalidInputError(f"x={x}, y={y} must be distinct positions below {size}")

    reduced = reduce_to_attachment_tree(m, p, q, k, k, relation)
    graph, links = attachment_graph(reduced, keep=(x, y), p_att=p_att)
    probs, _ = rc_distribution(graph, q, links)
    e_x, e_y = graph.size - 2, graph.size - 1
    if x > y:
        e_x, e_y = e_y, e_x

    omegas = np.arange(len(probs))
    open_x = (omegas >> e_x) & 1 == 1
    open_y = (omegas >> e_y) & 1 == 1
    p_y = math.fsum(probs[open_y])
    given_open = math.fsum(probs[open_x & open_y]) / p_y
    given_closed = math.fsum(probs[open_x & ~open_y]) / (1.0 - p_y)
    delta = given_open - given_closed
    return DependenceResult(x=x, y=y, delta=delta, dependent=abs(delta) > DEPENDENCE_THRESHOLD)


def _spot_check_monotone(event: Callable[[EdgeConfig], bool], size: int, checks: int, seed: int) -> None:
    rng = stream_generator(seed)
    full = 1 << size
    for _ in range(checks):
        lower = int(rng.integers(full))
        upper = lower | int(rng.integers(full))
        if event(lower) and not event(upper):
            raise NonMonotoneEventError(f"event holds at {lower:b} but not at the larger {upper:b}")


def _event_probability(table: ExactTable, event: Callable[[EdgeConfig], bool]) -> float:
    return math.fsum(float(w) for omega, w in enumerate(table.probs) if event(omega))


def sandwich_check(
    box: TreeBox,
    relation: RayRelation,
    p: float,
    q: float,
    event: Callable[[EdgeConfig], bool],
    checks: int = 256,
    seed: int | None = None,
) -> SandwichResult:
    """P(event) under the product measure, the relation measure and the wired measure.

    ``event`` must be increasing; it is spot-checked on random ordered pairs.
    """
    if q < 1.0:
        raise InvalidInputError(f"q={q} must be at least 1 for stochastic ordering")
    check_guard(box.edge_count)
    _spot_check_monotone(event, box.edge_count, checks, get_settings().seed if seed is None else seed)

    lhs = _event_probability(product_measure_table(box, analytic.pi(p, q)), event)
    mid = _event_probability(exact_distribution(box, RcSpec(p=p, q=q, relation=relation)), event)
    rhs = _event_probability(exact_distribution(box, RcSpec(p=p, q=q, relation=rays.wired(box.m))), event)
    ok = lhs <= mid + SANDWICH_SLACK and mid <= rhs + SANDWICH_SLACK
    return SandwichResult(lhs=lhs, mid=mid, rhs=rhs, ok=ok)


def free_measure_is_rc(relation: RayRelation, m: int, p: float, q: float) -> bool:
    """Is the product measure phi_pi a random-cluster measure for the relation?

    True for the free relation; for an open relation exactly when pi-percolation
    on the m-ary tree has no infinite cluster.
    """
    if q <= 1.0 or p == 1.0:
        raise InvalidInputError("needs q > 1 and p != 1")
    if relation.is_free:
        return True
    return analytic.theta(pgf.deterministic(m), analytic.pi(p, q)) == 0.0


# ---------------------------------------------------------------------------
# Nested boxes
# ---------------------------------------------------------------------------


def induced_links(outer: TreeBox, outer_config: EdgeConfig, spec: RcSpec, inner_n: int) -> list[tuple[int, int]]:
    """Identifications on the depth-inner_n boundary made by the configuration outside Lambda_inner_n."""
    if not 1 <= inner_n <= outer.n:
        raise InvalidInputError(f"inner depth {inner_n} is not within the outer box depth {outer.n}")
    _check_config(outer, outer_config)
    inner_edges = outer.level_start[inner_n + 1] - 1
    outside = outer_config & ~((1 << inner_edges) - 1)
    ds = _joined(outer, outside, boundary_links(outer, spec))
    first: dict[int, int] = {}
    links = []
    for v in outer.level(inner_n):
        root = ds.find(v)
        if root in first:
            links.append((first[root], v))
        else:
            first[root] = v
    return links


def dlr_check(m: int, n_inner: int, n_outer: int, spec: RcSpec) -> float:
    """Largest gap between the outer-box conditional law on the inner edges and the inner measure it induces."""
    if not 1 <= n_inner < n_outer:
        raise InvalidInputError(f"need 1 <= n_inner < n_outer, got {n_inner}, {n_outer}")
    outer = tree_box(m, n_outer)
    inner = tree_box(m, n_inner)
    outer_table = exact_distribution(outer, spec)
    inner_size = inner.edge_count
    inner_mask = (1 << inner_size) - 1

    worst = 0.0
    for outside in range(0, 1 << outer.edge_count, 1 << inner_size):
        block = outer_table.probs[outside : outside + inner_mask + 1]
        conditional = block / math.fsum(block)
        links = induced_links(outer, outside, spec, n_inner)
        expected = exact_distribution(inner, spec, links=links, workers=1).probs
        worst = max(worst, float(np.max(np.abs(conditional - expected))))
    logger.info(f"DLR check Lambda_{n_inner} in Lambda_{n_outer}: max deviation {worst:.3g}")
    return worst


def table_to_csv(table: ExactTable) -> str:
    """CSV with one row per configuration: bitstring (edge 0 first), weight, probability, tol.

    Enumeration is exact, so tol is 0.0 on every row.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["config", "weight", "probability", "tol"])
    z = table.z
    for omega, prob in enumerate(table.probs):
        bits = "".join("1" if omega >> e & 1 else "0" for e in range(table.edge_count))
        writer.writerow([bits, repr(float(prob) * z), repr(float(prob)), "0.0"])
    return buffer.getvalue()
