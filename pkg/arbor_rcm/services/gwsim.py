"""Monte Carlo on percolated Galton-Watson trees: colors, blue cutsets, the colored process.

A vertex is blue when an open path leaves it downwards forever. That event is
infinite, so everything here uses the depth-D surrogate blue_D (an open path
of D generations); the resulting bias is bounded through ``finite_depth_theta``
and reported with every estimate.
"""

import bisect
import itertools
import logging
import math
from typing import Literal

import numpy as np

from arbor_rcm.config import get_settings
from arbor_rcm.errors import GuardExceededError, InvalidInputError
from arbor_rcm.models.law import OffspringLaw
from arbor_rcm.models.results import Estimate, EstimateQuantity
from arbor_rcm.models.tree import (
    BLUE,
    COLORS,
    RED,
    YELLOW,
    Color,
    ColorAssignment,
    ColoredOffspringLaw,
    Pattern,
    TruncatedTree,
)
from arbor_rcm.services import analytic, pgf
from arbor_rcm.services.parallel import ordered_map
from arbor_rcm.services.random import UniformStream, block_generator, blocks, stream_generator

logger = logging.getLogger(__name__)

MAX_DEPTH = 40
# color patterns are enumerated exhaustively, 6^k per family size k
MAX_COLORED_FAMILY = 8
CELLS_PER_GENERATION = len(COLORS) * 2 * len(COLORS)


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"p={p} is not in [0,1]")


def _check_depth(depth: int) -> None:
    if depth < 0:
        raise InvalidInputError(f"depth={depth} must be non-negative")
    if depth > MAX_DEPTH:
        raise GuardExceededError(f"depth {depth} exceeds the depth guard of {MAX_DEPTH}")


# ---------------------------------------------------------------------------
# Materialized trees
# ---------------------------------------------------------------------------


def sample_tree(law: OffspringLaw, p: float, depth: int, seed: int, node_guard: int | None = None) -> TruncatedTree:
    """Grow the family tree level by level to ``depth`` and percolate its edges."""
    pgf.require_valid(law)
    _check_p(p)
    _check_depth(depth)
    guard = get_settings().node_guard if node_guard is None else node_guard
    expected = math.fsum(law.mean**j for j in range(depth + 1))
    if expected > guard:
        raise GuardExceededError(f"expected {expected:.3g} nodes exceed the node guard of {guard}")

    rng = stream_generator(seed)
    probs = np.asarray(law.probs)
    parents = [np.array([-1], dtype=np.int64)]
    opens = [np.array([False])]
    depths = [np.array([0], dtype=np.int32)]
    counts = []

    level_start, level_size = 0, 1
    for d in range(depth):
        family = rng.choice(len(probs), size=level_size, p=probs)
        counts.append(family)
        born = int(family.sum())
        parents.append(np.repeat(np.arange(level_start, level_start + level_size), family))
        opens.append(rng.random(born) < p)
        depths.append(np.full(born, d + 1, dtype=np.int32))
        level_start += level_size
        level_size = born
    counts.append(np.zeros(level_size, dtype=np.int64))

    child_count = np.concatenate(counts).astype(np.int64)
    child_start = 1 + np.concatenate([[0], np.cumsum(child_count)[:-1]])
    tree = TruncatedTree(
        parent=np.concatenate(parents),
        child_start=child_start,
        child_count=child_count,
        depth=np.concatenate(depths),
        open_in=np.concatenate(opens),
        depth_limit=depth,
    )
    logger.debug(f"Sampled tree with {tree.size} node(s) to depth {depth}")
    return tree


def classify_colors(tree: TruncatedTree, horizon: int) -> ColorAssignment:
    """Blue / yellow / red for every node, bottom-up."""
    if not 0 <= horizon <= tree.depth_limit:
        raise InvalidInputError(f"horizon {horizon} exceeds the tree depth {tree.depth_limit}")

    limit = tree.depth_limit
    budget = np.minimum(horizon, limit - tree.depth)
    height = np.zeros(tree.size, dtype=np.int64)
    for d in range(limit, 0, -1):
        idx = tree.level(d)
        reach = np.where(tree.open_in[idx], height[idx] + 1, 0)
        np.maximum.at(height, tree.parent[idx], reach)
    blue = height >= budget

    black = _black_within(tree, blue, limit)
    colors = np.where(blue, BLUE, np.where(black, YELLOW, RED)).astype(np.int8)
    return ColorAssignment(colors=colors, blue=blue, horizon=horizon)


def _black_within(tree: TruncatedTree, blue: np.ndarray, within: int) -> np.ndarray:
    """black_j(x) with j = within - depth(x): blue, or every child black_{j-1}."""
    black = blue.copy()
    nonblack = np.zeros(tree.size, dtype=np.int64)
    for d in range(within - 1, -1, -1):
        idx = tree.level(d + 1)
        np.add.at(nonblack, tree.parent[idx], ~black[idx])
        lvl = tree.level(d)
        black[lvl] = blue[lvl] | (nonblack[lvl] == 0)
    return black


def is_k_black(tree: TruncatedTree, colors: ColorAssignment, k: int) -> bool:
    """Root is k-black: a blue cutset exists within k generations."""
    if not 0 <= k <= tree.depth_limit:
        raise InvalidInputError(f"k={k} exceeds the tree depth {tree.depth_limit}")
    return bool(_black_within(tree, colors.blue, k)[0])


def find_blue_cutset(tree: TruncatedTree, colors: ColorAssignment, within: int) -> tuple[int, ...] | None:
    """Maximal blue cutset inside the first ``within`` generations, or None.

    A vertex belongs to it when it is blue and cannot be replaced by a blue
    cutset of its own subtree that still lies within range.
    """
    if not 0 <= within <= tree.depth_limit:
        raise InvalidInputError(f"within={within} exceeds the tree depth {tree.depth_limit}")
    sblack = _black_within(tree, colors.blue, within)
    if not sblack[0]:
        return None

    members = []
    stack = [0]
    while stack:
        v = stack.pop()
        kids = tree.children(v)
        if tree.depth[v] < within and all(sblack[c] for c in kids):
            stack.extend(kids)
        else:
            members.append(v)
    return tuple(sorted(members))


# ---------------------------------------------------------------------------
# Lazy exploration
# ---------------------------------------------------------------------------


class ColorExplorer:
    """Family tree with percolation marks, grown only where a query looks.

    Families and edge states are drawn when a node is first expanded, so the
    explored part has the law of ``sample_tree``. Color queries short-circuit
    and are memoized by their (monotone) depth parameter.
    """

    def __init__(self, law: OffspringLaw, p: float, stream: UniformStream):
        self._cdf = list(itertools.accumulate(law.probs))
        self._fixed = law.max_family if law.is_deterministic else None
        self._p = p
        self._stream = stream
        self.kids: list[list[int] | None] = [None]
        self.open: list[list[bool] | None] = [None]
        self._blue_yes = [-1]
        self._blue_no = [math.inf]
        self._black_yes = [-1]
        self._black_no = [math.inf]

    @property
    def size(self) -> int:
        return len(self.kids)

    def expand(self, x: int) -> tuple[list[int], list[bool]]:
        kids = self.kids[x]
        if kids is None:
            if self._fixed is not None:
                k = self._fixed
            else:
                k = min(bisect.bisect_right(self._cdf, self._stream.next()), len(self._cdf) - 1)
            first = len(self.kids)
            kids = list(range(first, first + k))
            self.kids[x] = kids
            self.open[x] = [self._stream.next() < self._p for _ in kids]
            self.kids.extend([None] * k)
            self.open.extend([None] * k)
            self._blue_yes.extend([-1] * k)
            self._blue_no.extend([math.inf] * k)
            self._black_yes.extend([-1] * k)
            self._black_no.extend([math.inf] * k)
        return kids, self.open[x]

    def blue(self, x: int, budget: int) -> bool:
        """Open path of ``budget`` generations below x."""
        if budget <= self._blue_yes[x]:
            return True
        if budget >= self._blue_no[x]:
            return False
        if budget == 0:
            found = True
        else:
            kids, opens = self.expand(x)
            found = any(o and self.blue(c, budget - 1) for c, o in zip(kids, opens))
        if found:
            self._blue_yes[x] = max(self._blue_yes[x], budget)
        else:
            self._blue_no[x] = min(self._blue_no[x], budget)
        return found

    def k_black(self, x: int, k: int, horizon: int) -> bool:
        """Blue cutset of x's subtree within k generations."""
        if k <= self._black_yes[x]:
            return True
        if k >= self._black_no[x]:
            return False
        if self.blue(x, horizon):
            found = True
        elif k == 0:
            found = False
        else:
            kids, _ = self.expand(x)
            found = all(self.k_black(c, k - 1, horizon) for c in kids)
        if found:
            self._black_yes[x] = max(self._black_yes[x], k)
        else:
            self._black_no[x] = min(self._black_no[x], k)
        return found

    def cutset(self, x: int, k: int, horizon: int) -> list[int] | None:
        """A blue cutset within k generations, shallowest members first, or None."""
        if self.blue(x, horizon):
            return [x]
        if k == 0:
            return None
        members: list[int] = []
        for c in self.expand(x)[0]:
            sub = self.cutset(c, k - 1, horizon)
            if sub is None:
                return None
            members.extend(sub)
        return members

    def color(self, x: int, horizon: int, k: int) -> Color:
        if self.blue(x, horizon):
            return "b"
        return "y" if self.k_black(x, k, horizon) else "r"


# ---------------------------------------------------------------------------
# Estimates
# ---------------------------------------------------------------------------


def _estimate_block(
    quantity: EstimateQuantity,
    law: OffspringLaw,
    p: float,
    k: int,
    horizon: int,
    seed: int,
    block: int,
    count: int,
) -> int:
    stream = UniformStream(block_generator(seed, block))
    hits = 0
    for _ in range(count):
        explorer = ColorExplorer(law, p, stream)
        if quantity == "theta_D":
            hits += explorer.blue(0, horizon)
        elif quantity == "gamma_kD":
            hits += explorer.k_black(0, k, horizon)
        else:
            hits += explorer.cutset(0, k, horizon) is not None
    return hits


def bias_bound(law: OffspringLaw, p: float, horizon: int, k: int | None = None) -> float:
    """Bound on the surrogate bias: theta_D - theta, times the expected size of the first k generations."""
    gap = analytic.finite_depth_theta(law, p, horizon) - analytic.theta(law, p)
    if k is None:
        return max(gap, 0.0)
    return max(gap, 0.0) * math.fsum(law.mean**j for j in range(k + 1))


def estimate(
    quantity: EstimateQuantity,
    law: OffspringLaw,
    p: float,
    samples: int,
    horizon: int,
    k: int = 0,
    seed: int | None = None,
    workers: int | None = None,
) -> Estimate:
    """Monte Carlo mean and standard error of a root-color indicator.

    theta_D: root has an open path of ``horizon`` generations.
    gamma_kD: root is k-black with blue judged at ``horizon``.
    cutset_k: an explicit blue cutset within k generations is found.
    """
    pgf.require_valid(law)
    _check_p(p)
    if samples < 100:
        raise InvalidInputError(f"samples={samples} must be at least 100")
    if k < 0:
        raise InvalidInputError(f"k={k} must be non-negative")
    if quantity == "theta_D":
        k = 0
    _check_depth(k + horizon)
    settings = get_settings()
    seed = settings.seed if seed is None else seed
    workers = settings.threads if workers is None else workers

    tasks = [(quantity, law, p, k, horizon, seed, block, count) for block, _, count in blocks(samples)]
    hits = sum(ordered_map(_estimate_block, tasks, workers=workers))
    mean = hits / samples
    std_error = math.sqrt(mean * (1.0 - mean) / (samples - 1))
    bias = bias_bound(law, p, horizon, None if quantity == "theta_D" else k)
    if bias > std_error:
        logger.warning(f"{quantity}: bias bound {bias:.3g} exceeds the standard error {std_error:.3g}")
    logger.info(f"{quantity} at p={p}, D={horizon}, k={k}: {mean:.6f} +/- {std_error:.6f} ({samples} samples)")
    return Estimate(
        quantity=quantity,
        law=law.to_json(),
        p=p,
        k=None if quantity == "theta_D" else k,
        horizon=horizon,
        samples=samples,
        mean=mean,
        std_error=std_error,
        bias_bound=bias,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# The colored multi-type process
# ---------------------------------------------------------------------------


def color_rule(marks: tuple[tuple[int, Color], ...]) -> Color:
    """Color of a parent from its children's (type, color) marks."""
    if any(i == 1 and j == "b" for i, j in marks):
        return "b"
    if all(j in ("b", "y") for _, j in marks):
        return "y"
    return "r"


def colored_offspring_law(law: OffspringLaw, p: float) -> ColoredOffspringLaw:
    """Offspring tables of the (type, color) process, conditioned on the parent color."""
    pgf.require_valid(law, strict=True)
    if not 0.0 < p < 1.0:
        raise InvalidInputError(f"p={p} is not in (0,1)")
    if law.max_family > MAX_COLORED_FAMILY:
        raise GuardExceededError(f"family size {law.max_family} exceeds {MAX_COLORED_FAMILY} for color tables")

    t = analytic.theta(law, p, 1e-13)
    g = analytic.black_gamma(law, p, 1e-13).value
    q: dict[Color, float] = {"b": t, "y": max(g - t, 0.0), "r": max(1.0 - g, 0.0)}
    type_prob = {0: 1.0 - p, 1: p}
    marks = [(i, j) for i in (0, 1) for j in COLORS]

    entries: dict[Color, dict[Pattern, float]] = {c: {} for c in COLORS}
    for k, pk in enumerate(law.probs):
        if pk == 0.0:
            continue
        for pattern in itertools.product(marks, repeat=k):
            color = color_rule(pattern)
            if q[color] <= 0.0:
                continue
            weight = pk * math.prod(type_prob[i] * q[j] for i, j in pattern) / q[color]
            if weight > 0.0:
                entries[color][(k, pattern)] = weight
    logger.debug(f"Colored law at p={p}: q = {q}")
    return ColoredOffspringLaw(entries=entries, marginals=q, p=p)


def red_mean(law: OffspringLaw, p: float) -> float:
    """Mean number of red children of a red vertex, G'(1 - p theta)."""
    pgf.require_valid(law, strict=True)
    return pgf.eval(law, 1.0 - p * analytic.theta(law, p), 1)


def mean_matrix(colored: ColoredOffspringLaw) -> tuple[np.ndarray, float]:
    """Mean offspring-color matrix (rows: parent color) and its Perron root."""
    index = {c: i for i, c in enumerate(COLORS)}
    matrix = np.zeros((len(COLORS), len(COLORS)))
    for parent, table in colored.entries.items():
        for (_, pattern), weight in table.items():
            for _, j in pattern:
                matrix[index[parent], index[j]] += weight
    return matrix, float(np.max(np.abs(np.linalg.eigvals(matrix))))


def _pattern_tables(colored: ColoredOffspringLaw) -> dict[Color, tuple[list[Pattern], np.ndarray]]:
    tables = {}
    for color, table in colored.entries.items():
        if not table:
            continue
        patterns = list(table)
        weights = np.array([table[pt] for pt in patterns])
        tables[color] = (patterns, weights / weights.sum())
    return tables


def sample_colored_tree(
    colored: ColoredOffspringLaw,
    generations: int,
    rng: np.random.Generator,
    tables: dict | None = None,
) -> list[list[tuple[int, int, Color]]]:
    """Direct simulation of the multi-type process.

    Level g lists (parent position in level g-1, type, color); level 0 is
    the root with parent -1 and type -1.
    """
    tables = _pattern_tables(colored) if tables is None else tables
    roots = [c for c in COLORS if colored.marginals[c] > 0.0]
    weights = np.array([colored.marginals[c] for c in roots])
    root = roots[int(rng.choice(len(roots), p=weights / weights.sum()))]
    levels: list[list[tuple[int, int, Color]]] = [[(-1, -1, root)]]
    for _ in range(generations):
        nxt = []
        for pos, (_, _, color) in enumerate(levels[-1]):
            patterns, probs = tables[color]
            _, marks = patterns[int(rng.choice(len(patterns), p=probs))]
            nxt.extend((pos, i, j) for i, j in marks)
        levels.append(nxt)
    return levels


def _explored_levels(
    explorer: ColorExplorer, generations: int, horizon: int, k: int
) -> list[list[tuple[int, int, Color]]]:
    levels = [[(-1, -1, explorer.color(0, horizon, k))]]
    frontier = [0]
    for _ in range(generations):
        nxt_nodes, nxt = [], []
        for pos, x in enumerate(frontier):
            kids, opens = explorer.expand(x)
            for c, o in zip(kids, opens):
                nxt_nodes.append(c)
                nxt.append((pos, int(o), explorer.color(c, horizon, k)))
        levels.append(nxt)
        frontier = nxt_nodes
    return levels


def pair_counts(levels: list[list[tuple[int, int, Color]]]) -> np.ndarray:
    """Counts of (generation, parent color, child type, child color) cells."""
    index = {c: i for i, c in enumerate(COLORS)}
    counts = np.zeros(CELLS_PER_GENERATION * (len(levels) - 1))
    for g in range(1, len(levels)):
        parents = levels[g - 1]
        for pos, i, j in levels[g]:
            cell = (g - 1) * CELLS_PER_GENERATION + index[parents[pos][2]] * 6 + i * 3 + index[j]
            counts[cell] += 1
    return counts


def _frequency_block(
    method: Literal["direct", "percolated"],
    law: OffspringLaw,
    colored: ColoredOffspringLaw,
    generations: int,
    horizon: int,
    k: int,
    seed: int,
    block: int,
    count: int,
) -> tuple[np.ndarray, np.ndarray]:
    rng = block_generator(seed, block)
    total = np.zeros(CELLS_PER_GENERATION * generations)
    squares = np.zeros_like(total)
    tables = _pattern_tables(colored)
    stream = UniformStream(rng) if method == "percolated" else None
    for _ in range(count):
        if stream is None:
            levels = sample_colored_tree(colored, generations, rng, tables)
        else:
            levels = _explored_levels(ColorExplorer(law, colored.p, stream), generations, horizon, k)
        counts = pair_counts(levels)
        total += counts
        squares += counts**2
    return total, squares


def joint_color_frequencies(
    law: OffspringLaw,
    p: float,
    samples: int,
    method: Literal["direct", "percolated"],
    generations: int = 2,
    horizon: int = 30,
    k: int = 20,
    seed: int | None = None,
    workers: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Mean parent/child color counts per root and their standard errors.

    ``direct`` simulates the colored process from its offspring tables;
    ``percolated`` percolates a family tree and classifies it, with blue
    judged at ``horizon`` and black at ``k`` generations.
    """
    colored = colored_offspring_law(law, p)
    settings = get_settings()
    seed = settings.seed if seed is None else seed
    workers = settings.threads if workers is None else workers
    tasks = [
        (method, law, colored, generations, horizon, k, seed, block, count)
        for block, _, count in blocks(samples)
    ]
    parts = ordered_map(_frequency_block, tasks, workers=workers)
    total = np.sum([t for t, _ in parts], axis=0)
    squares = np.sum([s for _, s in parts], axis=0)
    mean = total / samples
    variance = np.maximum(squares / samples - mean**2, 0.0) * samples / (samples - 1)
    return mean, np.sqrt(variance / samples)
