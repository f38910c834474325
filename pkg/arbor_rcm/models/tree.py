"""Containers for sampled family trees and their colorings."""

from dataclasses import dataclass
from typing import Literal

import numpy as np

Color = Literal["b", "y", "r"]
COLORS: tuple[Color, ...] = ("b", "y", "r")
BLUE, YELLOW, RED = 0, 1, 2

# (k, ((type, color), ...)): family size and the ordered child marks
Pattern = tuple[int, tuple[tuple[int, Color], ...]]


@dataclass(frozen=True)
class TruncatedTree:
    """Family tree cut at ``depth_limit``, nodes in breadth-first order.

    Children of node ``x`` are ``child_start[x] .. child_start[x] + child_count[x] - 1``;
    ``open_in[x]`` is the state of the edge from its parent (False at the root).
    """

    parent: np.ndarray
    child_start: np.ndarray
    child_count: np.ndarray
    depth: np.ndarray
    open_in: np.ndarray
    depth_limit: int

    @property
    def size(self) -> int:
        return len(self.parent)

    def children(self, x: int) -> range:
        start = int(self.child_start[x])
        return range(start, start + int(self.child_count[x]))

    def level(self, d: int) -> np.ndarray:
        """Indices of the depth-d nodes (a contiguous run in breadth-first order)."""
        lo, hi = np.searchsorted(self.depth, [d, d + 1])
        return np.arange(lo, hi)


@dataclass(frozen=True)
class ColorAssignment:
    """Per-node color under the depth-D surrogate for 'blue'.

    A node at depth d counts as blue when an open path runs
    ``min(horizon, depth_limit - d)`` generations below it.
    """

    colors: np.ndarray
    blue: np.ndarray
    horizon: int

    @property
    def black(self) -> np.ndarray:
        return self.colors != RED

    def root_color(self) -> Color:
        return COLORS[int(self.colors[0])]


@dataclass(frozen=True)
class ColoredOffspringLaw:
    """Offspring law of the (type, color) multi-type process, one table per parent color."""

    entries: dict[Color, dict[Pattern, float]]
    marginals: dict[Color, float]
    p: float

    def total(self, color: Color) -> float:
        return sum(self.entries[color].values())
