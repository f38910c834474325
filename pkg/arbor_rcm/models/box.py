"""Finite boxes of T_m' and the random-cluster specifications living on them."""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from arbor_rcm.models.relation import RayRelation

# bit i of an EdgeConfig is the state of edge i (1 = open)
EdgeConfig = int
XiTail = Literal["all_open", "all_closed"]


@dataclass(frozen=True)
class TreeBox:
    """Lambda_n of T_m': the root and n generations below it, breadth-first.

    Edge i joins ``parent[i + 1]`` to vertex ``i + 1``, so a smaller box is a
    prefix of a larger one in both vertices and edges.
    """

    m: int
    n: int
    parent: tuple[int, ...]
    depth: tuple[int, ...]
    level_start: tuple[int, ...]

    @property
    def vertices(self) -> int:
        return len(self.parent)

    @property
    def edge_count(self) -> int:
        return len(self.parent) - 1

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((self.parent[v], v) for v in range(1, self.vertices))

    @property
    def boundary(self) -> range:
        return range(self.level_start[self.n], self.level_start[self.n + 1])

    def level(self, d: int) -> range:
        return range(self.level_start[d], self.level_start[d + 1])


class RcSpec(BaseModel):
    """Parameters of the finite-volume measure phi^{xi, ~}_{Lambda, p, q}."""

    model_config = ConfigDict(frozen=True)

    p: float = Field(ge=0.0, le=1.0)
    q: float = Field(gt=0.0)
    relation: RayRelation
    xi_tail: XiTail = "all_open"


@dataclass(frozen=True)
class ExactTable:
    """Normalized law over all 2^|E| configurations, indexed by bitmask."""

    probs: np.ndarray
    log_z: float
    edge_count: int

    @property
    def z(self) -> float:
        return math.exp(self.log_z)

    def weight(self, omega: EdgeConfig) -> float:
        """Unnormalized weight of ``omega``."""
        return float(self.probs[omega]) * self.z

    def probability(self, omega: EdgeConfig) -> float:
        return float(self.probs[omega])
