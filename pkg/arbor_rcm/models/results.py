"""Result records returned by the solvers, simulators and enumerators."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

CurveKind = Literal["pc0", "pc1", "pb", "pG"]
EstimateQuantity = Literal["theta_D", "gamma_kD", "cutset_k"]


class FixedPointResult(BaseModel):
    """A root of one of the branching fixed-point equations."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(ge=0.0, le=1.0)
    iterations: int = 0
    residual: float = 0.0
    bracket: tuple[float, float]


class CriticalCurvePoint(BaseModel):
    """One point of a critical curve p(q) on the m-ary tree."""

    model_config = ConfigDict(frozen=True)

    q: float = Field(gt=0.0)
    m: int = Field(ge=2)
    p: float = Field(ge=0.0, le=1.0)
    kind: CurveKind
    tol: float = 0.0


class Estimate(BaseModel):
    """Monte Carlo estimate with provenance."""

    quantity: EstimateQuantity
    law: dict
    p: float
    k: int | None = None
    horizon: int
    samples: int
    mean: float
    std_error: float
    bias_bound: float
    seed: int


class AttachmentResult(BaseModel):
    """Effective wired-subtree edge parameters r(1..levels) and their limit."""

    m: int
    p: float
    q: float
    sequence: list[float]
    p_inf: float
    iterations: int


class ReducedTree(BaseModel):
    """Depth-k tree of T_m' with one attachment edge per boundary vertex."""

    m: int
    k: int
    n: int
    p: float
    q: float
    attachment: float
    vertices: int
    tree_edges: list[tuple[int, int]]
    attachment_edges: list[tuple[int, int]]
    attachment_classes: list[int]


class DependenceResult(BaseModel):
    x: int
    y: int
    delta: float
    dependent: bool


class SandwichResult(BaseModel):
    """P(event) under the product measure, the relation measure and the wired measure."""

    lhs: float
    mid: float
    rhs: float
    ok: bool


class UniquenessRegime(BaseModel):
    """Where (p, q) sits relative to the uniqueness thresholds."""

    m: int
    p: float
    q: float
    pi: float
    p_b: float
    open_relations_unique: bool
    theta_wired: float
    product_measure_unique: bool


class EdgeMarginals(BaseModel):
    """Per-edge open probabilities, exact or estimated."""

    method: Literal["exact", "chain", "product"]
    values: list[float]
    std_errors: list[float] | None = None
    sweeps: int | None = None
    chains: int | None = None
