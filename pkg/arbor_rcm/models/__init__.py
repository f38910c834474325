"""Data models for arbor-rcm."""

from arbor_rcm.models.box import EdgeConfig, ExactTable, RcSpec, TreeBox, XiTail
from arbor_rcm.models.law import LawSpec, OffspringLaw, ValidationReport
from arbor_rcm.models.relation import RayRelation, RelationSpec
from arbor_rcm.models.results import (
    AttachmentResult,
    CriticalCurvePoint,
    DependenceResult,
    EdgeMarginals,
    Estimate,
    FixedPointResult,
    ReducedTree,
    SandwichResult,
    UniquenessRegime,
)
from arbor_rcm.models.run import RunConfig, RunParams
from arbor_rcm.models.tree import ColorAssignment, ColoredOffspringLaw, TruncatedTree

__all__ = [
    "OffspringLaw",
    "LawSpec",
    "ValidationReport",
    "RayRelation",
    "RelationSpec",
    "TreeBox",
    "RcSpec",
    "ExactTable",
    "EdgeConfig",
    "XiTail",
    "FixedPointResult",
    "CriticalCurvePoint",
    "Estimate",
    "AttachmentResult",
    "ReducedTree",
    "DependenceResult",
    "SandwichResult",
    "UniquenessRegime",
    "EdgeMarginals",
    "TruncatedTree",
    "ColorAssignment",
    "ColoredOffspringLaw",
    "RunConfig",
    "RunParams",
]
