"""Boundary relations on the rays of T_m'."""

from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

Stem = tuple[int, ...]


def stem_count(m: int, k: int) -> int:
    """Number of depth-k stems of T_m' (root has m+1 children, others m)."""
    return (m + 1) * m ** (k - 1)


def canonical_classes(labels: list[int] | tuple[int, ...]) -> tuple[int, ...]:
    """Renumber class ids by first occurrence."""
    seen: dict[int, int] = {}
    out = []
    for label in labels:
        if label not in seen:
            seen[label] = len(seen)
        out.append(seen[label])
    return tuple(out)


class RayRelation(BaseModel):
    """Free relation, or an open relation given by a partition of depth-k stems.

    ``stem_class[i]`` is the class of the i-th depth-k stem in lexicographic
    order (root child index first); ids are canonical, numbered by first
    occurrence, so two equal relations compare equal.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["free", "open"]
    m: int = Field(default=2, ge=2)
    k: int = Field(default=0, ge=0)
    stem_class: tuple[int, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def _canonicalize(cls, data):
        if isinstance(data, dict) and data.get("kind") == "open" and "stem_class" in data:
            data = {**data, "stem_class": canonical_classes(list(data["stem_class"]))}
        return data

    @model_validator(mode="after")
    def _check_shape(self):
        if self.kind == "free":
            if self.k != 0 or self.stem_class:
                raise ValueError("free relation carries no stem partition")
            return self
        if self.k < 1:
            raise ValueError("open relation needs depth k >= 1")
        expected = stem_count(self.m, self.k)
        if len(self.stem_class) != expected:
            raise ValueError(f"expected {expected} stem classes at depth {self.k}, got {len(self.stem_class)}")
        return self

    @property
    def is_free(self) -> bool:
        return self.kind == "free"

    @property
    def classes(self) -> int:
        return max(self.stem_class) + 1 if self.stem_class else 0


class WiredRelationSpec(BaseModel):
    kind: Literal["wired"]
    m: int | None = None


class FreeRelationSpec(BaseModel):
    kind: Literal["free"]
    m: int | None = None


class OpenRelationSpec(BaseModel):
    """``{"kind": "open", "m": 2, "k": 2, "classes": [[stem, ...], ...]}``."""

    kind: Literal["open"]
    m: int = Field(ge=2)
    k: int = Field(ge=1)
    classes: list[list[list[int]]]


class CutsetRelationSpec(BaseModel):
    """``{"kind": "cutset", "vertices": [[childpath], ...]}``; ``[]`` is the root."""

    kind: Literal["cutset"]
    m: int | None = None
    vertices: list[list[int]]


RelationSpec = Annotated[
    Union[WiredRelationSpec, FreeRelationSpec, OpenRelationSpec, CutsetRelationSpec],
    Field(discriminator="kind"),
]
