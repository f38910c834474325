"""Offspring (family-size) distributions."""

import math
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator

MAX_FAMILY_SIZE = 2**16
# Sums off by less than this are renormalized; anything larger is rejected.
NORMALIZE_SLACK = 1e-9


class OffspringLaw(BaseModel):
    """Finite-support family-size law; ``probs[k]`` is P(X = k), index 0 is p_0."""

    model_config = ConfigDict(frozen=True)

    probs: tuple[float, ...]

    @field_validator("probs", mode="before")
    @classmethod
    def _normalize(cls, v):
        probs = [float(x) for x in v]
        if len(probs) < 2:
            raise ValueError("an offspring law needs at least family sizes 0 and 1")
        if len(probs) - 1 > MAX_FAMILY_SIZE:
            raise ValueError(f"family sizes above {MAX_FAMILY_SIZE} are not supported")
        for k, pk in enumerate(probs):
            if not math.isfinite(pk) or pk < 0.0 or pk > 1.0:
                raise ValueError(f"p_{k}={pk} is not a probability")
        total = math.fsum(probs)
        if abs(total - 1.0) >= NORMALIZE_SLACK:
            raise ValueError(f"probabilities sum to {total}, not 1")
        probs = [pk / total for pk in probs]
        # trailing zeros carry no information
        while len(probs) > 2 and probs[-1] == 0.0:
            probs.pop()
        return tuple(probs)

    @computed_field
    @property
    def mean(self) -> float:
        return math.fsum(k * pk for k, pk in enumerate(self.probs))

    @property
    def max_family(self) -> int:
        return len(self.probs) - 1

    @property
    def is_deterministic(self) -> bool:
        return self.probs[-1] == 1.0

    def to_json(self) -> dict:
        if self.is_deterministic:
            return {"kind": "deterministic", "m": self.max_family}
        return {"kind": "table", "probs": list(self.probs)}


class ValidationReport(BaseModel):
    """Outcome of checking a law against the standing assumptions."""

    ok: bool
    violations: list[str] = Field(default_factory=list)


class DeterministicLawSpec(BaseModel):
    """JSON form ``{"kind": "deterministic", "m": 2}``."""

    kind: Literal["deterministic"]
    m: int = Field(ge=1, le=MAX_FAMILY_SIZE)


class TableLawSpec(BaseModel):
    """JSON form ``{"kind": "table", "probs": [0, 0.4, 0.6]}``."""

    kind: Literal["table"]
    probs: list[float]


LawSpec = Annotated[
    Union[DeterministicLawSpec, TableLawSpec],
    Field(discriminator="kind"),
]
