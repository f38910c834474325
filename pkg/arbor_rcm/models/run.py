"""Run configuration accepted by the command-line front end."""

from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from arbor_rcm.config import DEFAULT_SEED
from arbor_rcm.models.box import XiTail
from arbor_rcm.models.results import EstimateQuantity

Command = Literal["thresholds", "gamma-curve", "mc-verify", "rc-exact", "rc-chain", "reduce", "distinguish"]
OutputFormat = Literal["csv", "json"]


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` with both ends included, or a comma-separated list."""
    text = text.strip()
    if ":" not in text:
        return [float(v) for v in text.split(",") if v.strip()]
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid {text!r} is not of the form a:b:step")
    start, stop, step = (float(v) for v in parts)
    if step <= 0 or stop < start:
        raise ValueError(f"grid {text!r} needs step > 0 and b >= a")
    count = int(round((stop - start) / step)) + 1
    # round away the representation error of start + i*step
    return [round(float(v), 12) for v in np.linspace(start, start + (count - 1) * step, count)]


class RunParams(BaseModel):
    """Command parameters; each command reads the fields it needs."""

    model_config = ConfigDict(extra="forbid")

    m: int = Field(default=2, ge=2)
    law: dict[str, Any] | None = None
    p: float | None = Field(default=None, ge=0.0, le=1.0)
    q: float | None = Field(default=None, gt=0.0)
    n: int | None = Field(default=None, ge=1)
    k: int | None = Field(default=None, ge=0)
    depth: int | None = Field(default=None, ge=0)
    horizon: int | None = Field(default=None, ge=0)
    samples: int | None = Field(default=None, ge=100)
    relation: str | dict[str, Any] = "wired"
    tail: XiTail = "all_open"
    tol: float | None = Field(default=None, gt=0.0)
    p_att: float | None = Field(default=None, gt=0.0, lt=1.0)
    marginals: bool = False
    chains: int = Field(default=1, ge=1)
    sweeps: int = Field(default=100_000, ge=1)
    q_grid: list[float] | None = None
    p_grid: list[float] | None = None
    quantities: list[EstimateQuantity] | None = None

    @field_validator("q_grid", "p_grid", mode="before")
    @classmethod
    def _grid(cls, v: Any) -> Any:
        if isinstance(v, str):
            return parse_grid(v)
        return v

    def require(self, *names: str) -> None:
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise ValueError(f"missing parameter(s): {', '.join('--' + n.replace('_', '-') for n in missing)}")


class RunConfig(BaseModel):
    """One CLI invocation, from flags or a JSON/YAML file."""

    command: Command
    params: RunParams = Field(default_factory=RunParams)
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64)
    output: Path | None = None
    format: OutputFormat = "csv"
    threads: int | None = Field(default=None, ge=1)
