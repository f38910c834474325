"""Base class for CLI commands."""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any

from arbor_rcm.config import get_settings
from arbor_rcm.models.law import OffspringLaw
from arbor_rcm.models.run import RunConfig
from arbor_rcm.services import pgf


@dataclass
class CommandOutput:
    """Rows for CSV output and the document written for JSON output."""

    columns: list[str]
    rows: list[dict[str, Any]]
    document: dict[str, Any] = field(default_factory=dict)
    # preformatted CSV, written instead of ``rows`` when set
    csv_text: str | None = None


class BaseCommand(ABC):
    """Abstract base class for a RunConfig command."""

    @property
    @abstractmethod
    def name(self) -> str:
        """Command name as typed on the command line."""
        ...

    @abstractmethod
    def execute(self, config: RunConfig) -> CommandOutput:
        """Run the command; raise ArborError subclasses on failure."""
        ...

    def provenance(self, config: RunConfig) -> dict[str, Any]:
        """Inputs, seed and numerical settings behind a result."""
        settings = get_settings()
        return {
            "command": self.name,
            "params": config.params.model_dump(mode="json", exclude_none=True),
            "seed": config.seed,
            "value_tol": settings.value_tol,
            "critical_tol": settings.critical_tol,
            "enumeration_guard": settings.enumeration_guard,
        }

    def law(self, config: RunConfig) -> OffspringLaw:
        params = config.params
        return pgf.deterministic(params.m) if params.law is None else pgf.parse_law(params.law)
