"""thresholds: critical curves p_c0, p_c1, p_b, p_G over a q grid."""

import logging

from arbor_rcm.commands.base import BaseCommand, CommandOutput
from arbor_rcm.config import get_settings
from arbor_rcm.models.run import RunConfig, parse_grid
from arbor_rcm.services import analytic, pgf

logger = logging.getLogger(__name__)

DEFAULT_Q_GRID = "1:10:0.5"


class ThresholdsCommand(BaseCommand):
    """One row per q: (q, p_c0, p_c1, p_b, p_G) with the solver tolerance."""

    @property
    def name(self) -> str:
        return "thresholds"

    def execute(self, config: RunConfig) -> CommandOutput:
        params = config.params
        qs = params.q_grid if params.q_grid is not None else parse_grid(DEFAULT_Q_GRID)
        tol = params.tol if params.tol is not None else get_settings().critical_tol

        pb = analytic.p_b(params.m)
        pg = analytic.p_G(pgf.deterministic(params.m), tol)
        rows = [
            {
                "q": q,
                "p_c0": analytic.p_c0(params.m, q),
                "p_c1": analytic.p_c1(params.m, q, tol),
                "p_b": pb,
                "p_G": pg,
                "tol": tol,
            }
            for q in qs
        ]
        logger.info(f"Computed thresholds for m={params.m} at {len(rows)} value(s) of q")
        document = {"provenance": self.provenance(config), "m": params.m, "rows": rows}
        return CommandOutput(columns=["q", "p_c0", "p_c1", "p_b", "p_G", "tol"], rows=rows, document=document)
