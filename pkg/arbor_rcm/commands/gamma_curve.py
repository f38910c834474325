"""gamma-curve: theta(p) and gamma(p) over a p grid."""

import logging

from arbor_rcm.commands.base import BaseCommand, CommandOutput
from arbor_rcm.config import get_settings
from arbor_rcm.models.run import RunConfig, parse_grid
from arbor_rcm.services import analytic, pgf

logger = logging.getLogger(__name__)

DEFAULT_P_GRID = "0:1:0.01"


class GammaCurveCommand(BaseCommand):
    @property
    def name(self) -> str:
        return "gamma-curve"

    def execute(self, config: RunConfig) -> CommandOutput:
        params = config.params
        law = self.law(config)
        pgf.require_valid(law, strict=True)
        ps = params.p_grid if params.p_grid is not None else parse_grid(DEFAULT_P_GRID)
        tol = params.tol if params.tol is not None else get_settings().value_tol
        pg = analytic.p_G(law)

        rows = []
        for p in ps:
            theta = analytic.theta(law, p, tol)
            # gamma is only solved on [0,1); at p = 1 every vertex is blue
            gamma = 1.0 if p == 1.0 else analytic.black_gamma(law, p, tol).value
            rows.append({"p": p, "theta": theta, "gamma": gamma, "tol": tol})
        logger.info(f"Computed gamma at {len(rows)} value(s) of p; p_G = {pg:.10f}")
        document = {"provenance": self.provenance(config), "law": law.to_json(), "p_G": pg, "rows": rows}
        return CommandOutput(columns=["p", "theta", "gamma", "tol"], rows=rows, document=document)
