"""rc-chain: heat-bath estimates of edge marginals."""

import logging

from arbor_rcm.commands.base import BaseCommand, CommandOutput
from arbor_rcm.commands.rc_exact import edge_rows, rc_spec
from arbor_rcm.models.run import RunConfig
from arbor_rcm.services import rcm

logger = logging.getLogger(__name__)


class RcChainCommand(BaseCommand):
    @property
    def name(self) -> str:
        return "rc-chain"

    def execute(self, config: RunConfig) -> CommandOutput:
        params = config.params
        params.require("n")
        spec = rc_spec(config)
        box = rcm.tree_box(params.m, params.n)
        result = rcm.run_chains(
            box, spec, params.sweeps, chains=params.chains, seed=config.seed, workers=config.threads
        )
        rows = edge_rows(box, result.values, result.std_errors)
        for row in rows:
            row.update(sweeps=params.sweeps, chains=params.chains, seed=config.seed)
        document = {"provenance": self.provenance(config), **result.model_dump(mode="json")}
        columns = ["edge", "parent", "child", "probability", "std_error", "sweeps", "chains", "seed"]
        return CommandOutput(columns=columns, rows=rows, document=document)
