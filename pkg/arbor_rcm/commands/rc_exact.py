"""rc-exact: exact random-cluster table or marginals on a box."""

import logging

from arbor_rcm.commands.base import BaseCommand, CommandOutput
from arbor_rcm.models.box import RcSpec
from arbor_rcm.models.run import RunConfig
from arbor_rcm.services import rays, rcm
from arbor_rcm.services.reduction import marginals

logger = logging.getLogger(__name__)


def rc_spec(config: RunConfig) -> RcSpec:
    params = config.params
    params.require("p", "q")
    relation = rays.parse_relation(params.relation, params.m)
    return RcSpec(p=params.p, q=params.q, relation=relation, xi_tail=params.tail)


def edge_rows(box, values, std_errors=None) -> list[dict]:
    return [
        {
            "edge": e,
            "parent": a,
            "child": b,
            "probability": values[e],
            "std_error": 0.0 if std_errors is None else std_errors[e],
        }
        for e, (a, b) in enumerate(box.edges)
    ]


class RcExactCommand(BaseCommand):
    """Full configuration table, or per-edge marginals with --marginals."""

    @property
    def name(self) -> str:
        return "rc-exact"

    def execute(self, config: RunConfig) -> CommandOutput:
        params = config.params
        params.require("n")
        spec = rc_spec(config)
        box = rcm.tree_box(params.m, params.n)
        table = rcm.exact_distribution(box, spec, workers=config.threads)
        provenance = self.provenance(config)
        logger.info(f"Enumerated Lambda_{box.n} of T_{box.m}': {1 << box.edge_count} configurations")

        if params.marginals:
            values = marginals(table.probs, box.edge_count).tolist()
            rows = edge_rows(box, values)
            document = {"provenance": provenance, "method": "exact", "log_z": table.log_z, "edges": rows}
            return CommandOutput(
                columns=["edge", "parent", "child", "probability", "std_error"], rows=rows, document=document
            )

        document = {
            "provenance": provenance,
            "edges": [list(e) for e in box.edges],
            "log_z": table.log_z,
            "probabilities": table.probs.tolist(),
            "tol": 0.0,
        }
        return CommandOutput(
            columns=["config", "weight", "probability", "tol"], rows=[], document=document, csv_text=rcm.table_to_csv(table)
        )
