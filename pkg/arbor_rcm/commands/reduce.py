"""reduce: attachment parameters and the collapsed attachment tree."""

import logging

from arbor_rcm.commands.base import BaseCommand, CommandOutput
from arbor_rcm.config import get_settings
from arbor_rcm.models.box import RcSpec
from arbor_rcm.models.run import RunConfig
from arbor_rcm.services import analytic, rays, rcm
from arbor_rcm.services.reduction import marginals, rc_distribution

logger = logging.getLogger(__name__)


class ReduceCommand(BaseCommand):
    """r(0..n-k) and p_inf, plus an enumeration cross-check when the full box is small enough.

    ``max_marginal_gap`` compares the tree-edge marginals of the attachment
    tree with those of the full depth-n box.
    """

    @property
    def name(self) -> str:
        return "reduce"

    def execute(self, config: RunConfig) -> CommandOutput:
        params = config.params
        params.require("p", "q", "k", "n")
        relation = rays.parse_relation(params.relation, params.m)
        reduced = rcm.reduce_to_attachment_tree(params.m, params.p, params.q, params.k, params.n, relation)
        attachment = analytic.effective_attachment(params.m, params.p, params.q, levels=max(params.n - params.k, 1))
        tol = 1e-12

        rows = [{"levels": 0, "r": 1.0, "tol": 0.0}]
        rows += [{"levels": j, "r": r, "tol": 0.0} for j, r in enumerate(attachment.sequence, start=1)]
        rows = rows[: params.n - params.k + 1]
        rows.append({"levels": "inf", "r": attachment.p_inf, "tol": tol})

        gap = None
        box = rcm.tree_box(params.m, params.n)
        graph, links = rcm.attachment_graph(reduced)
        settings = get_settings()
        if box.edge_count <= settings.enumeration_guard and graph.size <= settings.enumeration_guard:
            full = rcm.exact_distribution(box, RcSpec(p=params.p, q=params.q, relation=relation))
            full_marginals = marginals(full.probs, box.edge_count)
            probs, _ = rc_distribution(graph, params.q, links)
            reduced_marginals = marginals(probs, graph.size)
            size = len(reduced.tree_edges)
            gap = float(max(abs(full_marginals[e] - reduced_marginals[e]) for e in range(size)))
            logger.info(f"Attachment tree vs full box: max tree-edge marginal gap {gap:.3g}")

        document = {
            "provenance": self.provenance(config),
            "reduced_tree": reduced.model_dump(mode="json"),
            "attachment": attachment.model_dump(mode="json"),
            "max_marginal_gap": gap,
        }
        return CommandOutput(columns=["levels", "r", "tol"], rows=rows, document=document)
