"""distinguish: the boundary-pair dependence test over every pair at depth k."""

import itertools
import logging

from arbor_rcm.commands.base import BaseCommand, CommandOutput
from arbor_rcm.errors import InvalidInputError
from arbor_rcm.models.relation import stem_count
from arbor_rcm.models.run import RunConfig
from arbor_rcm.services import analytic, rays, rcm

logger = logging.getLogger(__name__)


class DistinguishCommand(BaseCommand):
    """One row per pair x < y: whether x ~_k y, delta and the dependence verdict.

    The attachment parameter defaults to p_inf of the wired subtree.
    """

    @property
    def name(self) -> str:
        return "distinguish"

    def execute(self, config: RunConfig) -> CommandOutput:
        params = config.params
        params.require("p", "q")
        relation = rays.parse_relation(params.relation, params.m)
        k = params.k if params.k is not None else (None if relation.is_free else relation.k)
        if k is None or k < 1:
            raise InvalidInputError("distinguish needs a depth k >= 1 (--k)")
        p_att = params.p_att
        if p_att is None:
            p_att = analytic.effective_attachment(params.m, params.p, params.q).p_inf
        classes = rays.boundary_identification(relation, k, params.m)

        rows = []
        for x, y in itertools.combinations(range(stem_count(params.m, k)), 2):
            result = rcm.dependence_test(params.m, params.p, params.q, relation, x, y, p_att, k=k)
            rows.append(
                {
                    "x": x,
                    "y": y,
                    "same_class": classes[x] == classes[y],
                    "delta": result.delta,
                    "dependent": result.dependent,
                    "threshold": rcm.DEPENDENCE_THRESHOLD,
                }
            )
        mismatches = sum(row["same_class"] != row["dependent"] for row in rows)
        logger.info(f"Tested {len(rows)} pair(s) at depth {k}; {mismatches} disagree with the class predicate")
        document = {"provenance": self.provenance(config), "k": k, "p_att": p_att, "pairs": rows}
        return CommandOutput(
            columns=["x", "y", "same_class", "delta", "dependent", "threshold"], rows=rows, document=document
        )
