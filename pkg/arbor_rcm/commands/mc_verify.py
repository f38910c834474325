"""mc-verify: Monte Carlo estimates next to their analytic oracles."""

import logging

from arbor_rcm.commands.base import BaseCommand, CommandOutput
from arbor_rcm.models.run import RunConfig
from arbor_rcm.services import analytic, gwsim

logger = logging.getLogger(__name__)

DEFAULT_DEPTH = 12
DEFAULT_SAMPLES = 100_000


class McVerifyCommand(BaseCommand):
    """Estimates theta_D, and gamma_kD / cutset_k when k is given.

    The oracle is finite_depth_theta for theta_D and gamma_k for the
    k-black quantities; ``deviation`` is in units of the standard error
    after removing the bias bound.
    """

    @property
    def name(self) -> str:
        return "mc-verify"

    def execute(self, config: RunConfig) -> CommandOutput:
        params = config.params
        params.require("p")
        law = self.law(config)
        depth = params.depth if params.depth is not None else DEFAULT_DEPTH
        horizon = params.horizon if params.horizon is not None else depth
        samples = params.samples if params.samples is not None else DEFAULT_SAMPLES
        quantities = params.quantities or (["theta_D"] if params.k is None else ["theta_D", "gamma_kD"])

        rows = []
        estimates = []
        for quantity in quantities:
            if quantity == "theta_D":
                est = gwsim.estimate(quantity, law, params.p, samples, depth, seed=config.seed, workers=config.threads)
                oracle = analytic.finite_depth_theta(law, params.p, depth)
            else:
                params.require("k")
                est = gwsim.estimate(
                    quantity, law, params.p, samples, horizon, k=params.k, seed=config.seed, workers=config.threads
                )
                oracle = analytic.gamma_k(law, params.p, params.k)
            excess = max(abs(est.mean - oracle) - est.bias_bound, 0.0)
            deviation = excess / est.std_error if est.std_error > 0 else (0.0 if excess == 0.0 else float("inf"))
            rows.append(
                {
                    "quantity": quantity,
                    "p": params.p,
                    "k": est.k if est.k is not None else "",
                    "horizon": est.horizon,
                    "samples": samples,
                    "estimate": est.mean,
                    "std_error": est.std_error,
                    "bias_bound": est.bias_bound,
                    "oracle": oracle,
                    "deviation": deviation,
                    "seed": config.seed,
                }
            )
            estimates.append({**est.model_dump(mode="json"), "oracle": oracle, "deviation": deviation})
            logger.info(f"{quantity}: estimate {est.mean:.6f}, oracle {oracle:.6f}, {deviation:.2f} sigma")

        document = {"provenance": self.provenance(config), "estimates": estimates}
        columns = [
            "quantity", "p", "k", "horizon", "samples", "estimate",
            "std_error", "bias_bound", "oracle", "deviation", "seed",
        ]  # fmt: skip
        return CommandOutput(columns=columns, rows=rows, document=document)
