"""arbor-rcm command-line front end."""

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError

from arbor_rcm import __version__
from arbor_rcm.commands import CommandOutput, get_commands
from arbor_rcm.config import get_settings
from arbor_rcm.errors import ConvergenceError, GuardExceededError
from arbor_rcm.models.run import RunConfig

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_GUARD = 3
EXIT_CONVERGENCE = 4

# flag dest -> RunParams field
PARAM_FLAGS = (
    "m", "law", "p", "q", "n", "k", "depth", "horizon", "samples", "relation", "tail",
    "tol", "p_att", "marginals", "chains", "sweeps", "q_grid", "p_grid", "quantities",
)  # fmt: skip


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arbor-rcm",
        description="Branching-process thresholds and random-cluster measures on regular trees.",
    )
    parser.add_argument("command", nargs="?", choices=sorted(get_commands()), help="command to run")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", type=Path, help="JSON or YAML run configuration; flags override it")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")

    tree = parser.add_argument_group("tree and law")
    tree.add_argument("--m", type=int, help="branching number of T_m' (default 2)")
    tree.add_argument("--law", type=json.loads, help="offspring law as JSON (default deterministic m)")

    model = parser.add_argument_group("model parameters")
    model.add_argument("--p", type=float, help="edge parameter")
    model.add_argument("--q", type=float, help="cluster weight")
    model.add_argument("--n", type=int, help="box depth")
    model.add_argument("--k", type=int, help="cutset / attachment depth")
    model.add_argument("--relation", help="boundary relation: wired, free or JSON")
    model.add_argument("--tail", choices=["all_open", "all_closed"], help="boundary tail outside the box")
    model.add_argument("--p-att", type=float, help="attachment edge parameter for distinguish")
    model.add_argument("--q-grid", help="q values as a:b:step or a comma list")
    model.add_argument("--p-grid", help="p values as a:b:step or a comma list")

    mc = parser.add_argument_group("simulation")
    mc.add_argument("--depth", type=int, help="survival depth D")
    mc.add_argument("--horizon", type=int, help="blue horizon D for k-black estimates")
    mc.add_argument("--samples", type=int, help="Monte Carlo replications")
    mc.add_argument("--quantities", nargs="+", help="theta_D, gamma_kD and/or cutset_k")
    mc.add_argument("--sweeps", type=int, help="heat-bath sweeps per chain")
    mc.add_argument("--chains", type=int, help="independent heat-bath chains")
    mc.add_argument("--marginals", action="store_true", default=None, help="report edge marginals only")

    run = parser.add_argument_group("execution")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--tol", type=float, help="solver tolerance")
    run.add_argument("--threads", type=int, help="worker processes (default ARBOR_RCM_THREADS)")
    run.add_argument("--out", type=Path, help="output file (default stdout)")
    run.add_argument("--format", choices=["csv", "json"], help="output format")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    """Merge the config file (if any) with command-line flags."""
    settings = get_settings()
    data: dict[str, Any] = {}
    if args.config is not None:
        loaded = yaml.safe_load(args.config.read_text(encoding="utf-8"))
        if not isinstance(loaded, dict):
            raise ValueError(f"{args.config} does not hold a mapping")
        data = loaded

    params = dict(data.get("params") or {})
    for name in PARAM_FLAGS:
        value = getattr(args, name)
        if value is not None:
            params[name] = value
    data["params"] = params

    overrides = {"command": args.command, "seed": args.seed, "output": args.out, "format": args.format}
    overrides["threads"] = args.threads
    data.update({key: value for key, value in overrides.items() if value is not None})
    data.setdefault("seed", settings.seed)
    data.setdefault("format", settings.format)
    if "command" not in data:
        raise ValueError("no command given")
    return RunConfig.model_validate(data)


def _cell(value: Any) -> Any:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return value


def render(output: CommandOutput, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(output.document, indent=2) + "\n"
    if output.csv_text is not None:
        return output.csv_text
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(output.columns)
    for row in output.rows:
        writer.writerow([_cell(row[column]) for column in output.columns])
    return buffer.getvalue()


def execute(config: RunConfig) -> None:
    command = get_commands()[config.command]
    logger.info(f"Running {command.name} (seed {config.seed})")
    text = render(command.execute(config), config.format)
    if config.output is None:
        sys.stdout.write(text)
    else:
        config.output.write_text(text, encoding="utf-8")
        logger.info(f"Wrote {config.output}")


def main(argv: list[str] | None = None) -> int:
    """Parse, run and map failures to exit codes."""
    args = build_parser().parse_args(argv)
    try:
        level = args.log_level or get_settings().log_level
        logging.getLogger().setLevel(level.upper())
        config = load_config(args)
        execute(config)
    except GuardExceededError as e:
        logger.error(f"Guard exceeded: {e}")
        return EXIT_GUARD
    except ConvergenceError as e:
        logger.error(f"Solver did not converge: {e}")
        return EXIT_CONVERGENCE
    except ValidationError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_INVALID
    except (ValueError, OSError, yaml.YAMLError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_INVALID
    return EXIT_OK


def run() -> None:
    """Console-script entry point."""
    sys.exit(main())


if __name__ == "__main__":
    run()
