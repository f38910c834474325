"""CLI command handlers."""

from arbor_rcm.commands.base import BaseCommand, CommandOutput
from arbor_rcm.commands.distinguish import DistinguishCommand
from arbor_rcm.commands.gamma_curve import GammaCurveCommand
from arbor_rcm.commands.mc_verify import McVerifyCommand
from arbor_rcm.commands.rc_chain import RcChainCommand
from arbor_rcm.commands.rc_exact import RcExactCommand
from arbor_rcm.commands.reduce import ReduceCommand
from arbor_rcm.commands.thresholds import ThresholdsCommand

# Command registry
_commands: dict[str, BaseCommand] = {}


def get_commands() -> dict[str, BaseCommand]:
    """Get or initialize the command handlers."""
    if not _commands:
        for command in (
            ThresholdsCommand(),
            GammaCurveCommand(),
            McVerifyCommand(),
            RcExactCommand(),
            RcChainCommand(),
            ReduceCommand(),
            DistinguishCommand(),
        ):
            _commands[command.name] = command
    return _commands


__all__ = ["BaseCommand", "CommandOutput", "get_commands"]
