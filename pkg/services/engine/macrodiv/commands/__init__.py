# CLI command handlers
from typing import Any, Callable, Dict

from ..schemas import Command, RunConfig
from .cdf import cmd_cdf
from .pdf import cmd_pdf
from .scenario import cmd_drop, cmd_scenario
from .ser_curve import cmd_ser_curve
from .theta_cloud import cmd_theta_cloud
from .validate import cmd_validate

HANDLERS: Dict[Command, Callable[[RunConfig], Any]] = {
    Command.CDF: cmd_cdf,
    Command.PDF: cmd_pdf,
    Command.SER_CURVE: cmd_ser_curve,
    Command.VALIDATE: cmd_validate,
    Command.SCENARIO: cmd_scenario,
    Command.DROP: cmd_drop,
    Command.THETA_CLOUD: cmd_theta_cloud,
}

__all__ = ["HANDLERS"]
