"""
macrodiv command-line entry point.

A run is described by a RunConfig: an optional JSON file given with
--config, overridden by any flags on the command line.
"""
import argparse
import sys
from typing import Any, Dict, List, Optional, Sequence

import orjson
from pydantic import ValidationError

from .commands import HANDLERS
from .errors import ConfigError, MacrodivError
from .logging_config import configure_logging, get_logger
from .schemas import Command, CoverageRegion, Receiver, RunConfig, ScenarioId, SerEstimator

logger = get_logger(__name__)


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is the degeneracy code here
    def error(self, message: str) -> None:
        raise ConfigError(message)


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _scenarios(text: str) -> List[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON run configuration; flags override its values")
    sp.add_argument("--scenario", choices=[s.value for s in ScenarioId])
    sp.add_argument("--rho-db", dest="rho_db", type=float)
    sp.add_argument("--n-r", dest="n_r", type=int)
    sp.add_argument("--total-p1", dest="total_p1", type=float)
    sp.add_argument("--p1", type=_floats, help="desired-user link powers, comma separated")
    sp.add_argument("--p2", type=_floats, help="interferer link powers, comma separated")
    sp.add_argument("--sigma2", type=float)
    sp.add_argument("--receiver", choices=[r.value for r in Receiver])
    sp.add_argument("--modulation", dest="modulation_order", type=int, help="MPSK order M")
    sp.add_argument("--user", type=int, choices=(1, 2))
    sp.add_argument("--samples", dest="mc.samples", type=int)
    sp.add_argument("--seed", dest="mc.seed", type=int)
    sp.add_argument("--workers", dest="mc.workers", type=int)
    sp.add_argument("--output", "-o")
    sp.add_argument("--log-level", dest="log_level")
    sp.add_argument("--log-json", dest="log_json", action="store_true", default=None)


def _add_grid(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--z-min", dest="grid.z_min", type=float)
    sp.add_argument("--z-max", dest="grid.z_max", type=float)
    sp.add_argument("--points", dest="grid.n_points", type=int)
    sp.add_argument("--log-grid", dest="grid.scale", action="store_const", const="log")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="macrodiv", description="Macrodiversity MIMO SINR distributions and SER asymptotics")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name in (Command.CDF, Command.PDF):
        sp = sub.add_parser(name.value, argument_default=argparse.SUPPRESS)
        _add_common(sp)
        _add_grid(sp)

    sp = sub.add_parser(Command.SER_CURVE.value, argument_default=argparse.SUPPRESS)
    _add_common(sp)
    sp.add_argument("--snr-start", dest="sweep.start_db", type=float)
    sp.add_argument("--snr-stop", dest="sweep.stop_db", type=float)
    sp.add_argument("--snr-step", dest="sweep.step_db", type=float)
    sp.add_argument("--no-mc", dest="no_mc", action="store_true")
    sp.add_argument("--ser-estimator", dest="ser_estimator", choices=[e.value for e in SerEstimator])

    sp = sub.add_parser(Command.VALIDATE.value, argument_default=argparse.SUPPRESS)
    _add_common(sp)
    _add_grid(sp)
    sp.add_argument("--scenarios", type=_scenarios, help="comma-separated scenario ids")
    sp.add_argument("--n-drops", dest="n_drops", type=int)
    sp.add_argument("--draws", dest="n_draws", type=int)

    sp = sub.add_parser(Command.SCENARIO.value, argument_default=argparse.SUPPRESS)
    _add_common(sp)

    sp = sub.add_parser(Command.DROP.value, argument_default=argparse.SUPPRESS)
    _add_common(sp)
    sp.add_argument("--n-drops", dest="n_drops", type=int)
    sp.add_argument("--drop-seed", dest="drop.seed", type=int)
    sp.add_argument("--path-loss", dest="drop.path_loss_exponent", type=float)
    sp.add_argument("--shadow-db", dest="drop.shadow_sigma_db", type=float)
    sp.add_argument("--coverage", dest="drop.coverage", choices=[c.value for c in CoverageRegion])
    sp.add_argument("--transmit-power", dest="drop.transmit_power", type=float)

    sp = sub.add_parser(Command.THETA_CLOUD.value, argument_default=argparse.SUPPRESS)
    _add_common(sp)
    sp.add_argument("--draws", dest="n_draws", type=int)
    return parser


def _load_config(path: str) -> Dict[str, Any]:
    try:
        with open(path, "rb") as fh:
            data = orjson.loads(fh.read())
    except (OSError, orjson.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def merge_config(file_values: Dict[str, Any], flags: Dict[str, Any]) -> Dict[str, Any]:
    """Overlay dotted flag names (e.g. 'mc.seed') on the file values"""
    merged: Dict[str, Any] = {k: (dict(v) if isinstance(v, dict) else v) for k, v in file_values.items()}
    for key, value in flags.items():
        head, _, tail = key.partition(".")
        if tail:
            merged.setdefault(head, {})[tail] = value
        else:
            merged[head] = value
    return merged


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    path = args.pop("config", None)
    args.pop("log_level", None)
    args.pop("log_json", None)
    file_values = _load_config(path) if path else {}
    return RunConfig.model_validate(merge_config(file_values, args))


def _logging_flags(argv: Sequence[str]) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for i, arg in enumerate(argv):
        if arg == "--log-level" and i + 1 < len(argv):
            out["level"] = argv[i + 1]
        elif arg.startswith("--log-level="):
            out["level"] = arg.split("=", 1)[1]
        elif arg == "--log-json":
            out["json"] = True
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    configure_logging(**_logging_flags(argv))
    try:
        cfg = parse_config(argv)
        logger.info("command started", command=cfg.command.value)
        HANDLERS[cfg.command](cfg)
    except ValidationError as exc:
        logger.error("invalid configuration", errors=exc.errors(include_url=False, include_context=False))
        return 1
    except MacrodivError as exc:
        logger.error("command failed", **exc.to_dict())
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
