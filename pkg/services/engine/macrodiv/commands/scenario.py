from typing import Any, Dict, Optional

from ..analysis.ser import asymptote, parallelism, ratios_separated, theta_metric
from ..core import linear_to_db, validate_profile
from ..logging_config import get_logger
from ..schemas import Modulation, PowerProfile, RunConfig, SerMethod
from ..simulation.scenarios import drop_set
from .common import modulation, resolve_profile, write_json

logger = get_logger(__name__)


def describe_profile(p: PowerProfile, mod: Modulation, sigma2: Optional[float] = None) -> Dict[str, Any]:
    """Profile summary: degeneracy, theta, Tr(P1^-1 P2) and the four asymptotes"""
    report = validate_profile(p)
    out: Dict[str, Any] = {
        "p1": list(p.p1),
        "p2": list(p.p2),
        "varsigma": sum(p.p1) / sum(p.p2),
        "degeneracy": report.model_dump(),
        "theta": theta_metric(p).value,
        "trace_p1inv_p2": parallelism(p),
        "exact_by_closed_form": ratios_separated(p),
        "asymptotes": {},
    }
    if sigma2 is not None:
        out["sigma2"] = sigma2
        out["rho_db"] = linear_to_db(sum(p.p1) / (p.n_r * sigma2))
    for method in SerMethod:
        out["asymptotes"][method.value] = asymptote(p, mod, method).model_dump(mode="json")
    return out


def cmd_scenario(cfg: RunConfig) -> Dict[str, Any]:
    p, sigma2, label = resolve_profile(cfg)
    payload = {"label": label, **describe_profile(p, modulation(cfg), sigma2)}
    write_json(payload, cfg.output)
    logger.info("scenario written", label=label)
    return payload


def cmd_drop(cfg: RunConfig) -> Dict[str, Any]:
    mod = modulation(cfg)
    drops, c = drop_set(cfg.drop, cfg.n_drops)
    payload = {
        "transmit_power": c,
        "drop_spec": cfg.drop.model_dump(mode="json"),
        "drops": [{"label": f"D{i + 1}", **describe_profile(p, mod)} for i, p in enumerate(drops)],
    }
    write_json(payload, cfg.output)
    logger.info("drops written", count=len(drops), transmit_power=c)
    return payload
