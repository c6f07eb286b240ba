from typing import Dict

import numpy as np

from ..analysis.cdf_analytic import CdfEvaluator
from ..logging_config import get_logger
from ..schemas import RunConfig
from ..simulation.montecarlo import empirical_cdf, run_mc
from .common import make_grid, resolve_system, seed_of, write_csv

logger = get_logger(__name__)


def cmd_cdf(cfg: RunConfig) -> Dict[str, object]:
    """Analytic CDF on the grid, with the empirical CDF and DKW band when samples are requested"""
    p, system, label = resolve_system(cfg)
    sigma2 = system.sigma2
    ev = CdfEvaluator.from_system(p, system)
    grid = make_grid(cfg.grid)
    analytic = np.asarray(ev(grid))

    header = ["z", "cdf_analytic"]
    columns = [grid, analytic]
    if cfg.mc.samples > 0:
        run = run_mc(p, sigma2, cfg.receiver, cfg.mc.samples, seed=seed_of(cfg), workers=cfg.mc.workers)
        curve = empirical_cdf(run, grid)
        header += ["cdf_empirical", "dkw_halfwidth"]
        columns += [np.asarray(curve.f), np.full(grid.size, curve.halfwidth)]

    rows = write_csv(header, zip(*columns), cfg.output)
    logger.info("cdf written", scenario=label, receiver=cfg.receiver.value, rows=rows, jitter=ev.jitter_applied)
    return {"rows": rows, "jitter": ev.jitter_applied}
