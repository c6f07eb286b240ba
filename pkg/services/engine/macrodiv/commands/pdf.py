from typing import Dict

import numpy as np

from ..analysis.cdf_analytic import CdfEvaluator, pdf_numeric
from ..logging_config import get_logger
from ..schemas import RunConfig
from ..simulation.montecarlo import histogram_density, run_mc
from .common import make_grid, resolve_system, seed_of, write_csv

logger = get_logger(__name__)


def cmd_pdf(cfg: RunConfig) -> Dict[str, object]:
    p, system, label = resolve_system(cfg)
    sigma2 = system.sigma2
    ev = CdfEvaluator.from_system(p, system)
    edges = make_grid(cfg.grid)
    z = 0.5 * (edges[1:] + edges[:-1])
    h = 0.25 * float(np.min(np.diff(edges)))
    density = pdf_numeric(ev, z, h)

    header = ["z", "pdf_numeric"]
    columns = [z, density]
    if cfg.mc.samples > 0:
        run = run_mc(p, sigma2, cfg.receiver, cfg.mc.samples, seed=seed_of(cfg), workers=cfg.mc.workers)
        header.append("pdf_empirical")
        columns.append(histogram_density(run, edges))

    rows = write_csv(header, zip(*columns), cfg.output)
    logger.info("pdf written", scenario=label, receiver=cfg.receiver.value, rows=rows)
    return {"rows": rows}
