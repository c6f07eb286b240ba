from typing import Dict

from scipy import stats

from ..analysis.ser import theta_cloud
from ..logging_config import get_logger
from ..schemas import RunConfig
from .common import modulation, seed_of, write_csv

logger = get_logger(__name__)

COLUMNS = ["tr_p1p2", "theta", "ser_zf_laplace", "ser_mmse_laplace"]


def cmd_theta_cloud(cfg: RunConfig) -> Dict[str, float]:
    """Laplace SER of user 1 against Tr(P1 P2) and theta for random interferer profiles"""
    sigma2 = cfg.total_p1 / (cfg.n_r * 10.0 ** (cfg.rho_db / 10.0)) if cfg.sigma2 is None else cfg.sigma2
    rows = theta_cloud(cfg.n_draws, seed_of(cfg), modulation(cfg), sigma2, total=cfg.total_p1, n_r=cfg.n_r)
    write_csv(COLUMNS, ([r[c] for c in COLUMNS] for r in rows), cfg.output)

    trace_rank = stats.spearmanr([r["tr_p1p2"] for r in rows], [r["ser_mmse_laplace"] for r in rows])[0]
    theta_rank = stats.spearmanr([r["theta"] for r in rows], [r["ser_mmse_laplace"] for r in rows])[0]
    logger.info("theta cloud", draws=len(rows), spearman_trace=float(trace_rank), spearman_theta=float(theta_rank))
    return {"spearman_trace": float(trace_rank), "spearman_theta": float(theta_rank)}
