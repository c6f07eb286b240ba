from typing import Dict, List

import numpy as np

from ..analysis.ser import method_for, ser_curve, ser_semianalytic
from ..logging_config import get_logger
from ..schemas import Modulation, PowerProfile, Receiver, RunConfig, SerEstimator
from ..simulation.montecarlo import conditional_ser_mc, run_mc
from .common import modulation, resolve_profile, seed_of, write_csv

logger = get_logger(__name__)


def mc_ser(
    p: PowerProfile,
    sigma2: float,
    receiver: Receiver,
    mod: Modulation,
    samples: int,
    seed: int,
    estimator: SerEstimator,
    workers: int = 1,
) -> float:
    if estimator == SerEstimator.CONDITIONAL:
        return conditional_ser_mc(p, sigma2, receiver, mod, samples, seed=seed)
    run = run_mc(p, sigma2, receiver, samples, seed=seed, workers=workers)
    return ser_semianalytic(run.samples, mod)


def cmd_ser_curve(cfg: RunConfig) -> Dict[str, object]:
    """
    SER against average SNR (gamma = 1/sigma2 in dB): Monte Carlo, the
    Laplace-type asymptote and the exact asymptote.
    """
    p, _, label = resolve_profile(cfg)
    mod = modulation(cfg)
    snr_db = cfg.sweep.points()

    laplace = ser_curve(p, mod, snr_db, method_for(cfg.receiver, exact=False))
    exact = ser_curve(p, mod, snr_db, method_for(cfg.receiver, exact=True))

    header: List[str] = ["snr_db"]
    columns = [snr_db]
    if not cfg.no_mc:
        samples = cfg.mc.samples or 100_000
        seed = seed_of(cfg)
        mc = [
            mc_ser(p, 10.0 ** (-s / 10.0), cfg.receiver, mod, samples, seed, cfg.ser_estimator, cfg.mc.workers)
            for s in snr_db
        ]
        header.append("ser_mc")
        columns.append(np.asarray(mc))
    header += ["ser_laplace", "ser_exact_asym"]
    columns += [laplace, exact]

    rows = write_csv(header, zip(*columns), cfg.output)
    logger.info("ser curve written", profile=label, receiver=cfg.receiver.value, rows=rows)
    return {"rows": rows}
