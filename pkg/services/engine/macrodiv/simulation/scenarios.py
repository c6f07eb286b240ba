"""
Experimental configurations: exponential power profiles, the ten
reference scenarios, and random user drops with path loss and shadowing.
"""
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core import db_to_linear
from ..errors import DomainError
from ..logging_config import get_logger
from ..schemas import CoverageRegion, DropSpec, PowerProfile, ScenarioId, ScenarioSpec

logger = get_logger(__name__)

# (alpha desired, alpha interferer, varsigma)
TABLE_SCENARIOS: Dict[ScenarioId, Tuple[float, float, float]] = {
    ScenarioId.S1: (0.2, 0.2, 1.0),
    ScenarioId.S2: (0.2, 1.0, 1.0),
    ScenarioId.S3: (0.2, 5.0, 1.0),
    ScenarioId.S4: (1.0, 1.0, 1.0),
    ScenarioId.S5: (1.0, 0.2, 1.0),
    ScenarioId.S6: (0.2, 0.2, 20.0),
    ScenarioId.S7: (0.2, 1.0, 20.0),
    ScenarioId.S8: (0.2, 5.0, 20.0),
    ScenarioId.S9: (1.0, 1.0, 20.0),
    ScenarioId.S10: (1.0, 0.2, 20.0),
}

COVERAGE_SNR_DB = 3.0
COVERAGE_QUANTILE = 0.05


def exponential_profile(total: float, alpha: float, n_r: int) -> np.ndarray:
    """P_i = K alpha^(i-1) with K = total / sum_i alpha^i"""
    if not alpha > 0:
        raise DomainError(f"decay parameter must be positive, got {alpha}")
    if not total > 0:
        raise DomainError(f"total power must be positive, got {total}")
    if n_r < 2:
        raise DomainError(f"n_R must be >= 2, got {n_r}")
    shape = alpha ** np.arange(n_r, dtype=float)
    return total * shape / shape.sum()


def sigma2_for(p1_total: float, n_r: int, rho_db: float) -> float:
    """sigma2 from rho = Tr(P1) / (n_R sigma2)"""
    return p1_total / (n_r * db_to_linear(rho_db))


def build_scenario(spec: ScenarioSpec) -> Tuple[PowerProfile, float]:
    p1 = exponential_profile(spec.total_p1, spec.alpha_desired, spec.n_r)
    p2 = exponential_profile(spec.total_p1 / spec.varsigma, spec.alpha_interferer, spec.n_r)
    return PowerProfile.from_arrays(p1, p2), sigma2_for(spec.total_p1, spec.n_r, spec.rho_db)


def table1_scenario(
    scenario_id: ScenarioId, rho_db: float = 5.0, n_r: int = 3, total_p1: float = 3.0
) -> ScenarioSpec:
    try:
        alpha_d, alpha_i, varsigma = TABLE_SCENARIOS[ScenarioId(scenario_id)]
    except ValueError as e:
        raise DomainError(f"unknown scenario {scenario_id!r}") from e
    return ScenarioSpec(
        alpha_desired=alpha_d,
        alpha_interferer=alpha_i,
        varsigma=varsigma,
        rho_db=rho_db,
        n_r=n_r,
        total_p1=total_p1,
    )


# Random drops
def uniform_in_triangle(vertices: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.random((n, 2))
    flip = u.sum(axis=1) > 1.0
    u[flip] = 1.0 - u[flip]
    a, b, c = vertices
    return a + u[:, :1] * (b - a) + u[:, 1:] * (c - a)


def coverage_vertices(spec: DropSpec) -> np.ndarray:
    bs = np.asarray(spec.bs_positions, dtype=float)
    if spec.coverage == CoverageRegion.TRIANGLE:
        return bs
    return 0.5 * (bs + np.roll(bs, -1, axis=0))


def path_gains(
    positions: np.ndarray,
    spec: DropSpec,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """
    d^-gamma 10^(X/10) from every position (rows) to every base station
    (columns). X ~ N(0, sigma_SF^2); no shadowing when rng is None.
    """
    bs = np.asarray(spec.bs_positions, dtype=float)
    d = np.linalg.norm(positions[:, None, :] - bs[None, :, :], axis=-1)
    d = np.maximum(d, spec.min_distance)
    gains = d ** (-spec.path_loss_exponent)
    if rng is not None and spec.shadow_sigma_db > 0:
        gains = gains * 10.0 ** (rng.normal(0.0, spec.shadow_sigma_db, size=gains.shape) / 10.0)
    return gains


def calibrate_transmit_power(spec: DropSpec) -> float:
    """
    Common transmit constant c such that max-over-BS SNR exceeds 3 dB at
    95% of probe locations in the coverage region, at the calibration
    noise power.
    """
    rng = np.random.Generator(np.random.Philox(spec.calibration_seed))
    probes = uniform_in_triangle(coverage_vertices(spec), spec.calibration_probes, rng)
    best = path_gains(probes, spec, rng).max(axis=1)
    floor = float(np.quantile(best, COVERAGE_QUANTILE))
    c = db_to_linear(COVERAGE_SNR_DB) * spec.calibration_sigma2 / floor
    logger.info("drop calibration", transmit_power=c, probes=spec.calibration_probes)
    return c


def coverage_fraction(spec: DropSpec, c: float, seed: int, n_probe: int = 10_000) -> float:
    """Share of probe locations whose best link SNR exceeds 3 dB"""
    rng = np.random.Generator(np.random.Philox(seed))
    probes = uniform_in_triangle(coverage_vertices(spec), n_probe, rng)
    snr = c * path_gains(probes, spec, rng).max(axis=1) / spec.calibration_sigma2
    return float(np.mean(snr >= db_to_linear(COVERAGE_SNR_DB)))


def random_drop(spec: DropSpec, transmit_power: Optional[float] = None) -> PowerProfile:
    """Two users uniform over the coverage region; one receive antenna per BS"""
    c = transmit_power or spec.transmit_power or calibrate_transmit_power(spec)
    rng = np.random.Generator(np.random.Philox(spec.seed))
    users = uniform_in_triangle(coverage_vertices(spec), 2, rng)
    gains = c * path_gains(users, spec, rng)
    return PowerProfile.from_arrays(gains[0], gains[1])


def drop_set(spec: DropSpec, n_drops: int) -> Tuple[List[PowerProfile], float]:
    """D1..Dn from child seeds of the drop seed, sharing one calibration"""
    c = spec.transmit_power or calibrate_transmit_power(spec)
    children = np.random.SeedSequence(spec.seed).generate_state(n_drops, dtype=np.uint64)
    drops = [random_drop(spec.model_copy(update={"seed": int(s)}), transmit_power=c) for s in children]
    return drops, c
