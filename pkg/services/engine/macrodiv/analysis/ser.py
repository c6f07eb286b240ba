"""
High-SNR symbol error rate for MPSK: the theta metric, Laplace-type
asymptotes, exact asymptotes and the semi-analytic Monte Carlo SER.
"""
from typing import Dict, List, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..config import settings
from ..errors import DomainError
from ..logging_config import get_logger
from ..numerics.closed_form_integrals import (
    i_const_closed,
    i_exact_mmse,
    i_mmse_closed,
    phi_all,
    trace_ratio,
    upsilon_all,
)
from ..numerics.special_fn import exp_e1_scaled, quad_adaptive
from ..schemas import Modulation, PowerProfile, QuadratureSpec, Receiver, SerAsymptote, SerMethod, ThetaMetric
from ..simulation.scenarios import exponential_profile
from ..simulation.worker import draw_channels

logger = get_logger(__name__)

# below this relative spread of P_i1/P_i2 the Upsilon/Phi sums cancel too many digits
CLOSED_FORM_GAP = 1e-2


def theta_metric(p: PowerProfile) -> ThetaMetric:
    """Tr(P2) / (|P1| Tr(P1^-1 P2))"""
    det = float(np.prod(p.P1))
    return ThetaMetric(value=float(np.sum(p.P2)) / (det * trace_ratio(p)))


def parallelism(p: PowerProfile) -> float:
    """Tr(P1^-1 P2); small values mean MMSE and ZF separate most"""
    return trace_ratio(p)


def _noise_power(sigma2: float, n_r: int) -> float:
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    return sigma2 ** (n_r - 1)


def ser_zf_laplace(p: PowerProfile, sigma2: float, mod: Modulation) -> float:
    return theta_metric(p).value * i_const_closed(p.n_r, mod) * _noise_power(sigma2, p.n_r)


def ser_mmse_laplace(p: PowerProfile, sigma2: float, mod: Modulation) -> float:
    return theta_metric(p).value * i_mmse_closed(p, mod) * _noise_power(sigma2, p.n_r)


def upsilon(p: PowerProfile, i: int) -> float:
    """Upsilon_i for 0-based antenna index i"""
    return float(upsilon_all(p)[i])


def phi_i(p: PowerProfile, i: int) -> float:
    return float(phi_all(p)[i])


def k0_tilde(p: PowerProfile) -> float:
    """
    K~0 = (1/|P1|) E{h2^H h2 / h2^H P1^-1 h2}, summed over unordered
    antenna pairs.
    """
    ups = upsilon_all(p)
    P1, P2 = p.P1, p.P2
    r = P1 / P2
    total = float(np.dot(ups, P2))
    n = p.n_r
    for u in range(n):
        for v in range(u + 1, n):
            weight = ups[u] * P1[v] + ups[v] * P1[u]
            total += weight * (np.log(r[u]) - np.log(r[v])) / (r[u] - r[v])
    return total


def k0_closed(p: PowerProfile, s: float) -> float:
    """K0(-s) = sum_i [e^{s r_i} E1(s r_i)(Phi_i - s Upsilon_i P_i1) + Upsilon_i P_i2]"""
    if not s > 0:
        raise DomainError(f"k0_closed needs s > 0, got {s}")
    ups = upsilon_all(p)
    phis = phi_all(p)
    r = p.P1 / p.P2
    scaled = exp_e1_scaled(s * r)
    return float(np.sum(scaled * (phis - s * ups * p.P1) + ups * p.P2))


def _laplace_kernel(p: PowerProfile, th: float) -> float:
    """
    Integrand of K0 without the exponential. sum_i P_i2 Upsilon_i / (P_i2 th + P_i1)
    collapses to 1 / prod_i (P_i1 + th P_i2), which stays finite for repeated ratios.
    """
    den = p.P1 + th * p.P2
    return float(np.sum(p.P1 * p.P2 / den) / np.prod(den))


def k0_integral(p: PowerProfile, s: float, spec: Optional[QuadratureSpec] = None) -> float:
    """K0(-s) from its defining Laplace-transform integral"""
    if not s > 0:
        raise DomainError(f"k0_integral needs s > 0, got {s}")

    # u = s th keeps the exponential at unit scale for any s
    def f(u: float) -> float:
        return np.exp(-u) * _laplace_kernel(p, u / s)

    return quad_adaptive(f, 0.0, np.inf, spec) / s


def k0_tilde_integral(p: PowerProfile, spec: Optional[QuadratureSpec] = None) -> float:
    """K~0 as the s -> 0 limit of K0(-s), by quadrature"""
    return quad_adaptive(lambda th: _laplace_kernel(p, th), 0.0, np.inf, spec)


def i_exact_mmse_quadrature(p: PowerProfile, mod: Modulation, spec: Optional[QuadratureSpec] = None) -> float:
    """(1/pi) int_0^T (sin^2/g)^{n-1} K0(-g/sin^2) dth, K0 by nested quadrature"""
    n = p.n_r
    g = mod.g

    def f(th: float) -> float:
        s2 = np.sin(th) ** 2
        if s2 == 0.0:
            return 0.0
        return (s2 / g) ** (n - 1) * k0_integral(p, g / s2, spec)

    return quad_adaptive(f, 0.0, mod.t_max, spec) / np.pi


def ratios_separated(p: PowerProfile, gap: float = CLOSED_FORM_GAP) -> bool:
    """True when every pair of ratios P_i1/P_i2 differs by more than gap (relative)"""
    r = np.sort(p.P1 / p.P2)
    return bool(np.all(np.diff(r) > gap * r[1:]))


def k0_tilde_mc(p: PowerProfile, n_samples: int, seed: int) -> Dict[str, float]:
    """Sample mean and standard error of (1/|P1|) h2^H h2 / h2^H P1^-1 h2"""
    rng = np.random.Generator(np.random.Philox(seed))
    _, h2 = draw_channels(p.p1, p.p2, n_samples, rng)
    power = np.abs(h2) ** 2
    ratio = power.sum(axis=1) / (power / p.P1).sum(axis=1) / float(np.prod(p.P1))
    return {"mean": float(ratio.mean()), "stderr": float(ratio.std(ddof=1) / np.sqrt(n_samples))}


def ser_zf_exact_asym(p: PowerProfile, sigma2: float, mod: Modulation) -> float:
    if ratios_separated(p):
        k0 = k0_tilde(p)
    else:
        logger.debug("k0 tilde by quadrature", p1=p.p1, p2=p.p2)
        k0 = k0_tilde_integral(p)
    return k0 * i_const_closed(p.n_r, mod) * _noise_power(sigma2, p.n_r)


def ser_mmse_exact_asym(p: PowerProfile, sigma2: float, mod: Modulation) -> float:
    if ratios_separated(p):
        ie = i_exact_mmse(p, mod)
    else:
        logger.debug("exact mmse integral by quadrature", p1=p.p1, p2=p.p2)
        ie = i_exact_mmse_quadrature(p, mod)
    return ie * _noise_power(sigma2, p.n_r)


_SER_FUNCS = {
    SerMethod.LAPLACE_ZF: ser_zf_laplace,
    SerMethod.LAPLACE_MMSE: ser_mmse_laplace,
    SerMethod.EXACT_ZF: ser_zf_exact_asym,
    SerMethod.EXACT_MMSE: ser_mmse_exact_asym,
}


def asymptote(p: PowerProfile, mod: Modulation, method: SerMethod) -> SerAsymptote:
    """Diversity gain n_R - 1 and array gain such that SER ~ (G_a gamma)^{-G_d}"""
    d = p.n_r - 1
    coefficient = _SER_FUNCS[SerMethod(method)](p, 1.0, mod)
    return SerAsymptote(diversity_gain=float(d), array_gain=coefficient ** (-1.0 / d), method=method)


def method_for(receiver: Receiver, exact: bool) -> SerMethod:
    if receiver == Receiver.ZF:
        return SerMethod.EXACT_ZF if exact else SerMethod.LAPLACE_ZF
    return SerMethod.EXACT_MMSE if exact else SerMethod.LAPLACE_MMSE


def ser_curve(p: PowerProfile, mod: Modulation, snr_db: Sequence[float], method: SerMethod) -> np.ndarray:
    """Asymptotic SER along an average-SNR sweep, gamma = 1/sigma2"""
    func = _SER_FUNCS[SerMethod(method)]
    coefficient = func(p, 1.0, mod)
    gamma = 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)
    return coefficient * gamma ** (-(p.n_r - 1))


def _conditional_ser(z: np.ndarray, mod: Modulation, nodes: int) -> np.ndarray:
    x, w = leggauss(nodes)
    half = 0.5 * mod.t_max
    theta = half * (x + 1.0)
    weights = half * w / np.pi
    inv_s2 = 1.0 / np.sin(theta) ** 2
    return np.exp(-mod.g * z[:, None] * inv_s2[None, :]) @ weights


def ser_semianalytic(samples, mod: Modulation, nodes: Optional[int] = None, chunk: Optional[int] = None) -> float:
    """
    Average over SINR samples of the conditional MPSK SER
    (1/pi) int_0^T exp(-g z / sin^2) dth (Gauss-Legendre inner rule).
    """
    z = np.asarray(samples, dtype=float).ravel()
    if z.size == 0:
        raise DomainError("ser_semianalytic needs at least one sample")
    if np.any(~(z > 0)):
        raise DomainError("SINR samples must be positive")
    nodes = nodes or settings.GL_NODES
    chunk = chunk or settings.MC_CHUNK
    per_sample = np.concatenate([_conditional_ser(z[s : s + chunk], mod, nodes) for s in range(0, z.size, chunk)])
    # np.sum reduces pairwise, so the result is order-stable
    return float(np.sum(per_sample) / z.size)


def theta_cloud(
    n_draws: int,
    seed: int,
    mod: Modulation,
    sigma2: float,
    alpha_desired: float = 0.2,
    total: float = 3.0,
    n_r: int = 3,
) -> List[Dict[str, float]]:
    """
    Random interferer profiles against a fixed exponential desired
    profile: uniform powers scaled to equal total power.
    """
    p1 = exponential_profile(total, alpha_desired, n_r)
    rng = np.random.Generator(np.random.Philox(seed))
    rows = []
    for _ in range(n_draws):
        raw = rng.uniform(0.0, 1.0, size=n_r)
        raw = np.where(raw > 0, raw, np.finfo(float).tiny)
        p2 = raw * (total / raw.sum())
        p = PowerProfile.from_arrays(p1, p2)
        rows.append(
            {
                "tr_p1p2": float(np.dot(p.P1, p.P2)),
                "theta": theta_metric(p).value,
                "ser_zf_laplace": ser_zf_laplace(p, sigma2, mod),
                "ser_mmse_laplace": ser_mmse_laplace(p, sigma2, mod),
            }
        )
    logger.info("theta cloud generated", draws=n_draws, seed=seed)
    return rows
