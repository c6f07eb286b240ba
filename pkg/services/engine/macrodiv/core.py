"""
Shared conversions, modulation parameters and the degeneracy guard
"""
from itertools import combinations
from typing import List, Optional, Tuple

import numpy as np

from .config import settings
from .errors import DomainError, InvalidModulationError
from .schemas import DegeneracyReport, Modulation, PowerProfile


def db_to_linear(x_db: float) -> float:
    if not np.isfinite(x_db):
        raise DomainError(f"dB value must be finite, got {x_db}")
    return float(10.0 ** (x_db / 10.0))


def linear_to_db(x: float) -> float:
    if not x > 0:
        raise DomainError(f"linear value must be positive, got {x}")
    return float(10.0 * np.log10(x))


def mpsk_params(M: int) -> Modulation:
    if int(M) != M or M < 2:
        raise InvalidModulationError(f"MPSK order must be an integer >= 2, got {M}")
    return Modulation(g=float(np.sin(np.pi / M) ** 2), t_max=float((M - 1) * np.pi / M))


def swap_users(p: PowerProfile) -> PowerProfile:
    """Analyse user 2 by treating user 1 as the interferer"""
    return PowerProfile(p1=p.p2, p2=p.p1, jitter_history=p.jitter_history)


def _small(value: float, scale: float, eps_rel: float) -> bool:
    return abs(value) <= eps_rel * scale


def validate_profile(p: PowerProfile, eps_rel: Optional[float] = None) -> DegeneracyReport:
    """
    Flag antenna pairs whose closed-form denominators vanish relative to
    their operands. Indices in the report are 1-based.
    """
    eps_rel = settings.EPS_REL if eps_rel is None else eps_rel
    P1, P2 = p.P1, p.P2
    n = p.n_r
    pairs: List[Tuple[int, int]] = []
    triples: List[Tuple[int, int, int]] = []
    reasons: List[str] = []

    def n_t(i: int, k: int) -> float:
        return P1[i] - P1[k]

    def m_t(i: int, k: int) -> float:
        return P1[i] * P2[k] - P1[k] * P2[i]

    for i, k in combinations(range(n), 2):
        flagged = []
        if _small(n_t(i, k), max(P1[i], P1[k]), eps_rel):
            flagged.append("n_tilde")
        if _small(m_t(i, k), max(P1[i] * P2[k], P1[k] * P2[i]), eps_rel):
            flagged.append("m_tilde")
        # the integral families divide by b*c - a*d = sigma2 * (P_k2 - P_i2)
        if _small(P2[i] - P2[k], max(P2[i], P2[k]), eps_rel):
            flagged.append("interferer_power")
        if flagged:
            pairs.append((i + 1, k + 1))
            reasons.append(f"pair ({i + 1},{k + 1}): " + ", ".join(flagged))

    for i in range(n):
        for k, l in combinations([j for j in range(n) if j != i], 2):
            left = n_t(i, l) * m_t(i, k)
            right = n_t(i, k) * m_t(i, l)
            if _small(left - right, max(abs(left), abs(right)), eps_rel):
                triple = tuple(sorted((i + 1, k + 1, l + 1)))
                if triple not in triples:
                    triples.append(triple)
                    reasons.append(f"triple {triple}: partial-fraction denominator")

    return DegeneracyReport(
        degenerate=bool(pairs or triples),
        pairs=pairs,
        triples=sorted(triples),
        reasons=reasons,
    )
