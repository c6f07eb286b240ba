"""
Exact CDFs of the ZF output SNR and the MMSE output SINR for the desired
user, assembled from the partial-fraction constant tables and the closed
form integral families.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from ..config import settings
from ..core import validate_profile
from ..errors import DegeneracyError, DomainError
from ..logging_config import get_logger
from ..numerics.closed_form_integrals import mmse_family, zf_family
from ..schemas import DegeneracyReport, DistributionCurve, PowerProfile, Receiver, SystemConfig

logger = get_logger(__name__)

ArrayLike = Union[float, np.ndarray]

MAX_JITTER = 1e-3
JITTER_GROWTH = 10.0 ** 0.5


@dataclass(frozen=True)
class ConstantSet:
    """Coefficient tables indexed [i] or [i, k]; diagonal entries unused"""

    n_tilde: np.ndarray
    m_tilde: np.ndarray
    alpha_tilde: np.ndarray
    beta_tilde: np.ndarray
    eta_tilde: np.ndarray
    delta_tilde: np.ndarray
    xi_tilde: np.ndarray
    zeta_tilde: np.ndarray
    phi_tilde: np.ndarray
    psi_tilde: np.ndarray
    omega_tilde: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    omega: np.ndarray

    @property
    def n_r(self) -> int:
        return self.alpha_tilde.size

    def off_diagonal(self) -> List[Tuple[int, int]]:
        n = self.n_r
        return [(i, k) for i in range(n) for k in range(n) if k != i]


def build_constants(p: PowerProfile, sigma2: float, eps_rel: Optional[float] = None) -> ConstantSet:
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    eps_rel = settings.EPS_REL if eps_rel is None else eps_rel
    P1, P2 = p.P1, p.P2
    n = p.n_r

    nt = P1[:, None] - P1[None, :]
    mt = P1[:, None] * P2[None, :] - P1[None, :] * P2[:, None]
    at = sigma2 / P1
    bt = sigma2 * P2 / P1

    def triple(i: int, k: int, l: int) -> float:
        left, right = nt[i, l] * mt[i, k], nt[i, k] * mt[i, l]
        value = left - right
        if abs(value) <= eps_rel * max(abs(left), abs(right)):
            raise DegeneracyError("partial-fraction denominator vanishes", [tuple(sorted((i + 1, k + 1, l + 1)))])
        return value

    for i in range(n):
        for k in range(i + 1, n):
            if abs(mt[i, k]) <= eps_rel * max(P1[i] * P2[k], P1[k] * P2[i]):
                raise DegeneracyError("m_tilde vanishes", [(i + 1, k + 1)])

    eta = np.zeros((n, n))
    xi = np.zeros((n, n))
    delta = np.zeros(n)
    for i in range(n):
        for k in range(n):
            if k == i:
                continue
            den = 1.0
            for l in range(n):
                if l not in (i, k):
                    den *= triple(i, k, l)
            eta[i, k] = mt[i, k] ** (n - 2) / den
            xi[i, k] = nt[i, k] * (P1[i] * P2[k] ** 2 - P1[k] * P2[i] ** 2) / mt[i, k]
            delta[i] += nt[i, k] * P2[i] * P2[k] / mt[i, k]

    zeta = np.zeros((n, n))
    for i in range(n):
        for k in range(n):
            if k == i:
                continue
            acc = 0.0
            for l in range(n):
                if l in (i, k):
                    continue
                acc += (eta[i, k] * xi[i, l] + eta[i, l] * xi[i, k]) / triple(i, k, l)
            zeta[i, k] = mt[i, k] * acc

    lead = P1[:, None] ** (n - 2)
    base = delta[:, None] * eta - (n - 2) * P2[:, None] * eta + zeta
    phi_t = lead * base
    psi_t = lead * eta * xi
    omega_t = -(P1[:, None] ** (n - 3)) * (P2[:, None] ** 2) * eta

    mask = ~np.eye(n, dtype=bool)
    return ConstantSet(
        n_tilde=nt,
        m_tilde=mt,
        alpha_tilde=at,
        beta_tilde=bt,
        eta_tilde=eta * mask,
        delta_tilde=delta,
        xi_tilde=xi * mask,
        zeta_tilde=zeta * mask,
        phi_tilde=phi_t * mask,
        psi_tilde=psi_t * mask,
        omega_tilde=omega_t * mask,
        phi=lead * (sigma2 * eta + base) * mask,
        psi=sigma2 * psi_t * mask,
        omega=omega_t * mask,
    )


def apply_jitter(p: PowerProfile, delta: Optional[float] = None) -> PowerProfile:
    """
    P_i1 <- P_i1 (1 + i delta), P_i2 <- P_i2 (1 + i^2 delta), i 1-based.
    Deterministic; every application is appended to jitter_history.
    """
    delta = settings.JITTER_DELTA if delta is None else delta
    if not 0 < delta <= 1e-3:
        raise DomainError(f"jitter delta must lie in (0, 1e-3], got {delta}")
    if p.jitter_history:
        logger.warning("jitter re-applied to an already perturbed profile", history=list(p.jitter_history), delta=delta)
    idx = np.arange(1, p.n_r + 1, dtype=float)
    return PowerProfile(
        p1=tuple(p.P1 * (1.0 + idx * delta)),
        p2=tuple(p.P2 * (1.0 + idx**2 * delta)),
        jitter_history=p.jitter_history + (delta,),
    )


def prepare_profile(
    p: PowerProfile,
    auto_jitter: bool = True,
    delta: Optional[float] = None,
    eps_rel: Optional[float] = None,
) -> Tuple[PowerProfile, DegeneracyReport]:
    """Validate, jitter once if degenerate, and fail if degeneracy persists"""
    report = validate_profile(p, eps_rel)
    if not report.degenerate:
        return p, report
    if not auto_jitter:
        raise DegeneracyError("degenerate power profile", report.pairs + report.triples)
    delta = settings.JITTER_DELTA if delta is None else delta
    jittered = apply_jitter(p, delta)
    logger.warning("jitter applied", delta=delta, pairs=report.pairs, triples=report.triples)
    after = validate_profile(jittered, eps_rel)
    if after.degenerate:
        raise DegeneracyError("profile stays degenerate after jitter", after.pairs + after.triples)
    return jittered, report


@dataclass(frozen=True)
class CdfEvaluator:
    profile: PowerProfile
    sigma2: float
    receiver: Receiver
    constants: ConstantSet
    jitter_applied: Optional[float] = None
    roundoff_tol: float = field(default_factory=lambda: settings.ROUNDOFF_TOL)

    @classmethod
    def build(
        cls,
        p: PowerProfile,
        sigma2: float,
        receiver: Receiver = Receiver.MMSE,
        auto_jitter: bool = True,
        delta: Optional[float] = None,
    ) -> "CdfEvaluator":
        """
        Validate, jitter when degenerate, and assemble the constants. A jittered
        profile whose raw CDF leaves [0, 1] beyond round-off is re-jittered from
        the original powers with the next larger step, up to MAX_JITTER.
        """
        delta = settings.JITTER_DELTA if delta is None else delta
        ev = cls._assemble(p, prepare_profile(p, auto_jitter=auto_jitter, delta=delta)[0], sigma2, receiver)
        if ev.jitter_applied is None:
            return ev
        step = delta
        while not ev.within_roundoff(ev.raw(ev.probe_grid())):
            if step >= MAX_JITTER:
                raise DegeneracyError(f"jittered CDF stays outside [0, 1] up to delta={step:g}")
            step = min(step * JITTER_GROWTH, MAX_JITTER)
            logger.warning("jitter escalated", delta=step, receiver=Receiver(receiver).value)
            ev = cls._assemble(p, prepare_profile(p, delta=step)[0], sigma2, receiver)
        return ev

    @classmethod
    def _assemble(cls, original: PowerProfile, profile: PowerProfile, sigma2: float, receiver: Receiver):
        added = len(profile.jitter_history) > len(original.jitter_history)
        jitter = profile.jitter_history[-1] if added else None
        tol = settings.ROUNDOFF_TOL if jitter is None else max(settings.ROUNDOFF_TOL, 10.0 * jitter)
        return cls(
            profile=profile,
            sigma2=sigma2,
            receiver=Receiver(receiver),
            constants=build_constants(profile, sigma2),
            jitter_applied=jitter,
            roundoff_tol=tol,
        )

    @classmethod
    def from_system(cls, p: PowerProfile, system: SystemConfig, auto_jitter: bool = True) -> "CdfEvaluator":
        return cls.build(p, system.sigma2, system.receiver, auto_jitter=auto_jitter)

    def probe_grid(self) -> np.ndarray:
        """0 plus eight decades either side of the mean desired SNR"""
        mean = float(np.sum(self.profile.P1)) / self.sigma2
        return np.concatenate(([0.0], np.geomspace(1e-4, 1e4, 81) * mean))

    def within_roundoff(self, values: np.ndarray) -> bool:
        return bool(np.all(values >= -self.roundoff_tol) and np.all(values <= 1.0 + self.roundoff_tol))

    def raw(self, z: ArrayLike) -> np.ndarray:
        """Unclamped CDF values"""
        za = np.atleast_1d(np.asarray(z, dtype=float))
        if np.any(za < 0):
            raise DomainError("CDF argument must be nonnegative")
        cs = self.constants
        s2 = self.sigma2
        total = np.zeros_like(za)
        for i, k in cs.off_diagonal():
            if self.receiver == Receiver.ZF:
                j1, j2, j3 = zf_family(cs.n_tilde[i, k], cs.alpha_tilde[i], cs.m_tilde[i, k], cs.beta_tilde[i], za)
                total += cs.phi_tilde[i, k] * j1 + cs.psi_tilde[i, k] * j2 + s2 * cs.omega_tilde[i, k] * j3
            else:
                j1, j2, j3 = mmse_family(
                    s2 * cs.n_tilde[i, k], cs.alpha_tilde[i], cs.m_tilde[i, k], cs.beta_tilde[i] / s2, za
                )
                total += cs.phi[i, k] * j1 + cs.psi[i, k] * j2 + cs.omega[i, k] * j3
        return s2 * total

    def __call__(self, z: ArrayLike) -> ArrayLike:
        out = self._bounded(self.raw(z))
        return float(out[0]) if np.ndim(z) == 0 else out

    def _bounded(self, values: np.ndarray) -> np.ndarray:
        low = values < -self.roundoff_tol
        high = values > 1.0 + self.roundoff_tol
        if np.any(low) or np.any(high):
            worst = float(values[low].min()) if np.any(low) else float(values[high].max())
            raise DomainError(
                f"{self.receiver.value} CDF left [0, 1] beyond round-off ({worst:.3e}); coefficients are inconsistent"
            )
        clamped = int(np.count_nonzero((values < 0) | (values > 1)))
        if clamped:
            logger.debug("cdf round-off clamped", count=clamped, receiver=self.receiver.value)
        return np.clip(values, 0.0, 1.0)

    def curve(self, grid) -> DistributionCurve:
        grid = np.asarray(grid, dtype=float)
        if not grid.size:
            return DistributionCurve(z=(), f=())
        values = self.raw(grid)
        drops = np.diff(values)
        if np.any(drops < -self.roundoff_tol):
            worst = int(np.argmin(drops))
            raise DomainError(
                f"{self.receiver.value} CDF decreases by {-drops[worst]:.3e} at z={grid[worst + 1]:g}; "
                "coefficients are inconsistent"
            )
        return DistributionCurve(z=tuple(grid), f=tuple(np.maximum.accumulate(self._bounded(values))))


def zf_cdf(ev: CdfEvaluator, z: ArrayLike) -> ArrayLike:
    if ev.receiver != Receiver.ZF:
        raise DomainError("zf_cdf needs a ZF evaluator")
    return ev(z)


def mmse_cdf(ev: CdfEvaluator, z: ArrayLike) -> ArrayLike:
    if ev.receiver != Receiver.MMSE:
        raise DomainError("mmse_cdf needs an MMSE evaluator")
    return ev(z)


def pdf_numeric(ev: CdfEvaluator, z: ArrayLike, h: float) -> ArrayLike:
    """Central difference of the CDF, floored at zero"""
    za = np.asarray(z, dtype=float)
    if not h > 0 or np.any(za <= h):
        raise DomainError("pdf_numeric needs h > 0 and z > h")
    d = (ev.raw(za + h) - ev.raw(za - h)) / (2.0 * h)
    d = np.maximum(d, 0.0)
    return float(d[0]) if np.ndim(z) == 0 else d


def outage_probability(ev: CdfEvaluator, threshold: float) -> float:
    if threshold < 0:
        raise DomainError("outage threshold must be nonnegative")
    if np.isinf(threshold):
        return 1.0
    return float(ev(float(threshold)))
