"""
Exponential integrals, their overflow-safe scaled forms, adaptive
quadrature and the H(m, a) trigonometric integral.

Scalar in, scalar out; arrays in, arrays out.
"""
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate, special

from ..config import settings
from ..errors import AccuracyError, DomainError
from ..schemas import QuadratureSpec

ArrayLike = Union[float, np.ndarray]

# scipy's exp(x) * exp1(x) is exact to ~1 ulp below this; above it the
# continued fraction converges in a handful of terms
_SCALED_SWITCH = 50.0
_CF_TERMS = 40
_ASYMPTOTIC_TERMS = 30


def _out(values: np.ndarray, like) -> ArrayLike:
    return float(values) if np.ndim(like) == 0 else values


def _require_positive(x: np.ndarray, name: str) -> None:
    if np.any(~(x > 0)):
        raise DomainError(f"{name} requires x > 0")


def exp_e1(x: ArrayLike) -> ArrayLike:
    """E1(x) = int_x^inf e^-t / t dt for x > 0"""
    xa = np.asarray(x, dtype=float)
    _require_positive(xa, "exp_e1")
    return _out(special.exp1(xa), x)


def _e1_continued_fraction(x: np.ndarray) -> np.ndarray:
    # e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...))), evaluated backwards
    t = x + 2.0 * _CF_TERMS + 1.0
    for k in range(_CF_TERMS, 0, -1):
        t = (x + 2.0 * k - 1.0) - (k * k) / t
    return 1.0 / t


def exp_e1_scaled(x: ArrayLike) -> ArrayLike:
    """e^x E1(x) for x > 0, finite for every representable x"""
    xa = np.asarray(x, dtype=float)
    _require_positive(xa, "exp_e1_scaled")
    out = np.empty_like(xa)
    low = xa <= _SCALED_SWITCH
    out[low] = np.exp(xa[low]) * special.exp1(xa[low])
    out[~low] = _e1_continued_fraction(xa[~low])
    return _out(out, x)


def exp_ei_scaled(y: ArrayLike) -> ArrayLike:
    """e^-y Ei(y) for y > 0"""
    ya = np.asarray(y, dtype=float)
    _require_positive(ya, "exp_ei_scaled")
    out = np.empty_like(ya)
    low = ya <= _SCALED_SWITCH
    out[low] = np.exp(-ya[low]) * special.expi(ya[low])
    yh = ya[~low]
    term = 1.0 / yh
    acc = term.copy()
    for k in range(1, _ASYMPTOTIC_TERMS):
        term = term * k / yh
        acc += term
    out[~low] = acc
    return _out(out, y)


def exp_e1_pv(x: ArrayLike) -> ArrayLike:
    """
    e^x E1(x) continued to x < 0 as its principal value, -e^x Ei(-x).
    The closed-form integrals cross a simple pole when their parameters
    have opposite signs; the poles cancel across the full CDF sum.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(xa == 0) or np.any(~np.isfinite(xa)):
        raise DomainError("exp_e1_pv is singular at 0")
    out = np.empty_like(xa)
    pos = xa > 0
    out[pos] = exp_e1_scaled(xa[pos])
    out[~pos] = -exp_ei_scaled(-xa[~pos])
    return _out(out, x)


def quad_adaptive(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    spec: Optional[QuadratureSpec] = None,
) -> float:
    """
    Adaptive Gauss-Kronrod quadrature (QUADPACK). Infinite limits are
    mapped internally. Raises AccuracyError carrying the best estimate
    when the tolerance is not met.
    """
    spec = spec or QuadratureSpec()
    out = integrate.quad(
        f,
        lo,
        hi,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        full_output=1,
    )
    value, abserr = float(out[0]), float(out[1])
    if len(out) > 3:
        raise AccuracyError(
            f"quadrature on [{lo}, {hi}] did not converge: {out[3]}",
            best_estimate=value,
            abs_error=abserr,
        )
    return value


def _h_integrand(theta: float, m: int, a: float) -> float:
    s2 = np.sin(theta) ** 2
    if s2 <= 0.0:
        return 0.0
    return exp_e1_scaled(a / s2) * s2**m


def h_integral(m: int, a: float, t_max: float, spec: Optional[QuadratureSpec] = None) -> float:
    """H(m, a) = int_0^T e^{a/sin^2} E1(a/sin^2) sin^{2m} dtheta"""
    if m < 0 or int(m) != m:
        raise DomainError(f"h_integral needs a nonnegative integer m, got {m}")
    if not a > 0:
        raise DomainError(f"h_integral needs a > 0, got {a}")
    if not 0 < t_max < np.pi:
        raise DomainError(f"h_integral needs 0 < T < pi, got {t_max}")
    spec = spec or QuadratureSpec(abs_tol=1e-14, rel_tol=1e-11, max_subdivisions=settings.QUAD_LIMIT)
    return quad_adaptive(lambda t: _h_integrand(t, int(m), a), 0.0, t_max, spec)
