"""
Closed-form double integrals behind the ZF and MMSE CDFs, the
trigonometric SER integrals, and their brute-force quadrature oracles.

ZF family (tilde), for k = 1, 2, 3:
    I~_k(a, b, c, d, x) = int_0^x int_0^inf e^{-bt - dt th} K_k dth dt
    K_1 = 1/(a + c th), K_2 = 1/(a + c th)^2, K_3 = t th/(a + c th)

MMSE family: the same kernels with an extra e^{-th} weight.
"""
from math import comb
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import special

from ..config import settings
from ..errors import AccuracyError, DegeneracyError, DomainError
from ..schemas import IntegralArgs, IntegralMethod, Modulation, PowerProfile, QuadratureSpec, SerIntegralResult
from .special_fn import ArrayLike, exp_e1_pv, exp_e1_scaled, h_integral, quad_adaptive

Family = Tuple[ArrayLike, ArrayLike, ArrayLike]

# above this g0 the closed form for the MMSE SER integral cancels badly
_G0_SERIES_SWITCH = 4.0
_SERIES_MAX_TERMS = 400


def _determinant(a: float, b: float, c: float, d: float, eps_rel: Optional[float]) -> float:
    eps_rel = settings.EPS_REL if eps_rel is None else eps_rel
    bc, ad = b * c, a * d
    D = bc - ad
    if abs(D) <= eps_rel * max(abs(bc), abs(ad)):
        raise DegeneracyError(f"bc - ad = {D:.3e} is degenerate for a={a}, b={b}, c={c}, d={d}")
    if a == 0:
        raise DomainError("integral families need a != 0")
    return D


def zf_family(a: float, b: float, c: float, d: float, x: ArrayLike, eps_rel: Optional[float] = None) -> Family:
    """(I~1, I~2, I~3) at every x; vectorised over x"""
    D = _determinant(a, b, c, d, eps_rel)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa < 0):
        raise DomainError("upper limit x must be nonnegative")
    i1, i2, i3 = np.zeros_like(xa), np.zeros_like(xa), np.zeros_like(xa)

    pos = xa > 0
    xp = xa[pos]
    if xp.size:
        L = np.log(abs((b * c) / (a * d)))
        G = np.exp(-b * xp) * exp_e1_pv(a * d * xp / c)
        E = special.exp1(b * xp)
        em = -np.expm1(-b * xp)
        D2 = D * D
        i1[pos] = (L - G + E) / D
        i2[pos] = (d * xp / (c * D) + d / D2) * G - (d / D2) * (E + L) + em / (a * D)
        i3[pos] = (a * xp / (c * D) + a / D2) * G - (a / D2) * (E + L) + em / (d * D)

    if np.ndim(x) == 0:
        return float(i1[0]), float(i2[0]), float(i3[0])
    return i1, i2, i3


def mmse_family(a: float, b: float, c: float, d: float, x: ArrayLike, eps_rel: Optional[float] = None) -> Family:
    """(I1, I2, I3) at every x; vectorised over x"""
    D = _determinant(a, b, c, d, eps_rel)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa < 0):
        raise DomainError("upper limit x must be nonnegative")
    i1, i2, i3 = np.zeros_like(xa), np.zeros_like(xa), np.zeros_like(xa)

    pos = xa > 0
    xp = xa[pos]
    if xp.size:
        D2 = D * D
        ebx = np.exp(-b * xp)
        em = -np.expm1(-b * xp)
        g_ac = exp_e1_pv(a / c)
        g_bd = exp_e1_scaled(b / d)
        g_y = ebx * exp_e1_pv((1.0 + d * xp) * a / c)
        g_w = ebx * exp_e1_scaled(b / d + b * xp)
        i1[pos] = (g_ac - g_bd + g_w - g_y) / D
        i2[pos] = (
            (d / D2 + (1.0 + d * xp) / (c * D)) * g_y
            - (d / D2 + 1.0 / (c * D)) * g_ac
            + (d / D2) * (g_bd - g_w)
            + em / (a * D)
        )
        k3 = (a * d * d + a * b * d - b * b * c) / (d * d * D2)
        i3[pos] = (a / D2 + a * xp / (c * D)) * g_y - (a / D2) * g_ac + k3 * (g_bd - g_w) + em / (d * D)

    if np.ndim(x) == 0:
        return float(i1[0]), float(i2[0]), float(i3[0])
    return i1, i2, i3


def i1_tilde(args: IntegralArgs) -> float:
    return zf_family(args.a, args.b, args.c, args.d, args.x)[0]


def i2_tilde(args: IntegralArgs) -> float:
    return zf_family(args.a, args.b, args.c, args.d, args.x)[1]


def i3_tilde(args: IntegralArgs) -> float:
    return zf_family(args.a, args.b, args.c, args.d, args.x)[2]


def i1_mmse(args: IntegralArgs) -> float:
    return mmse_family(args.a, args.b, args.c, args.d, args.x)[0]


def i2_mmse(args: IntegralArgs) -> float:
    return mmse_family(args.a, args.b, args.c, args.d, args.x)[1]


def i3_mmse(args: IntegralArgs) -> float:
    return mmse_family(args.a, args.b, args.c, args.d, args.x)[2]


# relative-only tolerance; family values span many decades over log-uniform draws
_FAMILY_QUAD = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-12, max_subdivisions=500)


def _t_moments(s: float, x: float) -> Tuple[float, float]:
    """int_0^x e^{-st} dt and int_0^x t e^{-st} dt"""
    u = s * x
    if u < 1e-3:
        first = x * (1.0 - u / 2.0 + u * u / 6.0 - u**3 / 24.0)
        second = x * x * (0.5 - u / 3.0 + u * u / 8.0 - u**3 / 30.0)
        return first, second
    eu = np.exp(-u)
    return -np.expm1(-u) / s, (-np.expm1(-u) - u * eu) / (s * s)


def _piece(f: Callable[[float], float], lo: float, hi: float) -> float:
    try:
        return quad_adaptive(f, lo, hi, _FAMILY_QUAD)
    except AccuracyError as exc:
        if exc.abs_error is not None and exc.abs_error <= 1e-10 * abs(exc.best_estimate):
            return exc.best_estimate
        raise


def family_quadrature(args: IntegralArgs, k: int, mmse: bool = False) -> float:
    """
    Quadrature oracle for the defining double integral. The t integral on
    [0, x] is done in closed form, th runs over [0, inf) split at a/c, b/d
    and 1/(d x). Only meaningful when a/c > 0 (no pole on the path).
    """
    a, b, c, d, x = args.a, args.b, args.c, args.d, args.x
    if x == 0:
        return 0.0
    if not a / c > 0:
        raise DomainError("family_quadrature needs a/c > 0")

    def integrand(th: float) -> float:
        first, second = _t_moments(b + d * th, x)
        kernel = 1.0 / (a + c * th)
        weight = np.exp(-th) if mmse else 1.0
        if k == 1:
            return weight * kernel * first
        if k == 2:
            return weight * kernel * kernel * first
        return weight * kernel * th * second

    breaks = sorted({a / c, b / d, 1.0 / (d * x)} | ({1.0} if mmse else set()))
    edges = [0.0] + breaks
    total = sum(_piece(integrand, lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))
    return float(total + _piece(integrand, edges[-1], np.inf))


# SER integrals
def sin_power_integral(m: int, t_max: float) -> float:
    """int_0^T sin^{2m} th dth by the binomial closed form"""
    if m == 0:
        return float(t_max)
    total = comb(2 * m, m) * t_max / 4.0**m
    acc = 0.0
    for k in range(m):
        j = m - k
        acc += (-1) ** k * comb(2 * m, k) * np.sin(2 * j * t_max) / (2 * j)
    return float(total + (-1) ** m * acc / 2.0 ** (2 * m - 1))


def _sin_power_table(m_max: int, t_max: float) -> np.ndarray:
    # S_m = (2m-1)/(2m) S_{m-1} - sin^{2m-1} T cos T / (2m); stable upwards
    s, c = np.sin(t_max), np.cos(t_max)
    out = np.empty(m_max + 1)
    out[0] = t_max
    for m in range(1, m_max + 1):
        out[m] = (2 * m - 1) / (2 * m) * out[m - 1] - s ** (2 * m - 1) * c / (2 * m)
    return out


def i_const_closed(n_r: int, mod: Modulation) -> float:
    """I~ = (1/pi) int_0^T (sin^2 th / g)^{n_R - 1} dth"""
    if n_r < 2:
        raise DomainError(f"n_R must be >= 2, got {n_r}")
    m = n_r - 1
    return sin_power_integral(m, mod.t_max) / (np.pi * mod.g**m)


def i_const(n_r: int, mod: Modulation, method: IntegralMethod = IntegralMethod.CLOSED_FORM) -> SerIntegralResult:
    if method == IntegralMethod.CLOSED_FORM:
        value = i_const_closed(n_r, mod)
    else:
        m = n_r - 1
        value = quad_adaptive(lambda t: (np.sin(t) ** 2 / mod.g) ** m, 0.0, mod.t_max) / np.pi
    return SerIntegralResult(value=value, method=method)


def trace_ratio(p: PowerProfile) -> float:
    """Tr(P1^-1 P2)"""
    return float(np.sum(p.P2 / p.P1))


def g0_of(p: PowerProfile, mod: Modulation) -> float:
    return mod.g / trace_ratio(p)


def i_mmse_closed(p: PowerProfile, mod: Modulation, g0: Optional[float] = None) -> float:
    """
    I(P1, P2) = (1/pi) int_0^T g^{-(n_R-1)} sin^{2 n_R} th / (g0 + sin^2 th) dth,
    g0 = g / Tr(P1^-1 P2).
    """
    g0 = g0_of(p, mod) if g0 is None else g0
    if not g0 > 0:
        raise DomainError(f"g0 must be positive, got {g0}")
    n = p.n_r
    T = mod.t_max
    scale = 1.0 / (np.pi * mod.g ** (n - 1))

    if g0 > _G0_SERIES_SWITCH:
        # 1/(g0 + s) = sum_j (-s)^j / g0^{j+1}
        table = _sin_power_table(n + _SERIES_MAX_TERMS, T)
        acc = 0.0
        for j in range(_SERIES_MAX_TERMS):
            term = (-1) ** j * table[n + j] / g0 ** (j + 1)
            acc += term
            if abs(term) <= 1e-17 * abs(acc):
                break
        return float(scale * acc)

    table = _sin_power_table(n - 1, T)
    arc = np.arctan2(np.sqrt((1.0 + g0) / g0) * np.sin(T), np.cos(T))
    poly = sum((-1) ** i * g0 ** (-i) * table[i] for i in range(n))
    bracket = np.sqrt(g0 / (1.0 + g0)) * arc - poly
    return float(scale * (-1) ** n * g0 ** (n - 1) * bracket)


def i_mmse_quadrature(p: PowerProfile, mod: Modulation, g0: Optional[float] = None) -> float:
    g0 = g0_of(p, mod) if g0 is None else g0
    n = p.n_r

    def f(t: float) -> float:
        s = np.sin(t) ** 2
        return s**n / (g0 + s)

    return quad_adaptive(f, 0.0, mod.t_max) / (np.pi * mod.g ** (n - 1))


# Partial fractions and the exact-asymptotic coefficients
def partial_fraction_coeffs(a, b, eps_rel: Optional[float] = None) -> np.ndarray:
    """
    A_i with 1/prod_i(a_i - jt b_i) = sum_i A_i / (a_i/b_i - jt),
    A_i = b_i^{n-2} / prod_{k != i}(b_i a_k - a_i b_k).
    """
    eps_rel = settings.EPS_REL if eps_rel is None else eps_rel
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.size
    out = np.empty(n)
    bad = []
    for i in range(n):
        den = 1.0
        for k in range(n):
            if k == i:
                continue
            term = b[i] * a[k] - a[i] * b[k]
            if abs(term) <= eps_rel * max(abs(b[i] * a[k]), abs(a[i] * b[k])):
                bad.append(tuple(sorted((i + 1, k + 1))))
            den *= term
        out[i] = b[i] ** (n - 2) / den if den != 0 else np.inf
    if bad:
        raise DegeneracyError("partial fraction expansion is degenerate", sorted(set(bad)))
    return out


def upsilon_all(p: PowerProfile) -> np.ndarray:
    """Upsilon_i = P_i2^{n-2} / prod_{k != i}(P_k1 P_i2 - P_i1 P_k2)"""
    return partial_fraction_coeffs(p.P1, p.P2)


def phi_all(p: PowerProfile) -> np.ndarray:
    P1, P2 = p.P1, p.P2
    ups = upsilon_all(p)
    n = p.n_r
    out = np.zeros(n)
    for i in range(n):
        for k in range(n):
            if k == i:
                continue
            num = P2[i] * ups[i] * P1[k] * P2[k] + P2[k] * ups[k] * P1[i] * P2[i]
            out[i] += num / (P1[k] * P2[i] - P2[k] * P1[i])
    return out


def i_exact_mmse(p: PowerProfile, mod: Modulation) -> float:
    """
    Ie = I~ sum_i Upsilon_i P_i2
         + 1/(pi g^{n-1}) sum_i [Phi_i H(n-1, g r_i) - g Upsilon_i P_i1 H(n-2, g r_i)]
    with r_i = P_i1 / P_i2.
    """
    n = p.n_r
    g = mod.g
    ups = upsilon_all(p)
    phis = phi_all(p)
    r = p.P1 / p.P2
    acc = 0.0
    for i in range(n):
        a = g * r[i]
        acc += phis[i] * h_integral(n - 1, a, mod.t_max) - g * ups[i] * p.P1[i] * h_integral(n - 2, a, mod.t_max)
    return float(i_const_closed(n, mod) * np.dot(ups, p.P2) + acc / (np.pi * g ** (n - 1)))
