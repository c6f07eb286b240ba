import numpy as np
import pytest
from scipy import special

from macrodiv.errors import AccuracyError, DomainError
from macrodiv.numerics.special_fn import (
    _e1_continued_fraction,
    exp_e1,
    exp_e1_pv,
    exp_e1_scaled,
    exp_ei_scaled,
    h_integral,
    quad_adaptive,
)
from macrodiv.schemas import QuadratureSpec


def test_exp_e1_reference_values():
    assert exp_e1(1.0) == pytest.approx(0.2193839343, rel=1e-9)
    assert exp_e1(10.0) == pytest.approx(4.15697e-6, rel=1e-5)


def test_exp_e1_rejects_nonpositive():
    with pytest.raises(DomainError):
        exp_e1(0.0)
    with pytest.raises(DomainError):
        exp_e1_scaled(np.array([1.0, -2.0]))


def test_exp_e1_scaled_reference_values():
    assert exp_e1_scaled(1.0) == pytest.approx(0.5963473623, rel=1e-9)
    assert exp_e1_scaled(0.5) == pytest.approx(0.9229106325, rel=1e-9)


def test_exp_e1_scaled_large_argument_sandwich():
    x = 1e6
    value = exp_e1_scaled(x)
    assert 1.0 / (x + 1.0) < value < 1.0 / x


def test_exp_e1_scaled_branches_agree_near_switch():
    x = np.linspace(50.0, 60.0, 21)
    reference = np.exp(x) * special.exp1(x)
    assert _e1_continued_fraction(x) == pytest.approx(reference, rel=1e-11)
    # the public function crosses from the scipy branch to the fraction at 50
    assert exp_e1_scaled(x) == pytest.approx(reference, rel=1e-11)
    assert np.all(np.diff(exp_e1_scaled(x)) < 0)


def test_exp_ei_scaled_matches_scipy():
    for y in (0.3, 2.0, 20.0, 55.0, 120.0):
        assert exp_ei_scaled(y) == pytest.approx(np.exp(-y) * special.expi(y), rel=1e-10)


def test_exp_e1_pv_branches():
    assert exp_e1_pv(2.0) == pytest.approx(exp_e1_scaled(2.0))
    assert exp_e1_pv(-2.0) == pytest.approx(-np.exp(-2.0) * special.expi(2.0), rel=1e-12)
    with pytest.raises(DomainError):
        exp_e1_pv(0.0)


def test_vectorised_shape():
    x = np.linspace(0.1, 100.0, 7)
    assert exp_e1_scaled(x).shape == (7,)
    assert isinstance(exp_e1_scaled(3.0), float)


def test_quad_adaptive_textbook():
    assert quad_adaptive(np.sin, 0.0, np.pi) == pytest.approx(2.0, rel=1e-12)
    assert quad_adaptive(lambda t: np.sin(t) ** 2, 0.0, np.pi / 2) == pytest.approx(np.pi / 4, rel=1e-12)
    assert quad_adaptive(lambda t: np.exp(-t) / t, 1.0, np.inf) == pytest.approx(exp_e1(1.0), rel=1e-9)


def test_quad_adaptive_reports_best_estimate():
    spec = QuadratureSpec(abs_tol=1e-15, rel_tol=1e-15, max_subdivisions=1)
    with pytest.raises(AccuracyError) as info:
        quad_adaptive(lambda t: np.sin(50.0 * t) ** 2 / np.sqrt(t), 0.0, 10.0, spec)
    assert np.isfinite(info.value.best_estimate)


def test_h_integral_against_direct_quadrature():
    m, a, T = 1, 0.5, 3 * np.pi / 4

    def f(th):
        s2 = np.sin(th) ** 2
        x = a / s2
        if x > 500.0:
            return s2**m * (1.0 - 1.0 / x) / x
        return s2**m * np.exp(x) * special.exp1(x)

    assert h_integral(m, a, T) == pytest.approx(quad_adaptive(f, 0.0, T), rel=1e-8)


def test_h_integral_vanishes_for_large_argument():
    assert h_integral(0, 1e9, np.pi / 2) < 1e-8
