import numpy as np
import pytest

from macrodiv.analysis.ser import (
    asymptote,
    i_exact_mmse_quadrature,
    k0_closed,
    k0_integral,
    k0_tilde,
    k0_tilde_integral,
    k0_tilde_mc,
    method_for,
    parallelism,
    phi_i,
    ratios_separated,
    ser_curve,
    ser_mmse_exact_asym,
    ser_mmse_laplace,
    ser_semianalytic,
    ser_zf_exact_asym,
    ser_zf_laplace,
    theta_cloud,
    theta_metric,
    upsilon,
)
from macrodiv.core import mpsk_params
from macrodiv.numerics.closed_form_integrals import i_exact_mmse
from macrodiv.schemas import DropSpec, PowerProfile, Receiver, SerMethod
from macrodiv.simulation.montecarlo import conditional_ser_mc
from macrodiv.simulation.scenarios import drop_set


def test_theta_metric_examples():
    assert theta_metric(PowerProfile(p1=(1, 1, 1), p2=(1, 1, 1))).value == pytest.approx(1.0)
    assert theta_metric(PowerProfile(p1=(2, 2), p2=(1, 1))).value == pytest.approx(0.5)


def test_theta_metric_scale_free_in_interferer(generic_profile):
    scaled = PowerProfile.from_arrays(generic_profile.P1, 7.0 * generic_profile.P2)
    assert theta_metric(scaled).value == pytest.approx(theta_metric(generic_profile).value)


def test_upsilon_two_antennas(two_antenna_profile):
    assert upsilon(two_antenna_profile, 0) == pytest.approx(-1.0)
    assert upsilon(two_antenna_profile, 1) == pytest.approx(1.0)


def test_phi_index_symmetry():
    p = PowerProfile(p1=(2.0, 1.0), p2=(1.0, 3.0))
    swapped = PowerProfile(p1=(1.0, 2.0), p2=(3.0, 1.0))
    assert phi_i(p, 0) == pytest.approx(phi_i(swapped, 1))


def test_k0_tilde_two_antennas(two_antenna_profile):
    assert k0_tilde(two_antenna_profile) == pytest.approx(np.log(2.0))


def test_k0_tilde_scale_free_in_interferer(generic_profile):
    scaled = PowerProfile.from_arrays(generic_profile.P1, 0.3 * generic_profile.P2)
    assert k0_tilde(scaled) == pytest.approx(k0_tilde(generic_profile), rel=1e-10)


@pytest.mark.slow
def test_k0_tilde_against_expectation(two_antenna_profile, generic_profile):
    for p in (two_antenna_profile, generic_profile):
        est = k0_tilde_mc(p, 2_000_000, seed=5)
        assert abs(k0_tilde(p) - est["mean"]) <= 3.0 * est["stderr"]


@pytest.mark.parametrize("s", [0.01, 0.3, 2.0, 40.0])
def test_k0_closed_against_integral(s, generic_profile, two_antenna_profile):
    for p in (generic_profile, two_antenna_profile):
        assert k0_closed(p, s) == pytest.approx(k0_integral(p, s), rel=1e-8)
        assert k0_closed(p, s) > 0


def test_k0_closed_large_s(generic_profile):
    assert k0_closed(generic_profile, 1e6) == pytest.approx(k0_integral(generic_profile, 1e6), rel=1e-6)


def test_k0_tilde_integral_matches_closed_form(generic_profile, two_antenna_profile):
    for p in (generic_profile, two_antenna_profile):
        assert k0_tilde_integral(p) == pytest.approx(k0_tilde(p), rel=1e-8)


def test_ratios_separated(generic_profile):
    assert ratios_separated(generic_profile)
    assert not ratios_separated(PowerProfile(p1=(1.0, 2.0, 3.0), p2=(1.0, 2.0, 1.0)))
    assert not ratios_separated(PowerProfile(p1=(1.0, 1.005), p2=(1.0, 1.0)))


def test_exact_asymptotes_on_flat_profile(qpsk):
    flat = PowerProfile(p1=(1.0, 1.0, 1.0), p2=(1.0, 1.0, 1.0))
    # h2^H h2 / h2^H P1^-1 h2 is identically 1 when P1 = I
    assert ser_zf_exact_asym(flat, 1.0, qpsk) == pytest.approx(ser_zf_laplace(flat, 1.0, qpsk), rel=1e-8)
    mmse = ser_mmse_exact_asym(flat, 1.0, qpsk)
    assert 0.0 < mmse <= ser_zf_exact_asym(flat, 1.0, qpsk)
    near = PowerProfile(p1=(1.0, 1.001, 1.002), p2=(1.0, 1.0, 1.0))
    assert ser_mmse_exact_asym(near, 1.0, qpsk) == pytest.approx(mmse, rel=1e-2)


def test_i_exact_mmse_against_quadrature(generic_profile, two_antenna_profile, qpsk):
    for p in (generic_profile, two_antenna_profile):
        assert i_exact_mmse(p, qpsk) == pytest.approx(i_exact_mmse_quadrature(p, qpsk), rel=1e-6)


def test_laplace_power_law(generic_profile, qpsk):
    n = generic_profile.n_r
    for func in (ser_zf_laplace, ser_mmse_laplace, ser_zf_exact_asym, ser_mmse_exact_asym):
        assert func(generic_profile, 0.01, qpsk) / func(generic_profile, 0.005, qpsk) == pytest.approx(2.0 ** (n - 1))


def test_laplace_mmse_not_worse(random_profiles, qpsk):
    for p in random_profiles:
        assert ser_mmse_laplace(p, 0.1, qpsk) <= ser_zf_laplace(p, 0.1, qpsk)


def test_laplace_receivers_merge_for_large_trace(qpsk):
    near = PowerProfile(p1=(1.0, 0.5, 0.2), p2=(200.0, 150.0, 90.0))
    far = PowerProfile(p1=(1.0, 0.5, 0.2), p2=(0.02, 0.015, 0.009))
    gap_near = 1 - ser_mmse_laplace(near, 1.0, qpsk) / ser_zf_laplace(near, 1.0, qpsk)
    gap_far = 1 - ser_mmse_laplace(far, 1.0, qpsk) / ser_zf_laplace(far, 1.0, qpsk)
    assert gap_near < gap_far
    assert gap_near < 1e-2


def test_zf_exact_to_laplace_ratio(generic_profile, qpsk):
    p = generic_profile
    expected = k0_tilde(p) * np.prod(p.P1) * parallelism(p) / np.sum(p.P2)
    for sigma2 in (1.0, 1e-3):
        assert ser_zf_exact_asym(p, sigma2, qpsk) / ser_zf_laplace(p, sigma2, qpsk) == pytest.approx(expected)


def test_asymptote_gains(generic_profile, qpsk):
    for method in SerMethod:
        a = asymptote(generic_profile, qpsk, method)
        assert a.diversity_gain == generic_profile.n_r - 1
        assert a.array_gain > 0


def test_ser_curve_slope(generic_profile, qpsk):
    snr = np.arange(0.0, 45.0, 5.0)
    curve = ser_curve(generic_profile, qpsk, snr, SerMethod.LAPLACE_ZF)
    assert len(curve) == 9
    drops = np.diff(np.log10(curve[-3:]))
    assert drops == pytest.approx([-(generic_profile.n_r - 1) / 2.0] * 2)


def test_ser_semianalytic_limits(qpsk):
    assert ser_semianalytic([1e12, 1e13], qpsk) < 1e-12
    assert ser_semianalytic([1e-12], qpsk) == pytest.approx(0.75, rel=1e-6)
    with pytest.raises(ValueError):
        ser_semianalytic([], qpsk)


def test_ser_semianalytic_rayleigh_bpsk():
    gen = np.random.Generator(np.random.Philox(3))
    n = 400_000
    z = gen.exponential(1.0, size=n)
    z = z[z > 0]
    bpsk = mpsk_params(2)
    expected = 0.5 * (1.0 - np.sqrt(0.5))
    assert expected == pytest.approx(0.1464, abs=1e-4)
    assert abs(ser_semianalytic(z, bpsk) - expected) <= 3.0 * 0.3 / np.sqrt(n)


def test_theta_cloud_linear_in_theta(qpsk):
    rows = theta_cloud(200, seed=11, mod=qpsk, sigma2=0.5)
    theta = np.array([r["theta"] for r in rows])
    zf = np.array([r["ser_zf_laplace"] for r in rows])
    assert np.allclose(zf / theta, zf[0] / theta[0], rtol=1e-12)
    assert all(r["ser_mmse_laplace"] <= r["ser_zf_laplace"] for r in rows)


@pytest.mark.slow
@pytest.mark.parametrize("receiver", list(Receiver))
def test_asymptotes_track_monte_carlo_on_drops(receiver, qpsk):
    drops, _ = drop_set(DropSpec(seed=3), 3)
    snr = np.arange(0.0, 45.0, 5.0)
    for p in drops:
        mc = np.array([conditional_ser_mc(p, 10.0 ** (-s / 10.0), receiver, qpsk, 50_000, seed=1) for s in snr])
        usable = mc <= 1e-2
        for exact in (False, True):
            asym = ser_curve(p, qpsk, snr, method_for(receiver, exact))[usable]
            assert np.all(asym / mc[usable] < 2.0)
            assert np.all(mc[usable] / asym < 2.0)
        slope = np.polyfit([3.0, 3.5, 4.0], np.log10(mc[-3:]), 1)[0]
        assert slope == pytest.approx(-(p.n_r - 1), abs=0.1)
