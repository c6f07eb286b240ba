import numpy as np
import pytest

from macrodiv.core import validate_profile
from macrodiv.errors import DomainError
from macrodiv.schemas import CoverageRegion, DropSpec, ScenarioId
from macrodiv.simulation.scenarios import (
    TABLE_SCENARIOS,
    build_scenario,
    calibrate_transmit_power,
    coverage_fraction,
    coverage_vertices,
    drop_set,
    exponential_profile,
    path_gains,
    random_drop,
    table1_scenario,
    uniform_in_triangle,
)


def test_exponential_profile_examples():
    assert exponential_profile(3.0, 1.0, 3) == pytest.approx([1.0, 1.0, 1.0])
    assert exponential_profile(3.0, 0.2, 3) == pytest.approx([2.419354, 0.483871, 0.096774], abs=1e-6)
    reversed_profile = exponential_profile(3.0, 5.0, 3)
    assert np.argmax(reversed_profile) == 2


def test_exponential_profile_sum_and_shape():
    p = exponential_profile(7.3, 0.37, 5)
    assert np.sum(p) == pytest.approx(7.3, rel=1e-12)
    assert np.diff(np.log(p)) == pytest.approx([np.log(0.37)] * 4)
    with pytest.raises(DomainError):
        exponential_profile(3.0, 0.0, 3)


def test_table_rows():
    assert TABLE_SCENARIOS[ScenarioId.S3] == (0.2, 5.0, 1.0)
    assert TABLE_SCENARIOS[ScenarioId.S8] == (0.2, 5.0, 20.0)
    assert TABLE_SCENARIOS[ScenarioId.S10] == (1.0, 0.2, 20.0)
    with pytest.raises(DomainError):
        table1_scenario("S11")


def test_scenario_noise_and_interferer_power():
    p, sigma2 = build_scenario(table1_scenario("S1"))
    assert sigma2 == pytest.approx(0.316228, abs=1e-6)
    p6, _ = build_scenario(table1_scenario("S6"))
    assert np.sum(p6.P2) == pytest.approx(0.15)
    assert np.sum(p.P2) == pytest.approx(3.0)


def test_flat_scenario_is_degenerate():
    p, _ = build_scenario(table1_scenario("S4"))
    assert validate_profile(p).degenerate


def test_uniform_in_triangle_stays_inside(rng):
    tri = np.array(DropSpec().bs_positions)
    pts = uniform_in_triangle(tri, 5000, rng)
    a, b, c = tri
    # barycentric coordinates are all nonnegative inside
    m = np.column_stack([b - a, c - a])
    lam = np.linalg.solve(m, (pts - a).T).T
    assert np.all(lam >= -1e-12)
    assert np.all(lam.sum(axis=1) <= 1 + 1e-12)


def test_symmetric_users_without_shadowing():
    spec = DropSpec(shadow_sigma_db=0.0)
    centre = np.mean(np.array(spec.bs_positions), axis=0)
    gains = path_gains(np.array([centre, centre]), spec)
    assert gains[0] == pytest.approx(gains[1])
    assert gains[0] == pytest.approx([gains[0][0]] * 3)


def test_calibration_meets_coverage():
    spec = DropSpec(calibration_probes=20_000)
    c = calibrate_transmit_power(spec)
    assert c > 0
    assert coverage_fraction(spec, c, seed=5) == pytest.approx(0.95, abs=0.02)


def test_drop_determinism():
    spec = DropSpec(seed=11, transmit_power=2.0)
    assert random_drop(spec) == random_drop(spec)
    drops, c = drop_set(spec, 3)
    again, _ = drop_set(spec, 3)
    assert c == 2.0
    assert drops == again
    assert len({d.p1 for d in drops}) == 3


def test_cluster_coverage_keeps_users_away_from_base_stations(rng):
    spec = DropSpec()
    pts = uniform_in_triangle(coverage_vertices(spec), 5000, rng)
    bs = np.array(spec.bs_positions)
    d = np.linalg.norm(pts[:, None, :] - bs[None, :, :], axis=-1)
    # nearest point of the midpoint triangle to a vertex of a unit triangle
    assert d.min() >= np.sqrt(3.0) / 4.0 - 1e-12
    assert d.max() <= np.sqrt(3.0) / 2.0 + 1e-12


def test_full_triangle_coverage_is_selectable():
    spec = DropSpec(coverage=CoverageRegion.TRIANGLE)
    assert coverage_vertices(spec) == pytest.approx(np.array(spec.bs_positions))
    cluster = coverage_vertices(DropSpec())
    assert cluster[0] == pytest.approx([0.5, 0.0])


def test_drop_gains_bounded_without_shadowing():
    spec = DropSpec(shadow_sigma_db=0.0, transmit_power=1.0)
    for seed in range(20):
        p = random_drop(spec.model_copy(update={"seed": seed}))
        gains = np.concatenate([p.P1, p.P2])
        assert gains.max() <= (np.sqrt(3.0) / 4.0) ** -3.5 + 1e-9
        assert gains.min() >= (np.sqrt(3.0) / 2.0) ** -3.5 - 1e-9
