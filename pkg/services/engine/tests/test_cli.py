import csv
import dataclasses
import io

import numpy as np
import orjson
import pytest

from macrodiv.analysis import cdf_analytic
from macrodiv.commands.common import resolve_system
from macrodiv.commands.validate import (
    family_oracle,
    k0_oracle,
    theta_checks,
)
from macrodiv.config import settings
from macrodiv.core import mpsk_params
from macrodiv.main import main, merge_config, parse_config
from macrodiv.schemas import CheckStatus, Command, RunConfig


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_merge_config_flags_win():
    merged = merge_config({"scenario": "S1", "mc": {"samples": 10, "seed": 1}}, {"mc.seed": 5, "rho_db": 10.0})
    assert merged == {"scenario": "S1", "mc": {"samples": 10, "seed": 5}, "rho_db": 10.0}


def test_parse_config_from_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_bytes(orjson.dumps({"scenario": "S2", "receiver": "zf", "grid": {"n_points": 50}}))
    cfg = parse_config(["cdf", "--config", str(path), "--points", "20"])
    assert cfg.command == Command.CDF
    assert cfg.receiver.value == "zf"
    assert cfg.grid.n_points == 20


def test_cdf_command(capsys):
    assert main(["cdf", "--scenario", "S1", "--points", "200"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[0] == ["z", "cdf_analytic"]
    assert len(rows) == 201
    values = np.array([float(r[1]) for r in rows[1:]])
    assert np.all(np.diff(values) >= 0)


def test_cdf_command_with_monte_carlo(capsys):
    assert main(["cdf", "--scenario", "S5", "--samples", "2000", "--points", "10"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[0] == ["z", "cdf_analytic", "cdf_empirical", "dkw_halfwidth"]


def test_cdf_output_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["cdf", "--scenario", "S3", "--samples", "3000", "--seed", "4", "--points", "25"]
    assert main(args + ["--output", str(a)]) == 0
    assert main(args + ["--output", str(b), "--workers", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_zero_noise_rejected():
    assert main(["cdf", "--receiver", "zf", "--scenario", "S1", "--sigma2", "0"]) == 1


def test_bad_flag_is_config_error():
    assert main(["cdf", "--points", "many"]) == 1


def test_flat_scenario_jitters(capsys):
    assert main(["cdf", "--scenario", "S4", "--points", "5"]) == 0
    captured = capsys.readouterr()
    assert "jitter applied" in captured.err


def test_parallel_profile_rescued_by_jitter():
    # m~ vanishes for proportional profiles; jitter separates the ratios by O(delta)
    assert main(["cdf", "--p1", "1,2", "--p2", "2,4", "--sigma2", "1", "--points", "5"]) == 0


def test_persistent_degeneracy_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(settings, "EPS_REL", 0.5)
    assert main(["cdf", "--scenario", "S1", "--points", "5"]) == 2
    assert "degenera" in capsys.readouterr().err


def test_pdf_command(capsys):
    assert main(["pdf", "--scenario", "S1", "--points", "11", "--samples", "2000"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[0] == ["z", "pdf_numeric", "pdf_empirical"]
    assert len(rows) == 11


def test_ser_curve_command(capsys):
    assert main(["ser-curve", "--scenario", "S1", "--no-mc"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[0] == ["snr_db", "ser_laplace", "ser_exact_asym"]
    assert len(rows) == 10
    tail = np.log10([float(r[1]) for r in rows[-3:]])
    assert np.diff(tail) == pytest.approx([-1.0, -1.0])


def test_ser_curve_with_monte_carlo(capsys):
    args = ["ser-curve", "--scenario", "S1", "--samples", "2000", "--snr-stop", "10"]
    assert main(args) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[0] == ["snr_db", "ser_mc", "ser_laplace", "ser_exact_asym"]
    assert len(rows) == 4


def test_scenario_command(capsys):
    assert main(["scenario", "--scenario", "S4"]) == 0
    doc = orjson.loads(capsys.readouterr().out)
    assert doc["degeneracy"]["degenerate"] is True
    assert doc["exact_by_closed_form"] is False
    assert doc["rho_db"] == pytest.approx(5.0)
    assert set(doc["asymptotes"]) == {"laplace_zf", "laplace_mmse", "exact_zf", "exact_mmse"}


def test_user_two(capsys):
    assert main(["scenario", "--scenario", "S2", "--user", "2"]) == 0
    doc = orjson.loads(capsys.readouterr().out)
    assert doc["label"] == "S2:user2"
    assert doc["p1"][0] == pytest.approx(1.0)


def test_drop_command(capsys):
    assert main(["drop", "--n-drops", "2", "--transmit-power", "1.5"]) == 0
    doc = orjson.loads(capsys.readouterr().out)
    assert doc["transmit_power"] == 1.5
    assert [d["label"] for d in doc["drops"]] == ["D1", "D2"]


def test_theta_cloud_command(capsys):
    assert main(["theta-cloud", "--draws", "50"]) == 0
    captured = capsys.readouterr()
    rows = _rows(captured.out)
    assert rows[0] == ["tr_p1p2", "theta", "ser_zf_laplace", "ser_mmse_laplace"]
    assert len(rows) == 51
    assert "spearman_trace" in captured.err


def test_theta_checks_pass():
    cfg = RunConfig(command="validate", n_draws=500)
    results = {r.property_name: r for r in theta_checks(cfg, seed=3)}
    assert results["theta_linearity"].status == CheckStatus.PASS
    assert results["theta_trace_trend"].status == CheckStatus.PASS
    assert results["theta_trace_trend"].measured > 0.5
    assert results["laplace_mmse_le_zf"].status == CheckStatus.PASS


@pytest.mark.slow
def test_closed_form_oracles_pass():
    for result in family_oracle(seed=1) + k0_oracle(seed=1, mod=mpsk_params(4)):
        assert result.status == CheckStatus.PASS, result.property_name


@pytest.mark.slow
def test_validate_small_run(tmp_path):
    out = tmp_path / "report.json"
    args = ["validate", "--scenarios", "S1,S3", "--samples", "20000", "--draws", "200", "--seed", "7"]
    code = main(args + ["--output", str(out)])
    report = orjson.loads(out.read_bytes())
    assert {"property_name", "status", "measured", "bound"} <= set(report["results"][0])
    failed = [r["property_name"] for r in report["results"] if r["status"] != "pass"]
    assert failed == []
    assert report["passed"] is True
    assert code == 0
    ks = [r for r in report["results"] if r["property_name"].startswith("ks:")]
    assert len(ks) == 4 and all(r["bound"] >= 0.0115 for r in ks)


@pytest.mark.slow
def test_validate_catches_corrupted_constants(monkeypatch, tmp_path):
    original = cdf_analytic.build_constants

    def flipped(*args, **kwargs):
        cs = original(*args, **kwargs)
        return dataclasses.replace(cs, psi_tilde=-cs.psi_tilde, psi=-cs.psi)

    monkeypatch.setattr(cdf_analytic, "build_constants", flipped)
    out = tmp_path / "report.json"
    args = ["validate", "--scenarios", "S1", "--samples", "20000", "--draws", "100", "--seed", "7"]
    assert main(args + ["--output", str(out)]) == 3
    report = orjson.loads(out.read_bytes())
    ks = [r for r in report["results"] if r["property_name"].startswith("ks:")]
    assert ks and any(r["status"] == "fail" for r in ks)


def test_resolve_system_carries_receiver_and_order():
    cfg = parse_config(["cdf", "--scenario", "S2", "--receiver", "zf"])
    p, system, label = resolve_system(cfg)
    assert label == "S2"
    assert system.receiver.value == "zf"
    assert system.modulation_order == cfg.modulation_order
    assert system.sigma2 == pytest.approx(0.316228, abs=1e-6)
    assert p.n_r == 3
