"""Sweep driver, exports, the GF container, cases, and the CLI."""

import json
import math

import numpy as np
import pytest

from tmfc import (
    ConfigurationError,
    DataError,
    PumpSpec,
    RegimeParams,
    decompose,
    sample_low_ce,
)
from tmfc.gf_numeric import assemble_gf
from tmfc.harness import (
    SweepResult,
    SweepSpec,
    case_ids,
    export_csv,
    export_json,
    import_json,
    load_gf,
    reproduce,
    run_sweep,
    save_gf,
)
from tmfc.harness.cli import main
from tmfc.harness.gfio import FORMAT_LINE

BASE = RegimeParams(beta_r=1.0, beta_s=-1.0, beta_p=1.0).with_gamma_bar(0.01)
PUMP = PumpSpec(tau_p=1.0)


def _tiny_spec(**over):
    kwargs = dict(params=BASE, pump=PUMP, engine="low-ce", n_report=3,
                  low_ce_n=128,
                  axes=(("gamma_bar", (0.01, 0.02)),))
    kwargs.update(over)
    return SweepSpec(**kwargs)


def test_sweep_spec_validation():
    with pytest.raises(ConfigurationError):
        _tiny_spec(engine="exact")
    with pytest.raises(ConfigurationError):
        _tiny_spec(axes=(("beta_s", (0.0, 1.0)),))
    with pytest.raises(ConfigurationError):
        _tiny_spec(axes=(("tau_p", ()),))
    with pytest.raises(ConfigurationError):
        _tiny_spec(n_report=0)


def test_points_row_major():
    spec = _tiny_spec(axes=(("gamma_bar", (0.5, 1.0)),
                            ("tau_p", (1.0, 2.0, 3.0))))
    pts = spec.points()
    assert len(pts) == 6
    assert pts[0] == {"gamma_bar": 0.5, "tau_p": 1.0}
    assert pts[2] == {"gamma_bar": 0.5, "tau_p": 3.0}
    assert pts[3] == {"gamma_bar": 1.0, "tau_p": 1.0}


def test_point_config_axes():
    spec = _tiny_spec()
    p, _ = spec.point_config({"beta_rs_L": 2.5})
    assert np.isclose(p.beta_rs * p.L, 2.5)
    assert np.isclose(p.gamma_bar, 0.01)
    # a beta change keeps gamma_bar by recomputing gamma
    p, _ = spec.point_config({"beta_r": 3.0})
    assert np.isclose(p.beta_rs, 4.0)
    assert np.isclose(p.gamma_bar, 0.01)
    _, pump = spec.point_config({"tau_p": 0.3})
    assert pump.tau_p == 0.3
    p, _ = spec.point_config({"gamma_bar": 1.2, "beta_r": 2.0})
    assert np.isclose(p.gamma_bar, 1.2)


def test_run_sweep_records():
    spec = _tiny_spec()
    result = run_sweep(spec)
    assert len(result.records) == 2
    for i, rec in enumerate(result.records):
        assert rec["index"] == i
        assert rec["error"] == ""
        assert len(rec["rho"]) == 3
        assert len(rec["ce"]) == 3
        assert np.isclose(rec["ce"][0], rec["rho"][0] ** 2)
        assert 0.0 < rec["separability"] <= 1.0
    assert np.isclose(result.records[0]["gamma_bar"], 0.01)
    assert np.isclose(result.records[1]["gamma_bar"], 0.02)
    # weak-conversion selectivity scales as gamma_bar^2
    s0 = result.records[0]["selectivity"]
    s1 = result.records[1]["selectivity"]
    assert np.isclose(s1 / s0, 4.0, rtol=1e-6)
    assert result.provenance["engine"] == "low-ce"
    assert result.provenance["n_points"] == 2


def test_run_sweep_captures_point_failures():
    spec = _tiny_spec(axes=(("beta_r", (1.0, -1.0)),))
    result = run_sweep(spec)
    good, bad = result.records
    assert good["error"] == ""
    assert len(good["rho"]) == 3
    assert bad["error"].startswith("RegimeError")
    assert bad["rho"] == []
    assert math.isnan(bad["selectivity"])


def test_run_sweep_workers_match_serial():
    spec = _tiny_spec()
    serial = run_sweep(spec, workers=1)
    parallel = run_sweep(spec, workers=2)
    assert serial.records == parallel.records


def test_export_csv_layout(tmp_path):
    spec = _tiny_spec()
    result = run_sweep(spec)
    path = tmp_path / "sweep.csv"
    export_csv(result, str(path))
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 3
    header = lines[0].split(",")
    assert header == ["gamma_bar", "tau_p", "beta_r", "beta_s", "beta_p", "L",
                      "rho_1", "rho_2", "rho_3", "ce_1", "ce_2", "ce_3",
                      "selectivity", "separability", "error"]
    row = lines[1].split(",")
    assert float(row[0]) == 0.01
    assert np.isclose(float(row[6]), result.records[0]["rho"][0], rtol=1e-11)
    # 12 significant digits in the text form
    assert row[6] == "%.12g" % result.records[0]["rho"][0]


def test_export_csv_empty_result(tmp_path):
    result = SweepResult(spec=_tiny_spec(), records=[])
    path = tmp_path / "empty.csv"
    export_csv(result, str(path))
    lines = path.read_text().splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("gamma_bar,")


def test_export_json_roundtrip(tmp_path):
    spec = _tiny_spec()
    result = run_sweep(spec)
    path = tmp_path / "sweep.json"
    export_json(result, str(path))
    payload = import_json(str(path))
    assert payload["records"] == result.records
    assert payload["spec"]["engine"] == "low-ce"
    assert payload["spec"]["axes"] == [["gamma_bar", [0.01, 0.02]]]
    assert payload["provenance"]["n_points"] == 2


def test_csv_bytes_deterministic(tmp_path):
    spec = _tiny_spec()
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    export_csv(run_sweep(spec), str(p1))
    export_csv(run_sweep(spec), str(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_gf_container_grid_roundtrip(tmp_path):
    t_out = np.linspace(-4.0, 6.0, 257)
    t_in = np.linspace(-5.0, 5.0, 241)
    gf = sample_low_ce(BASE, PUMP, t_out, t_in)
    path = tmp_path / "weak.gf"
    save_gf(gf, str(path))
    assert path.read_text(errors="replace").splitlines()[0] == FORMAT_LINE
    back = load_gf(str(path))
    assert back.form == "grid"
    assert np.array_equal(back.g_rs, gf.g_rs)
    assert np.array_equal(back.t_out, gf.t_out)
    assert back.delta_rr.delay == gf.delta_rr.delay
    assert back.metadata["engine"] == gf.metadata["engine"]
    a = decompose(gf, want_modes=False)
    b = decompose(back, want_modes=False)
    assert np.array_equal(a.rho, b.rho)


def test_gf_container_basis_roundtrip(tmp_path):
    params = RegimeParams(beta_r=1.0, beta_s=0.0, beta_p=0.0).with_gamma_bar(0.5)
    gf = assemble_gf(params, PUMP, n_r=10, n_s=10, tol_leak=0.05)
    path = tmp_path / "basis.gf"
    save_gf(gf, str(path))
    back = load_gf(str(path))
    assert back.form == "basis"
    for name in ("g_rr", "g_rs", "g_sr", "g_ss"):
        assert np.array_equal(getattr(back, name), getattr(gf, name))
    assert back.basis_in_s == gf.basis_in_s
    a = decompose(gf, want_modes=False)
    b = decompose(back, want_modes=False)
    assert np.array_equal(a.rho, b.rho)
    assert a.sum_rho_sq == b.sum_rho_sq


def test_gf_container_rejects_corrupt_header(tmp_path):
    path = tmp_path / "bad.gf"
    path.write_bytes(b"NOT-A-GF 9\nend\n")
    with pytest.raises(DataError):
        load_gf(str(path))


def test_reproduce_unknown_case():
    with pytest.raises(ConfigurationError) as err:
        reproduce("fig99")
    assert "table1-a" in str(err.value)


def test_reproduce_ecop_limit():
    assert "ecop-limit" in case_ids()
    payload, report = reproduce("ecop-limit")
    assert report.passed
    assert report.lines()[0] == "ecop-limit: PASS"
    assert all(c.ok for c in report.checks)


def _write_config(tmp_path):
    cfg = """
params:
  beta_r: 1.0
  beta_s: -1.0
  beta_p: 1.0
  gamma_bar: 0.01
pump:
  tau_p: 1.0
engine: low-ce
low_ce:
  n: 128
n_report: 3
axes:
  - name: gamma_bar
    values: [0.01, 0.02]
"""
    path = tmp_path / "sweep.yaml"
    path.write_text(cfg)
    return path


def test_cli_run(tmp_path, capsys):
    cfg = _write_config(tmp_path)
    out = tmp_path / "sweep.csv"
    code = main(["run", str(cfg), "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("gamma_bar,")


def test_cli_run_matches_library(tmp_path):
    cfg = _write_config(tmp_path)
    out = tmp_path / "cli.csv"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    lib = tmp_path / "lib.csv"
    export_csv(run_sweep(_tiny_spec()), str(lib))
    assert out.read_bytes() == lib.read_bytes()


def test_cli_reproduce_unknown_exits_config(capsys):
    code = main(["reproduce", "no-such-case"])
    assert code == 2
    assert "no-such-case" in capsys.readouterr().err


def test_cli_decompose_missing_file(capsys):
    assert main(["decompose", "/no/such/file.gf"]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_decompose_saved_gf(tmp_path, capsys):
    t = np.linspace(-6.0, 6.0, 200)
    gf = sample_low_ce(BASE, PUMP, t, t)
    path = tmp_path / "weak.gf"
    save_gf(gf, str(path))
    out = tmp_path / "dec.json"
    code = main(["decompose", str(path), "--out", str(out), "--n-report", "4"])
    assert code == 0
    payload = json.loads(out.read_text())
    assert len(payload["rho"]) == 4
    assert payload["tau_source"] == "unitarity"
    ref = decompose(gf, n_report=4, want_modes=False)
    assert np.allclose(payload["rho"], ref.rho)
    assert np.isclose(payload["selectivity"], ref.selectivity)
