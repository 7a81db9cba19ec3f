"""Command-line front end: exit codes, serialization and cheap end-to-end runs."""

from __future__ import annotations

import json

import numpy as np
import pytest

from bhscatter import __version__
from bhscatter.cli import (
    RunConfig,
    format_report,
    main,
    parse_report,
    read_table,
    samples_header,
    scattering_from_table,
    scattering_header,
    write_table,
)
from bhscatter.errors import ConfigError, DataIOError
from bhscatter.recovery import samples_from_pair

ZERO_CONFIG = {"synthetic": "zero", "xi_count": 11, "n_fft": 64, "x_step": 1.0}
RN_CONFIG = {"M": 5.0, "Q": 3.0, "Lambda": 0.0, "m_f": 0.1, "geometry_rows": 11}


def write_config(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

def test_defaults_validate():
    cfg = RunConfig().validate()
    assert cfg.params.de_sitter
    assert cfg.xi_grid.size == 201


@pytest.mark.parametrize("data", [
    {"M": -1.0},
    {"weights": [0]},
    {"weights": []},
    {"synthetic": "noise"},
    {"xi_min": 5.0, "xi_max": -5.0},
    {"tol_unitarity": 2.0},
    {"no_such_field": 1},
])
def test_invalid_config_fields(data):
    with pytest.raises(ConfigError):
        RunConfig.from_mapping(data)


def test_override_prefixes_tolerances():
    cfg = RunConfig().override(["unitarity=1e-9", "M=2.0"])
    assert cfg.tol_unitarity == 1e-9 and cfg.M == 2.0
    with pytest.raises(ConfigError):
        RunConfig().override(["unitarity"])
    with pytest.raises(ConfigError):
        RunConfig().override(["nothing=1"])


def test_malformed_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(["geometry", str(bad), "--out", str(tmp_path)], capsys)
    assert code == 2 and "not valid JSON" in err


def test_invalid_value_exits_2(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", {"M": 0.0})
    code, _, err = run(["geometry", cfg, "--out", str(tmp_path)], capsys)
    assert code == 2 and "'M'" in err


def test_missing_config_exits_3(tmp_path, capsys):
    code, _, err = run(["geometry", str(tmp_path / "absent.json")], capsys)
    assert code == 3 and "cannot read config" in err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def test_report_round_trip():
    data = {"a": 0.1, "b": -3, "c": 1.5e-300 - 2.25j, "d": True, "e": "pass",
            "f": float(np.float64(1) / 3), "g": complex(0.0, -0.0)}
    back = parse_report(format_report(data, "title"))
    assert back == data


def test_report_rejects_malformed_line():
    with pytest.raises(DataIOError):
        parse_report("a=1\nnot a pair\n")


def test_table_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(7)
    rows = rng.normal(size=(5, 3)) * 10.0 ** rng.integers(-20, 20, size=(5, 3))
    path = tmp_path / "t.csv"
    write_table(path, ["p", "q", "r"], rows)
    header, data = read_table(path)
    assert header == ["p", "q", "r"]
    np.testing.assert_array_equal(data, rows)


def test_table_errors(tmp_path):
    with pytest.raises(DataIOError):
        read_table(tmp_path / "missing.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1.0,abc\n")
    with pytest.raises(DataIOError, match="non-numeric"):
        read_table(bad)
    with pytest.raises(DataIOError):
        scattering_from_table(["x", "y"], np.zeros((1, 2)))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def test_geometry_reissner_nordstrom(tmp_path, capsys):
    cfg = write_config(tmp_path / "rn.json", RN_CONFIG)
    code, out, _ = run(["geometry", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == 0
    rep = parse_report(out)
    assert rep["r_0"] == pytest.approx(9.0, rel=1e-12)
    assert rep["r_minus"] == pytest.approx(1.0, rel=1e-12)
    assert rep["kappa_0"] == pytest.approx(8.0 / 162.0, rel=1e-12)
    header, table = read_table(tmp_path / "o" / "geometry_table.csv")
    assert header == ["x", "r"] and table.shape == (11, 2)
    assert np.all(np.diff(table[:, 1]) > 0)


def test_geometry_is_deterministic(tmp_path, capsys):
    cfg = write_config(tmp_path / "ds.json", {})
    outputs = []
    for name in ("a", "b"):
        assert run(["geometry", cfg, "--out", str(tmp_path / name)], capsys)[0] == 0
        outputs.append([(tmp_path / name / f).read_bytes()
                        for f in ("geometry_report.txt", "geometry_table.csv")])
    assert outputs[0] == outputs[1]


def test_forward_needs_de_sitter(tmp_path, capsys):
    cfg = write_config(tmp_path / "rn.json", RN_CONFIG)
    code, _, err = run(["forward", cfg, "--out", str(tmp_path)], capsys)
    assert code == 2 and "Lambda" in err


def test_forward_zero_potential(tmp_path, capsys):
    cfg = write_config(tmp_path / "z.json", ZERO_CONFIG)
    out = tmp_path / "o"
    code, text, _ = run(["forward", cfg, "--out", str(out), "--marchenko"], capsys)
    assert code == 0
    rep = parse_report(text)
    assert rep["w1.sup_R"] == 0.0 and rep["w2.max_unitarity_defect"] == 0.0
    for name in ("scattering_w1.csv", "reflection_w2.csv"):
        header, data = read_table(out / name)
        assert header == scattering_header()
        sm = scattering_from_table(header, data)
        eye = np.broadcast_to(np.eye(2), sm.R.shape)
        np.testing.assert_array_equal(sm.T_L, eye)
        np.testing.assert_array_equal(sm.T_R, eye)
        assert np.max(np.abs(sm.R)) == 0.0 and np.max(np.abs(sm.L)) == 0.0


def test_forward_rerun_and_threads_are_byte_identical(tmp_path, capsys):
    cfg = write_config(tmp_path / "z.json", ZERO_CONFIG)
    run(["forward", cfg, "--out", str(tmp_path / "a")], capsys)
    run(["forward", cfg, "--out", str(tmp_path / "b"), "--threads", "2"], capsys)
    for name in ("forward_report.txt", "scattering_w1.csv", "scattering_w2.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_asymptotics_needs_physical_profile(tmp_path, capsys):
    cfg = write_config(tmp_path / "z.json", ZERO_CONFIG)
    code, _, err = run(["asymptotics", cfg, "--out", str(tmp_path)], capsys)
    assert code == 2 and "synthetic" in err


def test_invert_missing_data_exits_3(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", {})
    code, _, err = run(["invert", cfg, "--mode", "highenergy", "--data",
                        str(tmp_path / "nowhere"), "--out", str(tmp_path)], capsys)
    assert code == 3 and "samples_w1.csv" in err


def test_invert_highenergy_from_exact_samples(tmp_path, capsys, ds_profiles, ds_params):
    data = tmp_path / "data"
    x = np.linspace(-4.0, 4.0, 9)
    for w in (1, 2):
        s = samples_from_pair(ds_profiles[w], w, x)
        write_table(data / f"samples_w{w}.csv", samples_header(),
                    zip(s.x, s.theta.real, s.theta.imag, s.ratio.real, s.ratio.imag))
    cfg = write_config(tmp_path / "c.json", {})
    code, text, _ = run(["invert", cfg, "--mode", "highenergy", "--data", str(data),
                         "--out", str(tmp_path / "o")], capsys)
    assert code == 0
    rep = parse_report((tmp_path / "o" / "invert_highenergy_report.txt").read_text())
    assert rep == parse_report(text)
    assert "diagnostics.determinant" in rep and "diagnostics.condition" in rep
    for key in ("M", "Q", "Lambda"):
        assert rep[f"relative_error.{key}"] < 1e-8


def test_invert_marchenko_on_zero_data(tmp_path, capsys):
    """Zero reflection gives k = 0, from which no black hole can be fitted."""
    cfg = write_config(tmp_path / "z.json", ZERO_CONFIG)
    out = tmp_path / "o"
    run(["forward", cfg, "--out", str(out), "--marchenko"], capsys)
    code, _, err = run(["invert", cfg, "--mode", "marchenko", "--data", str(out),
                        "--out", str(out)], capsys)
    assert code == 4 and "tail" in err
    _, k = read_table(out / "recovered_k.csv")
    assert np.max(np.abs(k[:, 1:])) == 0.0


def test_verify_flat_passes_and_writes_report(tmp_path, capsys):
    cfg = write_config(tmp_path / "rn.json", RN_CONFIG)
    code, text, _ = run(["verify", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == 0
    rep = parse_report(text)
    assert rep["summary.failed"] == 0 and rep["summary.passed"] == 2
    assert rep["integral_w1.value"] < 1e-10
    assert (tmp_path / "o" / "verify_report.txt").read_text() == text


def test_verify_tightened_tolerance_fails(tmp_path, capsys):
    cfg = write_config(tmp_path / "rn.json", RN_CONFIG)
    code, text, err = run(["verify", cfg, "--tolerance", "integral=1e-30"], capsys)
    assert code == 4 and "verification" in err
    rep = parse_report(text)
    assert rep["integral_w1.status"] == "fail" and rep["summary.failed"] == 2
