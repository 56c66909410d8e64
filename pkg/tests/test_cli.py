import csv
import json

import numpy as np
import pytest
from scipy import stats

from nilspectra.cli import config_hash, main
from nilspectra.plotting import read_plot_data


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


def frac(doc):
    return doc["num"], doc["den"]


def test_count_predict_document(capsys):
    code, doc = run(capsys, "count", "predict", "--group", "df", "--n", "1", "--nu", "2")
    assert code == 0
    assert frac(doc["lambda_exponent"]) == (9, 2)
    assert frac(doc["rho_power"]) == (-3, 1)
    assert frac(doc["s_exponent"]) == (2, 9)
    prov = doc["provenance"]
    assert prov["config_hash"] == config_hash(prov["config"])


def test_usage_errors(capsys):
    assert main([]) == 2
    capsys.readouterr()
    code, doc = run(capsys, "orbit", "volume", "--group", "engel", "--rho", "1", "--lambda", "2")
    assert code == 2 and doc["error"] == "unsupported"
    code, doc = run(capsys, "multiplier", "--nu", "2")
    assert code == 2 and doc["details"]["options"] == ["Q"]
    code, doc = run(capsys, "multiplier", "--Q", "12", "--nu", "2", "--p", "3", "--q", "4")
    assert code == 2 and doc["error"] == "invalid-parameter"
    with pytest.raises(SystemExit) as info:
        main(["spectrum", "solve", "--order", "5"])
    assert info.value.code == 2


def test_not_converged_exit(tmp_path, capsys):
    code, doc = run(capsys, "spectrum", "solve", "--problem", "euclid1d", "--N", "301", "-k", "5",
                    "--tol", "1e-30", "--method", "iterative", "--out-dir", str(tmp_path))
    assert code == 1 and doc["error"]["error"] == "not-converged"


def test_config_file_merging(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"Q": 12, "nu": 4, "p": "3/2", "q": 3}))
    code, doc = run(capsys, "multiplier", "--config", str(cfg))
    assert code == 0 and frac(doc["alpha"]) == (3, 1)
    code, doc = run(capsys, "multiplier", "--config", str(cfg), "--nu", "2")
    assert frac(doc["alpha"]) == (6, 1)
    assert frac(doc["heat_exponent"]) == (-2, 1)
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    code, _ = run(capsys, "multiplier", "--config", str(bad))
    assert code == 2


def test_multiplier_sobolev_both_ways(capsys):
    code, doc = run(capsys, "multiplier", "--Q", "7", "--nu", "2", "--p", "4/3", "--q", "4")
    assert code == 0
    assert frac(doc["sobolev_gap_displayed"]) == (7, 4) and frac(doc["sobolev_gap_normalized"]) == (7, 2)


def test_orbit_volume(capsys):
    code, doc = run(capsys, "orbit", "volume", "--rho", "1", "--lambda", "2")
    assert code == 0 and doc["value"] == pytest.approx(32768) and doc["lambda_power"] == 9


def test_verify_all(capsys):
    code, doc = run(capsys, "verify", "all")
    assert code == 0 and doc["passed"]


def test_algebra_and_weights(capsys):
    code, doc = run(capsys, "algebra", "info", "--group", "df", "--n", "1")
    assert code == 0 and doc["dim"] == 7
    code, doc = run(capsys, "weights", "enumerate", "--n", "1", "--max-weight", "2")
    assert code == 0 and len(doc["families"]) == 7


def test_form_and_operator(capsys):
    code, doc = run(capsys, "form", "validate", "--group", "df", "--form", "sublaplacian")
    assert code == 0 and doc["nu"] == 2
    code, doc = run(capsys, "operator", "assemble", "--group", "df", "--form", "sublaplacian", "--rho", "1")
    assert code == 0


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    out = tmp_path_factory.mktemp("spec")
    argv = ["spectrum", "solve", "--problem", "euclid1d", "--N", "401,801", "-k", "60", "--out-dir", str(out)]
    return out, argv


def test_spectrum_outputs_and_reruns(solved, capsys):
    out, argv = solved
    code = main(argv)
    first = capsys.readouterr().out
    assert code == 0
    summary = (out / "euclid1d_summary.json").read_bytes()
    dat = (out / "euclid1d.dat").read_bytes()
    for name in ("euclid1d_N401.csv", "euclid1d_N801.csv", "euclid1d_counting.png", "euclid1d_spectrum.png"):
        assert (out / name).stat().st_size > 0
    assert main(argv) == 0
    assert capsys.readouterr().out == first
    assert (out / "euclid1d_summary.json").read_bytes() == summary
    assert (out / "euclid1d.dat").read_bytes() == dat


def test_plot_data_consistent_with_csv(solved, capsys):
    out, argv = solved
    main(argv)
    doc = json.loads(capsys.readouterr().out)
    x, y, meta = read_plot_data(out / "euclid1d.dat")
    assert meta["config_hash"] == doc["provenance"]["config_hash"]
    reg = stats.linregress(x, y)
    assert reg.slope == pytest.approx(float(meta["fit_slope"]), abs=1e-10)
    assert reg.slope == pytest.approx(doc["fit"]["slope"], abs=1e-10)
    with (out / "euclid1d_N801.csv").open() as fh:
        vals = np.array([float(r["eigenvalue"]) for r in csv.DictReader(fh)])
    lo, hi = doc["fit"]["window"]
    assert np.allclose(np.exp(x), vals[lo - 1:hi], rtol=1e-13)
    assert abs(reg.slope - 1) < 0.05


def test_fit_exponent_roundtrip(solved, tmp_path, capsys):
    out, argv = solved
    main(argv)
    capsys.readouterr()
    csv_path = out / "euclid1d_N801.csv"
    plot = tmp_path / "fit.dat"
    code, doc = run(capsys, "fit", "exponent", "--input", str(csv_path), "--window", "10:60",
                    "--plot-data", str(plot))
    assert code == 0 and doc["window"] == [10, 60]
    x, y, meta = read_plot_data(plot)
    assert stats.linregress(x, y).slope == pytest.approx(doc["slope"], abs=1e-12)
    assert plot.with_suffix(".png").exists()
    code, doc = run(capsys, "fit", "exponent", "--input", str(csv_path), "--mode", "growth", "--window", "10:60")
    assert code == 0 and abs(doc["slope"] - 1) < 0.05
    code, doc = run(capsys, "fit", "exponent", "--input", str(tmp_path / "missing.csv"))
    assert code == 2
