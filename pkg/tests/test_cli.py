import json

import pytest

from ethlab.cli import main


def test_sweep_writes_csvs(tmp_path, capsys):
    code = main(["sweep", "--n", "4", "--ensemble", "uniform", "--out", str(tmp_path)])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert (tmp_path / "records.csv").read_text().startswith("# ethlab sweep")
    assert out["summary"].endswith("summary.csv")


def test_measures_single_item(tmp_path):
    code = main(
        [
            "measures", "--n", "4", "--ensemble", "canonical", "--beta", "0.2",
            "--shell-center", "zero", "--shell-width", "0.5", "--out", str(tmp_path),
        ]
    )
    assert code == 0
    text = (tmp_path / "records.csv").read_text()
    assert ",canonical," in text


def test_sweep_n_range(tmp_path):
    code = main(["sweep", "--n-min", "4", "--n-max", "5", "--ensemble", "uniform", "--out", str(tmp_path)])
    assert code == 0
    rows = [ln for ln in (tmp_path / "summary.csv").read_text().splitlines() if not ln.startswith("#")]
    assert len(rows) == 1 + 2


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n_list = 4\nensembles = uniform\nh = 0.0\n")
    out = tmp_path / "out"
    code = main(["sweep", "--config", str(cfg), "--g", "0.9", "--out", str(out)])
    assert code == 0
    text = (out / "summary.csv").read_text()
    assert "4,0.9,0.0,uniform" in text


def test_spectrum_prints_summary(tmp_path, capsys):
    code = main(["spectrum", "--n", "4", "--table", "--out", str(tmp_path)])
    assert code == 0
    body = json.loads(capsys.readouterr().out)
    assert body["dim"] == 16
    assert (tmp_path / "spectrum.csv").exists()


def test_check_identities_exit_zero(tmp_path, capsys):
    report_path = tmp_path / "report.json"
    code = main(["check-identities", "--n", "4", "--out", str(report_path)])
    assert code == 0
    body = json.loads(report_path.read_text())
    assert body["passed"] is True


def test_fit_roundtrip(tmp_path, capsys):
    code = main(
        ["sweep", "--n", "4,5,6", "--ensemble", "microcanonical:zero", "--out", str(tmp_path)]
    )
    assert code == 0
    capsys.readouterr()
    code = main(
        [
            "fit",
            "--in",
            str(tmp_path / "summary.csv"),
            "--column",
            "vbar_off",
            "--ensemble",
            "microcanonical:zero",
            "--out",
            str(tmp_path / "fit.json"),
        ]
    )
    assert code == 0
    fit = json.loads((tmp_path / "fit.json").read_text())
    assert fit["slope"] < 0


def test_diagnostics_writes_files(tmp_path, capsys):
    code = main(["diagnostics", "--n", "4", "--bins", "8", "--out", str(tmp_path)])
    assert code == 0
    for name in ("dos.csv", "canonical_hist.csv", "e_beta.csv", "mutual_information.csv"):
        assert (tmp_path / name).exists()


def test_usage_error_exit_code(capsys):
    assert main(["sweep"]) == 1  # no --n / --n-min
    assert main(["spectrum"]) == 1  # missing required --n
    assert main(["fit", "--in", "/nonexistent.csv", "--column", "x", "--ensemble", "u"]) == 1


def test_numerical_error_exit_code(tmp_path, capsys):
    # strict rank policy rejects the singular local states of product
    # eigenstates, which surfaces as a numerical error (exit 2)
    code = main(
        ["measures", "--n", "4", "--g", "0.0", "--h", "0.0", "--ensemble", "pure", "--out", str(tmp_path)]
    )
    assert code == 2


def test_invalid_ensemble_choice(tmp_path, capsys):
    code = main(["sweep", "--n", "4", "--ensemble", "bogus", "--out", str(tmp_path)])
    assert code == 1


def test_pseudo_rank_policy_handles_singular_states(tmp_path, capsys):
    # the pseudo-inverse identity still closes on the retained modes, so the
    # residual gate passes and the run succeeds
    code = main(
        ["measures", "--n", "4", "--g", "0.0", "--h", "0.0", "--ensemble", "pure",
         "--rank-policy", "pseudo", "--out", str(tmp_path)]
    )
    assert code == 0
    rows = [ln for ln in (tmp_path / "records.csv").read_text().splitlines() if not ln.startswith("#")]
    assert len(rows) == 1 + 16
