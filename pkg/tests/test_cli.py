import json

import pytest

from stclab.cli import EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE, main


def test_list_codes(capsys):
    assert main(["list-codes"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "golden" in out and "perfect4" in out


@pytest.mark.parametrize("code", ["golden", "perfect4"])
def test_verify_builtin(code, capsys):
    assert main(["verify", "--code", code]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert out.count("PASS") >= 3


def test_verify_malformed_spec(tmp_path, capsys):
    bad = tmp_path / "broken.json"
    bad.write_text(json.dumps({"label": "x", "n": 2, "gamma": [0, 1], "omega_table": "nope", "gamma_blocks": "cyclic"}))
    assert main(["verify", "--code", str(bad)]) == EXIT_USAGE
    assert "omega_table" in capsys.readouterr().err


def test_encode_and_decode_run(capsys):
    assert main(["encode", "--code", "golden", "--alphabet", "qam4", "--seed", "4"]) == EXIT_OK
    assert "codeword" in capsys.readouterr().out
    assert main(["decode", "--code", "golden", "--seed", "4", "--snr-db", "30", "--decoder", "sphere"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "exact recovery: True" in out


def test_simulate_deterministic_and_parallel(tmp_path, capsys):
    base = [
        "simulate", "--code", "golden", "--alphabet", "qam4", "--snr", "0:8:8",
        "--trials", "400", "--decoder", "ml,recursive", "--seed", "7",
    ]
    assert main(base + ["--threads", "1", "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(base + ["--threads", "4", "--out", str(tmp_path / "b")]) == EXIT_OK
    assert main(base + ["--threads", "1", "--out", str(tmp_path / "c")]) == EXIT_OK
    a = (tmp_path / "a_rates.csv").read_bytes()
    assert a == (tmp_path / "b_rates.csv").read_bytes()
    assert a == (tmp_path / "c_rates.csv").read_bytes()
    capsys.readouterr()


def test_simulate_budget_warning(tmp_path, capsys):
    rc = main(
        [
            "simulate", "--code", "perfect4", "--alphabet", "qam4", "--snr", "10",
            "--trials", "5", "--decoder", "ml,recursive", "--seed", "1",
            "--threads", "1", "--out", str(tmp_path / "p"),
        ]
    )
    assert rc == EXIT_OK
    captured = capsys.readouterr()
    assert "skipped" in captured.err and "sphere" in captured.err
    assert "recursive" in (tmp_path / "p_rates.csv").read_text()


def test_simulate_snr_list_form(tmp_path, capsys):
    rc = main(
        [
            "simulate", "--code", "golden", "--snr", "0,6", "--trials", "50",
            "--decoder", "recursive", "--seed", "2", "--threads", "1",
            "--out", str(tmp_path / "l"),
        ]
    )
    assert rc == EXIT_OK
    capsys.readouterr()
    lines = (tmp_path / "l_rates.csv").read_text().splitlines()
    assert len(lines) == 3


def test_stats_small_run(tmp_path, capsys):
    rc = main(
        [
            "stats", "--code", "golden", "--trials", "1000", "--seed", "3",
            "--threads", "1", "--out", str(tmp_path / "s"),
        ]
    )
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "pearson" in out
    assert (tmp_path / "s_corr.csv").exists()
    assert (tmp_path / "s_hist.csv").exists()


def test_stats_trials_zero_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["stats", "--code", "golden", "--trials", "0"])
    assert exc.value.code == EXIT_USAGE


def test_stats_trials_too_small_is_usage_error(capsys):
    assert main(["stats", "--code", "golden", "--trials", "500"]) == EXIT_USAGE
    assert "1000" in capsys.readouterr().err


def test_unknown_decoder_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--decoder", "smooth", "--trials", "5"])
    assert exc.value.code == EXIT_USAGE


def test_cyclic_source_requires_omega_file(capsys):
    assert main(["verify", "--code", "cyclic:2:0:1"]) == EXIT_USAGE
    assert "omega" in capsys.readouterr().err


def test_cyclic_source_with_omega_file(tmp_path, capsys):
    omega = tmp_path / "omega.json"
    omega.write_text(json.dumps([[[1, 0], [2, 0]], [[1, 0], [-2, 0]]]))
    assert main(["verify", "--code", "cyclic:2:0:1", "--omega-file", str(omega)]) == EXIT_OK
    assert "PASS" in capsys.readouterr().out
