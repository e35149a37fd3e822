import json

import pytest

from chanshort.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_design_fom_json(capsys):
    code, out, _ = run_cli(capsys, "design", "--set", "channel.preset=epr4", "--set", "sigma=1")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["kind"] == "fom" and "milb_nats" in doc


def test_design_ubm_reports_stationarity(capsys):
    code, out, err = run_cli(capsys, "design", "--set", "channel.preset=proakis_c",
                             "--set", "shortener=ubm")
    assert code == EXIT_OK
    assert abs(json.loads(out)["gm3_value"] + 1) < 1e-6
    assert "stationarity" in err


def test_usage_errors(capsys, tmp_path):
    assert run_cli(capsys, "design", "--set", "sigma=1.5")[0] == EXIT_USAGE
    assert run_cli(capsys, "design", "--config", str(tmp_path / "none.json"))[0] == EXIT_USAGE
    assert run_cli(capsys, "design", "--set", "colour=blue")[0] == EXIT_USAGE
    assert run_cli(capsys, "nonsense")[0] == EXIT_USAGE
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli(capsys, "rates", "--config", str(bad))[0] == EXIT_USAGE


def test_config_file_and_out(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"channel": {"taps_re": [1.0], "n0": 1.0}, "nu": 0,
                               "snr_db": [0.0]}))
    out = tmp_path / "r.csv"
    code, _, _ = run_cli(capsys, "rates", "--config", str(cfg), "--out", str(out),
                         "--grid-points", "1024")
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# chanshort-rates/1 nats")
    row = dict(zip(lines[1].split(","), lines[2].split(",")))
    for key in ("i_fom0", "i_ubm"):
        assert float(row[key]) == pytest.approx(float(row["c"]), abs=1e-6)


def test_rates_flags_ordering_violations(capsys):
    # the HOM lower-bound link fails on EPR-4 (see the decisions ledger)
    code, out, err = run_cli(capsys, "rates", "--set", "snr_db=[10]", "--grid-points", "1024")
    assert code == EXIT_FAIL
    assert "hom_l<=hom" in err


def test_rates_grid_refinement_is_stable(capsys):
    rows = []
    for n in ("4096", "8192"):
        _, out, _ = run_cli(capsys, "rates", "--set", "snr_db=[10]", "--grid-points", n)
        rows.append(dict(zip(*[line.split(",") for line in out.splitlines()[1:3]])))
    for key in ("c", "i_hom_l", "i_hom_u", "i_ubm"):
        assert float(rows[0][key]) == pytest.approx(float(rows[1][key]), abs=1e-8)


def test_simulate_is_deterministic(capsys):
    argv = ("simulate", "--set", "n_blocks=2", "--set", "block_len=100",
            "--set", "snr_db=[6]", "--seed", "4")
    first = run_cli(capsys, *argv)
    second = run_cli(capsys, *argv)
    assert first[0] == EXIT_OK and first[1] == second[1]
    assert first[1].startswith("# chanshort-sim/1")


def test_sweeps(capsys):
    code, out, _ = run_cli(capsys, "sweep-sigma", "--set", "n_blocks=1", "--set", "block_len=64",
                           "--set", "sigma_grid=[0, 1]", "--set", "modulation=8psk")
    assert code == EXIT_OK and len(out.splitlines()) == 4
    code, out, err = run_cli(capsys, "sweep-delay", "--set", "n_blocks=1",
                             "--set", "block_len=64", "--set", "d_values=[3, 6]",
                             "--set", "shortener=hom", "--set", "snr_db=[4, 8]")
    assert code == EXIT_OK and err.count("D=") == 2


def test_verify_subset(capsys):
    code, out, _ = run_cli(capsys, "verify", "--only", "5")
    assert code == EXIT_OK
    assert "[PASS] criterion  5" in out
