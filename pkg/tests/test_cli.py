"""End-to-end tests for the command line interface (driven in-process)."""

import csv
import json

import pytest

import conic_lmcf
from conic_lmcf.cli import main


def read_report(outdir):
    with open(outdir / "report.json", encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# happy paths per subcommand
# ---------------------------------------------------------------------------


def test_spectrum_sphere_csv(tmp_path, capsys):
    rc = main(
        ["spectrum", "--link", "sphere", "--dim", "2", "--lmax", "7",
         "--outdir", str(tmp_path)]
    )
    assert rc == 0
    with open(tmp_path / "spectrum.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    got = {float(r["lambda"]): int(r["multiplicity"]) for r in rows}
    assert got == {0.0: 1, 2.0: 3, 6.0: 5}
    assert "lambda=0" in capsys.readouterr().out


def test_exponents_table_includes_fractional_root(tmp_path):
    rc = main(
        ["exponents", "--link", "hl-torus", "--alpha-max", "3",
         "--outdir", str(tmp_path)]
    )
    assert rc == 0
    with open(tmp_path / "exponents.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    by_lam = {float(r["lambda"]): r for r in rows}
    assert float(by_lam[8.0]["alpha_plus"]) == pytest.approx(
        (-1 + 33**0.5) / 2, abs=1e-12
    )
    # lower root mirrors across (2 - m)/2
    assert float(by_lam[2.0]["alpha_minus"]) == pytest.approx(-2.0)


def test_stability_output(tmp_path, capsys):
    rc = main(["stability", "--cone", "hl-torus-3", "--outdir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "stability index: 0" in out
    assert "1/6/6" in out
    report = read_report(tmp_path)
    assert report["outputs"]["index"] == 0
    assert report["outputs"]["degenerate"] is False


def test_stability_plane_is_degenerate(tmp_path, capsys):
    rc = main(["stability", "--cone", "plane-3", "--outdir", str(tmp_path)])
    assert rc == 0
    report = read_report(tmp_path)
    assert report["outputs"]["index"] == -3
    assert report["outputs"]["degenerate"] is True


def test_fredholm_index(tmp_path, capsys):
    rc = main(
        ["fredholm", "--cone", "hl-torus-3", "--gamma", "2.1",
         "--outdir", str(tmp_path)]
    )
    assert rc == 0
    assert "fredholm index: -13" in capsys.readouterr().out
    assert read_report(tmp_path)["outputs"]["index"] == -13


def test_heat_runs_modes_concurrently(tmp_path, monkeypatch):
    monkeypatch.setenv("CONIC_LMCF_THREADS", "2")
    rc = main(
        ["heat", "--lam", "0", "2", "--n", "60", "--T", "0.05",
         "--outdir", str(tmp_path)]
    )
    assert rc == 0
    report = read_report(tmp_path)
    assert report["outputs"]["workers"] == 2
    files = set(report["outputs"]["files"])
    assert {"mode_0.csv", "profile_0.dat", "mode_2.csv", "profile_2.dat"} <= files
    # gnuplot companion: two whitespace-separated columns
    line = (tmp_path / "profile_0.dat").read_text().strip().splitlines()[0]
    assert len(line.split()) == 2


def test_asymptotics_extracts_terms(tmp_path, capsys):
    rc = main(
        ["asymptotics", "--lam", "0", "--n", "400", "--T", "0.1",
         "--gamma", "2.5", "--forcing", "r^0.5", "--outdir", str(tmp_path)]
    )
    assert rc == 0
    assert "term r^" in capsys.readouterr().out
    with open(tmp_path / "asymptotics.json", encoding="utf-8") as fh:
        data = json.load(fh)
    assert data["terms"]  # rows are [alpha, lift, coefficient]
    assert all(abs(coeff) > 0 for _, _, coeff in data["terms"])
    assert 2.35 <= data["remainder_rate"] <= 2.65


def test_flow_artifacts(tmp_path):
    rc = main(
        ["flow", "--n", "32", "--T", "0.2", "--ic", "sine",
         "--outdir", str(tmp_path)]
    )
    assert rc == 0
    for name in ("flow_snapshots.csv", "sup_theta.dat", "flow_summary.json"):
        assert (tmp_path / name).exists()
    with open(tmp_path / "flow_summary.json", encoding="utf-8") as fh:
        summary = json.load(fh)
    sups = summary["sup_theta"]
    assert sups[-1] <= sups[0]


def test_defect_ratio_window(tmp_path, capsys):
    rc = main(
        ["defect", "--n", "32", "--T", "0.25", "--eps", "0.1", "0.05",
         "--outdir", str(tmp_path)]
    )
    assert rc == 0
    with open(tmp_path / "defect.json", encoding="utf-8") as fh:
        data = json.load(fh)
    for ratio in data["ratios_per_amplitude"]:
        assert 0.2 <= ratio <= 0.3
    assert "per-amplitude ratio" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# report contract
# ---------------------------------------------------------------------------


def test_reports_validate_against_shipped_schema(tmp_path):
    import jsonschema
    from importlib import resources

    schema = json.loads(
        resources.files("conic_lmcf.schemas")
        .joinpath("report.schema.json")
        .read_text()
    )
    for i, argv in enumerate(
        [
            ["spectrum", "--link", "sphere", "--dim", "2", "--lmax", "3"],
            ["fredholm", "--cone", "hl-torus-3", "--gamma", "2.1"],
            ["stability", "--cone", "plane-3"],
        ]
    ):
        outdir = tmp_path / str(i)
        assert main(argv + ["--outdir", str(outdir)]) == 0
        jsonschema.validate(read_report(outdir), schema)


def test_reports_record_versions(tmp_path):
    main(["fredholm", "--cone", "hl-torus-3", "--gamma", "2.1",
          "--outdir", str(tmp_path)])
    versions = read_report(tmp_path)["versions"]
    assert versions["conic-lmcf"] == conic_lmcf.__version__
    assert set(versions) == {"python", "numpy", "scipy", "conic-lmcf"}


def test_repeated_runs_are_byte_identical(tmp_path):
    argv = ["heat", "--lam", "0", "--n", "80", "--T", "0.05",
            "--forcing", "r^0.5"]
    dirs = [tmp_path / "a", tmp_path / "b"]
    for d in dirs:
        assert main(argv + ["--outdir", str(d)]) == 0
    for name in ("mode_0.csv", "profile_0.dat"):
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()
    # reports agree except for the wall clock
    reports = [read_report(d) for d in dirs]
    for r in reports:
        r.pop("wall_time_s")
    assert reports[0] == reports[1]


# ---------------------------------------------------------------------------
# flag/config handling
# ---------------------------------------------------------------------------


def test_config_file_supplies_defaults(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gamma": [1.5], "cone": "hl-torus-3"}))
    out1 = tmp_path / "defaulted"
    assert main(["fredholm", "--config", str(cfg), "--outdir", str(out1)]) == 0
    assert read_report(out1)["outputs"]["index"] == -7
    # explicit flags beat the config file
    out2 = tmp_path / "explicit"
    assert main(
        ["fredholm", "--config", str(cfg), "--gamma", "2.1",
         "--outdir", str(out2)]
    ) == 0
    assert read_report(out2)["outputs"]["index"] == -13


def test_seed_flag_is_recorded(tmp_path):
    main(["stability", "--cone", "hl-torus-3", "--seed", "42",
          "--outdir", str(tmp_path)])
    assert read_report(tmp_path)["inputs"]["seed"] == 42


# ---------------------------------------------------------------------------
# failure modes and exit codes
# ---------------------------------------------------------------------------


def test_exceptional_weight_exits_2(tmp_path, capsys):
    rc = main(["fredholm", "--cone", "hl-torus-3", "--gamma", "2.0",
               "--outdir", str(tmp_path)])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_graph_condition_failure_exits_1(tmp_path, capsys):
    rc = main(["flow", "--n", "32", "--T", "0.2", "--ic", "2.0*sin(x1)",
               "--outdir", str(tmp_path)])
    assert rc == 1
    assert "numerical failure:" in capsys.readouterr().err


def test_unparseable_forcing_exits_2(tmp_path, capsys):
    rc = main(["heat", "--lam", "0", "--n", "50", "--T", "0.05",
               "--forcing", "r^", "--outdir", str(tmp_path)])
    assert rc == 2
    assert "forcing" in capsys.readouterr().err


def test_initial_condition_rejects_unknown_names(tmp_path, capsys):
    rc = main(
        ["flow", "--n", "16", "--T", "0.01",
         "--ic", "__import__('os').getcwd()", "--outdir", str(tmp_path)]
    )
    assert rc == 2
    assert "allowed" in capsys.readouterr().err


def test_bad_thread_env_exits_2(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("CONIC_LMCF_THREADS", "many")
    rc = main(["heat", "--lam", "0", "--n", "50", "--T", "0.05",
               "--outdir", str(tmp_path)])
    assert rc == 2
    assert "CONIC_LMCF_THREADS" in capsys.readouterr().err


def test_unknown_flag_is_an_argparse_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["fredholm", "--no-such-flag"])
    assert exc.value.code == 2
