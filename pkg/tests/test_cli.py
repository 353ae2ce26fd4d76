"""Command-line behavior: flags, outputs, and failure modes."""

import os

from a2psim.cli import main


def test_single_run_prints_the_summary(capsys):
    rc = main(["--scheme", "edca", "--active", "8", "--seed", "2",
               "--duration", "0.5"])
    out = capsys.readouterr().out
    assert rc == 0
    fields = dict(line.split(": ", 1) for line in out.strip().splitlines())
    assert fields["scheme"] == "edca"
    assert fields["active"] == "8"
    assert fields["seed"] == "2"
    assert fields["duration_ns"] == str(500_000_000)
    assert int(fields["generated"]) == 800


def test_config_file_feeds_the_run(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("scheme = a2p\nactive = 2\nn_initial = 2\nduration = 200ms\n")
    rc = main(["--config", str(conf)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "scheme: a2p" in out
    assert "active: 2" in out


def test_bad_flag_values_produce_an_error_line(capsys):
    rc = main(["--scheme", "edca", "--active", "200", "--duration", "1"])
    err = capsys.readouterr().err
    assert rc == 1
    assert err.startswith("error: active")


def test_missing_config_file_is_reported(capsys):
    rc = main(["--config", "/nonexistent/run.conf"])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_out_dir_gets_summary_and_packets(tmp_path, capsys):
    out = tmp_path / "results"
    rc = main(["--scheme", "edca", "--active", "8", "--duration", "0.5",
               "--out", str(out), "--packets"])
    assert rc == 0
    summary = (out / "summary.csv").read_text().splitlines()
    assert summary[0] == "# a2psim-summary v1"
    assert summary[1].startswith("# config ")
    assert len(summary) == 4
    packets = (out / "packets.csv").read_text().splitlines()
    assert len(packets) == 2 + 800


def test_packets_flag_requires_out_dir(capsys):
    rc = main(["--scheme", "edca", "--active", "8", "--duration", "0.5",
               "--packets"])
    assert rc == 1
    assert "error: --packets needs --out" in capsys.readouterr().err


def test_trace_level_one_keeps_protocol_events(capsys):
    rc = main(["--scheme", "a2p", "--active", "8", "--duration", "0.2",
               "--trace", "1"])
    out = capsys.readouterr().out
    assert rc == 0
    assert " exchange-ul " in out
    assert " edca-grant " in out
    assert " occupy " not in out  # medium-level detail is level 2


def test_trace_level_two_adds_medium_events(capsys):
    rc = main(["--scheme", "a2p", "--active", "8", "--duration", "0.2",
               "--trace", "2"])
    out = capsys.readouterr().out
    assert rc == 0
    assert " occupy " in out


def test_sweep_file_runs_the_grid(tmp_path, capsys):
    sweep = tmp_path / "sweep.conf"
    sweep.write_text("schemes = edca\ncounts = 2\nseeds = 1,2\n")
    conf = tmp_path / "base.conf"
    conf.write_text("n_initial = 2\nduration = 500ms\n")
    out = tmp_path / "grid"
    rc = main(["--sweep", str(sweep), "--config", str(conf), "--out", str(out)])
    stdout = capsys.readouterr().out
    assert rc == 0
    assert "2 runs" in stdout
    lines = (out / "summary.csv").read_text().splitlines()
    assert len(lines) == 5  # schema, config, header, two rows
    assert os.path.exists(out / "summary.csv")


def test_bad_sweep_file_is_rejected(tmp_path, capsys):
    sweep = tmp_path / "sweep.conf"
    sweep.write_text("counts = zero\n")
    rc = main(["--sweep", str(sweep)])
    assert rc == 1
    assert "error: counts" in capsys.readouterr().err
