"""Tests for the command-line interface."""

import numpy as np
import pytest

from jcas_sim.cli import main
from jcas_sim.harness import parse_results


def sweep_args(tmp_path, *extra):
    out = tmp_path / "res.csv"
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text(
        "num_subcarriers = 16\n"
        "num_symbols = 8\n"
        "bs_rows = 4\n"
        "bs_cols = 4\n"
        "rhh_realizations = 64\n"
        "rhh_cells = 4\n"
    )
    return [
        "sweep",
        "--config", str(cfg),
        "--snr-min", "0",
        "--snr-max", "2",
        "--snr-step", "2",
        "--trials", "2",
        "--seed", "3",
        "--out", str(out),
        *extra,
    ], out


class TestSweepCommand:
    def test_writes_csv_with_exit_zero(self, tmp_path, capsys):
        args, out = sweep_args(tmp_path, "--methods", "ls,sakf")
        assert main(args) == 0
        table = parse_results(str(out))
        assert table.methods() == ["ls", "sakf"]
        assert {r.snr_db for r in table.rows} == {0.0, 2.0}
        assert "wrote" in capsys.readouterr().out

    def test_plotdata_format(self, tmp_path):
        args, out = sweep_args(tmp_path, "--methods", "ls", "--format", "plotdata")
        assert main(args) == 0
        series = out.parent / "res_ls.csv"
        assert series.exists()

    def test_reproducible_across_invocations(self, tmp_path):
        args1, out1 = sweep_args(tmp_path, "--methods", "ls,mmse,sakf")
        main(args1)
        first = out1.read_bytes()
        main(args1)
        assert out1.read_bytes() == first

    def test_mod_16_accepted(self, tmp_path):
        args, out = sweep_args(tmp_path, "--methods", "ls", "--mod", "16")
        assert main(args) == 0
        assert parse_results(str(out)).rows[0].num_bits == 2 * 16 * 8 * 4

    def test_bad_method_exits_one(self, tmp_path, capsys):
        args, _ = sweep_args(tmp_path, "--methods", "ls,magic")
        assert main(args) == 1
        assert "config error" in capsys.readouterr().err

    def test_missing_config_file_exits_one(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        code = main(["sweep", "--config", str(tmp_path / "absent.cfg"), "--out", str(out)])
        assert code == 1

    def test_bad_flag_exits_one(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["sweep", "--mod", "7"])
        assert err.value.code == 1

    def test_snr_range_requires_both_ends(self, tmp_path):
        args, _ = sweep_args(tmp_path)
        idx = args.index("--snr-max")
        del args[idx:idx + 2]
        assert main(args) == 1


class TestBenchCommand:
    def test_prints_table_and_slopes(self, capsys):
        assert main(["bench", "--sizes", "16,64", "--reps", "2"]) == 0
        out = capsys.readouterr().out
        assert "log-log slope mmse" in out
        assert "sec/estimate" in out

    def test_optional_csv(self, tmp_path):
        out = tmp_path / "bench.csv"
        assert main(["bench", "--sizes", "16,64", "--reps", "1", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "method,size_n,seconds_per_estimate"
        assert len(lines) == 7

    def test_invalid_sizes_exit_one(self):
        assert main(["bench", "--sizes", "15,63"]) == 1


class TestDemoCommand:
    def test_prints_sensing_trace(self, tmp_path, capsys):
        cfg = tmp_path / "tiny.cfg"
        cfg.write_text(
            "num_subcarriers = 32\nnum_symbols = 16\nbs_rows = 4\nbs_cols = 4\n"
            "rhh_realizations = 64\nrhh_cells = 4\n"
        )
        assert main(["demo", "--config", str(cfg), "--snr", "10", "--seed", "2"]) == 0
        out = capsys.readouterr().out
        assert "estimated number of paths" in out
        assert "estimated noise power" in out
        for method in ("ls", "mmse", "sakf"):
            assert method in out
