import json

import pytest
from click.testing import CliRunner

from sombrero.cli import EXIT_PARSE, main
from sombrero.sat import count_satisfying, read_dimacs, write_dimacs
from sombrero.experiments import read_rows_csv


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def instance_file(toy3, tmp_path):
    path = tmp_path / "toy.cnf"
    write_dimacs(toy3, path)
    return path


class TestGen:
    def test_writes_verified_instances(self, runner, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(
            main, ["gen", "--n", "4", "--m", "10", "--count", "2",
                   "--seed", "7", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        files = sorted(p.name for p in out.glob("*.cnf"))
        assert files == ["instance_000.cnf", "instance_001.cnf"]
        for name in files:
            assert count_satisfying(read_dimacs(out / name)) == 1
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["subcommand"] == "gen"
        assert manifest["seed"] == 7
        assert len(manifest["outputs"]) == 2
        assert all(len(digest) == 64 for digest in manifest["outputs"].values())

    def test_seed_determinism(self, runner, tmp_path):
        args = ["gen", "--n", "4", "--m", "10", "--seed", "3"]
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert runner.invoke(main, args + ["--out", str(out)]).exit_code == 0
        assert (a / "instance_000.cnf").read_bytes() == \
            (b / "instance_000.cnf").read_bytes()

    def test_cover_flag(self, runner, tmp_path):
        out = tmp_path / "cover"
        result = runner.invoke(
            main, ["gen", "--n", "3", "--m", "7", "--cover", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        instances = [read_dimacs(p) for p in sorted(out.glob("*.cnf"))]
        assert len(instances) == 8
        assert {i.unique_solution.value for i in instances} == set(range(8))

    def test_cover_and_count_conflict(self, runner):
        result = runner.invoke(
            main, ["gen", "--n", "3", "--count", "2", "--cover"]
        )
        assert result.exit_code == 2

    def test_bad_n_is_usage_error(self, runner):
        result = runner.invoke(main, ["gen", "--n", "1"])
        assert result.exit_code == 2


class TestGap:
    def test_default_guess_is_stored_solution(self, runner, instance_file):
        result = runner.invoke(main, ["gap", str(instance_file)])
        assert result.exit_code == 0, result.output
        assert "bf=0 uc=0" in result.output
        assert "g_min=" in result.output and "s_star=" in result.output

    def test_caqc_warns_on_guess(self, runner, instance_file):
        result = runner.invoke(
            main, ["gap", str(instance_file), "--mode", "caqc", "--guess", "000"],
        )
        assert result.exit_code == 0
        assert "ignored" in result.output

    def test_curve_csv(self, runner, instance_file, tmp_path):
        out = tmp_path / "curve.csv"
        result = runner.invoke(
            main, ["gap", str(instance_file), "--grid", "11", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert lines[0] == "s,e0,e1,gap"
        assert len(lines) == 12
        s, e0, e1, gap = (float(x) for x in lines[1].split(","))
        assert s == 0.0 and gap == pytest.approx(e1 - e0)
        assert (tmp_path / "manifest.json").exists()

    def test_matches_library_scan(self, runner, instance_file, toy3):
        from sombrero.hamiltonian import SAQC, ScheduleSpec
        from sombrero.spectral import scan_gap
        result = runner.invoke(main, ["gap", str(instance_file), "--delta", "2.0"])
        schedule = ScheduleSpec(SAQC, toy3, 2.0, guess=toy3.unique_solution)
        expected = scan_gap(schedule)
        assert f"g_min={expected.g_min!r}" in result.output

    def test_golden_minimum_gap(self, runner, instance_file):
        # frozen from an independent bisection-eigensolver scan of the same
        # schedule (201-point grid + golden-section refinement)
        golden = 0.7351601813890015
        result = runner.invoke(main, ["gap", str(instance_file), "--delta", "1.5"])
        assert result.exit_code == 0, result.output
        g_min = float(result.output.split("g_min=")[1].split()[0])
        assert g_min == pytest.approx(golden, abs=1e-8)

    def test_guess_length_mismatch(self, runner, instance_file):
        result = runner.invoke(
            main, ["gap", str(instance_file), "--guess", "01"]
        )
        assert result.exit_code == 2

    def test_parse_error_exit_code(self, runner, tmp_path):
        bad = tmp_path / "bad.cnf"
        bad.write_text("p cnf 3 1\n1 2 nope 0\n")
        result = runner.invoke(main, ["gap", str(bad)])
        assert result.exit_code == EXIT_PARSE


class TestSweep:
    CONFIG = {
        "n": 3, "m": 7, "instance_count": 2,
        "delta_grid": [1.0], "grid_points": 21, "seed": 5,
    }

    def test_config_file_with_overrides(self, runner, tmp_path):
        config = tmp_path / "sweep.json"
        config.write_text(json.dumps(self.CONFIG))
        out = tmp_path / "out"
        result = runner.invoke(
            main, ["sweep", "--config", str(config), "--instances", "1",
                   "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        rows = read_rows_csv(out / "rows.csv")
        assert len(rows) == 1 * (1 + 8)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["instance_count"] == 1

    def test_jobs_do_not_change_bytes(self, runner, tmp_path):
        config = tmp_path / "sweep.json"
        config.write_text(json.dumps(self.CONFIG))
        outputs = []
        for jobs, name in ((1, "serial"), (2, "parallel")):
            out = tmp_path / name
            result = runner.invoke(
                main, ["sweep", "--config", str(config), "--jobs", str(jobs),
                       "--out", str(out)]
            )
            assert result.exit_code == 0, result.output
            outputs.append((out / "rows.csv").read_bytes())
        assert outputs[0] == outputs[1]

    def test_missing_parameters(self, runner):
        result = runner.invoke(main, ["sweep", "--n", "3"])
        assert result.exit_code == 2
        assert "missing sweep parameters" in result.output

    def test_malformed_config_json(self, runner, tmp_path):
        config = tmp_path / "broken.json"
        config.write_text("{not json")
        result = runner.invoke(main, ["sweep", "--config", str(config)])
        assert result.exit_code == EXIT_PARSE

    def test_unknown_config_field(self, runner, tmp_path):
        config = tmp_path / "sweep.json"
        config.write_text(json.dumps({**self.CONFIG, "bogus": 1}))
        result = runner.invoke(main, ["sweep", "--config", str(config)])
        assert result.exit_code == 2


class TestStats:
    @pytest.fixture
    def rows_csv(self, runner, tmp_path):
        config = tmp_path / "sweep.json"
        config.write_text(json.dumps(TestSweep.CONFIG))
        out = tmp_path / "sweep_out"
        assert runner.invoke(
            main, ["sweep", "--config", str(config), "--out", str(out)]
        ).exit_code == 0
        return out / "rows.csv"

    def test_group_and_curves(self, runner, rows_csv, tmp_path):
        out = tmp_path / "stats_out"
        result = runner.invoke(
            main, ["stats", str(rows_csv), "--group", "bf", "--curves",
                   "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert (out / "medians_bf.csv").exists()
        assert (out / "probability_curves.csv").exists()
        header = (out / "medians_bf.csv").read_text().splitlines()[0]
        assert header == "group_key,group_value,delta,median_g_min,count"

    def test_requires_some_output(self, runner, rows_csv):
        result = runner.invoke(main, ["stats", str(rows_csv)])
        assert result.exit_code == 2


class TestPropagate:
    def test_reports_success_probability(self, runner, instance_file):
        result = runner.invoke(
            main, ["propagate", str(instance_file), "--tau", "100"]
        )
        assert result.exit_code == 0, result.output
        prob = float(result.output.split("success_probability=")[1].splitlines()[0])
        assert prob > 0.9
        drift = float(result.output.split("max_norm_drift=")[1].splitlines()[0])
        assert drift < 1e-8

    def test_trajectory_csv(self, runner, instance_file, tmp_path):
        out = tmp_path / "trajectory.csv"
        result = runner.invoke(
            main, ["propagate", str(instance_file), "--tau", "10",
                   "--trajectory", str(out)]
        )
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert lines[0] == "s,success_probability,norm"
        assert len(lines) == 102


class TestRestart:
    def test_json_record(self, runner, instance_file, tmp_path):
        out = tmp_path / "restarts.jsonl"
        result = runner.invoke(
            main, ["restart", str(instance_file), "--tau", "50",
                   "--rounds", "4", "--seed", "2", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text().splitlines()[0])
        assert payload["mode"] == "refine"
        assert 1 <= len(payload["rounds"]) <= 4
        if payload["succeeded"]:
            assert payload["rounds"][-1]["success"]

    def test_seed_determinism(self, runner, instance_file):
        args = ["restart", str(instance_file), "--tau", "5", "--seed", "9"]
        a = runner.invoke(main, args)
        b = runner.invoke(main, args)
        assert a.output == b.output


def test_version_flag(runner):
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
