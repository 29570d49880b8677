from math import comb

import pytest

from sombrero.errors import InputError
from sombrero.experiments import (
    CSV_HEADER,
    SQRT2,
    GroupStats,
    SweepConfig,
    SweepRow,
    caqc_baseline,
    desk_preset_n6,
    generate_sweep_instances,
    median_by_group,
    pooled_median,
    probability_curves,
    read_rows_csv,
    run_sweep,
    select_guesses,
    two_trial_success,
    write_curves_csv,
    write_group_stats_csv,
    write_rows_csv,
)
from sombrero.hamiltonian import CAQC, SAQC
from sombrero.sat import count_satisfying, guess_metrics


def tiny_config(**overrides):
    base = dict(
        n=3, m=7, instance_count=2, delta_grid=(1.0, 2.0),
        grid_points=21, seed=11,
    )
    base.update(overrides)
    return SweepConfig(**base)


@pytest.fixture(scope="module")
def tiny_result():
    return run_sweep(tiny_config())


class TestConfig:
    def test_roundtrip(self):
        cfg = tiny_config()
        assert SweepConfig.from_dict(cfg.to_dict()) == cfg

    def test_validation(self):
        with pytest.raises(InputError):
            tiny_config(instance_count=0)
        with pytest.raises(InputError):
            tiny_config(instance_count=9)  # exceeds 2^3 distinct solutions
        with pytest.raises(InputError):
            tiny_config(delta_grid=(1.0, -0.5))
        with pytest.raises(InputError):
            tiny_config(modes=("caqc", "bogus"))
        with pytest.raises(InputError):
            tiny_config(guess_policy=0)

    def test_desk_preset_shape(self):
        cfg = desk_preset_n6()
        assert cfg.n == 6 and cfg.m == 26 and cfg.instance_count == 16
        assert cfg.delta_grid == (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 8.0, 10.0)


class TestInstancePool:
    def test_distinct_solutions_and_usa(self):
        instances = generate_sweep_instances(tiny_config(instance_count=4))
        solutions = {inst.unique_solution.value for inst in instances}
        assert len(solutions) == 4
        for inst in instances:
            assert count_satisfying(inst) == 1

    def test_seed_reproducibility(self):
        a = generate_sweep_instances(tiny_config())
        b = generate_sweep_instances(tiny_config())
        assert a == b
        c = generate_sweep_instances(tiny_config(seed=12))
        assert a != c

    def test_guess_selection(self):
        cfg = tiny_config()
        assert len(select_guesses(cfg)) == 8
        subset = select_guesses(tiny_config(guess_policy=3))
        assert len(subset) == 3
        assert len({g.value for g in subset}) == 3

    def test_bf_histogram_is_binomial(self):
        # over all 2^n guesses bf follows the exact binomial profile
        inst = generate_sweep_instances(tiny_config(instance_count=1))[0]
        counts = [0] * 4
        for guess in select_guesses(tiny_config()):
            counts[guess_metrics(inst, guess).bf] += 1
        assert counts == [comb(3, j) for j in range(4)]


class TestRunSweep:
    def test_row_count_arithmetic(self, tiny_result):
        # per (instance, delta): one conventional row + 2^n guess rows
        assert len(tiny_result.rows) == 2 * 2 * (1 + 8)
        assert not tiny_result.failures

    def test_rows_sorted_by_key(self, tiny_result):
        keys = [row.key() for row in tiny_result.rows]
        assert keys == sorted(keys)
        assert len(set(keys)) == len(keys)

    def test_row_fields_consistent(self, tiny_result):
        for row in tiny_result.rows:
            assert row.n == 3 and row.m == 7
            assert row.g_min > 0.0
            assert 0.0 <= row.s_star <= 1.0
            assert 0.0 < row.e_measured < row.e_bound
            if row.mode == CAQC:
                assert row.guess is None and row.bf is None and row.uc is None
            else:
                assert row.bf is not None and 0 <= row.bf <= 3
                assert row.uc is not None and 0 <= row.uc <= 7

    def test_solution_guess_row_has_bf_zero(self, tiny_result):
        zero_rows = [r for r in tiny_result.rows
                     if r.mode == SAQC and r.guess == r.solution]
        assert zero_rows and all(r.bf == 0 and r.uc == 0 for r in zero_rows)

    def test_parallel_matches_serial(self, tmp_path):
        serial = run_sweep(tiny_config())
        parallel = run_sweep(tiny_config(), jobs=2)
        assert serial.rows == parallel.rows
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_rows_csv(serial.rows, a)
        write_rows_csv(parallel.rows, b)
        assert a.read_bytes() == b.read_bytes()

    def test_checkpoint_resume(self, tmp_path):
        checkpoint = tmp_path / "rows.jsonl"
        full = run_sweep(tiny_config(), checkpoint_path=checkpoint)
        # truncate the checkpoint to a prefix and resume
        lines = checkpoint.read_text().splitlines(keepends=True)
        partial = tmp_path / "partial.jsonl"
        partial.write_text("".join(lines[: len(lines) // 2]))
        calls = []
        resumed = run_sweep(
            tiny_config(), checkpoint_path=partial,
            progress=lambda done, total: calls.append((done, total)),
        )
        assert resumed.rows == full.rows
        # only the un-checkpointed half was recomputed
        assert calls[-1][1] == len(full.rows) - len(lines) // 2

    def test_caqc_rows_independent_of_guess_pool(self):
        full = run_sweep(tiny_config())
        subset = run_sweep(tiny_config(guess_policy=2))
        assert caqc_baseline(full.rows) == caqc_baseline(subset.rows)


class TestSerialization:
    def test_csv_header_and_roundtrip(self, tiny_result, tmp_path):
        path = tmp_path / "rows.csv"
        write_rows_csv(tiny_result.rows, path)
        first_line = path.read_text().splitlines()[0]
        assert first_line == ",".join(CSV_HEADER)
        assert read_rows_csv(path) == tiny_result.rows

    def test_read_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(InputError):
            read_rows_csv(path)

    def test_float_cells_are_repr_exact(self, tiny_result, tmp_path):
        path = tmp_path / "rows.csv"
        write_rows_csv(tiny_result.rows, path)
        row = tiny_result.rows[0]
        assert repr(row.g_min) in path.read_text()


def make_row(instance_id=0, guess="000", bf=0, uc=0, delta=1.0,
             mode=SAQC, g_min=0.5):
    if mode == CAQC:
        guess = bf = uc = None
    return SweepRow(
        instance_id=instance_id, n=3, m=7, solution="101",
        guess=guess, bf=bf, uc=uc, delta=delta, mode=mode,
        g_min=g_min, s_star=0.5, e_measured=1.0, e_bound=50.0,
    )


class TestStatistics:
    def test_median_odd_group(self):
        rows = [make_row(guess=f"00{j}", bf=1, g_min=g)
                for j, g in enumerate((0.1, 0.9, 0.3))]
        stats = median_by_group(rows, "bf")
        assert stats == [GroupStats("bf", 1, 1.0, 0.3, 3)]

    def test_median_even_group_midpoint(self):
        rows = [make_row(guess=f"0{j}0", bf=2, g_min=g)
                for j, g in enumerate((0.2, 0.6))]
        assert median_by_group(rows, "bf")[0].median_g_min == pytest.approx(0.4)

    def test_median_skips_conventional_rows(self):
        rows = [make_row(g_min=0.3), make_row(mode=CAQC, g_min=9.9)]
        stats = median_by_group(rows, "bf")
        assert len(stats) == 1 and stats[0].median_g_min == 0.3

    def test_median_validation(self):
        with pytest.raises(InputError):
            median_by_group([make_row()], "nope")
        with pytest.raises(InputError):
            median_by_group([], "bf")

    def test_pooled_median(self):
        rows = [make_row(guess=f"1{j}0", g_min=g)
                for j, g in enumerate((0.2, 0.4, 0.9))]
        assert pooled_median(rows, 1.0) == pytest.approx(0.4)
        with pytest.raises(InputError):
            pooled_median(rows, 7.0)

    def test_real_sweep_group_counts(self, tiny_result):
        stats = median_by_group(tiny_result.rows, "bf")
        for delta in (1.0, 2.0):
            per_bf = {s.group_value: s.count for s in stats if s.delta == delta}
            # two instances, each contributing the binomial guess profile
            assert per_bf == {j: 2 * comb(3, j) for j in range(4)}


class TestProbabilityCurves:
    def test_all_guesses_beat_baseline(self):
        rows = [make_row(mode=CAQC, g_min=0.1),
                make_row(guess="001", bf=1, g_min=0.5),
                make_row(guess="010", bf=1, g_min=0.9)]
        curves = {c.criterion: c for c in probability_curves(rows)}
        assert curves["g_saqc>=g_caqc"].points[1.0] == (1.0, 2)
        assert curves["g_saqc>=sqrt2*g_caqc"].points[1.0] == (1.0, 2)

    def test_sqrt2_threshold_is_strict_scaling(self):
        base = 0.5
        rows = [make_row(mode=CAQC, g_min=base),
                make_row(guess="001", bf=1, g_min=SQRT2 * base),
                make_row(guess="010", bf=1, g_min=SQRT2 * base - 1e-9)]
        curves = {c.criterion: c for c in probability_curves(rows)}
        assert curves["g_saqc>=sqrt2*g_caqc"].points[1.0] == (0.5, 2)

    def test_bf_restricted_curve(self):
        rows = [make_row(mode=CAQC, g_min=0.1),
                make_row(guess="011", bf=2, g_min=0.05),
                make_row(guess="111", bf=3, g_min=0.9)]
        curves = {c.criterion: c for c in probability_curves(rows)}
        assert curves["g_saqc>=sqrt2*g_caqc|bf=3,4"].points[1.0] == (1.0, 1)

    def test_uc_conditional_curves_cover_observed_values(self, tiny_result):
        curves = {c.criterion: c for c in probability_curves(tiny_result.rows)}
        observed = {r.uc for r in tiny_result.rows if r.mode == SAQC}
        for uc in observed:
            assert f"g_saqc>=sqrt2*g_caqc|uc={uc}" in curves

    def test_requires_baseline(self):
        with pytest.raises(InputError):
            probability_curves([make_row()])


class TestTwoTrialSuccess:
    def test_worked_value(self):
        assert two_trial_success(0.39) == pytest.approx(0.6279)

    def test_edges(self):
        assert two_trial_success(0.0) == 0.0
        assert two_trial_success(1.0) == 1.0

    def test_validation(self):
        with pytest.raises(InputError):
            two_trial_success(1.5)


class TestStatCsv:
    def test_group_stats_csv(self, tiny_result, tmp_path):
        stats = median_by_group(tiny_result.rows, "uc")
        path = tmp_path / "stats.csv"
        write_group_stats_csv(stats, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "group_key,group_value,delta,median_g_min,count"
        assert len(lines) == len(stats) + 1

    def test_curves_csv(self, tiny_result, tmp_path):
        curves = probability_curves(tiny_result.rows)
        path = tmp_path / "curves.csv"
        write_curves_csv(curves, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "criterion,delta,probability,count"
        assert len(lines) == 1 + sum(len(c.points) for c in curves)
