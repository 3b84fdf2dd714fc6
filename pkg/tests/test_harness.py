import math
import os
import subprocess
import sys

import numpy as np
import pytest

from randucb.envs import MabInstance
from randucb.harness import (
    ConfigError,
    aggregate,
    build_experiment_config,
    parse_kv_text,
    run_experiment,
    run_replication,
    stream,
    write_csv,
)
from randucb.harness.cli import cli
from randucb.harness.runner import AggregateRow, RegretTrace, checkpoint_rounds

SMOKE = {
    "family": "mab",
    "horizon": "300",
    "replications": "3",
    "base_seed": "5",
    "checkpoint_every": "50",
    "instance.K": "6",
    "instance.difficulty": "easy",
    "policies": "randucb, ucb1, random",
}


def smoke_config(**overrides):
    raw = dict(SMOKE)
    raw.update(overrides)
    return build_experiment_config(raw)


class TestConfigParsing:
    def test_key_value_lines_with_comments(self):
        raw = parse_kv_text("a = 1\n# note\nb.c = two  # trailing\n\n")
        assert raw == {"a": "1", "b.c": "two"}

    def test_malformed_line_is_an_error(self):
        with pytest.raises(ConfigError, match="expected 'key = value'"):
            parse_kv_text("just words\n")

    def test_duplicate_key_is_an_error(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_kv_text("a = 1\na = 2\n")

    @pytest.mark.parametrize(
        "overrides, fragment",
        [
            ({"family": "bandits"}, "family"),
            ({"horizon": "ten"}, "horizon"),
            ({"replications": "0"}, "replications"),
            ({"checkpoint_every": "300"}, "checkpoint_every"),
            ({"instance.K": "1"}, "instance.K"),
            ({"horizon": "4", "checkpoint_every": "1"}, "horizon"),
            ({"policies": ""}, "policies"),
            ({"policies": "randucb, randucb"}, "duplicate"),
            ({"policies": "mystery"}, "mystery"),
            ({"policy.randucb.bogus": "1"}, "bogus"),
            ({"policy.ghost.eps": "0.1"}, "ghost"),
            ({"unknown_key": "1"}, "unknown_key"),
        ],
    )
    def test_field_level_validation_messages(self, overrides, fragment):
        raw = dict(SMOKE)
        raw.update(overrides)
        with pytest.raises(ConfigError, match=fragment):
            build_experiment_config(raw)

    def test_label_kind_indirection(self):
        cfg = smoke_config(**{
            "policies": "fast, slow",
            "policy.fast.kind": "eps_greedy",
            "policy.fast.eps": "0.1",
            "policy.slow.kind": "eps_greedy",
            "policy.slow.eps": "0.9",
        })
        assert [p.kind for p in cfg.policies] == ["eps_greedy", "eps_greedy"]
        assert [p.label for p in cfg.policies] == ["fast", "slow"]

    def test_default_checkpoint_grid(self):
        cfg = smoke_config(**{"horizon": "20000"})
        del cfg
        assert checkpoint_rounds(20000, 100)[-1] == 20000
        assert checkpoint_rounds(205, 50) == [50, 100, 150, 200, 205]


class TestStreams:
    def test_same_keys_reproduce_draws(self):
        a = stream(1, 2, "policy-x").random(5)
        b = stream(1, 2, "policy-x").random(5)
        np.testing.assert_array_equal(a, b)

    def test_distinct_policy_labels_do_not_collide(self):
        a = stream(1, 2, "alpha").random(5)
        b = stream(1, 2, "beta").random(5)
        assert not np.array_equal(a, b)

    def test_adding_a_policy_does_not_perturb_another_stream(self):
        cfg_two = smoke_config()
        cfg_three = smoke_config(policies="randucb, ucb1, random, bts")
        traces_two = {(t.policy, t.run): t.cum_regret for t in run_experiment(cfg_two)}
        traces_three = {(t.policy, t.run): t.cum_regret for t in run_experiment(cfg_three)}
        for key, values in traces_two.items():
            np.testing.assert_array_equal(values, traces_three[key])


class TestRunner:
    def test_bit_identical_reruns(self, tmp_path):
        cfg = smoke_config()
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_csv(aggregate(run_experiment(cfg)), a)
        write_csv(aggregate(run_experiment(cfg)), b)
        assert a.read_bytes() == b.read_bytes()

    def test_all_policies_share_instance_and_reward_table(self):
        cfg = smoke_config(policies="random, rnd2", **{"policy.rnd2.kind": "random"})
        traces = run_replication(cfg, 0)
        # identical policy behaviour differs only through its own stream; the
        # world is shared, so equal action sequences would give equal regret
        assert {t.policy for t in traces} == {"random", "rnd2"}

    def test_zero_gap_instance_has_zero_mean_regret(self):
        cfg = smoke_config(replications="20", policies="ucb1, bts, random")
        instance = MabInstance(means=np.full(6, 0.5))
        finals = {"ucb1": [], "bts": [], "random": []}
        for run in range(20):
            for trace in run_replication(cfg, run, instance=instance):
                finals[trace.policy].append(trace.cum_regret[-1])
        for values in finals.values():
            arr = np.asarray(values)
            sem = arr.std(ddof=1) / math.sqrt(arr.size)
            assert abs(arr.mean()) <= 3 * max(sem, 1e-9)

    def test_uniform_random_regret_matches_mean_gap(self):
        cfg = smoke_config(**{"horizon": "2000", "replications": "20",
                              "instance.K": "10", "checkpoint_every": "500",
                              "policies": "random"})
        from randucb.harness.runner import make_instance
        from randucb.harness.streams import ROLE_INSTANCE
        diffs = []
        for run in range(cfg.replications):
            inst = make_instance(cfg, stream(cfg.base_seed, run, ROLE_INSTANCE))
            trace = run_replication(cfg, run)[0]
            mean_gap = float(np.mean([inst.gap(a) for a in range(inst.n_arms)]))
            diffs.append(trace.cum_regret[-1] - cfg.horizon * mean_gap)
        arr = np.asarray(diffs)
        sem = arr.std(ddof=1) / math.sqrt(arr.size)
        assert abs(arr.mean()) <= 3 * sem

    def test_coarse_checkpoints_match_fine_run(self):
        fine = smoke_config(checkpoint_every="1")
        coarse = smoke_config(checkpoint_every="50")
        fine_traces = {(t.policy, t.run): t for t in run_experiment(fine)}
        for trace in run_experiment(coarse):
            ref = fine_traces[(trace.policy, trace.run)]
            for rnd, value in zip(trace.rounds, trace.cum_regret):
                assert value == ref.cum_regret[rnd - 1]

    def test_parallel_workers_reproduce_sequential_results(self, monkeypatch):
        cfg = smoke_config()
        sequential = aggregate(run_experiment(cfg))
        monkeypatch.setenv("RANDUCB_WORKERS", "2")
        parallel = aggregate(run_experiment(cfg))
        assert sequential == parallel


class TestAggregate:
    def test_single_run_has_zero_stderr(self):
        cfg = smoke_config(replications="1")
        rows = aggregate(run_experiment(cfg))
        assert rows and all(r.stderr == 0.0 for r in rows)
        assert all(r.runs == 1 for r in rows)

    def test_constant_traces_aggregate_to_the_constant(self):
        traces = [RegretTrace("mab", "p", r, np.array([10, 20]), np.array([4.0, 8.0]))
                  for r in range(5)]
        rows = aggregate(traces)
        assert [r.mean_regret for r in rows] == [4.0, 8.0]
        assert all(r.stderr == 0.0 for r in rows)

    def test_matches_two_pass_oracle(self):
        rng = np.random.default_rng(0)
        data = rng.random((7, 3)) * 100
        traces = [RegretTrace("mab", "p", r, np.array([1, 2, 3]), data[r])
                  for r in range(7)]
        rows = aggregate(traces)
        for j, row in enumerate(rows):
            column = data[:, j]
            mean = sum(column) / len(column)
            var = sum((v - mean) ** 2 for v in column) / (len(column) - 1)
            assert abs(row.mean_regret - mean) < 1e-12
            assert abs(row.stderr - math.sqrt(var / len(column))) < 1e-12


class TestCsv:
    def test_header_only_for_empty_aggregate(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_csv([], path)
        assert path.read_text() == "family,policy,round,mean_regret,stderr,runs\n"

    def test_row_count_and_order(self, tmp_path):
        cfg = smoke_config()
        rows = aggregate(run_experiment(cfg))
        path = tmp_path / "out.csv"
        write_csv(rows, path)
        lines = path.read_text().strip().splitlines()
        n_checkpoints = len(checkpoint_rounds(cfg.horizon, cfg.checkpoint_every))
        assert len(lines) == 1 + len(cfg.policies) * n_checkpoints
        keys = [(l.split(",")[1], int(l.split(",")[2])) for l in lines[1:]]
        assert keys == sorted(keys)

    def test_round_trip_recovers_values_at_print_precision(self, tmp_path):
        rows = [AggregateRow("mab", "p", 10, 123.456789123, 0.000123456789, 5)]
        path = tmp_path / "rt.csv"
        write_csv(rows, path)
        _, line = path.read_text().strip().splitlines()
        parts = line.split(",")
        assert float(parts[3]) == pytest.approx(123.456789123, rel=1e-8)
        assert float(parts[4]) == pytest.approx(0.000123456789, rel=1e-8)

    def test_write_failure_carries_path_context(self, tmp_path):
        with pytest.raises(OSError, match="no/such"):
            write_csv([], tmp_path / "no" / "such" / "dir.csv")


def write_smoke_file(tmp_path, name="smoke.cfg", **overrides):
    raw = dict(SMOKE)
    raw.update(overrides)
    path = tmp_path / name
    path.write_text("".join(f"{k} = {v}\n" for k, v in raw.items()))
    return path


class TestCli:
    def test_missing_config_file_exits_one(self, capsys):
        assert cli(["run", "--config", "/nonexistent.cfg", "--out", "/tmp/x"]) == 1
        assert "config error" in capsys.readouterr().err

    def test_invalid_config_exits_one(self, tmp_path, capsys):
        path = write_smoke_file(tmp_path, family="bogus")
        assert cli(["run", "--config", str(path), "--out", str(tmp_path / "out")]) == 1
        assert "family" in capsys.readouterr().err

    def test_run_writes_csv(self, tmp_path, capsys):
        path = write_smoke_file(tmp_path)
        out = tmp_path / "out"
        assert cli(["run", "--config", str(path), "--out", str(out)]) == 0
        files = list(out.glob("*.csv"))
        assert len(files) == 1
        text = files[0].read_text()
        assert text.startswith("family,policy,round,")

    def test_sweep_produces_one_csv_per_value(self, tmp_path):
        path = write_smoke_file(tmp_path)
        out = tmp_path / "sweep"
        code = cli(["sweep", "--config", str(path),
                    "--param", "policy.randucb.zdist.sigma",
                    "--values", "0.0625,0.125,1.0", "--out", str(out)])
        assert code == 0
        assert len(list(out.glob("*.csv"))) == 3

    def test_bounds_prints_labeled_lines_and_csv_row(self, tmp_path, capsys):
        path = tmp_path / "bound.cfg"
        path.write_text("bound.kind = mab\nbound.K = 100\nbound.T = 20000\n")
        assert cli(["bounds", "--config", str(path)]) == 0
        out = capsys.readouterr().out
        lines = out.strip().splitlines()
        assert any(l.startswith("value = ") for l in lines)
        header, row = lines[-2], lines[-1]
        assert header.split(",")[0] == "kind"
        assert row.split(",")[0] == "mab"
        assert len(header.split(",")) == len(row.split(","))

    def test_bounds_gap_kind_requires_gaps(self, tmp_path, capsys):
        path = tmp_path / "bound.cfg"
        path.write_text("bound.kind = mab_gap\nbound.K = 2\nbound.T = 100\n")
        assert cli(["bounds", "--config", str(path)]) == 1

    def test_usage_errors_exit_one(self):
        assert cli(["frobnicate"]) == 1
        assert cli(["run"]) == 1

    def test_bundled_smoke_config_runs(self, tmp_path):
        import pathlib

        bundled = pathlib.Path(__file__).resolve().parent.parent / "configs" / "mab_smoke.cfg"
        out = tmp_path / "smoke"
        assert cli(["run", "--config", str(bundled), "--out", str(out)]) == 0
        assert len(list(out.glob("*.csv"))) >= 1

    def test_console_entry_point(self, tmp_path):
        path = write_smoke_file(tmp_path)
        result = subprocess.run(
            [sys.executable, "-c",
             "import sys; from randucb.harness.cli import cli; "
             f"sys.exit(cli(['run', '--config', r'{path}', '--out', r'{tmp_path / 'o'}']))"],
            capture_output=True, text=True)
        assert result.returncode == 0
