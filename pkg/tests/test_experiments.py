import json

import pytest

from corrlearn import cli
from corrlearn.batch import e_min
from corrlearn.core import Categorical
from corrlearn.experiments import (
    BINOMIAL_COLUMNS,
    MULTINOMIAL_COLUMNS,
    ConfigError,
    ExperimentConfig,
    ExperimentRecord,
    InvariantViolationError,
    format_csv,
    run_and_format,
    run_binomial,
    run_bio,
    run_bounds,
    run_multinomial,
    run_variance_sweep,
)


def config(**kwargs):
    kwargs.setdefault("experiment", "multinomial")
    kwargs.setdefault("seed", 4242)
    return ExperimentConfig(**kwargs)


class TestConfig:
    def test_unknown_experiment_rejected(self):
        with pytest.raises(ConfigError, match="unknown experiment"):
            config(experiment="quantum")

    def test_unknown_format_rejected(self):
        with pytest.raises(ConfigError, match="format"):
            config(fmt="xml")

    def test_missing_candidate_file_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="does not exist"):
            config(experiment="bio", candidates=str(tmp_path / "nope.json"))

    def test_file_round_trip_with_overrides(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({
            "experiment": "multinomial", "seed": 1, "trials": 5,
            "budgets": [0, 1],
        }))
        cfg = ExperimentConfig.from_file(path, seed=9, trials=None)
        assert cfg.seed == 9  # flag override wins
        assert cfg.trials == 5  # None override keeps the file value
        assert cfg.budgets == (0, 1)

    def test_unknown_fields_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"experiment": "multinomial", "seed": 1, "volume": 11}')
        with pytest.raises(ConfigError, match="unknown config fields"):
            ExperimentConfig.from_file(path)


class TestRecordInvariants:
    def test_batch_above_online_rejected(self):
        with pytest.raises(InvariantViolationError, match="batch error"):
            ExperimentRecord(
                experiment="multinomial", seed=1, trial=0, budget=1,
                error_original=0.4, error_online=0.2, error_batch=0.3,
                budget_spent=1,
            )

    def test_negative_error_rejected(self):
        with pytest.raises(InvariantViolationError):
            ExperimentRecord(
                experiment="multinomial", seed=1, trial=0, budget=1,
                error_original=-0.1, error_online=0.2, error_batch=0.2,
                budget_spent=1,
            )


class TestMultinomialRunner:
    def test_zero_budget_reproduces_original(self):
        records = run_multinomial(config(trials=10, budgets=(0,)))
        assert len(records) == 10
        for r in records:
            assert r.error_online == r.error_original
            assert r.budget_spent == 0

    def test_default_shape_and_improvement(self):
        records = run_multinomial(config(trials=50))
        assert len(records) == 50
        mean_orig = sum(r.error_original for r in records) / len(records)
        mean_online = sum(r.error_online for r in records) / len(records)
        assert mean_online <= mean_orig
        for r in records:
            assert r.error_batch <= r.error_online + 1e-12

    def test_full_budget_reaches_the_floor_everywhere(self):
        floor = e_min(5, Categorical((0.4, 0.3, 0.3))).error
        records = run_multinomial(config(trials=25, budgets=(5,)))
        for r in records:
            assert r.error_online == pytest.approx(floor, abs=1e-12)
            assert r.error_batch == pytest.approx(floor, abs=1e-12)


class TestBinomialRunner:
    def test_online_matches_attainable_on_every_record(self):
        records = run_binomial(config(experiment="binomial", trials=50))
        for r in records:
            assert r.error_attainable is not None
            assert r.error_online == pytest.approx(r.error_attainable, abs=1e-12)
            assert r.error_online <= r.error_original + 1e-12

    def test_zero_budget_collapses_the_columns(self):
        records = run_binomial(config(experiment="binomial", trials=20, budgets=(0,)))
        for r in records:
            assert r.error_online == r.error_original == r.error_attainable
            assert r.error_batch == r.error_original

    def test_wide_theta_rejected(self):
        with pytest.raises(ConfigError, match="two-value"):
            run_binomial(config(experiment="binomial", theta0=(0.4, 0.3, 0.3)))


class TestVarianceRunner:
    def test_budget_reduces_variance(self):
        rows = run_variance_sweep(config(
            experiment="variance", n_values=(6, 9), budgets=(0, 1), trials=400,
        ))
        cells = {(r["n"], r["budget"]): r for r in rows}
        for n in (6, 9):
            assert cells[(n, 1)]["var_first"] < cells[(n, 0)]["var_first"]
            assert cells[(n, 1)]["var_total"] < cells[(n, 0)]["var_total"]

    def test_passive_binomial_matches_analytic_variance(self):
        # var of the first coordinate of a passive two-value estimate is
        # theta (1 - theta) / n
        theta = 0.5
        n, trials = 10, 4000
        rows = run_variance_sweep(config(
            experiment="variance", theta0=(theta, 1 - theta),
            n_values=(n,), budgets=(0,), trials=trials,
        ))
        truth = theta * (1 - theta) / n
        # normal-approximation SE of a sample variance
        se = truth * (2 / (trials - 1)) ** 0.5
        assert abs(rows[0]["var_first"] - truth) <= 3.5 * se


class TestBoundsRunner:
    def test_grid_and_columns(self):
        reports = run_bounds(config(
            experiment="bounds", n_values=(5,), m_values=(1, 2), budgets=(0, 2),
            trials=2000,
        ))
        assert [(r.n, r.m, r.b) for r in reports] == [
            (5, 1, 0), (5, 1, 2), (5, 2, 0), (5, 2, 2),
        ]
        for r in reports:
            assert r.trials == 2000
            assert r.empirical_var_corrected <= r.bound_abs


class TestBioRunner:
    def test_rates_fall_with_budget(self):
        rows = run_bio(config(
            experiment="bio", n_values=(8,), budgets=(0, 1), trials=400,
        ))
        but = {r["budget"]: r["misclassification_rate"] for r in rows}
        assert but[0] > but[1]

    def test_unknown_label_rejected(self):
        with pytest.raises(ConfigError, match="theta0_label"):
            run_bio(config(experiment="bio", theta0_label=3, trials=10))


class TestOutputFormats:
    def test_csv_format_is_stable(self):
        assert format_csv(("a", "b"), [(1, 0.5), (2, 1 / 3)]) == (
            "a,b\n1,0.5\n2,0.333333333333\n"
        )

    def test_csv_uses_12_significant_digits(self):
        text = format_csv(("x",), [(0.123456789012345,)])
        assert text == "x\n0.123456789012\n"

    def test_run_and_format_csv_header(self):
        text = run_and_format(config(trials=3))
        header = text.split("\n", 1)[0]
        assert header == ",".join(MULTINOMIAL_COLUMNS)

    def test_binomial_header_includes_attainable(self):
        text = run_and_format(config(experiment="binomial", trials=3))
        assert text.split("\n", 1)[0] == ",".join(BINOMIAL_COLUMNS)
        assert "error_attainable" in text

    def test_json_output_parses(self):
        text = run_and_format(config(trials=3, fmt="json"))
        rows = json.loads(text)
        assert len(rows) == 3
        assert set(rows[0]) == set(MULTINOMIAL_COLUMNS)

    def test_repeat_runs_are_byte_identical(self):
        cfg = config(experiment="binomial", trials=10)
        assert run_and_format(cfg) == run_and_format(cfg)


class TestCli:
    def test_solve_dumps_policy(self, tmp_path, capsys):
        out = tmp_path / "policy.txt"
        code = cli.main([
            "solve", "--n", "3", "--budget", "1", "--theta0", "0.5,0.5",
            "--out", str(out),
        ])
        assert code == 0
        text = out.read_text()
        assert text.startswith("1,")
        assert "keep" in text

    def test_experiment_writes_csv(self, tmp_path):
        out = tmp_path / "records.csv"
        code = cli.main([
            "multinomial", "--seed", "5", "--trials", "4", "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().split("\n")
        assert lines[0] == ",".join(MULTINOMIAL_COLUMNS)
        assert len(lines) == 6  # header + 4 records + trailing newline

    def test_seed_is_mandatory(self, capsys):
        with pytest.raises(SystemExit) as err:
            cli.main(["multinomial", "--trials", "4"])
        assert err.value.code == 2

    def test_bad_config_file_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "cfg.json"
        bad.write_text("{not json")
        assert cli.main(["multinomial", "--seed", "1", "--config", str(bad)]) == 2

    def test_ceiling_exit_3(self, capsys):
        theta = ",".join(["0.2"] * 5)
        code = cli.main(["solve", "--n", "100", "--budget", "1", "--theta0", theta])
        assert code == 3

    def test_invariant_violation_exit_4(self, monkeypatch, capsys):
        def explode(cfg):
            raise InvariantViolationError("boom")

        monkeypatch.setattr(cli, "run_and_format", explode)
        assert cli.main(["multinomial", "--seed", "1"]) == 4

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"experiment": "binomial", "seed": 3, "trials": 2}))
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        assert cli.main(["binomial", "--seed", "3", "--config", str(cfg),
                         "--out", str(out_a)]) == 0
        assert cli.main(["binomial", "--seed", "3", "--trials", "2",
                         "--out", str(out_b)]) == 0
        assert out_a.read_text() == out_b.read_text()

    def test_repeat_runs_byte_identical(self, tmp_path):
        outs = []
        for name in ("x.csv", "y.csv"):
            out = tmp_path / name
            assert cli.main([
                "variance", "--seed", "11", "--n-values", "5",
                "--budgets", "0,1", "--trials", "100", "--out", str(out),
            ]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
