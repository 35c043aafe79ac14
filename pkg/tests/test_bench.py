"""Tests for retrial/bench and retrial/db – methods, matched runs, statistics, reports, registry."""

import csv
import json
import xml.etree.ElementTree as ET

import pytest

from retrial.bench.harness import BenchConfig, TrialRecord, load_bench_config, read_records, run_matched
from retrial.bench.methods import DEFAULT_METHODS, Method, get_method, list_methods, parse_buffer
from retrial.bench.report import report, write_records
from retrial.bench.summary import CSV_COLUMNS, Summary, bootstrap_diff_ci, grasp_gaps, summarize
from retrial.core.errors import ArtifactError, ConfigurationError, ValidationError
from retrial.monitor.engine import MonitorConfig


def _rec(seed=0, trial=0, method="ours_full", success=True, steps=30, recoveries=0, **kw):
    base = dict(
        variant="blocked",
        method=method,
        seed=seed,
        trial=trial,
        success=success,
        steps=steps,
        recoveries=recoveries,
        horizon=400,
        mean_length=25.0,
    )
    base.update(kw)
    return TrialRecord(**base)


def _bench_file(artefacts, tmp_path, **overrides):
    cfg = {
        "dataset": str(artefacts["demos"]),
        "value_models": [str(artefacts["categorical"])],
        "variants": ["blocked"],
        "trials": 2,
        "seeds": 1,
        "horizon": 60,
        "workers": 1,
    }
    cfg.update(overrides)
    path = tmp_path / "bench.json"
    path.write_text(json.dumps(cfg))
    return path


class TestMethods:
    def test_default_registry(self):
        assert set(DEFAULT_METHODS) <= set(list_methods())
        assert len(DEFAULT_METHODS) == 4

    def test_unknown_method(self):
        with pytest.raises(KeyError):
            get_method("teleport")

    def test_flags(self):
        mon = MonitorConfig(mean_length=40)
        base = get_method(Method.BASE_NO_RECOVERY.value)(mon, None)
        assert not base.monitor_enabled and not base.skew_enabled and base.interval_period is None
        interval = get_method(Method.INTERVAL_RECOVERY.value)(mon, 0.25)
        assert interval.interval_period == 50
        no_skew = get_method(Method.OURS_NO_SKEW.value)(mon, None)
        assert no_skew.monitor_enabled and not no_skew.skew_enabled
        full = get_method(Method.OURS_FULL.value)(mon, None)
        assert full.monitor_enabled and full.skew_enabled

    def test_buffer_sweep_name(self):
        cfg = get_method("interval_recovery@0.5")(MonitorConfig(mean_length=40), None)
        assert cfg.interval_period == 60

    def test_bad_buffer_name(self):
        with pytest.raises(ConfigurationError):
            parse_buffer("interval_recovery@fast")


class TestBenchConfig:
    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError):
            BenchConfig(dataset="d.jsonl", value_models=["m.json"], methods=["teleport"])

    def test_model_count_must_match_seeds(self):
        with pytest.raises(ValueError):
            BenchConfig(dataset="d.jsonl", value_models=["a.json", "b.json"], seeds=3)

    def test_sweep_adds_methods(self):
        cfg = BenchConfig(dataset="d.jsonl", value_models=["m.json"], interval_buffers=[0.25, 0.5])
        assert "interval_recovery@0.5" in cfg.method_names()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ArtifactError):
            load_bench_config(tmp_path / "nope.json")

    def test_invalid_file(self, tmp_path):
        p = tmp_path / "bench.json"
        p.write_text(json.dumps({"dataset": "d.jsonl"}))
        with pytest.raises(ConfigurationError):
            load_bench_config(p)


class TestRunMatched:
    def test_record_count_and_pairing(self, artefacts, tmp_path):
        cfg, base = load_bench_config(_bench_file(artefacts, tmp_path))
        records = run_matched(cfg, base)
        assert len(records) == 1 * 1 * 2 * 4
        for trial in range(2):
            group = [r for r in records if r.trial == trial]
            assert len({json.dumps(r.initial_obs) for r in group}) == 1
            assert len({json.dumps(r.hidden, sort_keys=True) for r in group}) == 1

    def test_base_never_recovers(self, artefacts, tmp_path):
        cfg, base = load_bench_config(_bench_file(artefacts, tmp_path))
        for r in run_matched(cfg, base):
            if r.method == Method.BASE_NO_RECOVERY.value:
                assert r.recoveries == 0

    def test_rerun_is_identical(self, artefacts, tmp_path):
        cfg, base = load_bench_config(_bench_file(artefacts, tmp_path))
        a = [r.to_json() for r in run_matched(cfg, base)]
        b = [r.to_json() for r in run_matched(cfg, base)]
        assert a == b

    def test_missing_artefact(self, artefacts, tmp_path):
        cfg, base = load_bench_config(_bench_file(artefacts, tmp_path, dataset="missing.jsonl"))
        with pytest.raises(ArtifactError):
            run_matched(cfg, base)

    def test_backend_mismatch(self, artefacts, tmp_path):
        cfg, base = load_bench_config(_bench_file(artefacts, tmp_path, backend="scalar"))
        with pytest.raises(ConfigurationError):
            run_matched(cfg, base)

    def test_records_file(self, artefacts, tmp_path):
        cfg, base = load_bench_config(_bench_file(artefacts, tmp_path))
        records = run_matched(cfg, base)
        path = write_records(records, tmp_path / "trials.jsonl")
        assert [r.to_json() for r in read_records(path)] == [r.to_json() for r in records]


class TestSummarize:
    def test_all_succeed(self):
        records = [_rec(seed=s, trial=i) for s in range(3) for i in range(5)]
        row = summarize(records).get("blocked", "ours_full")
        assert row.success_mean == 1.0
        assert row.success_std == 0.0
        assert row.steps_mean == 30.0
        assert row.steps_std == 0.0

    def test_failures_scored_at_horizon(self):
        records = [_rec(trial=i, success=False, steps=400) for i in range(4)]
        row = summarize(records).get("blocked", "ours_full")
        assert row.success_mean == 0.0
        assert row.steps_mean == 400.0

    def test_std_across_seeds(self):
        records = []
        for seed, wins in enumerate((6, 7, 8)):
            records += [_rec(seed=seed, trial=i, success=i < wins) for i in range(10)]
        row = summarize(records).get("blocked", "ours_full")
        assert row.n_seeds == 3
        assert row.success_mean == pytest.approx(0.7)
        assert row.success_std == pytest.approx(0.1)

    def test_recovery_histogram(self):
        records = [_rec(recoveries=2, attempt_lengths=[12, 31]), _rec(trial=1, recoveries=1, attempt_lengths=[15])]
        row = summarize(records).get("blocked", "ours_full")
        assert row.recovery_hist == {"10": 2, "30": 1}
        assert row.recovery_counts == {"1": 1, "2": 1}
        assert row.early_fraction == pytest.approx(2 / 3)

    def test_empty_records(self):
        with pytest.raises(ValidationError):
            summarize([])

    def test_unknown_row(self):
        with pytest.raises(KeyError):
            summarize([_rec()]).get("blocked", "base_no_recovery")


class TestDiversity:
    def test_grasp_gaps(self):
        assert grasp_gaps(_rec(grasp_attempts=[[0.0, 0.0], [0.3, 0.4], [0.3, 0.4]])) == pytest.approx([0.5, 0.0])
        assert grasp_gaps(_rec(grasp_attempts=[[0.1, 0.1]])) == []

    def test_bootstrap_constant_gap(self):
        diff, lo, hi = bootstrap_diff_ci([1.0] * 10, [0.0] * 10, resamples=200)
        assert (diff, lo, hi) == (1.0, 1.0, 1.0)

    def test_bootstrap_interval_contains_estimate(self):
        a = [0.1, 0.4, 0.35, 0.2, 0.5, 0.45]
        b = [0.05, 0.1, 0.0, 0.12, 0.08]
        diff, lo, hi = bootstrap_diff_ci(a, b, resamples=500, seed=3)
        assert lo <= diff <= hi
        assert bootstrap_diff_ci(a, b, resamples=500, seed=3) == (diff, lo, hi)

    def test_contrast_reported(self):
        records = [
            _rec(trial=0, method="ours_full", grasp_attempts=[[0.1, 0.1], [0.5, 0.1]]),
            _rec(trial=0, method="ours_no_skew", grasp_attempts=[[0.1, 0.1], [0.1, 0.2]]),
        ]
        contrast = summarize(records, resamples=100).diversity
        assert len(contrast) == 1
        assert contrast[0].diff == pytest.approx(0.3)


class TestReport:
    def test_files(self, tmp_path):
        records = [_rec(seed=s, trial=i, method=m) for s in range(2) for i in range(3) for m in DEFAULT_METHODS]
        records[0].attempt_lengths = [22]
        written = report(summarize(records), records, tmp_path / "out")
        names = {p.name for p in written}
        assert names == {
            "summary.json",
            "trials.jsonl",
            "summary.csv",
            "success_rates.svg",
            "timesteps.svg",
            "recovery_histogram.svg",
        }

    def test_csv_header(self, tmp_path):
        report(summarize([_rec()]), [_rec()], tmp_path)
        with open(tmp_path / "summary.csv", newline="") as fh:
            header = next(csv.reader(fh))
        assert header == CSV_COLUMNS
        assert ",".join(header) == "variant,method,success_mean,success_std,steps_mean,steps_std,recoveries_mean"

    def test_svg_well_formed(self, tmp_path):
        records = [_rec(method=m) for m in DEFAULT_METHODS]
        report(summarize(records), records, tmp_path)
        for name in ("success_rates.svg", "timesteps.svg", "recovery_histogram.svg"):
            root = ET.parse(tmp_path / name).getroot()
            assert root.tag.endswith("svg")

    def test_charts_reproducible(self, tmp_path):
        records = [_rec(method=m, recoveries=1, attempt_lengths=[14]) for m in DEFAULT_METHODS]
        report(summarize(records), records, tmp_path / "a")
        report(summarize(records), records, tmp_path / "b")
        for name in ("success_rates.svg", "recovery_histogram.svg"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_summary_json_matches_recomputation(self, tmp_path):
        records = [_rec(seed=s, trial=i, success=(i + s) % 3 != 0, steps=20 + i) for s in range(3) for i in range(6)]
        report(summarize(records), records, tmp_path)
        again = summarize(read_records(tmp_path / "trials.jsonl"))
        saved = json.loads((tmp_path / "summary.json").read_text())
        assert saved == json.loads(json.dumps(again.to_dict()))

    def test_empty_summary_refused(self, tmp_path):
        with pytest.raises(ValidationError):
            report(Summary(rows=[]), [], tmp_path / "out")
        assert not (tmp_path / "out").exists()


class TestRunRegistry:
    def test_insert_and_fetch(self, db_ready):
        from retrial.db.dao import get_bench_results, get_bench_run, insert_bench_run, list_bench_runs

        records = [_rec(method=m) for m in DEFAULT_METHODS]
        run_id = insert_bench_run(config={"trials": 1}, summary=summarize(records))
        row = get_bench_run(run_id)
        assert row is not None
        assert json.loads(row["config_json"]) == {"trials": 1}
        results = get_bench_results(run_id)
        assert len(results) == 4
        assert {r["method"] for r in results} == set(DEFAULT_METHODS)
        assert run_id in [r["run_id"] for r in list_bench_runs()]

    def test_unknown_run(self, db_ready):
        from retrial.db.dao import get_bench_run
        assert get_bench_run("does-not-exist") is None

    def test_register_run(self):
        from retrial.db.dao import register_run
        run_id = register_run({"trials": 1}, summarize([_rec()]))
        assert isinstance(run_id, str)
