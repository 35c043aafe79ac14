"""Tests for retrial/monitor – k-step progress checks and trace export."""

import csv
import io
from dataclasses import replace

import numpy as np
import pytest

from retrial.core.dist import N_BINS, CategoricalValueDist
from retrial.core.errors import ConfigurationError, ValidationError
from retrial.core.types import Backend
from retrial.monitor.engine import (
    MonitorConfig,
    ProgressVerdict,
    ValueHistory,
    bellman_target_scalar,
    check_categorical,
    check_scalar,
    judge,
    observe_and_judge,
)
from retrial.monitor.trace import TRACE_COLUMNS, emit_trace, trace_to_string
from retrial.valuefn.targets import scalar_target

CAT = MonitorConfig(mean_length=50, k=20, backend=Backend.CATEGORICAL, z=2.0, eta=0.5)


class TestBellmanTarget:
    def test_undiscounted(self):
        assert bellman_target_scalar(-25.0, [-1.0] * 20, k=20) == -45.0

    def test_single_step(self):
        assert bellman_target_scalar(0.0, [-1.0], k=1, gamma=0.9) == pytest.approx(-1.0)

    def test_geometric(self):
        assert bellman_target_scalar(-4.0, [-1.0, -1.0, -1.0], k=3, gamma=0.5) == pytest.approx(-2.25)

    def test_wrong_reward_count(self):
        with pytest.raises(ValidationError):
            bellman_target_scalar(-4.0, [-1.0, -1.0], k=3)


class TestCheckScalar:
    def test_slow_progress_triggers(self):
        assert check_scalar(-30.0, -45.0).triggered

    def test_boundary_is_strict(self):
        assert not check_scalar(-45.0, -45.0).triggered

    def test_on_pace(self):
        y = bellman_target_scalar(-20.0, [-1.0] * 20, k=20)
        assert y == -40.0
        assert not check_scalar(-40.0, y).triggered

    def test_margin(self):
        assert not check_scalar(-44.0, -45.0, margin=2.0).triggered

    def test_triggered_implies_below_threshold(self):
        v = check_scalar(-30.0, -45.0, step=7)
        assert v.observed < v.threshold
        assert v.step == 7


class TestCheckCategorical:
    def test_zero_progress_triggers(self):
        d = CategoricalValueDist.point(12)
        v = check_categorical(d, d, CAT)
        assert v.triggered
        assert v.observed == pytest.approx(0.0)
        assert v.threshold == pytest.approx(0.2)

    def test_boundary_is_strict(self):
        v = check_categorical(CategoricalValueDist.point(10), CategoricalValueDist.point(20), CAT)
        assert v.observed == pytest.approx(0.2)
        assert not v.triggered

    def test_uncertain_small_progress(self):
        past = CategoricalValueDist.point(1)
        now = CategoricalValueDist.from_masses({2: 0.5, 3: 0.5})
        v = check_categorical(past, now, CAT)
        assert v.observed == pytest.approx(0.05)
        assert v.triggered

    def test_delta_zero_on_expected_pace(self):
        # 20 of 50 steps is 40% progress, i.e. 20 bins
        v = check_categorical(CategoricalValueDist.point(5), CategoricalValueDist.point(25), CAT)
        assert v.delta == pytest.approx(0.0)


class TestMonitorConfig:
    def test_invalid_k(self):
        with pytest.raises(ConfigurationError):
            MonitorConfig(mean_length=50, k=0)

    def test_invalid_mean_length(self):
        with pytest.raises(ConfigurationError):
            MonitorConfig(mean_length=0.5)

    def test_from_settings(self, monkeypatch):
        monkeypatch.setenv("MONITOR_K", "7")
        cfg = MonitorConfig.from_settings(40.0, "scalar")
        assert cfg.k == 7
        assert cfg.backend is Backend.SCALAR


class TestValueHistory:
    def test_not_ready_until_k_plus_one(self):
        h = ValueHistory(3)
        cfg = MonitorConfig(mean_length=50, k=3, backend=Backend.SCALAR)
        for i in range(3):
            h.append(-10.0, -1.0)
            assert judge(h, cfg) is None
        h.append(-10.0, -1.0)
        assert judge(h, cfg) is not None

    def test_identical_scalars_trigger(self):
        cfg = MonitorConfig(mean_length=50, k=20, backend=Backend.SCALAR)
        h = ValueHistory(20)
        h.append(-10.0, None)
        for _ in range(20):
            h.append(-10.0, -1.0)
        assert judge(h, cfg).triggered

    def test_cleared_history_warms_up_again(self):
        cfg = MonitorConfig(mean_length=50, k=20, backend=Backend.SCALAR)
        h = ValueHistory(20)
        for _ in range(21):
            h.append(-10.0, -1.0)
        assert judge(h, cfg) is not None
        h.clear()
        for _ in range(5):
            h.append(-10.0, -1.0)
        assert judge(h, cfg) is None
        assert len(h.verdicts) == 1

    def test_steps_must_be_contiguous(self):
        h = ValueHistory(5)
        h.append(-1.0, step=3)
        with pytest.raises(ValidationError):
            h.append(-1.0, step=5)

    def test_buffer_bounded(self):
        h = ValueHistory(4)
        for _ in range(20):
            h.append(-1.0, -1.0)
        assert len(h) == 5
        assert h.entries[0].step == 15


class TestObserveAndJudge:
    def test_backend_mismatch(self, scalar_model, demo_dataset):
        h = ValueHistory(CAT.k)
        with pytest.raises(ConfigurationError):
            observe_and_judge(h, scalar_model, demo_dataset.trajectories[0].observations[0], None, CAT)

    def test_replays_demo(self, categorical_model, demo_dataset):
        tr = demo_dataset.trajectories[0]
        cfg = MonitorConfig(mean_length=demo_dataset.mean_length, k=5, backend=Backend.CATEGORICAL)
        h = ValueHistory(cfg.k)
        verdicts = [observe_and_judge(h, categorical_model, s.obs, s.reward, cfg) for s in tr.transitions]
        assert all(v is None for v in verdicts[:5])
        assert all(isinstance(v, ProgressVerdict) for v in verdicts[5:])
        assert len(h.verdicts) == tr.T - 5


class TestTrace:
    def test_empty_history(self):
        buf = io.StringIO()
        assert emit_trace(ValueHistory(20), CAT, buf) == 0
        assert buf.getvalue().strip() == ",".join(TRACE_COLUMNS)

    def test_rows(self, tmp_path):
        verdicts = [
            ProgressVerdict(triggered=False, observed=0.3, threshold=0.2, step=20, delta=0.05),
            ProgressVerdict(triggered=True, observed=0.1, threshold=0.2, step=21, delta=-0.2),
        ]
        path = tmp_path / "trace.csv"
        assert emit_trace(verdicts, CAT, path) == 2
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert [r["step"] for r in rows] == ["20", "21"]
        assert [r["triggered"] for r in rows] == ["0", "1"]
        assert float(rows[1]["delta"]) == -0.2

    def test_to_string(self):
        text = trace_to_string([ProgressVerdict(True, 0.0, 0.2, 3, -0.4)], CAT)
        assert text.splitlines()[1] == "3,-0.4,0.2,1"


class TestCheckProperties:
    def test_larger_z_never_adds_triggers(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            past = CategoricalValueDist(rng.dirichlet(np.full(N_BINS, 0.3)))
            now = CategoricalValueDist(rng.dirichlet(np.full(N_BINS, 0.3)))
            fired = [check_categorical(past, now, replace(CAT, z=z)).triggered for z in (0.0, 1.0, 2.0, 4.0)]
            assert fired == sorted(fired, reverse=True)

    def test_larger_margin_never_adds_triggers(self):
        rng = np.random.default_rng(12)
        for v_past, y in rng.uniform(-60.0, 0.0, size=(200, 2)):
            fired = [check_scalar(v_past, y, margin=m).triggered for m in (0.0, 0.5, 2.0, 10.0)]
            assert fired == sorted(fired, reverse=True)

    def test_upward_shift_never_adds_triggers(self):
        for b_past in range(0, N_BINS, 7):
            past = CategoricalValueDist.point(b_past)
            fired = [check_categorical(past, CategoricalValueDist.point(b), CAT).triggered for b in range(N_BINS)]
            assert fired == sorted(fired, reverse=True)


def _oracle_history(model_values, rewards, cfg):
    h = ValueHistory(cfg.k)
    verdicts = []
    for v, r in zip(model_values, rewards):
        h.append(v, r)
        verdicts.append(judge(h, cfg))
    return verdicts


class TestMonitorBehaviour:
    def test_oracle_scalar_silent_on_expert_rollouts(self, demo_dataset):
        cfg = MonitorConfig(mean_length=demo_dataset.mean_length, k=5, backend=Backend.SCALAR)
        for tr in demo_dataset.trajectories:
            values = [scalar_target(tr, t) for t in range(tr.T)]
            # reward of the step that led into each observation
            rewards = [None] + [s.reward for s in tr.transitions[:-1]]
            verdicts = _oracle_history(values, rewards, cfg)
            judged = [v for v in verdicts if v is not None]
            assert len(judged) == max(tr.T - cfg.k, 0)
            assert not any(v.triggered for v in judged)

    def test_frozen_scalar_triggers_on_first_judgement(self, scalar_model, demo_dataset):
        cfg = MonitorConfig(mean_length=demo_dataset.mean_length, k=20, backend=Backend.SCALAR)
        obs = demo_dataset.trajectories[0].observations[3]
        h = ValueHistory(cfg.k)
        verdicts = [observe_and_judge(h, scalar_model, obs, None if i == 0 else -1.0, cfg) for i in range(cfg.k + 1)]
        assert all(v is None for v in verdicts[:-1])
        assert verdicts[-1].triggered

    def test_frozen_categorical_triggers_on_first_judgement(self):
        h = ValueHistory(CAT.k)
        frozen = CategoricalValueDist.from_masses({14: 0.5, 15: 0.5})
        verdicts = []
        for _ in range(CAT.k + 1):
            h.append(frozen)
            verdicts.append(judge(h, CAT))
        assert all(v is None for v in verdicts[:-1])
        assert verdicts[-1].triggered

    def test_no_verdict_for_k_steps_after_clear(self):
        cfg = MonitorConfig(mean_length=50, k=20, backend=Backend.SCALAR)
        h = ValueHistory(cfg.k)
        for _ in range(cfg.k + 1):
            h.append(-10.0, -1.0)
        assert judge(h, cfg).triggered
        h.clear()
        h.append(-10.0, None)
        for _ in range(cfg.k - 1):
            h.append(-10.0, -1.0)
            assert judge(h, cfg) is None
        h.append(-10.0, -1.0)
        assert judge(h, cfg).triggered
        assert len(h.verdicts) == 2
