"""Unit tests for retrial/core – distributions, seeded randomness, value types."""

import numpy as np
import pytest

from retrial.core.dist import (
    BIN_WIDTH,
    DELTA_ZERO,
    N_BINS,
    N_DELTA,
    CategoricalValueDist,
    SignedBinDist,
    delta_mean,
    dist_delta,
    dist_mean,
    dist_std,
    upper_bound,
)
from retrial.core.errors import DatasetFormatError, TrainingError, ValidationError
from retrial.core.rng import Purpose, SeedStream, as_generator
from retrial.core.types import ActionChunk, Event, ProprioPoint, Trajectory, Transition, as_observation


class TestDistMean:
    def test_single_bin_center(self):
        assert dist_mean(CategoricalValueDist.point(0)) == pytest.approx(0.01)

    def test_uniform_is_half(self):
        assert dist_mean(np.full(N_BINS, 1.0 / N_BINS)) == pytest.approx(0.5)

    def test_two_bins(self):
        d = CategoricalValueDist.from_masses({10: 0.5, 20: 0.5})
        assert dist_mean(d) == pytest.approx(0.31)

    def test_malformed_mass_rejected(self):
        with pytest.raises(ValidationError):
            CategoricalValueDist(np.full(N_BINS, 0.03))

    def test_negative_mass_rejected(self):
        p = np.zeros(N_BINS)
        p[0], p[1] = 1.5, -0.5
        with pytest.raises(ValidationError):
            CategoricalValueDist(p)


class TestDeltaStatistics:
    def test_point_mass_std_zero(self):
        assert dist_std(SignedBinDist.from_masses({3: 1.0})) == 0.0

    def test_symmetric_two_point(self):
        d = SignedBinDist.from_masses({1: 0.5, -1: 0.5})
        assert dist_std(d) == pytest.approx(1.0)
        assert delta_mean(d) == pytest.approx(0.0)

    def test_adjacent_two_point(self):
        assert dist_std(SignedBinDist.from_masses({1: 0.5, 2: 0.5})) == pytest.approx(0.5)


class TestDistDelta:
    def test_identical_point_masses(self):
        d = dist_delta(CategoricalValueDist.point(7), CategoricalValueDist.point(7))
        assert d.mass(0) == 1.0

    def test_shifted_point_masses(self):
        d = dist_delta(CategoricalValueDist.point(3), CategoricalValueDist.point(1))
        assert d.mass(2) == 1.0

    def test_two_by_one_enumeration(self):
        now = CategoricalValueDist.from_masses({2: 0.5, 3: 0.5})
        past = CategoricalValueDist.point(1)
        d = dist_delta(now, past)
        assert d.mass(1) == pytest.approx(0.5)
        assert d.mass(2) == pytest.approx(0.5)
        assert d.q.sum() == pytest.approx(1.0)

    def test_matches_pair_enumeration(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            a = rng.random(N_BINS)
            a /= a.sum()
            b = rng.random(N_BINS)
            b /= b.sum()
            expected = np.zeros(N_DELTA)
            for i in range(N_BINS):
                for j in range(N_BINS):
                    expected[i - j + DELTA_ZERO] += a[i] * b[j]
            got = dist_delta(a, b).q
            assert np.allclose(got, expected, rtol=0.0, atol=1e-12)


class TestUpperBound:
    def test_point_mass(self):
        assert upper_bound(SignedBinDist.from_masses({5: 1.0}), z=2.0) == pytest.approx(0.10)

    def test_two_point(self):
        assert upper_bound(SignedBinDist.from_masses({1: 0.5, 2: 0.5}), z=2.0) == pytest.approx(0.05)

    def test_negative_mean_only(self):
        assert upper_bound(SignedBinDist.from_masses({-3: 1.0}), z=0.0) == pytest.approx(-0.06)

    def test_negative_z_rejected(self):
        with pytest.raises(ValidationError):
            upper_bound(SignedBinDist.from_masses({0: 1.0}), z=-1.0)

    def test_grows_with_z(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            now, past = (CategoricalValueDist(rng.dirichlet(np.ones(N_BINS))) for _ in range(2))
            d = dist_delta(now, past)
            bounds = [upper_bound(d, z) for z in (0.0, 0.5, 1.0, 2.0, 3.0)]
            assert bounds == sorted(bounds)

    def test_zero_z_is_mean(self):
        d = SignedBinDist.from_masses({-2: 0.25, 4: 0.75})
        assert upper_bound(d, z=0.0) == pytest.approx(delta_mean(d) * BIN_WIDTH)


class TestDeltaMeanLinearity:
    def test_mean_of_difference(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            alpha = rng.uniform(0.05, 2.0)
            a = CategoricalValueDist(rng.dirichlet(np.full(N_BINS, alpha)))
            b = CategoricalValueDist(rng.dirichlet(np.full(N_BINS, alpha)))
            got = delta_mean(dist_delta(a, b)) * BIN_WIDTH
            assert got == pytest.approx(dist_mean(a) - dist_mean(b), abs=1e-10)


class TestSeedStream:
    def test_same_inputs_same_draws(self):
        a = SeedStream(42, 3).generator(Purpose.POLICY).random(5)
        b = SeedStream(42, 3).generator(Purpose.POLICY).random(5)
        assert np.array_equal(a, b)

    def test_purposes_are_independent(self):
        ss = SeedStream(42)
        a = ss.generator(Purpose.SCENARIO).random(5)
        b = ss.generator(Purpose.DYNAMICS).random(5)
        assert not np.array_equal(a, b)

    def test_streams_differ(self):
        a = SeedStream(1, 0).generator(Purpose.SCENARIO).random(3)
        b = SeedStream(1, 1).generator(Purpose.SCENARIO).random(3)
        assert not np.array_equal(a, b)

    def test_negative_seed_rejected(self):
        with pytest.raises(ValidationError):
            SeedStream(-1)

    def test_as_generator_passthrough(self):
        g = np.random.default_rng(0)
        assert as_generator(g) is g


def _transition(t, reward=-1.0, events=()):
    p = ProprioPoint(0.5, 0.5, 1.0)
    return Transition(obs=np.zeros(15), proprio=p, action=p, reward=reward, t=t, events=frozenset(events))


class TestValueTypes:
    def test_proprio_out_of_range(self):
        with pytest.raises(ValidationError):
            ProprioPoint(1.2, 0.5, 1.0)

    def test_proprio_closed(self):
        assert ProprioPoint(0.1, 0.1, 0.0).closed
        assert not ProprioPoint(0.1, 0.1, 1.0).closed

    def test_observation_shape(self):
        with pytest.raises(ValidationError):
            as_observation(np.zeros(14))

    def test_observation_read_only(self):
        obs = as_observation(np.zeros(15))
        with pytest.raises(ValueError):
            obs[0] = 1.0

    def test_chunk_too_long(self):
        with pytest.raises(ValidationError):
            ActionChunk(np.zeros((25, 3)))

    def test_chunk_points(self):
        chunk = ActionChunk(np.array([[0.1, 0.2, 1.0], [0.3, 0.4, 0.0]]))
        assert len(chunk) == 2
        assert chunk.point(1) == ProprioPoint(0.3, 0.4, 0.0)

    def test_trajectory_non_contiguous(self):
        with pytest.raises(ValidationError):
            Trajectory((_transition(0), _transition(2)), success=False)

    def test_success_needs_success_event(self):
        with pytest.raises(ValidationError):
            Trajectory((_transition(0), _transition(1, reward=0.0)), success=True)

    def test_successful_trajectory(self):
        tr = Trajectory((_transition(0), _transition(1, reward=0.0, events=[Event.SUCCESS])), success=True)
        assert tr.T == 2
        assert list(tr.rewards) == [-1.0, 0.0]


class TestErrors:
    def test_dataset_error_carries_line(self):
        err = DatasetFormatError("bad", line=3)
        assert err.line == 3
        assert str(err) == "line 3: bad"
        assert isinstance(err, ValueError)

    def test_training_error_carries_step(self):
        err = TrainingError("non-finite loss", step=12)
        assert err.step == 12
        assert "step 12" in str(err)
