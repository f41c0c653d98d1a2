"""Naive Bayes training/classification/updates and the vehicle filters."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from texive.activity import (
    ActivityLabel,
    EventLatch,
    classify,
    confirm_in_vehicle,
    sustained_horizontal_run_ms,
    train,
    update,
)
from texive.config import DEFAULT_CONFIG
from texive.errors import DimensionMismatch, InsufficientExamples, UnknownLabel
from texive.orientation import EfcSample


def brute_force_posterior(model, x):
    """Independent density-product computation (linear space, normalized)."""
    weights = {}
    for c in model.classes:
        p = c.prior
        for xi, mu, var in zip(x, c.mean, c.var):
            p *= math.exp(-((xi - mu) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)
        weights[c.label] = p
    total = sum(weights.values())
    return {k: v / total for k, v in weights.items()}


def random_model_and_input(seed, n_classes=3, dim=5, n_per=8):
    rng = np.random.default_rng(seed)
    rows = []
    for c in range(n_classes):
        center = rng.normal(0, 3, dim)
        for _ in range(n_per):
            rows.append((center + rng.normal(0, 1, dim), f"C{c}"))
    return train(rows), rng.normal(0, 3, dim)


class TestTrain:
    def test_two_separated_classes(self):
        model = train([([0.0], "A"), ([0.1], "A"), ([10.0], "B"), ([10.1], "B")])
        a = model.class_for("A")
        b = model.class_for("B")
        assert a.mean[0] == pytest.approx(0.05)
        assert b.mean[0] == pytest.approx(10.05)
        assert a.prior == b.prior == 0.5

    def test_variance_floored_not_zero(self):
        model = train([([1.0], "A"), ([1.0], "A"), ([2.0], "B"), ([2.5], "B")])
        assert model.class_for("A").var[0] == DEFAULT_CONFIG.variance_floor

    def test_needs_two_classes(self):
        with pytest.raises(InsufficientExamples):
            train([([1.0], "A"), ([2.0], "A")])

    def test_needs_two_examples_per_class(self):
        with pytest.raises(InsufficientExamples):
            train([([1.0], "A"), ([2.0], "A"), ([3.0], "B")])


class TestClassify:
    def test_class_mean_wins(self):
        model, _ = random_model_and_input(0)
        for c in model.classes:
            label, posterior = classify(model, c.mean)
            assert str(label) == c.label
            assert posterior[c.label] == max(posterior.values())

    @pytest.mark.parametrize("seed", range(25))
    def test_matches_density_product_oracle(self, seed):
        model, x = random_model_and_input(seed)
        _, posterior = classify(model, x)
        oracle = brute_force_posterior(model, x)
        for label, p in oracle.items():
            assert posterior[label] == pytest.approx(p, abs=1e-9)

    @given(st.integers(0, 500))
    def test_posterior_normalized(self, seed):
        model, x = random_model_and_input(seed)
        _, posterior = classify(model, x)
        assert sum(posterior.values()) == pytest.approx(1.0, abs=1e-9)
        assert all(0.0 <= p <= 1.0 for p in posterior.values())

    def test_uniform_loglik_shift_keeps_argmax(self):
        # rescaling every prior by the same factor shifts all log-likelihoods
        # by one constant, which cannot move the argmax or the posterior
        from texive.activity import _log_likelihoods

        for seed in range(10):
            model, x = random_model_and_input(seed)
            logs = _log_likelihoods(model, np.asarray(x))
            shifted = logs + math.log(37.0)
            assert int(np.argmax(logs)) == int(np.argmax(shifted))
            soft = np.exp(logs - logs.max())
            soft_shifted = np.exp(shifted - shifted.max())
            assert np.allclose(soft / soft.sum(), soft_shifted / soft_shifted.sum(), atol=1e-12)

    def test_dimension_checked(self):
        model, _ = random_model_and_input(1)
        with pytest.raises(DimensionMismatch):
            classify(model, np.zeros(model.feature_dim + 1))

    def test_deterministic(self):
        model, x = random_model_and_input(9)
        assert classify(model, x) == classify(model, x)


class TestUpdate:
    def test_mean_example_leaves_mean(self):
        model, _ = random_model_and_input(2)
        c = model.class_for("C0")
        updated = update(model, c.mean, "C0")
        assert np.allclose(updated.class_for("C0").mean, c.mean, atol=1e-12)

    @given(st.integers(0, 300))
    def test_batch_equals_streaming(self, seed):
        rng = np.random.default_rng(seed)
        base = [(rng.normal(0, 2, 4), "A") for _ in range(6)]
        base += [(rng.normal(5, 2, 4), "B") for _ in range(5)]
        x = rng.normal(0, 2, 4)
        batch = train(base + [(x, "A")])
        stream = update(train(base), x, "A")
        for label in ("A", "B"):
            assert np.allclose(
                batch.class_for(label).mean, stream.class_for(label).mean, atol=1e-9
            )
            assert np.allclose(
                batch.class_for(label).var, stream.class_for(label).var, atol=1e-9
            )
        assert batch.class_for("A").prior == pytest.approx(
            stream.class_for("A").prior, abs=1e-12
        )

    def test_unknown_label_policy(self):
        model, x = random_model_and_input(3)
        with pytest.raises(UnknownLabel):
            update(model, x, "new")
        grown = update(model, x, "new", allow_new_class=True)
        assert grown.class_for("new").count == 1

    def test_adaptation_to_second_user(self):
        # new-user examples pull the model over; accuracy climbs by >= 0.2
        rng = np.random.default_rng(11)
        model = train(
            [(rng.normal(0, 0.5, 3), "A") for _ in range(20)]
            + [(rng.normal(4, 0.5, 3), "B") for _ in range(20)]
        )
        shift = np.array([2.2, 2.2, 2.2])  # user 2's A sits near user 1's B
        held_out = [(rng.normal(0, 0.5, 3) + shift, "A") for _ in range(40)]

        def accuracy(m):
            return np.mean([str(classify(m, x)[0]) == lbl for x, lbl in held_out])

        initial = accuracy(model)
        accs = [initial]
        for i in range(30):
            model = update(model, rng.normal(0, 0.5, 3) + shift, "A")
            accs.append(accuracy(model))
        assert accs[-1] >= initial + 0.2
        # trend is upward: the second half dominates the first
        assert np.mean(accs[15:]) >= np.mean(accs[:15])


def efc(t_ms, north, east=0.0):
    return EfcSample(t_ms=t_ms, linear_accel_efc=np.array([north, east, 0.0]),
                     mag_efc=np.array([30.0, 0.0, 40.0]))


class TestConfirmInVehicle:
    def test_indoor_sitdown_rejected(self):
        quiet = [efc(50 * i, 0.05) for i in range(100)]
        assert confirm_in_vehicle(0.02, quiet) is False

    def test_magnetic_fluctuation_confirms(self):
        quiet = [efc(50 * i, 0.05) for i in range(100)]
        assert confirm_in_vehicle(5.0, quiet) is True

    def test_drive_away_confirms(self):
        moving = [efc(50 * i, 1.5) for i in range(61)]  # 3 s sustained
        assert confirm_in_vehicle(0.02, moving) is True

    def test_short_burst_not_enough(self):
        burst = [efc(50 * i, 1.5 if i < 20 else 0.0) for i in range(100)]
        assert confirm_in_vehicle(0.02, burst) is False

    def test_run_length_measured_in_time(self):
        samples = [efc(50 * i, 2.0) for i in range(41)]
        assert sustained_horizontal_run_ms(samples, 1.0) == 2000


class TestEventLatch:
    def test_fires_on_second_consecutive(self):
        latch = EventLatch(k=2)
        assert latch.push(ActivityLabel.Walking) is None
        assert latch.push(ActivityLabel.Walking) is ActivityLabel.Walking
        assert latch.push(ActivityLabel.Walking) is None

    def test_alternating_never_fires(self):
        latch = EventLatch(k=2)
        for lbl in [ActivityLabel.Walking, ActivityLabel.Stairs] * 5:
            assert latch.push(lbl) is None

    def test_refires_after_change(self):
        latch = EventLatch(k=2)
        seq = ["Walking", "Walking", "Stairs", "Stairs", "Walking", "Walking"]
        fired = [latch.push(ActivityLabel[s]) for s in seq]
        assert fired == [None, ActivityLabel.Walking, None, ActivityLabel.Stairs,
                         None, ActivityLabel.Walking]
