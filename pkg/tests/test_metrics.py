import time

import numpy as np
import pytest

from vitax.errors import DimensionMismatch, EmptyDonorPool, ZeroDenominator
from vitax.metrics import (
    fidelity,
    fidelity_from_logits,
    fidelity_score,
    ne_robustness,
    stopwatch,
    timing,
    worst_case_input,
)
from vitax.model import Network, forward, gradient, normalize_minmax, predict

from conftest import random_net


def signed_linear():
    # gradient of class 1 is (+1, 0, -1)
    w = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, -1.0]])
    return Network.from_arrays([w], [np.array([1.0, 0.0])], ["identity"])


def test_worst_case_examples():
    net = signed_linear()
    x = np.full(3, 0.5)
    assert np.array_equal(worst_case_input(net, x, (), 0.1, 1), x)
    assert np.allclose(worst_case_input(net, x, (0, 1, 2), 0.1, 1), [0.6, 0.5, 0.4], atol=1e-15)
    near = np.array([0.95, 0.5, 0.5])
    assert worst_case_input(net, near, (0,), 0.1, 1, clamp=True)[0] == 1.0
    assert worst_case_input(net, near, (0,), 0.1, 1)[0] == pytest.approx(1.05)
    with pytest.raises(DimensionMismatch):
        worst_case_input(net, x, (3,), 0.1, 1)


def test_fidelity_formula_examples():
    assert fidelity_score([1.0, 0.1, 0.0], [0.5, 0.7, 0.2], 0, 1) == pytest.approx(0.6, abs=1e-12)
    assert fidelity_score([1.0, 0.2, 0.0], [0.8, 0.3, 0.6], 0, 1) == pytest.approx(-0.2, abs=1e-12)


def test_fidelity_identity_perturbation_is_zero():
    assert fidelity_score([1.0, 0.6, 0.3], [1.0, 0.6, 0.3], 0, 1) == 0.0
    rng = np.random.default_rng(0)
    for _ in range(20):
        net = random_net(rng, 4, [6], 4)
        x = rng.uniform(size=4)
        z = forward(net, x)
        y = predict(net, x)
        t = int(np.argsort(-z, kind="stable")[1])
        assert fidelity(net, x, x, y, t) == 0.0


def test_fidelity_normalises_each_vector():
    a, b = np.array([3.0, 1.0, -1.0]), np.array([0.0, 2.0, 1.0])
    direct = fidelity_score(normalize_minmax(a), normalize_minmax(b), 0, 1)
    assert fidelity_from_logits(a, b, 0, 1) == direct
    # an affine rescale of either logit vector leaves the score unchanged
    assert fidelity_from_logits(2 * a + 5, 0.5 * b - 1, 0, 1) == pytest.approx(direct, abs=1e-12)


def test_fidelity_zero_denominator():
    with pytest.raises(ZeroDenominator):
        fidelity_score([0.0, 1.0], [0.0, 1.0], 0, 1)


def digits_like(rng, n=6, m=3):
    net = random_net(rng, n, [8], m)
    X = rng.uniform(size=(400, n))
    preds = np.array([predict(net, x) for x in X])
    return net, X, preds


def other_class(preds):
    """Most populated class other than the first sample's prediction."""
    counts = np.bincount(preds, minlength=3)
    counts[preds[0]] = -1
    return int(np.argmax(counts))


def test_ne_full_subset_is_one():
    rng = np.random.default_rng(1)
    net, X, preds = digits_like(rng)
    x = X[0]
    t = other_class(preds)
    donors = X[preds == t]
    assert ne_robustness(net, x, range(6), t, donors, trials=100, seed=4) == 1.0


def test_ne_empty_subset_is_zero_for_target_donors():
    rng = np.random.default_rng(2)
    net, X, preds = digits_like(rng)
    t = other_class(preds)
    donors = X[preds == t]
    assert all(predict(net, d) == t for d in donors)
    assert ne_robustness(net, X[0], (), t, donors, trials=100, seed=4) == 0.0


def test_ne_determinism_and_range():
    rng = np.random.default_rng(3)
    net, X, preds = digits_like(rng)
    t = other_class(preds)
    donors = X[preds == t]
    a = ne_robustness(net, X[0], (0, 2), t, donors, trials=200, seed=9)
    assert a == ne_robustness(net, X[0], (0, 2), t, donors, trials=200, seed=9)
    assert 0.0 <= a <= 1.0


def test_ne_order_independent():
    # trial i only depends on (seed, i): the first k trials of a longer run agree
    rng = np.random.default_rng(4)
    net, X, preds = digits_like(rng)
    t = other_class(preds)
    donors = X[preds == t]
    singles = [ne_robustness(net, X[0], (1,), t, donors, trials=i + 1, seed=2) * (i + 1)
               for i in range(20)]
    per_trial = np.diff([0.0] + singles)
    assert np.allclose(per_trial, np.round(per_trial))


def test_ne_errors():
    rng = np.random.default_rng(5)
    net, X, _ = digits_like(rng)
    with pytest.raises(EmptyDonorPool):
        ne_robustness(net, X[0], (), 1, np.zeros((0, 6)))
    with pytest.raises(DimensionMismatch):
        ne_robustness(net, X[0], (), 1, np.zeros((3, 5)))


def test_timing():
    (_, elapsed) = timing(lambda: None)
    assert 0.0 <= elapsed < 1e-3
    start = time.perf_counter()
    with stopwatch() as sw:
        time.sleep(0.2)
    outside = time.perf_counter() - start
    assert sw.elapsed > 0 and outside / 2 <= sw.elapsed <= 2 * outside


def test_worst_case_pushes_target_up_locally():
    rng = np.random.default_rng(6)
    for _ in range(20):
        net = random_net(rng, 5, [6], 3)
        x = rng.uniform(size=5)
        g = gradient(net, x, 1)
        xw = worst_case_input(net, x, range(5), 1e-6, 1)
        assert forward(net, xw)[1] >= forward(net, x)[1] - 1e-12
        assert np.allclose(xw - x, 1e-6 * np.sign(g))
