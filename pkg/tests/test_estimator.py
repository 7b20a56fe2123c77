import numpy as np
import pytest
from sklearn.base import clone

from vitax import ReluNetworkClassifier, TargetedExplainer
from vitax.benchmark import runner_up
from vitax.errors import DimensionMismatch
from vitax.explain import ExplainRequest, vitax_explain
from vitax.model import predict, save_network

from conftest import random_net


@pytest.fixture
def setup():
    rng = np.random.default_rng(0)
    net = random_net(rng, 5, [8], 3)
    return net, rng.uniform(size=(6, 5))


def test_classifier(setup, tmp_path):
    net, X = setup
    clf = ReluNetworkClassifier(network=net).fit(X)
    assert list(clf.classes_) == [0, 1, 2] and clf.n_features_in_ == 5
    assert list(clf.predict(X)) == [predict(net, x) for x in X]
    save_network(net, tmp_path / "m.json")
    from_file = ReluNetworkClassifier(network=str(tmp_path / "m.json")).fit()
    assert np.array_equal(from_file.decision_function(X), clf.decision_function(X))
    with pytest.raises(DimensionMismatch):
        clf.predict(np.zeros((2, 4)))


def test_explainer_params_and_clone(setup):
    net, _ = setup
    est = TargetedExplainer(network=net, epsilon=0.1, solver="exact", seed=3)
    params = est.get_params()
    assert params["epsilon"] == 0.1 and params["solver"] == "exact" and params["seed"] == 3
    copy = clone(est)
    assert copy.get_params()["epsilon"] == 0.1
    est.set_params(epsilon=0.2)
    assert est.epsilon == 0.2


def test_transform_matches_explain(setup):
    net, X = setup
    est = TargetedExplainer(network=net, epsilon=0.1)
    masks = est.fit_transform(X)
    assert masks.shape == X.shape and masks.dtype == bool
    for x, mask in zip(X, masks):
        exp = vitax_explain(ExplainRequest(net, x, runner_up(net, x), 0.1))
        assert set(np.flatnonzero(mask)) == set(exp.A)
    assert list(est.cardinality(X)) == list(masks.sum(axis=1))


def test_explicit_targets(setup):
    net, X = setup
    est = TargetedExplainer(network=net, epsilon=0.1).fit()
    targets = [(predict(net, x) + 1) % 3 for x in X]
    masks = est.transform(X, targets)
    for x, t, mask in zip(X, targets, masks):
        assert set(np.flatnonzero(mask)) == set(vitax_explain(ExplainRequest(net, x, t, 0.1)).A)


def test_explainer_validation(setup):
    net, X = setup
    with pytest.raises(ValueError):
        TargetedExplainer(network=net, epsilon=0).fit()
    with pytest.raises(ValueError):
        TargetedExplainer(network=None).fit()
    with pytest.raises(ValueError):
        TargetedExplainer(network=net, target="best").fit().transform(X)
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        TargetedExplainer(network=net).transform(X)
