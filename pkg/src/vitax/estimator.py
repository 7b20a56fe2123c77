"""scikit-learn compatible wrappers around a fixed (pre-trained) network."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .benchmark import runner_up
from .errors import DimensionMismatch
from .explain import ExplainRequest, Explanation, vitax_explain
from .model import Network, forward, load_network
from .reach import DEFAULT_SPLIT_BUDGET


def _resolve_network(network) -> Network:
    if isinstance(network, Network):
        return network
    if network is None:
        raise ValueError("a network (or a path to a model file) is required")
    return load_network(network)


def _check_X(est, X):
    X = check_array(X, dtype=np.float64)
    if X.shape[1] != est.n_features_in_:
        raise DimensionMismatch(
            f"X has {X.shape[1]} features, the network expects {est.n_features_in_}"
        )
    return X


class ReluNetworkClassifier(ClassifierMixin, BaseEstimator):
    """Classifier view of a pre-trained network; ``fit`` only validates and records shapes."""

    def __init__(self, network=None):
        self.network = network

    def fit(self, X=None, y=None):
        self.network_ = _resolve_network(self.network)
        self.n_features_in_ = self.network_.n
        self.classes_ = np.arange(self.network_.m)
        if X is not None:
            _check_X(self, X)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "network_")
        X = _check_X(self, X)
        return np.array([forward(self.network_, x) for x in X])

    def predict(self, X):
        return np.argmax(self.decision_function(X), axis=1)


class TargetedExplainer(TransformerMixin, BaseEstimator):
    """Certified semifactual explanations as a transformer.

    ``transform`` maps each sample to a boolean mask over its features marking the explanation
    ``A``: perturbing those features by ``epsilon`` provably cannot make ``target`` reach the
    predicted class.  ``target`` is a class index, or ``"runner_up"`` to use each sample's
    second most likely class.
    """

    def __init__(
        self,
        network=None,
        epsilon=0.05,
        target="runner_up",
        solver="interval",
        heuristic="saliency",
        dominance=False,
        clamp_domain=False,
        seed=0,
        budget=DEFAULT_SPLIT_BUDGET,
        ig_steps=50,
    ):
        self.network = network
        self.epsilon = epsilon
        self.target = target
        self.solver = solver
        self.heuristic = heuristic
        self.dominance = dominance
        self.clamp_domain = clamp_domain
        self.seed = seed
        self.budget = budget
        self.ig_steps = ig_steps

    def fit(self, X=None, y=None):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        self.network_ = _resolve_network(self.network)
        self.n_features_in_ = self.network_.n
        self.classes_ = np.arange(self.network_.m)
        if X is not None:
            _check_X(self, X)
        return self

    def _target_for(self, x, target):
        target = self.target if target is None else target
        if isinstance(target, str):
            if target != "runner_up":
                raise ValueError(f"unknown target rule {target!r}")
            return runner_up(self.network_, x)
        return int(target)

    def explain(self, x, target=None) -> Explanation:
        check_is_fitted(self, "network_")
        x = np.asarray(x, dtype=np.float64)
        req = ExplainRequest(
            self.network_,
            x,
            self._target_for(x, target),
            self.epsilon,
            solver=self.solver,
            heuristic=self.heuristic,
            dominance=self.dominance,
            clamp_domain=self.clamp_domain,
            seed=self.seed,
            budget=self.budget,
            ig_steps=self.ig_steps,
        )
        return vitax_explain(req)

    def transform(self, X, targets=None):
        check_is_fitted(self, "network_")
        X = _check_X(self, X)
        if targets is None:
            targets = [None] * len(X)
        masks = np.zeros(X.shape, dtype=bool)
        for row, (x, t) in enumerate(zip(X, targets)):
            masks[row, list(self.explain(x, t).A)] = True
        return masks

    def cardinality(self, X, targets=None):
        """``|A|`` per sample."""
        return self.transform(X, targets).sum(axis=1)
