"""Train the 8x8-digit MLP fixture used by the test-suite.

Writes ``tests/fixtures/digits_mlp.json`` (2 hidden ReLU layers of 16 units) and
``tests/fixtures/digits_500.csv`` (the 500-sample training subset, features scaled to [0, 1]).
"""

import sys
from pathlib import Path

import numpy as np
from sklearn.datasets import load_digits
from sklearn.neural_network import MLPClassifier

from vitax.io import save_dataset
from vitax.model import from_sklearn_mlp, predict, save_network

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main():
    digits = load_digits()
    X = digits.data / 16.0
    y = digits.target
    idx = np.random.default_rng(0).permutation(len(X))[:500]
    X, y = X[idx], y[idx]
    mlp = MLPClassifier(hidden_layer_sizes=(16, 16), max_iter=2000, random_state=0)
    mlp.fit(X, y)
    net = from_sklearn_mlp(mlp, input_shape=(8, 8, 1))
    acc = np.mean([predict(net, x) == lab for x, lab in zip(X, y)])
    print(f"training-subset accuracy: {acc:.3f}")
    if acc < 0.9:
        sys.exit("accuracy below 0.9")
    OUT.mkdir(parents=True, exist_ok=True)
    save_network(net, OUT / "digits_mlp.json")
    save_dataset(OUT / "digits_500.csv", X, y, header="label,64 pixel intensities in [0,1]")


if __name__ == "__main__":
    main()
