from pathlib import Path

import numpy as np
import pytest

from vitax.io import load_dataset
from vitax.model import Network, load_network

FIXTURES = Path(__file__).parent / "fixtures"

_ACCEPTANCE = []


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call":
        return
    _ACCEPTANCE.append((marker.args[0], call.excinfo is None))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")


@pytest.fixture(scope="session")
def digits_net():
    return load_network(FIXTURES / "digits_mlp.json")


@pytest.fixture(scope="session")
def digits_data():
    return load_dataset(FIXTURES / "digits_500.csv")


def random_net(rng, n, hidden, m, bias_scale=0.5):
    """Dense ReLU network with Gaussian weights; ``hidden`` lists hidden-layer widths."""
    dims = [n, *hidden, m]
    weights = [rng.normal(size=(dims[k + 1], dims[k])) for k in range(len(dims) - 1)]
    biases = [rng.normal(size=dims[k + 1]) * bias_scale for k in range(len(dims) - 1)]
    return Network.from_arrays(weights, biases)


def batch_forward(net, X):
    """Row-wise logits, written independently of ``vitax.model.forward``."""
    Z = np.asarray(X, dtype=np.float64)
    for layer in net.layers:
        Z = Z @ layer.weights.T + layer.bias
        if layer.activation.value == "relu":
            Z = np.where(Z > 0, Z, 0.0)
    return Z
