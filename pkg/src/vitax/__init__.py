"""Certified targeted semifactual explanations for small feed-forward ReLU networks.

Given an input predicted as class ``y`` and a target class ``t``, find the longest prefix of
a sensitivity ranking whose joint ``epsilon`` perturbation provably cannot lift ``t`` to ``y``.
"""

from .errors import *  # noqa: F401,F403
from .estimator import ReluNetworkClassifier, TargetedExplainer
from .explain import (
    ExplainRequest,
    Explanation,
    brute_force_explain,
    linear_scan_explain,
    verify_subset,
    vitax_explain,
)
from .heuristics import (
    Heuristic,
    Ranking,
    rank_integrated_gradients,
    rank_random,
    rank_saliency,
)
from .metrics import MetricReport, fidelity, ne_robustness, worst_case_input
from .model import (
    DenseLayer,
    Network,
    forward,
    gradient,
    load_network,
    normalize_minmax,
    predict,
    save_network,
)
from .reach import (
    ClassBounds,
    PerturbationSet,
    Solver,
    check_spec,
    reach_exact,
    reach_interval,
    reach_linear_relax,
)

__version__ = "0.1.0"
