import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vitax.errors import (
    ClassOutOfRange,
    DimensionMismatch,
    SameClass,
    SplitBudgetExceeded,
    UnsupportedNorm,
)
from vitax.model import Network, forward
from vitax.reach import (
    TAU_LP,
    ClassBounds,
    PerturbationSet,
    SolverStats,
    check_spec,
    get_solver,
    reach_exact,
    reach_interval,
    reach_linear_relax,
    sample_member,
    sample_members,
)

from conftest import batch_forward, random_net
from oracles import enumerate_patterns, small_unstable_instance

DIFF = Network.from_arrays([[[1.0, -1.0]]], [[0.0]], ["identity"])
DIFF_RELU = Network.from_arrays([[[1.0, -1.0]], [[1.0]]], [[0.0], [0.0]])
ABS = Network.from_arrays([[[1.0], [-1.0]], [[1.0, 1.0]]], [[0.0, 0.0], [0.0]])

SOLVERS = [reach_interval, reach_linear_relax, reach_exact]


# -- perturbation sets -----------------------------------------------------------------


def test_perturbation_set_semantics():
    ps = PerturbationSet([0.5, 0.2, 0.9], 0.1, [2, 0])
    assert ps.subset == (0, 2)
    lo, hi = ps.box()
    assert np.allclose(lo, [0.4, 0.2, 0.8]) and np.allclose(hi, [0.6, 0.2, 1.0])
    clamped = PerturbationSet([0.5, 0.2, 0.95], 0.1, [2], clamp_domain=True)
    assert clamped.box()[1][2] == 1.0


@pytest.mark.parametrize("norm", ["l1", "l2", 2, "foo"])
def test_only_linf(norm):
    with pytest.raises(UnsupportedNorm):
        PerturbationSet([0.5], 0.1, [0], norm=norm)


def test_perturbation_set_validation():
    with pytest.raises(DimensionMismatch):
        PerturbationSet([0.5, 0.5], 0.1, [2])
    with pytest.raises(ValueError):
        PerturbationSet([0.5], 0.0, [0])


def test_solver_rejects_wrong_dimension():
    with pytest.raises(DimensionMismatch):
        reach_interval(DIFF, PerturbationSet([0.5, 0.5, 0.5], 0.1, [0]))


# -- interval --------------------------------------------------------------------------


def test_interval_affine_example():
    b = reach_interval(DIFF, PerturbationSet([0.5, 0.5], 0.1, [0, 1]))
    assert np.allclose(b.intervals, [(-0.2, 0.2)])


def test_interval_single_feature_and_relu():
    ps = PerturbationSet([0.5, 0.5], 0.1, [0])
    assert np.allclose(reach_interval(DIFF, ps).intervals, [(-0.1, 0.1)])
    assert np.allclose(reach_interval(DIFF_RELU, ps).intervals, [(0.0, 0.1)])


@pytest.mark.parametrize("solver", SOLVERS)
def test_point_limit(solver):
    rng = np.random.default_rng(0)
    net = random_net(rng, 4, [5, 5], 3)
    c = rng.uniform(size=4)
    b = solver(net, PerturbationSet(c, 1e-12, [0, 2, 3]))
    y = forward(net, c)
    assert np.allclose(b.lower, y, atol=1e-9, rtol=0)
    assert np.allclose(b.upper, y, atol=1e-9, rtol=0)


# -- relaxation and exact --------------------------------------------------------------


def test_three_solvers_on_abs():
    ps = PerturbationSet([0.0], 1.0, [0])
    ibp = reach_interval(ABS, ps)
    rel = reach_linear_relax(ABS, ps)
    ex = reach_exact(ABS, ps)
    assert np.allclose(ibp.intervals, [(0.0, 2.0)])
    assert np.allclose(ex.intervals, [(0.0, 1.0)], atol=TAU_LP)
    assert 1.0 <= rel.upper[0] <= 2.0 + 1e-12 and rel.lower[0] >= -1e-12
    assert ex.within(rel) and rel.within(ibp)


def test_affine_network_all_solvers_agree():
    rng = np.random.default_rng(1)
    net = Network.from_arrays(
        [rng.normal(size=(4, 3)), rng.normal(size=(2, 4))],
        [rng.normal(size=4), rng.normal(size=2)],
        ["identity", "identity"],
    )
    ps = PerturbationSet(rng.uniform(size=3), 0.2, [0, 1, 2])
    w = net.layers[1].weights @ net.layers[0].weights
    b = net.layers[1].weights @ net.layers[0].bias + net.layers[1].bias
    centre = w @ ps.center + b
    radius = np.abs(w) @ np.full(3, 0.2)
    for solver in (reach_linear_relax, reach_exact):
        bounds = solver(net, ps)
        assert np.allclose(bounds.lower, centre - radius, atol=1e-8)
        assert np.allclose(bounds.upper, centre + radius, atol=1e-8)
    ibp = reach_interval(net, ps)
    assert np.all(ibp.lower <= centre - radius) and np.all(centre + radius <= ibp.upper)


def stable_net(rng):
    """Random network whose hidden ReLUs are one-sided over the perturbation set."""
    while True:
        net = random_net(rng, 3, [4, 4], 3, bias_scale=3.0)
        ps = PerturbationSet(rng.uniform(size=3), 0.02, [0, 1, 2])
        from vitax.reach.interval import layer_bounds

        pre = layer_bounds(net, ps)[:-1]
        if all(np.all((lo >= 0) | (hi <= 0)) for lo, hi in pre):
            return net, ps


def test_relax_exact_on_stable_networks():
    rng = np.random.default_rng(2)
    for _ in range(10):
        net, ps = stable_net(rng)
        rel, ex = reach_linear_relax(net, ps), reach_exact(net, ps)
        assert np.allclose(rel.lower, ex.lower, atol=TAU_LP, rtol=0)
        assert np.allclose(rel.upper, ex.upper, atol=TAU_LP, rtol=0)
        ys = batch_forward(net, sample_members(ps, 2000, 0))
        assert ex.contains_point(ys.min(0)) and ex.contains_point(ys.max(0))


def test_exact_matches_pattern_enumeration():
    rng = np.random.default_rng(3)
    for _ in range(15):
        net, ps = small_unstable_instance(rng)
        ex = reach_exact(net, ps)
        lo, hi, _ = enumerate_patterns(net, ps)
        assert np.allclose(ex.lower, lo, atol=1e-6, rtol=0)
        assert np.allclose(ex.upper, hi, atol=1e-6, rtol=0)


def test_exact_against_dense_sampling():
    rng = np.random.default_rng(4)
    for _ in range(5):
        net, ps = small_unstable_instance(rng)
        ex = reach_exact(net, ps)
        ys = batch_forward(net, sample_members(ps, 100_000, 1))
        assert np.all(ex.lower <= ys.min(0)) and np.all(ys.max(0) <= ex.upper)


def test_exact_simplex_backend_agrees():
    rng = np.random.default_rng(5)
    for _ in range(5):
        net, ps = small_unstable_instance(rng)
        a = reach_exact(net, ps)
        b = reach_exact(net, ps, lp_backend="simplex")
        assert np.allclose(a.lower, b.lower, atol=1e-7) and np.allclose(a.upper, b.upper, atol=1e-7)


def test_exact_split_budget():
    rng = np.random.default_rng(6)
    net = random_net(rng, 4, [16, 16], 3)
    with pytest.raises(SplitBudgetExceeded):
        reach_exact(net, PerturbationSet(np.full(4, 0.5), 1.0, range(4)), budget=2)
    with pytest.raises(ValueError):
        reach_exact(net, PerturbationSet(np.full(4, 0.5), 1.0, range(4)), budget=0)


def test_exact_stats_are_recorded():
    stats = SolverStats()
    reach_exact(ABS, PerturbationSet([0.0], 1.0, [0]), stats=stats)
    assert stats.bound_queries == 1 and stats.relu_splits >= 1 and stats.wall_time >= 0


def test_get_solver_names():
    assert get_solver("interval") is reach_interval
    assert get_solver("relax") is reach_linear_relax
    with pytest.raises(ValueError):
        get_solver("star")


# -- properties ------------------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(SOLVERS))
def test_soundness_by_sampling(seed, solver):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    net = random_net(rng, n, list(rng.integers(1, 7, size=rng.integers(0, 3))), int(rng.integers(2, 4)))
    subset = rng.choice(n, int(rng.integers(0, n + 1)), replace=False)
    ps = PerturbationSet(rng.uniform(size=n), float(rng.uniform(0.01, 0.3)), subset,
                         clamp_domain=bool(rng.integers(2)))
    b = solver(net, ps)
    xs = sample_members(ps, 2000, seed)
    ys = batch_forward(net, xs)
    assert np.all(b.lower <= ys) and np.all(ys <= b.upper)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_precision_ordering(seed):
    rng = np.random.default_rng(seed)
    net, ps = small_unstable_instance(rng)
    ibp, rel, ex = (s(net, ps) for s in SOLVERS)
    assert ex.within(rel) and rel.within(ibp)


@pytest.mark.parametrize("solver", [reach_interval, reach_exact])
def test_single_feature_union_inside_full(solver):
    rng = np.random.default_rng(8)
    for _ in range(10):
        net = random_net(rng, 4, [5], 3)
        ps = PerturbationSet(rng.uniform(size=4), 0.15, [0, 1, 3])
        full = solver(net, ps)
        tol = TAU_LP if solver is reach_exact else 0.0
        for i in ps.subset:
            assert solver(net, ps.with_subset([i])).within(full, tol)


def test_interval_nested_subsets_exhaustive_small():
    rng = np.random.default_rng(9)
    net = random_net(rng, 5, [6, 6], 3)
    ps = PerturbationSet(rng.uniform(size=5), 0.1, ())
    subsets = [s for r in range(6) for s in itertools.combinations(range(5), r)]
    bounds = {s: reach_interval(net, ps.with_subset(s)) for s in subsets}
    for d in subsets:
        for l in subsets:
            if set(d) <= set(l):
                assert bounds[d].within(bounds[l])


# -- check_spec ------------------------------------------------------------------------


def test_check_spec_holds_with_dominance():
    b = ClassBounds([0.9, 0.2, 0.0], [1.0, 0.5, 0.4])
    res = check_spec(b, 0, 1, dominance=True)
    assert res.holds and res.violating_classes == ()
    assert res.target_margin == pytest.approx(0.4)


def test_check_spec_strict():
    b = ClassBounds([0.5, 0.1], [0.8, 0.5])
    assert not check_spec(b, 0, 1).holds


def test_check_spec_dominance_violation():
    b = ClassBounds([0.9, 0.0, 0.0], [1.0, 0.5, 0.6])
    res = check_spec(b, 0, 1, dominance=True)
    assert not res.holds and res.violating_classes == (2,)
    assert check_spec(b, 0, 1, dominance=False).holds
    assert check_spec(b, 0, 1, dominance=False).violating_classes == ()


def test_check_spec_errors():
    b = ClassBounds([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(SameClass):
        check_spec(b, 1, 1)
    with pytest.raises(ClassOutOfRange):
        check_spec(b, 0, 2)


def test_class_bounds_validation():
    with pytest.raises(ValueError):
        ClassBounds([1.0], [0.0])
    with pytest.raises(ValueError):
        ClassBounds([np.nan], [0.0])


# -- sampling --------------------------------------------------------------------------


def test_sample_member_empty_subset_is_center():
    ps = PerturbationSet([0.3, 0.7], 0.1, ())
    assert np.array_equal(sample_member(ps, 0), ps.center)


def test_sample_member_single_feature():
    ps = PerturbationSet([0.3, 0.7, 0.1], 0.1, [1])
    for seed in range(50):
        x = sample_member(ps, seed)
        assert 0.6 <= x[1] <= 0.8
        assert x[0] == 0.3 and x[2] == 0.1


def test_sample_member_deterministic():
    ps = PerturbationSet([0.3, 0.7], 0.1, [0, 1])
    assert np.array_equal(sample_member(ps, 11), sample_member(ps, 11))


def test_sample_member_covers_box():
    ps = PerturbationSet([0.3, 0.7], 0.1, [0, 1])
    rng = np.random.default_rng(0)
    xs = np.array([sample_member(ps, rng) for _ in range(10_000)])
    tol = 0.01 * 2 * 0.1
    assert np.all(np.abs(xs.min(0) - (ps.center - 0.1)) < tol)
    assert np.all(np.abs(xs.max(0) - (ps.center + 0.1)) < tol)
