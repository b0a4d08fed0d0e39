import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scfv.probability import (ProbabilityBox, StepInterpolant, build_partition, choose_nodes,
                              expectation, fine_rule, interpolate, lq_error, moments)


def _linear_density(y):
    return 2.0 * y[0]


def test_uniform_partition_measures_and_diam():
    p = build_partition(ProbabilityBox(2), 4)
    assert p.nu == 16
    assert np.allclose(p.measures, 1 / 16)
    assert p.diam == 0.25


def test_weighted_partition():
    p = build_partition(ProbabilityBox(1, _linear_density), 2)
    assert np.allclose(p.measures, [0.25, 0.75], atol=1e-14)


def test_rejects_unnormalized_density():
    with pytest.raises(ValueError, match="integrate to 1"):
        ProbabilityBox(1, lambda y: 3.0 * y[0])


def test_locate_half_open_boxes():
    p = build_partition(ProbabilityBox(2), 2)
    assert p.locate(np.array([0.0, 0.0])) == 0
    assert p.locate(np.array([0.5, 0.0])) == 2
    assert p.locate(np.array([0.49, 0.5])) == 1
    assert p.locate(np.array([1.0, 1.0])) == 3
    assert list(p.locate(np.array([[0.1, 0.9], [0.9, 0.1]]))) == [1, 2]
    with pytest.raises(ValueError):
        p.locate(np.array([1.2, 0.0]))


@pytest.mark.parametrize("rule", ["midpoint", "corner", "random"])
def test_nodes_lie_in_their_boxes(rule):
    p = build_partition(ProbabilityBox(3), 3)
    nodes = choose_nodes(p, rule, seed=7)
    assert len(nodes) == p.nu
    assert np.array_equal(p.locate(nodes.points.T), np.arange(p.nu))


def test_random_nodes_are_seeded():
    p = build_partition(ProbabilityBox(2), 4)
    a, b = choose_nodes(p, "random", 3), choose_nodes(p, "random", 3)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, choose_nodes(p, "random", 4).points)
    with pytest.raises(ValueError):
        choose_nodes(p, "gauss")


def test_expectation_and_moments_two_nodes():
    p = build_partition(ProbabilityBox(1), 2)
    s = StepInterpolant(p, np.array([0.0, 2.0]))
    assert expectation(s) == 1.0
    mo = moments(s, (2, 3))
    assert mo["mean"] == 1.0 and mo["variance"] == 1.0
    assert mo["raw_2"] == 2.0 and mo["central_3"] == 0.0


def test_vector_expectation():
    p = build_partition(ProbabilityBox(1), 2)
    s = interpolate(lambda w: np.array([w[0], 1.0]), p, choose_nodes(p))
    assert np.allclose(expectation(s), [0.5, 1.0])


@pytest.mark.parametrize("c", [1, 2, 4, 16])
def test_lq_error_linear_oracle(c):
    # E|f^M - f| = sum over boxes of w^2/4 = 1/(4c) for f = omega, midpoint nodes
    p = build_partition(ProbabilityBox(1), c)
    s = interpolate(lambda w: w[0], p, choose_nodes(p))
    est = lq_error(s, lambda w: w[0])
    assert est.value == pytest.approx(1 / (4 * c), rel=1e-6)
    # q = 2: sum w^3/12 = 1/(12 c^2)
    assert lq_error(s, lambda w: w[0], q=2).value == pytest.approx(1 / (12 * c * c), rel=1e-6)


def test_lq_error_indicator_oracle():
    # box [1/4, 1/2) has node 3/8 >= 1/3 : wrong on [1/4, 1/3), measure 1/12
    p = build_partition(ProbabilityBox(1), 4)
    f = lambda w: float(w[0] >= 1 / 3)
    est = lq_error(interpolate(f, p, choose_nodes(p)), f)
    assert est.value == pytest.approx(1 / 12, abs=1e-4)


def test_lq_error_monte_carlo_beyond_three_dims():
    p = build_partition(ProbabilityBox(4), 2)
    f = lambda w: w[0]
    est = lq_error(interpolate(f, p, choose_nodes(p)), f, vectorized=False, mc_samples=20000, seed=1)
    assert est.stderr > 0
    assert abs(est.value - 1 / 8) < 5 * est.stderr
    assert "monte-carlo" in est.estimator


def test_fine_rule_weights_are_probabilities():
    p = build_partition(ProbabilityBox(2), 4)
    pts, w = fine_rule(p)
    assert w.sum() == pytest.approx(1.0)
    assert pts.shape[1] >= 512**2


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4))
def test_measures_sum_to_one_property(n, c):
    p = build_partition(ProbabilityBox(n), c)
    assert p.measures.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(p.upper > p.lower)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_variance_is_nonnegative_and_two_pass(values):
    p = build_partition(ProbabilityBox(2), 2)
    s = StepInterpolant(p, np.array(values))
    mo = moments(s)
    v = np.array(values)
    assert mo["variance"] >= 0
    assert mo["variance"] == pytest.approx(np.mean((v - v.mean()) ** 2), abs=1e-12)
