import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from condtest.compare import Outcome, classify, compare, compare_cost, compare_many
from condtest.constants import CONSTANTS, overridden
from condtest.distribution import PiecewiseDistribution, explicit
from condtest.errors import CondError
from condtest.oracle import CondOracle


def two_point(px, py, n=8):
    """Distribution with D(1) = px and D(2) = py, the rest spread over ids 3..n."""
    rest = 1 - px - py
    pieces = [(1, Fraction(px)), (1, Fraction(py)), (n - 2, Fraction(rest) / (n - 2))]
    return PiecewiseDistribution(n, pieces)


def test_cost_formula():
    assert compare_cost(0.5, 2, 0.1) == math.ceil(16 * 3 * math.log2(20) / 0.25)
    assert compare_cost(1, 1, 0.5) == 64
    assert compare_cost(0.5, 2, 0.1, c_cmp=1) == math.ceil(3 * math.log2(20) / 0.25)


def test_cost_follows_constant_override():
    base = compare_cost(0.5, 1, 0.1)
    with overridden(c_cmp=8):
        assert compare_cost(0.5, 1, 0.1) == math.ceil(8 * 2 * math.log2(20) / 0.25)
    assert compare_cost(0.5, 1, 0.1) == base
    assert CONSTANTS.c_cmp == 16


def test_query_count_is_exactly_m():
    o = CondOracle(PiecewiseDistribution.uniform(8), seed=1)
    compare(o, [1], [2], 0.5, 2, 0.1)
    assert o.query_count == compare_cost(0.5, 2, 0.1)
    compare_many(o, [[1], [3]], [[2], [4, 5]], 0.5, 2, 0.1)
    assert o.query_count == 3 * compare_cost(0.5, 2, 0.1)


def test_classify_boundaries():
    # K = 2: High needs count > 4 rest, Low needs 4 count < rest
    assert classify(81, 100, 2).outcome is Outcome.HIGH
    assert classify(80, 100, 2).outcome is Outcome.RATIO
    assert classify(19, 100, 2).outcome is Outcome.LOW
    assert classify(20, 100, 2).outcome is Outcome.RATIO
    assert classify(100, 100, 1).estimate == math.inf
    assert classify(0, 100, 1).is_low
    r = classify(50, 100, 1)
    assert r.ratio == 1.0 and str(r) == "Ratio(1)"


@pytest.mark.parametrize("eta,K,delta", [(0, 2, 0.1), (1.5, 2, 0.1), (0.5, 0.5, 0.1),
                                         (0.5, 2, 0), (0.5, 2, 0.6)])
def test_parameter_errors(eta, K, delta):
    o = CondOracle(PiecewiseDistribution.uniform(8), seed=1)
    with pytest.raises(CondError):
        compare(o, [1], [2], eta, K, delta)


def test_overlap_is_an_error():
    o = CondOracle(PiecewiseDistribution.uniform(8), seed=1)
    with pytest.raises(CondError):
        compare(o, [1], [1], 0.5, 2, 0.1)
    with pytest.raises(CondError):
        compare(o, [1, 2], [2, 3], 0.5, 2, 0.1)
    assert o.query_count == 0


def test_uniform_pair_gives_ratio_near_one():
    o = CondOracle(PiecewiseDistribution.uniform(8), seed=2)
    res = compare_many(o, [[1]] * 1000, [[2]] * 1000, 0.5, 2, 0.1)
    good = sum(r.ratio is not None and 0.5 <= r.ratio <= 1.5 for r in res)
    assert good >= 880


def test_zero_mass_side_gives_low():
    D = two_point(Fraction(1, 2), 0)
    o = CondOracle(D, seed=3)
    res = compare_many(o, [[1]] * 200, [[2]] * 200, 0.5, 2, 0.1)
    assert all(r.is_low for r in res)


def test_heavy_y_gives_high_or_window():
    D = two_point(Fraction(1, 18), Fraction(8, 18))
    o = CondOracle(D, seed=4)
    res = compare_many(o, [[1]] * 500, [[2]] * 500, 0.5, 2, 0.1)
    good = sum(r.is_high or (r.ratio is not None and 4 <= r.ratio <= 12) for r in res)
    assert good >= 450


def test_both_zero_concentrates_on_size_ratio():
    D = PiecewiseDistribution(10, [(1, Fraction(1))])
    o = CondOracle(D, seed=5)
    res = compare(o, [2], [3, 4], 0.5, 4, 0.1)
    assert res.ratio is not None and 1 <= res.ratio <= 3


def test_swap_gives_reciprocal_on_same_seed():
    D = two_point(Fraction(1, 5), Fraction(3, 10))
    m = compare_cost(0.5, 2, 0.1)
    a = CondOracle(D, seed=6).split_counts([explicit([1])], [explicit([2])], m)[0]
    b = CondOracle(D, seed=6).split_counts([explicit([2])], [explicit([1])], m)[0]
    assert a + b == m
    ra = classify(int(a), m, 2).estimate
    rb = classify(int(b), m, 2).estimate
    assert ra * rb == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 200), st.integers(1, 200), st.sampled_from([1, 2, 4, 10]))
def test_classify_swap_symmetry(count, m, K):
    count = min(count, m)
    a, b = classify(count, m, K), classify(m - count, m, K)
    flip = {Outcome.HIGH: Outcome.LOW, Outcome.LOW: Outcome.HIGH, Outcome.RATIO: Outcome.RATIO}
    assert b.outcome is flip[a.outcome]


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30), st.integers(0, 2**32))
def test_batch_equals_sequential_calls(px, py, seed):
    D = two_point(Fraction(px, 100), Fraction(py, 100))
    batch = compare_many(CondOracle(D, seed=seed), [[1], [3]], [[2], [4]], 0.5, 2, 0.2)
    o = CondOracle(D, seed=seed)
    m = compare_cost(0.5, 2, 0.2)
    counts = o.split_counts([explicit([1]), explicit([3])], [explicit([2]), explicit([4])], m)
    assert [r.estimate for r in batch] == [classify(int(c), m, 2).estimate for c in counts]
