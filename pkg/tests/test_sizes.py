import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from condtest.sizes import (AnalysisParams, SizeClass, classify_size, concentrating_buckets,
                            count_bad_scalings, counting_bounds, is_alpha_stable,
                            is_incomparable, stability_violations, stability_window_count)


def test_analysis_params_q3():
    ap = AnalysisParams(3)
    assert ap.alpha == pytest.approx(3**7)
    assert ap.phi == pytest.approx(3**2.5)
    assert ap.log_gamma == -ap.log_phi
    assert ap.gamma * ap.phi == pytest.approx(1.0)


def test_tiny_size_is_small():
    assert classify_size(0.0, 0, 4096, 64, 8, 10) is SizeClass.SMALL


def test_huge_size_is_large():
    assert classify_size(4000, 0, 4096, 64, 8, 2) is SizeClass.LARGE


def test_neither_between_thresholds():
    # small below n/(b rho^(2r)) = 2^(100 - 0 - 40), large from 2^(100 - 20)
    assert classify_size(70, 0, 100, 10, 2, 1) is SizeClass.NEITHER
    assert classify_size(59.9, 0, 100, 10, 2, 1) is SizeClass.SMALL
    assert classify_size(80, 0, 100, 10, 2, 1) is SizeClass.LARGE


@pytest.mark.parametrize("j", [1, 2, 3, 4])
def test_window_centre_is_unstable(j):
    log_n, log_b, log_rho = 100.0, 3.0, 10.0
    centre = log_n - log_b - j * log_rho
    assert j in stability_violations(centre, 0.0, log_b, log_n, log_rho, 2)
    assert not is_alpha_stable(centre, 0.0, log_b, log_n, log_rho, 2)
    assert is_alpha_stable(centre + 5, 1.0, log_b, log_n, log_rho, 2)


def test_concentrating_buckets():
    # beta nu rho^(2r - D) / n <= 1/alpha, everything in logs
    assert concentrating_buckets(10, 0, 0, 100, 10, 4) == 0
    assert concentrating_buckets(100, 0, 0, 100, 10, 4) == 8
    assert concentrating_buckets(50, 0, 0, 100, 10, 4) == 3


def test_incomparable_needs_stability():
    log_n, log_rho, r = 100.0, 10.0, 2
    centre = log_n - 0 - log_rho
    assert not is_incomparable([centre], 1.0, 1.0, 0.0, log_n, log_rho, r)


def test_incomparable_far_sizes():
    assert is_incomparable([0.0, 1.0], 1.0, 1.0, 0.0, 100.0, 10.0, 2)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 256), st.integers(2, 6), st.floats(1, 8))
def test_counts_match_direct_enumeration(log_beta, r, log_rho):
    log_n, log_alpha, phi = 256.0, 3.0, 1.5
    c = count_bad_scalings(log_beta, log_alpha, log_n, log_rho, r, phi)
    ks = range(int(log_n // 2) + 1)
    assert c.total == len(ks)
    assert c.neither == sum(classify_size(log_beta, k, log_n, log_rho, r, phi)
                            is SizeClass.NEITHER for k in ks)
    assert c.unstable == sum(not is_alpha_stable(log_beta, log_alpha, k, log_n, log_rho, r)
                             for k in ks)
    assert c.max_per_j <= stability_window_count(log_alpha)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 4096), st.integers(1, 6))
def test_neither_count_bound(log_beta, q):
    ap = AnalysisParams(q)
    log_n = 4096.0
    log_rho = math.sqrt(log_n)
    r = max(2, math.floor(log_n / (8 * log_rho)))
    c = count_bad_scalings(log_beta, ap.log_alpha, log_n, log_rho, r, ap.phi)
    assert c.neither <= counting_bounds(ap.log_alpha, log_rho, r, ap.phi)["neither"]


def test_per_j_count_reaches_window_width():
    # a window of width 2 log alpha holds floor(2 log alpha) + 1 integers
    log_alpha = AnalysisParams(3).log_alpha
    counts = [count_bad_scalings(lb, log_alpha, 4096, 64, 8, 1).max_per_j
              for lb in np.linspace(3000, 3001, 21)]
    assert max(counts) == stability_window_count(log_alpha) == 23
    assert counting_bounds(log_alpha, 64, 8, 1)["per_j"] == 14
