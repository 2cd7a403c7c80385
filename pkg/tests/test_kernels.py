import math
import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from condtest import kernels
from condtest.distribution import PiecewiseDistribution
from condtest.compare import compare_cost
from condtest.oracle import CondOracle
from condtest.support import estimate_support

try:
    from condtest.kernels import _fast  # noqa: F401
    HAVE_FAST = True
except ImportError:  # pragma: no cover
    HAVE_FAST = False

needs_fast = pytest.mark.skipif(not HAVE_FAST, reason="compiled kernels not built")
BACKENDS = ["python"] + (["cython"] if HAVE_FAST else [])


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.backend("fortran")


def test_pure_env_var_selects_fallback():
    env = dict(os.environ, CONDTEST_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import condtest.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_fast
@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 100, exclude_max=True), max_size=30, unique=True),
       st.integers(1, 2000), st.booleans(), st.booleans())
def test_grid_count_backends_agree(points, g, left, right):
    pts = np.sort(np.array(points, dtype=np.float64))
    c = g * 100 / 10**4
    a = kernels.backend("python").sc_grid_count(pts, c, 100.0, 10**4, left, right)
    b = kernels.backend("cython").sc_grid_count(pts, c, 100.0, 10**4, left, right)
    assert a == b


def run_probe(impl, D, sigma, rounds, seed, m_cmp=64):
    lay = D.layout
    fwd = D.forward
    identity = fwd is None
    if identity:
        fwd = np.zeros(1, dtype=np.int64)
    r = int(D.ids_at([D.n - 1])[0])
    return impl.probe_rounds(np.random.default_rng(seed), lay.pos_starts, lay.pos_counts,
                             lay.pos_masses, lay.zero_starts, lay.zero_counts, fwd, identity,
                             1 / sigma, r, 0.0, rounds, m_cmp, 1.0)


@pytest.mark.parametrize("name", BACKENDS)
@pytest.mark.parametrize("relabel", [None, 3])
def test_probe_miss_rate(name, relabel):
    pieces = [(100, Fraction(1, 200)), (50, Fraction(1, 100))]
    D = PiecewiseDistribution(4096, pieces, relabel_seed=relabel)
    sigma, rounds = 150.0, 20000
    m_cmp = compare_cost(0.5, 1, 1 / (100 * rounds))
    misses, hits, highs, colls, queries = run_probe(kernels.backend(name), D, sigma, rounds, 1,
                                                    m_cmp)
    p = (1 - 1 / sigma) ** 150
    assert abs(misses / rounds - p) < 5 * math.sqrt(p * (1 - p) / rounds)
    assert misses + hits == rounds and highs == 0
    # one draw per round plus redraws, and m_cmp draws per comparison
    assert queries >= rounds + m_cmp * (rounds - colls)


@pytest.mark.parametrize("name", BACKENDS)
def test_probe_full_sets_always_hit(name):
    # inclusion probability 1 puts the lone support id in every set
    D = PiecewiseDistribution(64, [(1, Fraction(1))])
    lay = D.layout
    out = kernels.backend(name).probe_rounds(
        np.random.default_rng(0), lay.pos_starts, lay.pos_counts, lay.pos_masses,
        lay.zero_starts, lay.zero_counts, np.zeros(1, dtype=np.int64), True, 1.0, 2, 0.0,
        500, 64, 1.0)
    assert out[:4] == (0, 500, 0, 0)
    assert out[4] == 500 * 65


@needs_fast
def test_backends_agree_in_distribution():
    D = PiecewiseDistribution.uniform(4096, 200, relabel_seed=7)
    a = [run_probe(kernels.backend("python"), D, 180.0, 4000, s)[0] for s in range(10)]
    b = [run_probe(kernels.backend("cython"), D, 180.0, 4000, s)[0] for s in range(10)]
    p = (1 - 1 / 180) ** 200
    sd = math.sqrt(10 * 4000 * p * (1 - p))
    assert abs(sum(a) - sum(b)) < 6 * sd


@pytest.mark.parametrize("name", BACKENDS)
def test_estimate_with_each_backend(name):
    D = PiecewiseDistribution.uniform(2**14, 2**7, relabel_seed=2)
    est = estimate_support(CondOracle(D, seed=2), 0.3, 1, backend=name)
    assert est.is_within(2**7, 0.3)
