import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from condtest.distribution import PiecewiseDistribution, mass_of, explicit, support_size
from condtest.errors import CondError
from condtest.instances import (bucket_sizes, equivalence_shape, gen_equivalence_instance,
                                gen_support_pair, instance_from_dict, instance_to_dict,
                                load_instance, dump_instance, support_grid, tv_distance)


def test_tv_simple_cases():
    U2 = PiecewiseDistribution.uniform(2)
    point = PiecewiseDistribution(2, [(1, Fraction(1))])
    assert tv_distance(U2, point) == Fraction(1, 2)
    assert tv_distance(U2, U2) == 0
    with pytest.raises(CondError):
        tv_distance(U2, PiecewiseDistribution.uniform(3))


def brute_tv(D1, D2):
    ids = range(1, D1.n + 1)
    return sum(abs(a - b) for a, b in zip(D1.masses(ids), D2.masses(ids))) / 2


def random_pieces(rng, n):
    k = int(rng.integers(1, min(n, 4) + 1))
    counts = rng.multinomial(int(rng.integers(k, n + 1)) - k, [1 / k] * k) + 1
    w = rng.integers(0, 6, size=k)
    w[0] += 1
    total = int((counts * w).sum())
    return [(int(c), Fraction(int(x), total)) for c, x in zip(counts, w)]


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**32), st.booleans())
def test_tv_matches_brute_force(n, seed, share):
    rng = np.random.default_rng(seed)
    r1 = int(rng.integers(0, 2**31))
    r2 = r1 if share else int(rng.integers(0, 2**31))
    D1 = PiecewiseDistribution(n, random_pieces(rng, n), relabel_seed=r1)
    D2 = PiecewiseDistribution(n, random_pieces(rng, n), relabel_seed=r2)
    assert tv_distance(D1, D2) == brute_tv(D1, D2)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2**32))
def test_tv_relabel_invariance(n, seed):
    rng = np.random.default_rng(seed)
    p1, p2 = random_pieces(rng, n), random_pieces(rng, n)
    plain = tv_distance(PiecewiseDistribution(n, p1), PiecewiseDistribution(n, p2))
    s = int(rng.integers(0, 2**31))
    moved = tv_distance(PiecewiseDistribution(n, p1, relabel_seed=s),
                        PiecewiseDistribution(n, p2, relabel_seed=s))
    assert plain == moved


def test_equivalence_shape_defaults():
    req, rho, r = equivalence_shape(2**16)
    assert req == 16.0
    assert r == 2
    assert sum(rho**i for i in range(1, 5)) <= 16
    with pytest.raises(CondError):
        equivalence_shape(2**15)


def test_bucket_sizes_absorb_residual():
    sizes = bucket_sizes(4, 1.5, 2, 4 * 16)
    assert sum(sizes) == 64
    assert sizes[:3] == [6, 9, 13]
    assert min(sizes) >= 1
    with pytest.raises(CondError):
        bucket_sizes(1, 10.0, 2, 16)


@pytest.mark.parametrize("n", [2**16, 2**20])
def test_no_instance_distance_is_exactly_a_quarter(n):
    for seed in range(5):
        inst = gen_equivalence_instance(n, "no", seed)
        assert tv_distance(inst.D1, inst.D2) == Fraction(1, 4)
        assert sum(inst.bucket_sizes) == inst.m
        assert inst.m == inst.b * math.isqrt(math.isqrt(n))


def test_yes_instance_is_identical():
    inst = gen_equivalence_instance(2**16, "yes", 3)
    assert inst.D1 == inst.D2 and inst.pair_flips == []
    assert tv_distance(inst.D1, inst.D2) == 0


def test_bucket_and_pair_masses():
    inst = gen_equivalence_instance(2**20, "no", 11)
    r = inst.r
    for i in range(1, 2 * r + 1):
        B = explicit(inst.bucket_ids(i))
        assert mass_of(inst.D1, B) == Fraction(1, 2 * r)
        assert mass_of(inst.D2, B) in (Fraction(1, 4 * r), Fraction(3, 4 * r))
    for i in range(1, r + 1):
        pair = explicit(np.concatenate([inst.bucket_ids(2 * i - 1), inst.bucket_ids(2 * i)]))
        assert mass_of(inst.D2, pair) == Fraction(1, r)
        light = 2 * i if inst.pair_flips[i - 1] else 2 * i - 1
        assert mass_of(inst.D2, explicit(inst.bucket_ids(light))) == Fraction(1, 4 * r)
    with pytest.raises(CondError):
        inst.bucket_ids(0)


def test_equivalence_kind_validation():
    with pytest.raises(CondError):
        gen_equivalence_instance(2**16, "maybe", 0)


def test_support_grid_range():
    for n in (2**16, 2**20, 2**24):
        for beta in (2.0, 3.0, 2.5):
            grid = support_grid(n, beta)
            assert all(n ** 0.25 - 1e-9 <= s <= n ** 0.75 + 1e-9 for s in grid)
    assert support_grid(2**16, 2.0) == [16 * 2**k for k in range(9)]


def test_support_pair_no_ratio_is_beta():
    for seed in range(5):
        inst = gen_support_pair(2**16, 2**0.5, "no", seed)
        assert inst.beta == 2.0
        assert support_size(inst.D2) == 2 * support_size(inst.D1)


def test_support_pair_yes_and_errors():
    inst = gen_support_pair(2**16, 2, "yes", 4)
    assert inst.D1 is inst.D2 and tv_distance(inst.D1, inst.D2) == 0
    with pytest.raises(CondError):
        gen_support_pair(2**16, 1.2, "no", 0)
    with pytest.raises(CondError):
        gen_support_pair(8, 2, "no", 0)


def test_smallest_grid_point_is_far_from_uniform():
    n = 2**16
    s = support_grid(n, 2.0)[0]
    D = PiecewiseDistribution.uniform(n, s, relabel_seed=1)
    assert tv_distance(D, PiecewiseDistribution.uniform(n)) >= 1 - Fraction(1, 16)


def test_instance_json_round_trip(tmp_path):
    for inst in (gen_equivalence_instance(2**16, "no", 5), gen_support_pair(2**16, 2, "no", 5)):
        path = tmp_path / f"{inst.family}.json"
        dump_instance(inst, path)
        back = load_instance(path)
        assert (back.D1, back.D2) == (inst.D1, inst.D2)
        assert back.params == inst.params


def test_instance_json_tamper_is_detected():
    d = instance_to_dict(gen_equivalence_instance(2**16, "no", 5))
    d["D2"]["pieces"][0], d["D2"]["pieces"][1] = d["D2"]["pieces"][1], d["D2"]["pieces"][0]
    with pytest.raises(CondError):
        instance_from_dict(d)
    d["family"] = "other"
    with pytest.raises(CondError):
        instance_from_dict(d)
