"""Lower-bound instance families and exact total variation distance.

Two families are generated here.

*Equivalence pairs.* The effective support ``m = b * floor(n^(1/4))`` (with
``b = 2^k_b`` a random scale) is cut into ``2r`` buckets of geometrically
growing size. ``D1`` gives every bucket mass ``1/(2r)``; in a No-instance
``D2`` moves mass inside each consecutive pair of buckets to
``1/(4r), 3/(4r)`` in an order fixed by a fair coin. Both share one random
relabeling, and their distance is exactly ``1/4``.

*Support pairs.* ``D1`` is uniform on a random set of size ``s`` from the
grid ``beta^k * floor(n^(1/4))``; ``D2`` is either ``D1`` or uniform on an
independent random set of size ``beta * s``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._rng import derive_seed, make_rng
from .distribution import PiecewiseDistribution
from .errors import CondError

MIN_EQUIVALENCE_LOG_N = 16


def _iroot4(n: int) -> int:
    """``floor(n ** (1/4))`` computed exactly."""
    r = math.isqrt(math.isqrt(n))
    while (r + 1) ** 4 <= n:
        r += 1
    while r**4 > n:
        r -= 1
    return r


def _check_kind(kind: str) -> str:
    kind = kind.lower()
    if kind not in ("yes", "no"):
        raise CondError("kind must be 'yes' or 'no'")
    return kind


# -- total variation --------------------------------------------------------------


def _boundaries(D: PiecewiseDistribution) -> tuple[np.ndarray, list[Fraction]]:
    starts = [int(v) for v in D.starts]
    masses = [m for _, m in D.pieces]
    if starts[-1] < D.n:
        starts.append(D.n)
        masses.append(Fraction(0))
    return np.array(starts, dtype=np.int64), masses


def tv_distance(D1: PiecewiseDistribution, D2: PiecewiseDistribution) -> Fraction:
    """Exact ``(1/2) sum_x |D1(x) - D2(x)|``."""
    if D1.n != D2.n:
        raise CondError("distributions live on different domains")
    if D1.same_relabel(D2):
        # both relabel the same way: compare piece structures position by position
        b1, m1 = _boundaries(D1)
        b2, m2 = _boundaries(D2)
        cuts = np.union1d(b1, b2)
        total = Fraction(0)
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            i = int(np.searchsorted(b1, lo, side="right")) - 1
            j = int(np.searchsorted(b2, lo, side="right")) - 1
            if m1[i] != m2[j]:
                total += int(hi - lo) * abs(m1[i] - m2[j])
        return total / 2
    # general case: pair up the pieces each id falls in under both distributions
    ids = np.arange(1, D1.n + 1, dtype=np.int64)
    p1 = D1.piece_index(ids)
    p2 = D2.piece_index(ids)
    width = len(D2.pieces) + 1
    keys, counts = np.unique(p1 * width + p2, return_counts=True)
    t1 = [m for _, m in D1.pieces] + [Fraction(0)]
    t2 = [m for _, m in D2.pieces] + [Fraction(0)]
    total = Fraction(0)
    for key, cnt in zip(keys.tolist(), counts.tolist()):
        a, b = t1[key // width], t2[key % width]
        if a != b:
            total += cnt * abs(a - b)
    return total / 2


# -- equivalence family ----------------------------------------------------------------


def equivalence_shape(n: int, rho: float | None = None) -> tuple[float, float, int]:
    """``(rho_requested, rho, r)`` for domain size ``n``.

    ``r = max(2, floor(log n / (8 log rho)))``. When ``2r`` buckets growing by
    the requested ratio cannot fit into ``n^(1/4)`` points, the ratio is
    lowered to the root of ``sum_{i=1..2r} rho^i = n^(1/4)``.
    """
    if n < 2**MIN_EQUIVALENCE_LOG_N:
        raise CondError(f"equivalence instances need n >= 2^{MIN_EQUIVALENCE_LOG_N}")
    log_n = math.log2(n)
    req = 2.0 ** math.sqrt(log_n) if rho is None else float(rho)
    if req <= 1:
        raise CondError("rho must exceed 1")
    r = max(2, math.floor(log_n / (8 * math.log2(req))))
    target = float(_iroot4(n))
    fill = sum(req**i for i in range(1, 2 * r + 1))
    if fill <= target:
        return req, req, r
    lo, hi = 1.0, req
    for _ in range(200):
        mid = (lo + hi) / 2
        if sum(mid**i for i in range(1, 2 * r + 1)) <= target:
            lo = mid
        else:
            hi = mid
    return req, lo, r


def bucket_sizes(b: int, rho: float, r: int, m: int) -> list[int]:
    """``max(1, floor(b rho^i))`` for ``i = 1..2r``, the last one absorbing the residual to ``m``."""
    sizes = [max(1, math.floor(b * rho**i)) for i in range(1, 2 * r + 1)]
    sizes[-1] = m - sum(sizes[:-1])
    if sizes[-1] < 1:
        raise CondError("buckets do not fit into the effective support")
    return sizes


@dataclass
class EquivalenceInstance:
    n: int
    kind: str
    k_b: int
    b: int
    m: int
    rho: float
    rho_requested: float
    r: int
    bucket_sizes: list[int]
    pair_flips: list[int]
    relabel_seed: int
    seed: int
    D1: PiecewiseDistribution = field(repr=False)
    D2: PiecewiseDistribution = field(repr=False)

    family = "equivalence"

    @property
    def params(self) -> dict:
        return {"k_b": self.k_b, "b": self.b, "m": self.m, "rho": self.rho,
                "rho_requested": self.rho_requested, "r": self.r,
                "bucket_sizes": self.bucket_sizes, "pair_flips": self.pair_flips,
                "relabel_seed": self.relabel_seed, "seed": self.seed}

    def bucket_ids(self, i: int) -> np.ndarray:
        """Domain ids of bucket ``B_i`` (``i = 1..2r``)."""
        if not 1 <= i <= 2 * self.r:
            raise CondError("bucket index out of range")
        start = sum(self.bucket_sizes[: i - 1])
        return np.sort(self.D1.ids_at(np.arange(start, start + self.bucket_sizes[i - 1])))


def _bucket_pieces(sizes: list[int], bucket_mass: list[Fraction]) -> list[tuple[int, Fraction]]:
    return [(c, w / c) for c, w in zip(sizes, bucket_mass)]


def gen_equivalence_instance(n: int, kind: str, seed: int, rho: float | None = None
                             ) -> EquivalenceInstance:
    kind = _check_kind(kind)
    req, rho_used, r = equivalence_shape(n, rho)
    rng = make_rng(seed)
    k_max = math.floor(math.log2(n) / 2)
    k_b = int(rng.integers(0, k_max + 1))
    b = 2**k_b
    m = b * _iroot4(n)
    sizes = bucket_sizes(b, rho_used, r, m)
    half = Fraction(1, 2 * r)
    relabel_seed = derive_seed(seed, 1)
    D1 = PiecewiseDistribution(n, _bucket_pieces(sizes, [half] * (2 * r)),
                               relabel_seed=relabel_seed)
    if kind == "yes":
        flips: list[int] = []
        D2 = D1
    else:
        flips = [int(v) for v in rng.integers(0, 2, size=r)]
        light, heavy = Fraction(1, 4 * r), Fraction(3, 4 * r)
        masses = []
        for f in flips:
            masses += [heavy, light] if f else [light, heavy]
        D2 = PiecewiseDistribution(n, _bucket_pieces(sizes, masses), relabel_seed=relabel_seed)
    return EquivalenceInstance(n, kind, k_b, b, m, rho_used, req, r, sizes, flips,
                               relabel_seed, seed, D1, D2)


# -- support-size family -------------------------------------------------------------------


def _beta_of(gamma: float) -> float:
    beta = gamma * gamma
    return float(round(beta)) if abs(beta - round(beta)) < 1e-9 else beta


def support_grid(n: int, beta: float) -> list[int]:
    """Support sizes ``floor(beta^k * floor(n^(1/4)))`` for ``k = 0..floor(log n / (2 log beta))``."""
    base = _iroot4(n)
    K = math.floor(math.log2(n) / (2 * math.log2(beta)) + 1e-12)
    if float(beta).is_integer():
        return [int(beta) ** k * base for k in range(K + 1)]
    return [math.floor(beta**k * base) for k in range(K + 1)]


@dataclass
class SupportPairInstance:
    n: int
    kind: str
    gamma: float
    beta: float
    grid_index: int
    s: int
    seed: int
    seed1: int
    seed2: int | None
    D1: PiecewiseDistribution = field(repr=False)
    D2: PiecewiseDistribution = field(repr=False)

    family = "support-pair"

    @property
    def params(self) -> dict:
        return {"gamma": self.gamma, "beta": self.beta, "grid_index": self.grid_index,
                "s": self.s, "seed": self.seed, "seed1": self.seed1, "seed2": self.seed2}


def gen_support_pair(n: int, gamma: float, kind: str, seed: int) -> SupportPairInstance:
    kind = _check_kind(kind)
    if gamma < math.sqrt(2) - 1e-12:
        raise CondError("gamma must be at least sqrt(2)")
    if _iroot4(n) < 2:
        raise CondError("n^(1/4) must be at least 2")
    beta = _beta_of(gamma)
    grid = support_grid(n, beta)
    rng = make_rng(seed)
    k = int(rng.integers(0, len(grid)))
    s = grid[k]
    seed1 = derive_seed(seed, 1)
    D1 = PiecewiseDistribution.uniform(n, s, relabel_seed=seed1)
    if kind == "yes":
        seed2, D2 = None, D1
    else:
        s2 = round(beta * s)
        if s2 > n:
            raise CondError("beta * s exceeds n")
        seed2 = derive_seed(seed, 2)
        D2 = PiecewiseDistribution.uniform(n, s2, relabel_seed=seed2)
    return SupportPairInstance(n, kind, gamma, beta, k, s, seed, seed1, seed2, D1, D2)


# -- JSON ---------------------------------------------------------------------------------


def instance_to_dict(inst) -> dict:
    return {"family": inst.family, "kind": inst.kind, "n": inst.n, "params": inst.params,
            "D1": inst.D1.to_dict(), "D2": inst.D2.to_dict()}


def dump_instance(inst, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst), fh, indent=2)


def instance_from_dict(d: dict):
    """Rebuild an instance; the generation parameters must reproduce the stored distributions."""
    fam, p = d["family"], d["params"]
    if fam == "equivalence":
        inst = gen_equivalence_instance(d["n"], d["kind"], p["seed"], rho=p["rho_requested"])
    elif fam == "support-pair":
        inst = gen_support_pair(d["n"], p["gamma"], d["kind"], p["seed"])
    else:
        raise CondError(f"unknown instance family {fam!r}")
    stored = (PiecewiseDistribution.from_dict(d["D1"]), PiecewiseDistribution.from_dict(d["D2"]))
    if stored != (inst.D1, inst.D2):
        raise CondError("instance file does not match its generation parameters")
    return inst


def load_instance(path):
    with open(path) as fh:
        return instance_from_dict(json.load(fh))
