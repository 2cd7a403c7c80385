"""Support-size estimation with conditional samples.

Building blocks, from the bottom up:

* :func:`test_small_support` decides whether the support covers almost all
  of ``[n]``;
* :func:`get_non_support` finds an id of mass zero when the support is
  known to be small;
* :func:`is_at_most_support_size` decides ``sigma <= omega`` against
  ``sigma > (1 + eps) omega`` using random sets of density ``1/sigma`` and
  a zero-mass reference id;
* :func:`estimate_support` combines them into a ``(1 + eps)``-factor
  estimate of ``omega = |supp(D)|`` with ``O~(log log n / eps^3)`` queries.

:func:`estimate_support_nonadaptive` is a separate estimator whose query
sets are all fixed before the first sample is drawn. It relies on the
collision statistic of :func:`collision_uniformity_test`.

All logarithms are base 2 unless written ``ln``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from ._rng import derive_seed, make_rng
from .compare import compare, compare_cost, compare_many
from .constants import CONSTANTS
from .distribution import FULL_DOMAIN, BernoulliImplicit, Explicit, explicit
from .errors import CondError
from .oracle import CondOracle

C_PROBE = CONSTANTS.c_probe
C_U = CONSTANTS.c_u
C_NA = CONSTANTS.c_na
THETA_NA = CONSTANTS.theta_na


class Verdict(enum.Enum):
    ACCEPT = "ACCEPT"
    REJECT = "REJECT"


class ProbeVerdict(enum.Enum):
    YES = "Yes"
    NO = "No"


class Path(enum.Enum):
    DENSE_SHORTCUT = "DenseShortcut"
    BINARY_SEARCH = "BinarySearch"
    NONADAPTIVE = "NonAdaptive"


@dataclass
class SupportEstimate:
    value: float
    queries_used: int
    path: Path
    j: int | None = None
    i_star: int | None = None
    # every probe answered Yes, so the value defaulted to n
    degenerate: bool = False
    # the distribution breaks the declared min-mass promise; no guarantee applies
    contract_void: bool = False
    anomalies: dict = field(default_factory=dict)

    def is_within(self, omega: int, eps: float) -> bool:
        return omega / (1 + eps) <= self.value <= (1 + eps) * omega


def majority_reps(delta: float) -> int:
    """``ceil(12 ln(1/delta))`` rounded up to the next odd number."""
    reps = max(1, math.ceil(12 * math.log(1 / delta)))
    return reps if reps % 2 else reps + 1


def _majority(trial, reps: int):
    """Run ``trial()`` until one answer holds a strict majority of ``reps``.

    Stopping once the vote is decided returns the same answer as running all
    ``reps`` trials.
    """
    tally: dict = {}
    need = reps // 2 + 1
    for _ in range(reps):
        v = trial()
        tally[v] = tally.get(v, 0) + 1
        if tally[v] >= need:
            return v
    raise AssertionError("odd vote count cannot tie")  # pragma: no cover


def _check_eps(eps):
    if not 0 < eps < 0.5:
        raise CondError("eps must lie in (0, 1/2)")


def _check_delta(delta):
    if not 0 < delta < 1:
        raise CondError("delta must lie in (0, 1)")


# -- ordering helper ----------------------------------------------------------


def lightest(oracle: CondOracle, ids: Sequence[int], K: float, delta: float) -> int:
    """Index of the element that compares as lightest against the most others.

    Every pair of distinct ids is compared once (``eta = 1/2``). ``i`` is
    declared no heavier than ``j`` when the comparison says ``High`` or a
    ratio ``D(j)/D(i) >= 1``; equal ids are mutually no heavier. Ties in the
    resulting score go to the smallest index.
    """
    ids = [int(v) for v in ids]
    k = len(ids)
    score = np.zeros(k, dtype=np.int64)
    pairs = []
    for i in range(k):
        for j in range(i + 1, k):
            if ids[i] == ids[j]:
                score[i] += 1
                score[j] += 1
            else:
                pairs.append((i, j))
    if pairs:
        res = compare_many(oracle, [[ids[i]] for i, _ in pairs], [[ids[j]] for _, j in pairs],
                           0.5, K, delta)
        for (i, j), c in zip(pairs, res):
            if c.is_high or (c.ratio is not None and c.ratio >= 1):
                score[i] += 1
            if c.is_low or (c.ratio is not None and c.ratio <= 1):
                score[j] += 1
    return int(np.argmax(score))


# -- dense-support test ---------------------------------------------------------


def small_support_sizes(eps: float, tau) -> tuple[int, int]:
    """``(m, k)``: uniform reference points and samples from ``D`` per round."""
    return math.ceil(64 / eps**2), math.ceil(10 / float(tau))


def _small_support_round(oracle: CondOracle, eps: float, tau) -> Verdict:
    n = oracle.n
    m, k = small_support_sizes(eps, tau)
    s = oracle.tester_rng.integers(1, n + 1, size=m)
    t_samples = oracle.sample_many(FULL_DOMAIN, k)
    t = int(t_samples[lightest(oracle, t_samples, 2, 1 / (4 * k * k))])
    others = s[s != t]
    marked = m - others.size
    if others.size:
        res = compare_many(oracle, [[t]] * others.size, [[int(v)] for v in others],
                           0.5, 2 / float(tau), 1 / (4 * m))
        marked += sum(1 for c in res if c.is_high or (c.ratio is not None and c.ratio >= 0.5))
    return Verdict.ACCEPT if marked >= (1 - 3 * eps / 4) * m else Verdict.REJECT


def test_small_support(oracle: CondOracle, eps: float, tau, delta: float) -> Verdict:
    """ACCEPT when ``|supp(D)| >= (1 - eps/2) n``, REJECT when ``<= (1 - eps) n``.

    Each answer holds with probability ``1 - delta`` under the min-mass
    promise ``D(x) >= tau/n`` on the support. With ``tau >= 2`` no
    distribution can be dense, so the answer is REJECT at no cost.
    """
    _check_eps(eps)
    _check_delta(delta)
    if tau <= 0:
        raise CondError("tau must be positive")
    if tau >= 2:
        return Verdict.REJECT
    return _majority(lambda: _small_support_round(oracle, eps, tau), majority_reps(delta))


test_small_support.__test__ = False  # keep pytest from collecting it


# -- non-support reference -------------------------------------------------------


def non_support_sample_count(n: int, m: float, delta: float) -> int:
    """``k = ceil(log(2/delta) / log(n/m))``."""
    if m >= n:
        raise CondError("support bound m must be below n")
    if m <= 0:
        raise CondError("support bound m must be positive")
    return math.ceil(math.log2(2 / delta) / math.log2(n / m))


def get_non_support(oracle: CondOracle, m: float, delta: float) -> int:
    """An id that lies outside the support with probability ``1 - delta``.

    ``m`` must bound ``|supp(D)|`` from above; if it does not, the result
    carries no guarantee (this is not detected).
    """
    _check_delta(delta)
    k = non_support_sample_count(oracle.n, m, delta)
    u = oracle.tester_rng.integers(1, oracle.n + 1, size=k)
    return int(u[lightest(oracle, u, 2, delta / (2 * k * k))])


# -- threshold probe -------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeParams:
    sigma: float
    eps: float
    alpha: float
    tau: float
    rounds: int
    threshold: float

    @classmethod
    def make(cls, sigma: float, eps: float, c_probe: float | None = None) -> "ProbeParams":
        if sigma < 2:
            raise CondError("sigma must be at least 2")
        _check_eps(eps)
        c_probe = CONSTANTS.c_probe if c_probe is None else c_probe
        alpha = (1 - 1 / sigma) ** sigma
        tau = alpha * (alpha ** (-eps / 2) - 1)
        rounds = math.ceil(c_probe / tau**2)
        return cls(sigma, eps, alpha, tau, rounds, rounds * (alpha + tau / 2))


def _probe_reference(oracle: CondOracle, pp: ProbeParams, r: int) -> tuple[int, ...]:
    # the same round loop as the kernels, spelled out through the public API
    misses = hits = highs = colls = 0
    delta_c = 1 / (100 * pp.rounds)
    for _ in range(pp.rounds):
        seed = int(oracle.tester_rng.integers(0, 2**63))
        x = oracle.cond_sample(BernoulliImplicit(1 / pp.sigma, seed))
        if x == r:
            misses += 1
            colls += 1
            continue
        c = compare(oracle, [x], [r], 0.5, 1, delta_c)
        if c.ratio is not None:
            misses += 1
        else:
            hits += 1
            highs += c.is_high
    return misses, hits, highs, colls


def _probe_round_batch(oracle: CondOracle, pp: ProbeParams, r: int, backend=None):
    D = oracle.distribution
    if oracle.recording:
        before = oracle.query_count
        out = _probe_reference(oracle, pp, r)
        return out + (oracle.query_count - before,)
    impl = kernels if backend is None else kernels.backend(backend)
    lay = D.layout
    fwd = D.forward
    identity = fwd is None
    if identity:
        fwd = np.zeros(1, dtype=np.int64)
    m_cmp = compare_cost(0.5, 1, 1 / (100 * pp.rounds))
    out = impl.probe_rounds(oracle.rng, lay.pos_starts, lay.pos_counts, lay.pos_masses,
                            lay.zero_starts, lay.zero_counts, fwd, identity, 1 / pp.sigma,
                            int(r), float(D.mass(r)), pp.rounds, m_cmp, 1.0)
    oracle.query_count += out[4]
    return out


def is_at_most_support_size(oracle: CondOracle, sigma: float, r: int, eps: float,
                            delta: float, stats: dict | None = None,
                            backend: str | None = None) -> ProbeVerdict:
    """Yes when ``sigma <= omega``, No when ``sigma > (1 + eps) omega``.

    ``r`` must be an id of mass zero. A round draws ``x`` from a fresh random
    set containing each id with probability ``1/sigma`` and compares ``{x}``
    with ``{r}``; the comparison comes back as a ratio exactly when the set
    missed the support. Few misses mean ``sigma`` is small next to ``omega``.

    ``stats``, if given, accumulates round counts and anomalies (``High``
    answers, which the reference id rules out, and draws of ``r`` itself).
    """
    _check_delta(delta)
    pp = ProbeParams.make(sigma, eps)

    def one():
        misses, hits, highs, colls, _ = _probe_round_batch(oracle, pp, r, backend)
        if stats is not None:
            for key, v in (("rounds", pp.rounds), ("misses", misses), ("high_anomalies", highs),
                           ("r_collisions", colls)):
                stats[key] = stats.get(key, 0) + v
        return ProbeVerdict.YES if misses < pp.threshold else ProbeVerdict.NO

    return _majority(one, majority_reps(delta))


# -- the adaptive estimator -------------------------------------------------------------


def probe_schedule(n: int, eps: float) -> list[float]:
    """Probe values ``(1+eps)^((1+eps)^j)`` clamped to ``[2, n]``."""
    J = math.ceil(math.log(math.log(n, 1 + eps), 1 + eps))
    return [min(max((1 + eps) ** ((1 + eps) ** j), 2.0), float(n)) for j in range(J + 1)]


def estimate_support(oracle: CondOracle, eps: float, tau, stats: dict | None = None,
                     backend: str | None = None) -> SupportEstimate:
    """``(1 + eps)``-factor estimate of ``|supp(D)|`` with probability 2/3.

    Requires every support element to have mass at least ``tau/n``. When the
    bound distribution breaks that promise the result is still computed but
    flagged ``contract_void``.
    """
    _check_eps(eps)
    tau = Fraction(tau) if not isinstance(tau, float) else tau
    D = oracle.distribution
    n = oracle.n
    start = oracle.query_count
    stats = {} if stats is None else stats
    void = not D.satisfies_min_mass(Fraction(tau))

    def done(value, path, **kw):
        return SupportEstimate(float(value), oracle.query_count - start, path,
                               contract_void=void, anomalies=dict(stats), **kw)

    if test_small_support(oracle, eps, tau, 0.1) is Verdict.ACCEPT:
        return done((1 - eps**2) * n, Path.DENSE_SHORTCUT)
    r = get_non_support(oracle, (1 - eps / 2) * n, 0.1)

    def probe(sigma, delta):
        sigma = min(max(sigma, 2.0), float(n))
        return is_at_most_support_size(oracle, sigma, r, eps, delta, stats, backend)

    for j, sigma in enumerate(probe_schedule(n, eps)):
        if probe(sigma, 1 / (100 * (j + 1) ** 2)) is ProbeVerdict.YES:
            continue
        lo = max(2, math.ceil((1 + eps) ** (j - 1)))
        hi = max(lo, math.ceil((1 + eps) ** j))
        # smallest exponent answering No; hi itself is taken as No
        while lo < hi:
            mid = (lo + hi) // 2
            if probe((1 + eps) ** mid, 1 / (10 * (j + 1))) is ProbeVerdict.NO:
                hi = mid
            else:
                lo = mid + 1
        return done((1 + eps) ** (lo - 1), Path.BINARY_SEARCH, j=j, i_star=lo)
    return done(n, Path.BINARY_SEARCH, degenerate=True)


# -- uniformity substitute and the non-adaptive estimator -------------------------------


def collision_sample_size(size: int, eps: float, delta: float, c_u: float | None = None) -> int:
    c_u = CONSTANTS.c_u if c_u is None else c_u
    return math.ceil(c_u * math.sqrt(size) / eps**2 * math.log2(1 / delta))


def collision_uniformity_test(oracle: CondOracle, S: Explicit, eps: float, delta: float,
                              c_u: float | None = None) -> Verdict:
    """Collision-rate test of ``D_S`` against the uniform distribution on ``S``."""
    if not isinstance(S, Explicit):
        S = explicit(S)
    if len(S) < 2:
        raise CondError("uniformity test needs at least two ids")
    if eps <= 0:
        raise CondError("eps must be positive")
    _check_delta(delta)
    s = collision_sample_size(len(S), eps, delta, c_u)
    counts = oracle.sample_counts(S, s).astype(np.float64)
    rate = float((counts * (counts - 1)).sum()) / (s * (s - 1))
    return Verdict.ACCEPT if rate <= (1 + eps**2) / len(S) else Verdict.REJECT


@dataclass(frozen=True)
class PlanEntry:
    k: int
    round: int
    seed: int


@dataclass(frozen=True)
class NonAdaptivePlan:
    """Every query set of one non-adaptive run, fixed from ``(n, seed)`` alone."""

    n: int
    seed: int
    m_rep: int
    entries: tuple[PlanEntry, ...]

    @classmethod
    def build(cls, n: int, seed: int, c_na: float | None = None,
              m_rep: int | None = None) -> "NonAdaptivePlan":
        if n < 2:
            raise CondError("n must be at least 2")
        if m_rep is None:
            c_na = CONSTANTS.c_na if c_na is None else c_na
            m_rep = max(1, math.ceil(c_na * math.log2(max(math.log2(n), 1.0))))
        entries = []
        for k in probe_sizes(n):
            for t in range(m_rep):
                entries.append(PlanEntry(k, t, derive_seed(seed, len(entries), stream=7)))
        return cls(n, seed, m_rep, tuple(entries))

    @property
    def sizes(self) -> list[int]:
        return sorted({e.k for e in self.entries})

    def materialize(self, entry: PlanEntry) -> Explicit:
        ids = make_rng(entry.seed).choice(self.n, size=entry.k, replace=False) + 1
        return explicit(ids)

    def sets(self) -> list[Explicit]:
        return [self.materialize(e) for e in self.entries]


def probe_sizes(n: int) -> list[int]:
    """``2, 4, 8, ...`` up to ``n`` (``n`` itself is appended when not a power of two)."""
    ks, k = [], 2
    while k <= n:
        ks.append(k)
        k *= 2
    if ks[-1] != n:
        ks.append(n)
    return ks


def _reject_counts(oracle: CondOracle, plan: NonAdaptivePlan, sets, eps_u, delta_u, c_u):
    out: dict[int, int] = {}
    for e, S in zip(plan.entries, sets):
        v = collision_uniformity_test(oracle, S, eps_u, delta_u, c_u)
        out[e.k] = out.get(e.k, 0) + (v is Verdict.REJECT)
    return out


def estimate_support_nonadaptive(oracle: CondOracle, theta: float | None = None,
                                 m_rep: int | None = None, seed: int | None = None,
                                 eps_u: float = 0.5, delta_u: float = 0.1, c_u: float | None = None,
                                 c_na: float | None = None) -> SupportEstimate:
    """Support estimate for distributions uniform on their support.

    For each ``k`` in ``2, 4, ..., n``, ``m_rep`` random ``k``-subsets are
    tested for uniformity of the conditional distribution. A set that meets
    only part of the support looks far from uniform, so the first ``k`` at
    which more than ``theta * m_rep`` sets are rejected gives ``n/k``.

    Every set is materialized before the first sample is drawn.
    """
    n = oracle.n
    seed = oracle.seed if seed is None else seed
    theta = CONSTANTS.theta_na if theta is None else theta
    plan = NonAdaptivePlan.build(n, seed, c_na, m_rep)
    sets = plan.sets()
    start = oracle.query_count
    rejects = _reject_counts(oracle, plan, sets, eps_u, delta_u, c_u)
    value, hit = float(n), None
    for k in plan.sizes:
        if rejects[k] > theta * plan.m_rep:
            value, hit = n / k, k
            break
    return SupportEstimate(value, oracle.query_count - start, Path.NONADAPTIVE,
                           i_star=hit, degenerate=hit is None,
                           anomalies={"rejects": rejects, "m_rep": plan.m_rep, "theta": theta})


def nonadaptive_reject_profile(oracle: CondOracle, seed: int, c_na: float | None = None,
                               eps_u: float = 0.5, delta_u: float = 0.1,
                               c_u: float | None = None) -> dict[int, float]:
    """Per-``k`` reject fraction of one non-adaptive run."""
    plan = NonAdaptivePlan.build(oracle.n, seed, c_na)
    rej = _reject_counts(oracle, plan, plan.sets(), eps_u, delta_u, c_u)
    return {k: rej[k] / plan.m_rep for k in plan.sizes}


def calibrate_nonadaptive_threshold(n: int, seed: int, supports: Iterable[int] | None = None,
                                    trials: int = 10, c_na: float | None = None) -> dict:
    """Pilot run choosing the reject-fraction threshold of the non-adaptive estimator.

    On uniform distributions of support ``w`` it records the mean reject
    fraction at ``k = n/w`` (the level that should trip) and the largest
    fraction on the full-support distribution (which should never trip).
    The threshold is the midpoint of the smallest target level and the
    largest null level.
    """
    from .distribution import PiecewiseDistribution

    if supports is None:
        supports = [n // 4, n // 16, n // 64]
    target, null = {}, 0.0
    for t in range(trials):
        s = derive_seed(seed, t, stream=11)
        full = CondOracle(PiecewiseDistribution.uniform(n), seed=s)
        null = max(null, max(nonadaptive_reject_profile(full, derive_seed(s, 1), c_na).values()))
        for w in supports:
            D = PiecewiseDistribution.uniform(n, w, relabel_seed=derive_seed(s, w))
            prof = nonadaptive_reject_profile(CondOracle(D, seed=derive_seed(s, w + 1)),
                                              derive_seed(s, w + 2), c_na)
            target.setdefault(w, []).append(prof[n // w])
    levels = {w: float(np.mean(v)) for w, v in target.items()}
    theta = (min(levels.values()) + null) / 2
    return {"theta": theta, "target_levels": levels, "null_max": null, "trials": trials}
