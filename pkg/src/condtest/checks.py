"""Checker suites behind ``condtest check``.

Each suite returns a :class:`CheckReport`; ``passed`` is the conjunction of
its assertions and ``details`` carries the measured numbers.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from ._rng import derive_seed, make_rng
from .atoms import atoms
from .distribution import PiecewiseDistribution, light_set_size, support_size
from .hitting import HIT_BOUND, adversarial_geometric_sizes, hitting_fraction, s_c_measure
from .instances import gen_equivalence_instance, tv_distance
from .sizes import AnalysisParams, count_bad_scalings, counting_bounds, stability_window_count


@dataclass
class CheckReport:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = ", ".join(f"{k}={v}" for k, v in self.details.items()
                          if not isinstance(v, (list, dict)))
        return f"{status} {self.name}: {parts}"


def check_tv(count: int = 100, ns=(2**16, 2**20, 2**24), seed: int = 0) -> CheckReport:
    """No-instances sit at distance exactly 1/4, Yes-instances at 0."""
    failures = []
    for n in ns:
        for i in range(count):
            s = derive_seed(seed, i, stream=n.bit_length())
            no = gen_equivalence_instance(n, "no", s)
            d = tv_distance(no.D1, no.D2)
            if d != Fraction(1, 4):
                failures.append({"n": n, "seed": s, "kind": "no", "tv": str(d)})
            yes = gen_equivalence_instance(n, "yes", s)
            d = tv_distance(yes.D1, yes.D2)
            if d != 0:
                failures.append({"n": n, "seed": s, "kind": "yes", "tv": str(d)})
    return CheckReport("tv", not failures,
                       {"instances": 2 * count * len(ns), "violations": len(failures)}, failures)


def check_hitting(count: int = 50, log_n: float = 4096, log_beta: float = 1.0, q: int = 40,
                  bound: float = HIT_BOUND, target: float = 0.99, seed: int = 0,
                  sizes: Callable = adversarial_geometric_sizes) -> CheckReport:
    """Fraction of grid supports with ``sup_t C_t/t < bound`` for adversarial size vectors."""
    fractions, flagged = [], False
    for i in range(count):
        la = sizes(log_n, log_beta, q, make_rng(derive_seed(seed, i)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = hitting_fraction(la, log_n, log_beta, bound)
        flagged |= res.q_exceeds_bound
        fractions.append(res.fraction)
    failures = [{"vector": i, "fraction": f} for i, f in enumerate(fractions) if f < target]
    return CheckReport("hitting", not failures,
                       {"vectors": count, "bound": bound, "target": target,
                        "min_fraction": min(fractions), "mean_fraction": float(np.mean(fractions)),
                        "q_exceeds_bound": flagged, "violations": len(failures)}, failures)


def check_lemma_a1(count: int = 1000, q_max: int = 64, L: float = 100.0, grid: int = 10**5,
                   seed: int = 0) -> CheckReport:
    """Grid-measured ``|S_c| <= 2 c q + 2L/G`` on random point sets.

    ``c`` is drawn as a multiple of the lattice step ``L/G`` between 0.05 and 1.
    """
    failures, worst = [], -math.inf
    for i in range(count):
        rng = make_rng(derive_seed(seed, i))
        q = int(rng.integers(1, q_max + 1))
        pts = np.unique(rng.uniform(0, L, size=q))
        c = int(rng.integers(50, 1001)) * L / grid
        m = s_c_measure(pts, c, grid, L)
        slack = m.measure - 2 * c * pts.size
        worst = max(worst, slack)
        if slack > 2 * L / grid:
            failures.append({"set": i, "q": int(pts.size), "c": c, "measure": m.measure})
    return CheckReport("lemmaA1", not failures,
                       {"sets": count, "max_excess": worst, "tolerance": 2 * L / grid,
                        "violations": len(failures)}, failures)


def check_counting(count: int = 100, q: int = 3, log_n: float = 4096, seed: int = 0,
                   log_rho: float | None = None, r: int | None = None) -> CheckReport:
    """Exhaustive ``k_b`` enumeration against the small/large and stability counting bounds."""
    ap = AnalysisParams(q)
    log_rho = math.sqrt(log_n) if log_rho is None else log_rho
    r = max(2, math.floor(log_n / (8 * log_rho))) if r is None else r
    bounds = counting_bounds(ap.log_alpha, log_rho, r, ap.phi)
    rng = make_rng(seed)
    failures, max_neither, max_per_j, max_unstable = [], 0, 0, 0
    for i in range(count):
        lb = float(rng.uniform(0, log_n))
        c = count_bad_scalings(lb, ap.log_alpha, log_n, log_rho, r, ap.phi)
        max_neither = max(max_neither, c.neither)
        max_per_j = max(max_per_j, c.max_per_j)
        max_unstable = max(max_unstable, c.unstable)
        if c.neither > bounds["neither"] or c.max_per_j > bounds["per_j"]:
            failures.append({"log_beta": lb, "neither": c.neither, "per_j": c.max_per_j})
    return CheckReport("counting", not failures, {
        "sizes": count, "q": q, "log_n": log_n, "log_rho": log_rho, "r": r,
        "k_b_values": math.floor(log_n / 2) + 1,
        "max_neither": max_neither, "neither_bound": bounds["neither"],
        "max_per_j": max_per_j, "per_j_bound": bounds["per_j"],
        "per_j_window": stability_window_count(ap.log_alpha),
        "max_unstable": max_unstable, "unstable_bound": bounds["unstable"],
        "violations": len(failures)}, failures)


def naive_atoms(sets: list[set], n: int) -> set[frozenset]:
    universe = set(range(1, n + 1))
    out = set()
    for mask in range(2 ** len(sets)):
        cur = set(universe)
        for r, A in enumerate(sets):
            cur &= A if (mask >> r) & 1 else universe - A
        if cur:
            out.add(frozenset(cur))
    return out


def check_atoms(count: int = 200, seed: int = 0) -> CheckReport:
    failures = []
    for i in range(count):
        rng = make_rng(derive_seed(seed, i))
        n = int(rng.integers(1, 21))
        t = int(rng.integers(1, 6))
        sets = []
        for _ in range(t):
            size = int(rng.integers(1, n + 1))
            sets.append(set((rng.choice(n, size=size, replace=False) + 1).tolist()))
        part = atoms([sorted(A) for A in sets], n)
        if part.as_sets() != naive_atoms(sets, n) or len(part) > 2**t:
            failures.append({"case": i, "n": n, "t": t})
    return CheckReport("atoms", not failures, {"cases": count, "violations": len(failures)},
                       failures)


def dense_distribution(rng: np.random.Generator) -> tuple[PiecewiseDistribution, Fraction, Fraction]:
    """Random distribution with support at least ``(1 - eps) n`` and min mass ``tau/n``.

    Returns ``(D, eps, tau)``; ``eps`` is in ``(0, 1/2)`` and ``tau`` in ``(0, 1]``.
    """
    n = int(rng.integers(8, 4097))
    eps = Fraction(int(rng.integers(1, 50)), 100)
    tau = Fraction(int(rng.integers(1, 101)), 100)
    lo = math.ceil((1 - eps) * n)
    omega = int(rng.integers(lo, n + 1))
    # every support element gets tau/n, the rest of the mass goes to random pieces
    cuts = np.sort(rng.choice(np.arange(1, omega), size=min(int(rng.integers(0, 6)), omega - 1),
                              replace=False))
    counts = np.diff(np.concatenate([[0], cuts, [omega]])).tolist()
    weights = [int(w) for w in rng.integers(0, 10, size=len(counts))]
    if sum(weights) == 0:
        weights[0] = 1
    extra = 1 - Fraction(omega) * tau / n
    pieces = [(c, tau / n + extra * w / (sum(weights) * c)) for c, w in zip(counts, weights)]
    D = PiecewiseDistribution(n, pieces, tau=tau)
    return D, eps, tau


def check_fact54(count: int = 100, seed: int = 0) -> CheckReport:
    """``|L| >= (1/2 - eps) n`` for ``L = {x : D(x) in [tau/n, 2/n]}`` on dense distributions."""
    failures = []
    for i in range(count):
        D, eps, tau = dense_distribution(make_rng(derive_seed(seed, i)))
        assert support_size(D) >= (1 - eps) * D.n and D.satisfies_min_mass(tau)
        card, _ = light_set_size(D, tau)
        if card < (Fraction(1, 2) - eps) * D.n:
            failures.append({"case": i, "n": D.n, "card": card, "eps": str(eps)})
    return CheckReport("fact54", not failures, {"distributions": count,
                                                "violations": len(failures)}, failures)


CHECKS: dict[str, Callable[..., CheckReport]] = {
    "tv": check_tv,
    "hitting": check_hitting,
    "lemmaA1": check_lemma_a1,
    "counting": check_counting,
    "atoms": check_atoms,
    "fact54": check_fact54,
}


def run_checks(which: str, **params) -> CheckReport:
    if which not in CHECKS:
        raise KeyError(f"unknown check {which!r}; choose from {', '.join(CHECKS)}")
    return CHECKS[which](**params)
