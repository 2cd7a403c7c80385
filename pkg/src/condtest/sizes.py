"""Query-size predicates of the equivalence lower bound, evaluated in log domain.

Every quantity is passed as a base-2 logarithm (``log_n``, ``log_b``,
``log_rho``, ...) so nominal domains such as ``n = 2^4096`` need no big
integers. ``b = 2^k_b`` is the random scale of an equivalence instance; the
counting helpers enumerate ``k_b`` over ``0..floor(log_n / 2)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class SizeClass(enum.Enum):
    SMALL = "Small"
    LARGE = "Large"
    NEITHER = "Neither"


@dataclass(frozen=True)
class AnalysisParams:
    """``alpha = q^7``, ``phi = q^(5/2)``, ``gamma = 1/phi``, stored as base-2 logs."""

    q: int

    @property
    def log_alpha(self) -> float:
        return 7 * math.log2(self.q)

    @property
    def log_phi(self) -> float:
        return 2.5 * math.log2(self.q)

    @property
    def log_gamma(self) -> float:
        return -self.log_phi

    @property
    def alpha(self) -> float:
        return 2.0**self.log_alpha

    @property
    def phi(self) -> float:
        return 2.0**self.log_phi

    @property
    def gamma(self) -> float:
        return 2.0**self.log_gamma


def classify_size(log_beta: float, log_b: float, log_n: float, log_rho: float, r: int,
                  phi: float) -> SizeClass:
    """Small if ``beta < n/(b rho^(2r))``, Large if ``beta >= n/(b rho^(2r - 2 phi))``."""
    if log_beta < log_n - log_b - 2 * r * log_rho:
        return SizeClass.SMALL
    if log_beta >= log_n - log_b - (2 * r - 2 * phi) * log_rho:
        return SizeClass.LARGE
    return SizeClass.NEITHER


def stability_violations(log_beta: float, log_alpha: float, log_b: float, log_n: float,
                         log_rho: float, r: int) -> list[int]:
    """The ``j`` in ``1..2r`` with ``beta`` inside ``[n/(alpha b rho^j), alpha n/(b rho^j)]``."""
    out = []
    for j in range(1, 2 * r + 1):
        centre = log_n - log_b - j * log_rho
        if centre - log_alpha <= log_beta <= centre + log_alpha:
            out.append(j)
    return out


def is_alpha_stable(log_beta: float, log_alpha: float, log_b: float, log_n: float,
                    log_rho: float, r: int) -> bool:
    return not stability_violations(log_beta, log_alpha, log_b, log_n, log_rho, r)


def concentrating_buckets(log_beta: float, log_alpha: float, log_nu: float, log_n: float,
                          log_rho: float, r: int) -> int:
    """Smallest ``D`` in ``0..2r`` with ``beta nu rho^(2r - D) / n <= 1/alpha`` (``2r`` if none)."""
    for d in range(2 * r + 1):
        if log_beta + log_nu + (2 * r - d) * log_rho - log_n <= -log_alpha:
            return d
    return 2 * r


def _log2_sum(logs: Sequence[float]) -> float:
    logs = [v for v in logs if v != -math.inf]
    if not logs:
        return -math.inf
    top = max(logs)
    return top + math.log2(sum(2.0 ** (v - top) for v in logs))


def is_incomparable(log_sizes: Sequence[float], log_alpha: float, log_tau: float,
                    log_nu: float, log_n: float, log_rho: float, r: int) -> bool:
    """``(alpha, tau)``-incomparability of a size vector with respect to ``nu``.

    The vector must be ``alpha``-stable (with ``b = nu``), and the mass
    ``(1/(2rn)) sum_j beta_j D_j`` must stay outside
    ``[1/(tau 2r nu rho^i), tau/(2r nu rho^i)]`` for every ``i`` in ``1..2r``.
    """
    for lb in log_sizes:
        if not is_alpha_stable(lb, log_alpha, log_nu, log_n, log_rho, r):
            return False
    terms = []
    for lb in log_sizes:
        d = concentrating_buckets(lb, log_alpha, log_nu, log_n, log_rho, r)
        terms.append(lb + math.log2(d) if d > 0 else -math.inf)
    # the common 1/(2r) factor cancels on both sides
    lhs = _log2_sum(terms) - log_n
    for i in range(1, 2 * r + 1):
        centre = -log_nu - i * log_rho
        if centre - log_tau <= lhs <= centre + log_tau:
            return False
    return True


@dataclass(frozen=True)
class BadScalingCounts:
    """Number of ``k_b`` values, out of ``total``, violating each property."""

    total: int
    neither: int
    unstable: int
    per_j: dict

    @property
    def max_per_j(self) -> int:
        return max(self.per_j.values(), default=0)


def count_bad_scalings(log_beta: float, log_alpha: float, log_n: float, log_rho: float,
                       r: int, phi: float) -> BadScalingCounts:
    """Enumerate ``k_b = 0..floor(log_n / 2)`` and count violations exactly."""
    k_max = math.floor(log_n / 2)
    neither = unstable = 0
    per_j = {j: 0 for j in range(1, 2 * r + 1)}
    for k_b in range(k_max + 1):
        if classify_size(log_beta, k_b, log_n, log_rho, r, phi) is SizeClass.NEITHER:
            neither += 1
        bad = stability_violations(log_beta, log_alpha, k_b, log_n, log_rho, r)
        unstable += bool(bad)
        for j in bad:
            per_j[j] += 1
    return BadScalingCounts(k_max + 1, neither, unstable, per_j)


def counting_bounds(log_alpha: float, log_rho: float, r: int, phi: float) -> dict:
    """Stated upper bounds on the counts of :func:`count_bad_scalings`."""
    return {
        "neither": 2 * phi * log_rho + 2,
        "per_j": math.ceil(log_alpha + 2),  # ceil(log 4 alpha)
        "unstable": 2 * r * math.ceil(log_alpha + 2),
    }


def stability_window_count(log_alpha: float) -> int:
    """Most ``k_b`` values one ``j`` can exclude: integers in a window of width ``2 log alpha``."""
    return math.floor(2 * log_alpha) + 1


def sample_log_sizes(log_n: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Log-uniform query sizes in ``[1, n]``."""
    return rng.uniform(0.0, log_n, size=count)
