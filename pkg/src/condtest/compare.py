"""Mass-ratio comparison of two disjoint sets through conditional samples.

``compare(oracle, X, Y, eta, K, delta)`` draws ``m`` samples from ``D_{X u Y}``,
lets ``p`` be the fraction landing in ``Y`` and forms ``rho = p / (1 - p)``.
It answers ``High`` when ``rho > 2K``, ``Low`` when ``rho < 1/(2K)`` and
``Ratio(rho)`` otherwise. With probability at least ``1 - delta``:

* if ``D(Y)/K <= D(X) <= K D(Y)`` the answer is a ``Ratio`` within a factor
  ``1 +- eta`` of ``D(Y)/D(X)``;
* if ``D(Y) > K D(X)`` it is ``High`` or such a ``Ratio``;
* if ``D(Y) < D(X)/K`` it is ``Low`` or such a ``Ratio``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distribution import Explicit, explicit
from .errors import CondError
from .constants import CONSTANTS
from .oracle import CondOracle

C_CMP = CONSTANTS.c_cmp


class Outcome(enum.Enum):
    LOW = "Low"
    HIGH = "High"
    RATIO = "Ratio"


@dataclass(frozen=True)
class CompareResult:
    outcome: Outcome
    # raw estimate p/(1-p); inf when every draw fell in Y
    estimate: float

    @property
    def is_low(self) -> bool:
        return self.outcome is Outcome.LOW

    @property
    def is_high(self) -> bool:
        return self.outcome is Outcome.HIGH

    @property
    def ratio(self) -> float | None:
        return self.estimate if self.outcome is Outcome.RATIO else None

    def __str__(self):
        if self.outcome is Outcome.RATIO:
            return f"Ratio({self.estimate:.4g})"
        return self.outcome.value


def compare_cost(eta: float, K: float, delta: float, c_cmp: float | None = None) -> int:
    """Number of oracle draws one call makes."""
    _check_params(eta, K, delta)
    c_cmp = CONSTANTS.c_cmp if c_cmp is None else c_cmp
    return math.ceil(c_cmp * (K + 1) * math.log2(2 / delta) / eta**2)


def classify(count: int, m: int, K: float) -> CompareResult:
    """Map ``count`` draws-in-Y out of ``m`` to a :class:`CompareResult`."""
    rest = m - count
    est = math.inf if rest == 0 else count / rest
    if count > 2 * K * rest:
        return CompareResult(Outcome.HIGH, est)
    if 2 * K * count < rest:
        return CompareResult(Outcome.LOW, est)
    return CompareResult(Outcome.RATIO, est)


def _check_params(eta, K, delta):
    if not 0 < eta <= 1:
        raise CondError("eta must lie in (0, 1]")
    if K < 1:
        raise CondError("K must be at least 1")
    if not 0 < delta <= 0.5:
        raise CondError("delta must lie in (0, 1/2]")


def _as_set(S) -> Explicit:
    return S if isinstance(S, Explicit) else explicit(S)


def compare_many(oracle: CondOracle, xs: Sequence, ys: Sequence, eta: float, K: float,
                 delta: float, c_cmp: float | None = None) -> list[CompareResult]:
    """Independent :func:`compare` calls on the pairs ``(xs[i], ys[i])``.

    Equivalent to calling :func:`compare` in order; the batch only saves
    interpreter overhead.
    """
    m = compare_cost(eta, K, delta, c_cmp)
    xs = [_as_set(X) for X in xs]
    ys = [_as_set(Y) for Y in ys]
    for X, Y in zip(xs, ys):
        if X.ids.size == 1 and Y.ids.size == 1:
            overlap = X.ids[0] == Y.ids[0]
        else:
            overlap = np.intersect1d(X.ids, Y.ids).size > 0
        if overlap:
            raise CondError("compare needs disjoint sets")
    counts = oracle.split_counts(xs, ys, m)
    return [classify(int(c), m, K) for c in counts]


def compare(oracle: CondOracle, X, Y, eta: float, K: float, delta: float,
            c_cmp: float | None = None) -> CompareResult:
    """Estimate ``D(Y)/D(X)``; see the module docstring for the guarantee."""
    return compare_many(oracle, [X], [Y], eta, K, delta, c_cmp)[0]
