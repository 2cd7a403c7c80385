"""Log-domain checkers for the support-size lower bound.

``hitting_fraction`` evaluates, for every support size ``s`` of the grid
``beta^k n^(1/4)``, how densely a fixed list of query sizes ``a_i`` lands
near the critical scale ``n/s``: ``C_t(s)`` counts the ``i`` with
``a_i s / n`` in ``(beta^-t, beta^t)``.

``s_c_measure`` measures the set ``S_c`` of points of ``[0, L]`` whose
``j``-th neighbour on some side is closer than ``c j``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels

HIT_BOUND = 2 / 100


@dataclass(frozen=True)
class HitProfile:
    log_sizes: tuple
    log_n: float
    log_beta: float
    log_s: float
    breakpoints: np.ndarray

    @classmethod
    def build(cls, log_sizes: Sequence[float], log_n: float, log_beta: float,
              log_s: float) -> "HitProfile":
        la = np.asarray(log_sizes, dtype=np.float64)
        d = np.sort(np.abs(la + log_s - log_n) / log_beta)
        return cls(tuple(la.tolist()), log_n, log_beta, log_s, d)

    @property
    def sup_ratio(self) -> float:
        """``sup_t C_t / t``, attained just above a breakpoint."""
        return sup_ratio(self.breakpoints)

    def hits(self, t: float) -> int:
        return int(np.sum(self.breakpoints < t))


def sup_ratio(breakpoints: np.ndarray) -> float:
    d = np.asarray(breakpoints, dtype=np.float64)
    if d.size == 0:
        return 0.0
    if d[0] == 0:
        return math.inf
    return float(np.max(np.arange(1, d.size + 1) / d))


def grid_log_supports(log_n: float, log_beta: float) -> np.ndarray:
    K = math.floor(log_n / (2 * log_beta) + 1e-12)
    return log_n / 4 + log_beta * np.arange(K + 1)


def query_bound(log_n: float, log_beta: float) -> float:
    return log_n / (100 * log_beta)


@dataclass(frozen=True)
class HittingResult:
    fraction: float
    good: int
    grid_size: int
    worst_ratio: float
    # more query sizes than the guarantee allows
    q_exceeds_bound: bool
    bound: float


def hitting_fraction(log_sizes: Sequence[float], log_n: float, log_beta: float,
                     bound: float = HIT_BOUND) -> HittingResult:
    """Fraction of grid supports ``s`` with ``sup_t C_t(s)/t < bound``."""
    la = np.asarray(log_sizes, dtype=np.float64)
    over = la.size > query_bound(log_n, log_beta)
    if over:
        warnings.warn("more query sizes than log n / (100 log beta); the bound is only reported",
                      RuntimeWarning, stacklevel=2)
    ls = grid_log_supports(log_n, log_beta)
    if la.size == 0:
        return HittingResult(1.0, ls.size, ls.size, 0.0, over, bound)
    d = np.sort(np.abs(la[None, :] + ls[:, None] - log_n) / log_beta, axis=1)
    idx = np.arange(1, la.size + 1)
    with np.errstate(divide="ignore"):
        ratios = np.where(d == 0, np.inf, idx / np.where(d == 0, 1.0, d)).max(axis=1)
    good = int(np.sum(ratios < bound))
    return HittingResult(good / ls.size, good, int(ls.size), float(ratios.max()), over, bound)


def adversarial_geometric_sizes(log_n: float, log_beta: float, q: int,
                                rng: np.random.Generator) -> np.ndarray:
    """``q`` geometrically spaced sizes spread over the critical window ``[n^(1/4), n^(3/4)]``.

    The step is the window width over ``q``, which maximizes how many grid
    supports end up near some size; the start is a random offset inside one
    step.
    """
    step = (log_n / 2) / q
    return log_n / 4 + rng.uniform(0, step) + step * np.arange(q)


def aligned_geometric_sizes(log_n: float, log_beta: float, q: int,
                            rng: np.random.Generator) -> np.ndarray:
    """Like :func:`adversarial_geometric_sizes` but every size sits exactly on a critical scale."""
    K = grid_log_supports(log_n, log_beta).size
    step = max(1, (K - 1) // q)
    first = int(rng.integers(0, max(1, K - step * (q - 1))))
    ks = first + step * np.arange(q)
    return 3 * log_n / 4 - log_beta * ks


# -- neighbour-gap sets ----------------------------------------------------------------------


@dataclass(frozen=True)
class SCMeasure:
    measure: float
    grid_error: float
    grid_points: int


def s_c_measure(points: Sequence[float], c: float, grid_resolution: int, L: float,
                left: bool = True, right: bool = True) -> SCMeasure:
    """Grid measure of ``S_c`` on ``[0, L]`` over the lattice ``g L / G``, ``g < G``.

    ``left``/``right`` select which neighbour distances count. Each maximal
    interval of the set can gain or lose one lattice point, so the reported
    error is ``L/G`` times the number of such intervals (at least two).
    When ``c`` is a multiple of ``L/G`` the lattice count of the set never
    exceeds the exact left measure plus the exact right measure, which is
    all the ``2cq`` bound needs.
    """
    pts = np.sort(np.asarray(points, dtype=np.float64))
    if pts.size > 1 and np.any(np.diff(pts) == 0):
        raise ValueError("points must be distinct")
    G = int(grid_resolution)
    if G < 1:
        raise ValueError("grid resolution must be positive")
    count = kernels.sc_grid_count(pts, float(c), float(L), G, bool(left), bool(right))
    h = L / G
    pieces = len(_sc_intervals(pts, c, L, left, right))
    return SCMeasure(count * h, h * max(2, pieces), int(count))


def _left_intervals(pts: np.ndarray, c: float) -> list[tuple[float, float]]:
    # frontier after the m-th point is max_j (a_{m-j+1} + j c)
    out, frontier = [], -math.inf
    for a in pts:
        frontier = max(frontier, a) + c
        if out and a < out[-1][1]:
            out[-1] = (out[-1][0], frontier)
        else:
            out.append((a, frontier))
    return out


def _sc_intervals(pts, c, L, left, right) -> list[tuple[float, float]]:
    pts = np.sort(np.asarray(pts, dtype=np.float64))
    if pts.size == 0:
        return []
    iv = []
    if left:
        iv += _left_intervals(pts, c)
    if right:
        iv += [(L - hi, L - lo) for lo, hi in _left_intervals(np.sort(L - pts), c)]
    merged: list[tuple[float, float]] = []
    for lo, hi in sorted((max(lo, 0.0), min(hi, L)) for lo, hi in iv):
        if hi <= lo:
            continue
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def s_c_exact(points: Sequence[float], c: float, L: float, left: bool = True,
              right: bool = True) -> float:
    """Exact measure of ``S_c`` on ``[0, L]`` by interval merging."""
    return float(sum(hi - lo for lo, hi in _sc_intervals(points, c, L, left, right)))
