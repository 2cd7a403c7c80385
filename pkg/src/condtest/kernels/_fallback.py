"""Vectorized numpy versions of the hot loops.

Same contract as the compiled module. The two backends consume the
generator differently, so results agree in distribution, not bit for bit,
except for :func:`sc_grid_count`, which is deterministic.
"""
from __future__ import annotations

import math

import numpy as np


def _group_hits(rng, counts, weights, p, k):
    """For ``k`` fresh Bernoulli(p) sets, whether each meets the group and which piece it lands in.

    ``weights`` of ``None`` means the pick is proportional to the hit counts alone.
    """
    G = counts.size
    hit = np.zeros(k, dtype=bool)
    piece = np.zeros(k, dtype=np.int64)
    if G == 0 or k == 0:
        return hit, piece
    if G == 1:
        lq = math.log1p(-p) if p < 1 else -math.inf
        q = -math.expm1(counts[0] * lq)
        hit = rng.random(k) < q
        return hit, piece
    H = rng.binomial(counts, p, size=(k, G)).astype(np.float64)
    W = H if weights is None else H * weights
    tot = W.sum(axis=1)
    hit = tot > 0
    rows = np.flatnonzero(hit)
    if rows.size:
        cw = np.cumsum(W[rows], axis=1)
        u = rng.random(rows.size) * tot[rows]
        piece[rows] = np.minimum((cw <= u[:, None]).sum(axis=1), G - 1)
    return hit, piece


def probe_rounds(rng, pos_starts, pos_counts, pos_masses, zero_starts, zero_counts,
                 forward, identity, p, r, r_mass, rounds, m_cmp, K):
    """Run ``rounds`` rounds of the threshold probe.

    Each round draws a fresh Bernoulli(p) set, samples ``x`` from it and
    compares ``{x}`` against the reference ``{r}`` with ``m_cmp`` draws.
    Returns ``(misses, hits, high_anomalies, r_collisions, queries)``.
    """
    rounds = int(rounds)
    x_pre = np.zeros(rounds, dtype=np.int64)
    x_mass = np.zeros(rounds)
    queries = rounds
    todo = np.arange(rounds)
    while todo.size:
        hit, piece = _group_hits(rng, pos_counts, pos_masses, p, todo.size)
        rows = todo[hit]
        if rows.size:
            pc = piece[hit]
            x_pre[rows] = pos_starts[pc] + rng.integers(0, pos_counts[pc])
            x_mass[rows] = pos_masses[pc]
        rest = todo[~hit]
        zhit, zpiece = _group_hits(rng, zero_counts, None, p, rest.size)
        rows = rest[zhit]
        if rows.size:
            zc = zpiece[zhit]
            x_pre[rows] = zero_starts[zc] + rng.integers(0, zero_counts[zc])
        # empty realized sets are redrawn, one extra query each
        todo = rest[~zhit]
        queries += todo.size
    xid = x_pre + 1 if identity else np.asarray(forward)[x_pre].astype(np.int64) + 1
    coll = xid == r
    valid = ~coll
    wx = x_mass[valid]
    tot = wx + r_mass
    with np.errstate(divide="ignore", invalid="ignore"):
        p_y = np.where(tot == 0, 0.5, r_mass / np.where(tot == 0, 1.0, tot))
    flip = (p_y > 0.5) | ((p_y == 0.5) & (xid[valid] < r))
    q = np.where(flip, 1 - p_y, p_y)
    draws = rng.binomial(m_cmp, q)
    c = np.where(flip, m_cmp - draws, draws)
    rest = m_cmp - c
    high = c > 2 * K * rest
    low = ~high & (2 * K * c < rest)
    n_coll = int(coll.sum())
    hits = int(high.sum() + low.sum())
    misses = int(valid.sum()) - hits + n_coll
    queries += m_cmp * int(valid.sum())
    return misses, hits, int(high.sum()), n_coll, int(queries)


def sc_grid_count(points, c, L, G, left, right):
    """Number of grid points ``x_g = g*L/G`` (``g < G``) whose neighbor gap statistic is below ``c``.

    ``points`` must be sorted. A grid point is counted when, for some ``j``,
    the ``j``-th point to its left (points ``<= x``) lies closer than ``c*j``
    or, likewise, the ``j``-th point to its right (points ``>= x``).
    """
    pts = np.asarray(points, dtype=np.float64)
    q = pts.size
    G = int(G)
    x = np.arange(G, dtype=np.float64) * L / G
    bad = np.zeros(G, dtype=bool)
    if q == 0:
        return 0
    il = np.searchsorted(pts, x, side="right")
    ir = np.searchsorted(pts, x, side="left")
    for j in range(1, q + 1):
        if left:
            m = il >= j
            bad[m] |= (x[m] - pts[il[m] - j]) < c * j
        if right:
            m = ir + j - 1 < q
            bad[m] |= (pts[ir[m] + j - 1] - x[m]) < c * j
    return int(bad.sum())
