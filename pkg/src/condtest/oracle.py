"""The COND oracle: conditional samples from a hidden distribution.

A :class:`CondOracle` binds one immutable :class:`PiecewiseDistribution` and
a seeded PCG64 stream. Every returned sample counts as one query. When the
query set has zero mass the oracle answers with a uniform element of the set.

Besides single draws the oracle offers batched primitives that return only
the statistic a caller consumes (a multinomial count vector, or the number
of draws landing in one half of a two-part set). They are exact in
distribution and charge one query per underlying draw. With ``record=True``
every draw is materialized and logged instead, which is slower but yields a
full transcript.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._rng import RNG_ALGORITHM, derive_seed, make_rng
from .distribution import (BernoulliImplicit, Explicit, FullDomain, PiecewiseDistribution,
                           QuerySet, mass_of)
from .errors import ConsumedQuerySet, CondError, UnsupportedQuerySet

_HALF = Fraction(1, 2)


@dataclass
class Transcript:
    """Ordered ``(oracle label, query-set descriptor, sampled id)`` entries."""

    entries: list[tuple[str, str, int]] = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    @classmethod
    def merge(cls, *oracles: "CondOracle") -> "Transcript":
        out = cls()
        for o in oracles:
            if o.sample_log is None:
                raise CondError("oracle was created without record=True")
            out.entries.extend((o.label, desc, x) for desc, x in o.sample_log)
        return out

    def samples(self, label: str | None = None) -> list[int]:
        return [x for lab, _, x in self.entries if label is None or lab == label]


class CondOracle:
    """Seeded conditional-sampling handle with query accounting.

    Not thread-safe: run independent oracles (with derived seeds) in parallel
    instead of sharing one.
    """

    rng_algorithm = RNG_ALGORITHM

    def __init__(self, distribution: PiecewiseDistribution, seed: int | None = None,
                 record: bool = False, label: str = "D"):
        if seed is None:
            seed = int(np.random.SeedSequence().generate_state(1, np.uint64)[0])
        self.distribution = distribution
        self.seed = int(seed)
        self.label = label
        self.rng = make_rng(self.seed)
        # algorithms draw their own coins (uniform points, implicit-set seeds) here
        self.tester_rng = make_rng(derive_seed(self.seed, 0, stream=1))
        self.query_count = 0
        self.sample_log: list[tuple[str, int]] | None = [] if record else None

    @property
    def n(self) -> int:
        return self.distribution.n

    @property
    def recording(self) -> bool:
        return self.sample_log is not None

    def transcript(self) -> Transcript:
        return Transcript.merge(self)

    def _log(self, S: QuerySet, xs) -> None:
        if self.sample_log is not None:
            desc = S.descriptor()
            self.sample_log.extend((desc, int(x)) for x in np.atleast_1d(xs))

    # -- single and batched draws --------------------------------------------

    def cond_sample(self, S: QuerySet) -> int:
        """One sample from ``D_S`` (uniform on ``S`` when ``D(S) = 0``)."""
        if isinstance(S, BernoulliImplicit):
            return self._sample_implicit(S)
        return int(self.sample_many(S, 1)[0])

    def sample_many(self, S: QuerySet, m: int) -> np.ndarray:
        """``m`` independent samples from ``D_S``."""
        if isinstance(S, BernoulliImplicit):
            raise UnsupportedQuerySet("implicit query sets are single-use; call cond_sample")
        m = int(m)
        D = self.distribution
        if isinstance(S, FullDomain):
            lay = D.layout
            w = lay.pos_counts * lay.pos_masses
            piece = self.rng.choice(w.size, size=m, p=w / w.sum())
            offs = self.rng.integers(0, lay.pos_counts[piece])
            out = D.ids_at(lay.pos_starts[piece] + offs)
        elif isinstance(S, Explicit):
            if S.ids[-1] > D.n:
                raise CondError("query set leaves the domain")
            w = D.float_masses(S.ids)
            if mass_of(D, S) == 0:
                out = S.ids[self.rng.integers(0, S.ids.size, size=m)]
            else:
                out = self.rng.choice(S.ids, size=m, p=w / w.sum())
        else:
            raise UnsupportedQuerySet(f"unknown query set {S!r}")
        self.query_count += m
        self._log(S, out)
        return np.asarray(out, dtype=np.int64)

    def sample_counts(self, S: Explicit, m: int) -> np.ndarray:
        """Occurrence counts of each id of ``S`` over ``m`` draws from ``D_S``."""
        if not isinstance(S, Explicit):
            raise UnsupportedQuerySet("sample_counts needs an explicit set")
        if self.recording:
            xs = self.sample_many(S, m)
            return np.bincount(np.searchsorted(S.ids, xs), minlength=S.ids.size)
        if mass_of(self.distribution, S) == 0:
            pv = np.full(S.ids.size, 1.0 / S.ids.size)
        else:
            w = self.distribution.float_masses(S.ids)
            pv = w / w.sum()
        self.query_count += int(m)
        return self.rng.multinomial(int(m), pv)

    def split_counts(self, xs: Sequence[Explicit], ys: Sequence[Explicit], m: int) -> np.ndarray:
        """For each pair, the number of ``m`` draws from ``D_{X u Y}`` landing in ``Y``.

        The draw is oriented so that swapping ``X`` and ``Y`` under the same
        generator state yields exactly ``m - count``.
        """
        if len(xs) != len(ys):
            raise CondError("xs and ys differ in length")
        m = int(m)
        if not xs:
            return np.zeros(0, dtype=np.int64)
        if self.recording:
            out = []
            for X, Y in zip(xs, ys):
                union = Explicit(np.union1d(X.ids, Y.ids))
                got = self.sample_many(union, m)
                out.append(int(np.isin(got, Y.ids).sum()))
            return np.array(out, dtype=np.int64)
        if all(X.ids.size == 1 and Y.ids.size == 1 for X, Y in zip(xs, ys)):
            return self._split_singletons(np.array([X.ids[0] for X in xs]),
                                          np.array([Y.ids[0] for Y in ys]), m)
        return self._split_general(xs, ys, m)

    def _split_general(self, xs, ys, m: int) -> np.ndarray:
        q = np.empty(len(xs))
        flip = np.empty(len(xs), dtype=bool)
        for k, (X, Y) in enumerate(zip(xs, ys)):
            wx, wy = self._set_mass(X), self._set_mass(Y)
            if wx + wy == 0:
                wx, wy = Fraction(len(X)), Fraction(len(Y))
            p = wy / (wx + wy)
            flip[k] = p > _HALF or (p == _HALF and X.ids[0] < Y.ids[0])
            q[k] = float(1 - p if flip[k] else p)
        draws = self.rng.binomial(m, q)
        self.query_count += m * len(xs)
        return np.where(flip, m - draws, draws).astype(np.int64)

    def _split_singletons(self, x: np.ndarray, y: np.ndarray, m: int) -> np.ndarray:
        # vectorized split_counts for pairs of single ids; ties are decided on
        # exact masses so the orientation rule matches the general path
        D = self.distribution
        if max(x.max(), y.max()) > D.n:
            raise CondError("query set leaves the domain")
        table = [mass for _, mass in D.pieces] + [Fraction(0)]
        rank = {v: i for i, v in enumerate(sorted(set(table)))}
        ranks = np.array([rank[v] for v in table])
        fl = np.array([float(v) for v in table])
        px, py = D.piece_index(x), D.piece_index(y)
        wx, wy = fl[px], fl[py]
        tot = wx + wy
        both_zero = tot == 0
        p = np.where(both_zero, 0.5, wy / np.where(both_zero, 1.0, tot))
        tie = ranks[px] == ranks[py]
        p = np.where(tie, 0.5, p)
        flip = (p > 0.5) | (tie & (x < y))
        draws = self.rng.binomial(m, np.where(flip, 1 - p, p))
        self.query_count += m * x.size
        return np.where(flip, m - draws, draws).astype(np.int64)

    def _set_mass(self, S: Explicit) -> Fraction:
        if S.ids.size == 1:
            return self.distribution.mass(int(S.ids[0]))
        return mass_of(self.distribution, S)

    # -- implicit Bernoulli sets ---------------------------------------------

    def _sample_implicit(self, S: BernoulliImplicit) -> int:
        if S.consumed:
            raise ConsumedQuerySet("implicit query set already used")
        S.consumed = True
        D = self.distribution
        lay = D.layout
        attempt = 0
        set_rng = make_rng(S.seed)
        while True:
            self.query_count += 1
            h_pos = set_rng.binomial(lay.pos_counts, S.p)
            h_zero = set_rng.binomial(lay.zero_counts, S.p)
            w = h_pos * lay.pos_masses
            if w.sum() > 0:
                j = self.rng.choice(w.size, p=w / w.sum())
                start, count = lay.pos_starts[j], lay.pos_counts[j]
                break
            if h_zero.sum() > 0:
                j = self.rng.choice(h_zero.size, p=h_zero / h_zero.sum())
                start, count = lay.zero_starts[j], lay.zero_counts[j]
                break
            # realized set is empty: redraw with a derived sub-seed
            attempt += 1
            set_rng = make_rng(derive_seed(S.seed, attempt))
        x = int(D.ids_at([start + self.rng.integers(0, count)])[0])
        self._log(S, x)
        return x


def cond_sample(oracle: CondOracle, S: QuerySet) -> int:
    return oracle.cond_sample(S)
