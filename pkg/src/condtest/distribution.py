"""Exact piecewise-uniform distributions over ``[n]`` and query sets.

A :class:`PiecewiseDistribution` lays out consecutive *pieces* of equal
per-element mass over pre-relabel positions ``0 .. n-1``; positions past the
last piece carry mass 0. A relabel bijection maps position ``i`` to domain id
``forward[i] + 1``. Masses are :class:`fractions.Fraction` throughout and are
only converted to floating point where samples are drawn.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ._rng import make_rng
from .errors import CondError, EmptyQuerySet, UnsupportedQuerySet


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("masses must be exact (int or Fraction), got float")
    return Fraction(x)


@dataclass(frozen=True)
class Layout:
    """Flat arrays describing the piece structure, used by the sampling kernels."""

    pos_starts: np.ndarray
    pos_counts: np.ndarray
    pos_masses: np.ndarray
    zero_starts: np.ndarray
    zero_counts: np.ndarray


class PiecewiseDistribution:
    """Bucketed distribution with exact rational masses.

    Parameters
    ----------
    n : int
        Domain size; ids are ``1..n``.
    pieces : sequence of (count, mass)
        ``count`` consecutive positions each carrying ``mass``.
    relabel_seed : int, optional
        Seed of the PCG64 permutation used as relabel bijection. ``None``
        (and no explicit ``relabel``) means the identity.
    tau : Fraction
        Declared minimum-mass fraction: support elements have mass >= tau/n.
    relabel : array, optional
        Explicit bijection ``position -> id - 1``; overrides ``relabel_seed``.
    """

    def __init__(
        self,
        n: int,
        pieces: Iterable[tuple[int, Fraction | int]],
        relabel_seed: int | None = None,
        tau: Fraction | int = 0,
        relabel: np.ndarray | None = None,
    ):
        if n < 1:
            raise CondError("n must be positive")
        self.n = int(n)
        norm = []
        for count, mass in pieces:
            count = int(count)
            mass = _as_fraction(mass)
            if count < 1:
                raise CondError("piece counts must be positive")
            if mass < 0:
                raise CondError("piece masses must be nonnegative")
            norm.append((count, mass))
        self.pieces: tuple[tuple[int, Fraction], ...] = tuple(norm)
        if sum(c for c, _ in self.pieces) > self.n:
            raise CondError("pieces cover more than n positions")
        total = sum(c * m for c, m in self.pieces)
        if total != 1:
            raise CondError(f"masses sum to {total}, not 1")
        self.tau = _as_fraction(tau)
        if self.tau < 0:
            raise CondError("tau must be nonnegative")
        self.relabel_seed = relabel_seed
        self._explicit = None
        if relabel is not None:
            relabel = np.asarray(relabel)
            if relabel.shape != (self.n,):
                raise CondError("relabel must have length n")
            check = np.zeros(self.n, dtype=bool)
            if relabel.min() < 0 or relabel.max() >= self.n:
                raise CondError("relabel is not a bijection on [n]")
            check[relabel] = True
            if not check.all():
                raise CondError("relabel is not a bijection on [n]")
            self._explicit = relabel.astype(self._index_dtype)
            self.relabel_seed = None

    # -- construction helpers ------------------------------------------------

    @classmethod
    def uniform(cls, n: int, support: int | None = None, relabel_seed: int | None = None):
        """Uniform on ``support`` positions (all of ``[n]`` by default)."""
        support = n if support is None else int(support)
        if not 1 <= support <= n:
            raise CondError("support must lie in [1, n]")
        return cls(n, [(support, Fraction(1, support))], relabel_seed=relabel_seed,
                   tau=Fraction(n, support))

    # -- structure -----------------------------------------------------------

    @property
    def _index_dtype(self):
        return np.int32 if self.n < 2**31 else np.int64

    @cached_property
    def starts(self) -> np.ndarray:
        counts = np.array([c for c, _ in self.pieces], dtype=np.int64)
        return np.concatenate([[0], np.cumsum(counts)])

    @property
    def covered(self) -> int:
        return int(self.starts[-1])

    @cached_property
    def layout(self) -> Layout:
        pos = [(int(s), c, m) for s, (c, m) in zip(self.starts, self.pieces) if m > 0]
        zero = [(int(s), c) for s, (c, m) in zip(self.starts, self.pieces) if m == 0]
        if self.covered < self.n:
            zero.append((self.covered, self.n - self.covered))
        return Layout(
            pos_starts=np.array([p[0] for p in pos], dtype=np.int64),
            pos_counts=np.array([p[1] for p in pos], dtype=np.int64),
            pos_masses=np.array([float(p[2]) for p in pos], dtype=np.float64),
            zero_starts=np.array([z[0] for z in zero], dtype=np.int64),
            zero_counts=np.array([z[1] for z in zero], dtype=np.int64),
        )

    @property
    def is_identity(self) -> bool:
        return self._explicit is None and self.relabel_seed is None

    @cached_property
    def forward(self) -> np.ndarray | None:
        """Position -> (id - 1), or ``None`` for the identity."""
        if self._explicit is not None:
            return self._explicit
        if self.relabel_seed is None:
            return None
        return make_rng(self.relabel_seed).permutation(self.n).astype(self._index_dtype)

    @cached_property
    def inverse(self) -> np.ndarray | None:
        fwd = self.forward
        if fwd is None:
            return None
        inv = np.empty(self.n, dtype=self._index_dtype)
        inv[fwd] = np.arange(self.n, dtype=self._index_dtype)
        return inv

    def same_relabel(self, other: "PiecewiseDistribution") -> bool:
        if self.n != other.n:
            return False
        if self._explicit is None and other._explicit is None:
            return self.relabel_seed == other.relabel_seed
        a, b = self.forward, other.forward
        if a is None or b is None:
            a = np.arange(self.n) if a is None else a
            b = np.arange(self.n) if b is None else b
        return bool(np.array_equal(a, b))

    def positions(self, ids) -> np.ndarray:
        """Pre-relabel positions of 1-based ``ids``."""
        ids = np.asarray(ids, dtype=np.int64) - 1
        if self.inverse is None:
            return ids
        return self.inverse[ids].astype(np.int64)

    def ids_at(self, positions) -> np.ndarray:
        positions = np.asarray(positions, dtype=np.int64)
        if self.forward is None:
            return positions + 1
        return self.forward[positions].astype(np.int64) + 1

    def piece_index(self, ids) -> np.ndarray:
        """Piece of each id; ``len(pieces)`` marks the zero-mass tail."""
        return np.searchsorted(self.starts, self.positions(ids), side="right") - 1

    def mass(self, x: int) -> Fraction:
        j = int(self.piece_index([x])[0])
        return self.pieces[j][1] if j < len(self.pieces) else Fraction(0)

    def masses(self, ids) -> list[Fraction]:
        table = [m for _, m in self.pieces] + [Fraction(0)]
        return [table[j] for j in self.piece_index(ids)]

    def float_masses(self, ids) -> np.ndarray:
        table = np.array([float(m) for _, m in self.pieces] + [0.0])
        return table[self.piece_index(ids)]

    def satisfies_min_mass(self, tau: Fraction | int | None = None) -> bool:
        tau = self.tau if tau is None else _as_fraction(tau)
        floor = tau / self.n
        return all(m >= floor for _, m in self.pieces if m > 0)

    def __eq__(self, other):
        if not isinstance(other, PiecewiseDistribution):
            return NotImplemented
        return (self.n == other.n and self.pieces == other.pieces and self.tau == other.tau
                and self.same_relabel(other))

    def __hash__(self):
        return hash((self.n, self.pieces, self.relabel_seed))

    def __repr__(self):
        shown = ", ".join(f"({c}, {m})" for c, m in self.pieces[:4])
        more = ", ..." if len(self.pieces) > 4 else ""
        return f"PiecewiseDistribution(n={self.n}, pieces=[{shown}{more}], relabel_seed={self.relabel_seed})"

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        if self._explicit is not None:
            raise CondError("explicit relabel arrays cannot be written to the JSON format")
        return {
            "n": self.n,
            "pieces": [{"count": c, "mass_num": m.numerator, "mass_den": m.denominator}
                       for c, m in self.pieces],
            "relabel_seed": self.relabel_seed,
            "tau_num": self.tau.numerator,
            "tau_den": self.tau.denominator,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewiseDistribution":
        pieces = []
        for p in d["pieces"]:
            for key in ("count", "mass_num", "mass_den"):
                if not isinstance(p[key], int) or isinstance(p[key], bool):
                    raise CondError(f"piece field {key!r} must be an integer")
            pieces.append((p["count"], Fraction(p["mass_num"], p["mass_den"])))
        return cls(d["n"], pieces, relabel_seed=d.get("relabel_seed"),
                   tau=Fraction(d.get("tau_num", 0), d.get("tau_den", 1)))


def dump_distribution(D: PiecewiseDistribution, path) -> None:
    with open(path, "w") as fh:
        json.dump(D.to_dict(), fh, indent=2)


def load_distribution(path) -> PiecewiseDistribution:
    with open(path) as fh:
        return PiecewiseDistribution.from_dict(json.load(fh))


# -- query sets ---------------------------------------------------------------


class QuerySet:
    """Base class of the three query-set representations."""

    def descriptor(self) -> str:
        raise NotImplementedError


@dataclass(eq=False)
class Explicit(QuerySet):
    ids: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=np.int64).ravel()
        if ids.size == 0:
            raise EmptyQuerySet("explicit query set is empty")
        if ids.size > 1 and not np.all(ids[1:] > ids[:-1]):
            raise CondError("explicit ids must be strictly increasing")
        if ids[0] < 1:
            raise CondError("ids start at 1")
        self.ids = ids

    def __len__(self):
        return int(self.ids.size)

    def __eq__(self, other):
        return isinstance(other, Explicit) and np.array_equal(self.ids, other.ids)

    def descriptor(self) -> str:
        if self.ids.size <= 4:
            return "{" + ",".join(map(str, self.ids.tolist())) + "}"
        return f"explicit[{self.ids.size}]"


class FullDomain(QuerySet):
    def descriptor(self) -> str:
        return "[n]"

    def __repr__(self):
        return "FULL_DOMAIN"


FULL_DOMAIN = FullDomain()


@dataclass(eq=False)
class BernoulliImplicit(QuerySet):
    """Each id included independently with probability ``p``; never materialized."""

    p: float
    seed: int
    consumed: bool = field(default=False)

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise CondError("inclusion probability must lie in (0, 1]")

    def descriptor(self) -> str:
        return f"bernoulli(p={self.p:.6g},seed={self.seed})"


def explicit(ids: Sequence[int] | np.ndarray, n: int | None = None) -> Explicit:
    """Explicit query set from arbitrary ids (sorted and de-duplicated)."""
    ids = np.unique(np.asarray(ids, dtype=np.int64))
    if n is not None and ids.size and ids[-1] > n:
        raise CondError(f"id {int(ids[-1])} outside [1, {n}]")
    return Explicit(ids)


def mass_of(D: PiecewiseDistribution, S: QuerySet) -> Fraction:
    """Exact mass ``D(S)``."""
    if isinstance(S, FullDomain):
        return sum((c * m for c, m in D.pieces), Fraction(0))
    if isinstance(S, BernoulliImplicit):
        raise UnsupportedQuerySet("mass of an implicit random set is a random variable")
    if not isinstance(S, Explicit):
        raise UnsupportedQuerySet(f"unknown query set {S!r}")
    if S.ids[-1] > D.n:
        raise CondError("query set leaves the domain")
    hits = np.bincount(D.piece_index(S.ids), minlength=len(D.pieces) + 1)
    return sum((int(h) * m for h, (_, m) in zip(hits, D.pieces)), Fraction(0))


def support_size(D: PiecewiseDistribution) -> int:
    return sum(c for c, m in D.pieces if m > 0)


def light_set_size(D: PiecewiseDistribution, tau) -> tuple[int, Fraction]:
    """Cardinality and mass of ``{x : D(x) in [tau/n, 2/n]}``."""
    tau = _as_fraction(tau)
    if tau <= 0:
        raise CondError("tau must be positive")
    lo, hi = tau / D.n, Fraction(2, D.n)
    card, mass = 0, Fraction(0)
    for c, m in D.pieces:
        if lo <= m <= hi:
            card += c
            mass += c * m
    return card, mass
