"""Atoms of a family of query sets and the configuration of a sample sequence."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distribution import Explicit, explicit
from .errors import CondError
from .oracle import Transcript

MAX_SETS = 20


@dataclass(frozen=True)
class Atom:
    ids: np.ndarray
    # signature[r] is True when the atom lies inside sets[r]
    signature: tuple[bool, ...]


@dataclass(frozen=True)
class AtomPartition:
    n: int
    atoms: tuple[Atom, ...]

    def __len__(self):
        return len(self.atoms)

    def as_sets(self) -> set[frozenset]:
        return {frozenset(a.ids.tolist()) for a in self.atoms}

    def atom_of(self, x: int) -> Atom:
        for a in self.atoms:
            if x in a.ids:
                return a
        raise CondError(f"id {x} outside [1, {self.n}]")


def _as_sets(sets) -> list[Explicit]:
    return [S if isinstance(S, Explicit) else explicit(S) for S in sets]


def atoms(sets: Sequence, n: int) -> AtomPartition:
    """Nonempty intersections ``C_1 n ... n C_t`` with ``C_r`` a set or its complement."""
    sets = _as_sets(sets)
    if len(sets) > MAX_SETS:
        raise CondError(f"at most {MAX_SETS} sets are supported")
    member = np.zeros((len(sets), n), dtype=bool)
    for r, S in enumerate(sets):
        if S.ids[-1] > n:
            raise CondError("query set leaves the domain")
        member[r, S.ids - 1] = True
    weights = (1 << np.arange(len(sets), dtype=np.int64))
    code = (member.T.astype(np.int64) * weights).sum(axis=1) if sets else np.zeros(n, np.int64)
    order = np.argsort(code, kind="stable")
    keys, starts = np.unique(code[order], return_index=True)
    bounds = list(starts) + [n]
    out = []
    for key, lo, hi in zip(keys.tolist(), bounds[:-1], bounds[1:]):
        ids = np.sort(order[lo:hi]) + 1
        sig = tuple(bool((key >> r) & 1) for r in range(len(sets)))
        out.append(Atom(ids, sig))
    out.sort(key=lambda a: int(a.ids[0]))
    return AtomPartition(n, tuple(out))


@dataclass(frozen=True)
class Configuration:
    """Sample/sample equalities and sample/set memberships of ``t`` stages.

    ``equal[k, l, i, j]`` tells whether ``s_i^(k) = s_j^(l)`` and
    ``member[k, i, j]`` whether ``s_i^(k)`` lies in ``A_j``; together they
    hold ``6 t^2`` bits.
    """

    equal: np.ndarray
    member: np.ndarray

    @property
    def t(self) -> int:
        return self.member.shape[1]

    def bits(self) -> np.ndarray:
        return np.concatenate([self.equal.ravel(), self.member.ravel()])


def configuration(transcript: Transcript, sets: Sequence,
                  labels: tuple[str, str] | None = None) -> Configuration:
    """Configuration of the samples recorded for two distributions over ``t`` query sets.

    The ``i``-th sample under each label is taken to answer ``sets[i]``.
    """
    sets = _as_sets(sets)
    t = len(sets)
    if labels is None:
        seen: list[str] = []
        for lab, _, _ in transcript.entries:
            if lab not in seen:
                seen.append(lab)
        if len(seen) != 2:
            raise CondError("transcript must hold samples of exactly two distributions")
        labels = (seen[0], seen[1])
    s = np.array([transcript.samples(lab) for lab in labels], dtype=np.int64)
    if s.shape != (2, t):
        raise CondError("each distribution needs exactly one sample per query set")
    member = np.zeros((2, t, t), dtype=bool)
    for j, A in enumerate(sets):
        member[:, :, j] = np.isin(s, A.ids)
    for k in range(2):
        for i in range(t):
            if not member[k, i, i]:
                raise CondError(f"sample {int(s[k, i])} lies outside its query set")
    equal = s[:, :, None, None] == s[None, None, :, :]
    return Configuration(equal.transpose(0, 2, 1, 3).copy(), member)
