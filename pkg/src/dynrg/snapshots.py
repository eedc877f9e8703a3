"""Snapshot sequences and the transition statistics every estimator consumes.

A sequence holds T+1 simple undirected graphs on a fixed node set. Each
snapshot is stored as a lexicographically sorted ``(m_t, 2)`` integer array of
pairs with ``u < v``, so consecutive snapshots can be compared with sorted set
operations in time linear in their edge counts.

Two count conventions appear here. `TransitionCounts` counts unordered pairs.
`GroupedTransitionCounts` uses ordered pairs: a within-group event lands twice
on the diagonal, a cross-group event once in each of ``(r, s)`` and ``(s, r)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import SnapshotError


def _canonical(n, pairs, t):
    arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if (arr < 0).any() or (arr >= n).any():
        raise SnapshotError(f"snapshot {t}: node index out of range [0, {n})")
    if (arr[:, 0] == arr[:, 1]).any():
        raise SnapshotError(f"snapshot {t}: self-loops are not allowed")
    arr = np.sort(arr, axis=1)
    keys = arr[:, 0] * n + arr[:, 1]
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    if (np.diff(keys) == 0).any():
        raise SnapshotError(f"snapshot {t}: duplicate edge")
    return arr[order]


@dataclass(frozen=True, eq=False)
class SnapshotSequence:
    """T+1 snapshots of a simple undirected graph on nodes ``0..n-1``."""

    n: int
    edges: tuple

    def __post_init__(self):
        if int(self.n) < 1:
            raise SnapshotError("n must be >= 1")
        if len(self.edges) < 1:
            raise SnapshotError("a sequence needs at least the t=0 snapshot")
        object.__setattr__(self, "n", int(self.n))
        checked = []
        for t, e in enumerate(self.edges):
            e = np.asarray(e, dtype=np.int64).reshape(-1, 2)
            if len(e):
                if (e[:, 0] >= e[:, 1]).any():
                    raise SnapshotError(f"snapshot {t}: endpoints must satisfy u < v")
                if e[:, 0].min() < 0 or e[:, 1].max() >= self.n:
                    raise SnapshotError(f"snapshot {t}: node index out of range [0, {self.n})")
                keys = e[:, 0] * self.n + e[:, 1]
                if (np.diff(keys) <= 0).any():
                    raise SnapshotError(f"snapshot {t}: pairs must be sorted and unique")
            e.setflags(write=False)
            checked.append(e)
        object.__setattr__(self, "edges", tuple(checked))

    @classmethod
    def from_edge_lists(cls, n, snapshots):
        """Build from per-snapshot iterables of pairs in any order or orientation."""
        return cls(n, tuple(_canonical(n, list(s), t) for t, s in enumerate(snapshots)))

    @classmethod
    def from_dense(cls, adjacency):
        """Build from a ``(T+1, n, n)`` 0/1 array; only the upper triangle is read."""
        a = np.asarray(adjacency)
        n = a.shape[1]
        iu, ju = np.triu_indices(n, 1)
        snaps = []
        for t in range(a.shape[0]):
            on = a[t][iu, ju] != 0
            snaps.append(np.column_stack([iu[on], ju[on]]))
        return cls(n, tuple(snaps))

    @property
    def T(self):
        return len(self.edges) - 1

    @property
    def pairs_total(self):
        return self.n * (self.n - 1) // 2

    def to_dense(self):
        a = np.zeros((self.T + 1, self.n, self.n), dtype=np.int8)
        for t, e in enumerate(self.edges):
            a[t, e[:, 0], e[:, 1]] = 1
            a[t, e[:, 1], e[:, 0]] = 1
        return a

    def keys(self, t):
        return self.edges[t][:, 0] * self.n + self.edges[t][:, 1]

    def truncate(self, T):
        """The first ``T+1`` snapshots."""
        if not 0 <= T <= self.T:
            raise ValueError(f"T must lie in [0, {self.T}]")
        return SnapshotSequence(self.n, self.edges[: T + 1])

    def __eq__(self, other):
        if not isinstance(other, SnapshotSequence):
            return NotImplemented
        return (self.n == other.n and len(self.edges) == len(other.edges)
                and all(np.array_equal(a, b) for a, b in zip(self.edges, other.edges)))

    def __repr__(self):
        sizes = [len(e) for e in self.edges]
        return f"SnapshotSequence(n={self.n}, T={self.T}, edges per snapshot={sizes})"

    @cached_property
    def events(self):
        return _pair_events(self)


@dataclass(frozen=True, eq=False)
class PairEvents:
    """Per-pair event totals for every pair present in at least one snapshot.

    Pairs never present contribute nothing but absences and are not listed.
    ``indptr``/``nbr``/``pair`` form a symmetric CSR index (node -> incident pairs).
    """

    n: int
    T: int
    u: np.ndarray
    v: np.ndarray
    a0: np.ndarray
    n01: np.ndarray
    n10: np.ndarray
    n11: np.ndarray

    @property
    def appear(self):
        """Initial presence plus later appearances (the per-pair term of s_i)."""
        return self.a0 + self.n01

    @property
    def flips(self):
        return self.n01 + self.n10

    @cached_property
    def csr(self):
        ends = np.concatenate([self.u, self.v])
        other = np.concatenate([self.v, self.u])
        pair = np.concatenate([np.arange(len(self.u))] * 2)
        order = np.argsort(ends, kind="stable")
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(ends, minlength=self.n), out=indptr[1:])
        return indptr, other[order], pair[order]


def _pair_events(seq):
    n = seq.n
    keys = [seq.keys(t) for t in range(seq.T + 1)]
    appear, vanish, persist = [], [], []
    for t in range(1, seq.T + 1):
        prev, cur = keys[t - 1], keys[t]
        appear.append(np.setdiff1d(cur, prev, assume_unique=True))
        vanish.append(np.setdiff1d(prev, cur, assume_unique=True))
        persist.append(np.intersect1d(prev, cur, assume_unique=True))
    all_keys = np.unique(np.concatenate([keys[0]] + appear + vanish + persist))

    def tally(chunks):
        if not chunks:
            return np.zeros(len(all_keys), dtype=np.int64)
        c = np.concatenate(chunks)
        return np.bincount(np.searchsorted(all_keys, c), minlength=len(all_keys)).astype(np.int64)

    return PairEvents(
        n=n, T=seq.T,
        u=all_keys // n, v=all_keys % n,
        a0=tally([keys[0]]), n01=tally(appear), n10=tally(vanish), n11=tally(persist),
    )


@dataclass(frozen=True)
class TransitionCounts:
    """Global sufficient statistics in the unordered-pair convention."""

    T: int
    pairs_total: int
    e0: int
    n01: int
    n10: int
    n11: int

    @property
    def n00(self):
        return self.T * self.pairs_total - self.n01 - self.n10 - self.n11


def transition_counts(seq: SnapshotSequence) -> TransitionCounts:
    ev = seq.events
    return TransitionCounts(
        T=seq.T, pairs_total=seq.pairs_total, e0=len(seq.edges[0]),
        n01=int(ev.n01.sum()), n10=int(ev.n10.sum()), n11=int(ev.n11.sum()),
    )


def node_appearance_sums(seq: SnapshotSequence) -> np.ndarray:
    """Per node: degree at t=0 plus the number of incident edge appearances."""
    ev = seq.events
    w = ev.appear
    return (np.bincount(ev.u, weights=w, minlength=seq.n)
            + np.bincount(ev.v, weights=w, minlength=seq.n)).astype(np.int64)


@dataclass(frozen=True, eq=False)
class Partition:
    """Assignment of ``n`` nodes to ``k`` labelled groups."""

    k: int
    g: np.ndarray

    def __post_init__(self):
        g = np.array(self.g, dtype=np.int64).reshape(-1)
        k = int(self.k)
        if k < 1:
            raise ValueError("k must be >= 1")
        if len(g) and (g.min() < 0 or g.max() >= k):
            raise ValueError(f"group labels must lie in [0, {k})")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "k", k)

    @classmethod
    def from_labels(cls, labels):
        """Relabel arbitrary hashable labels to 0..k-1 in order of first appearance."""
        mapping = {}
        g = [mapping.setdefault(x, len(mapping)) for x in labels]
        return cls(max(len(mapping), 1), np.array(g, dtype=np.int64))

    @property
    def n(self):
        return len(self.g)

    @property
    def sizes(self):
        return np.bincount(self.g, minlength=self.k)

    def moved(self, node, new_group):
        g = self.g.copy()
        g[node] = new_group
        return Partition(self.k, g)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.g, other.g)

    def __repr__(self):
        return f"Partition(k={self.k}, sizes={self.sizes.tolist()})"


@dataclass(frozen=True, eq=False)
class GroupedTransitionCounts:
    """Group-pair counts in the ordered-pair convention (symmetric k x k)."""

    k: int
    T: int
    m0: np.ndarray
    m01: np.ndarray
    m10: np.ndarray
    m11: np.ndarray
    m00: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, GroupedTransitionCounts):
            return NotImplemented
        return (self.k == other.k and self.T == other.T
                and all(np.array_equal(getattr(self, f), getattr(other, f))
                        for f in ("m0", "m01", "m10", "m11", "m00")))

    @property
    def appear(self):
        return self.m0 + self.m01

    @property
    def flips(self):
        return self.m01 + self.m10


def _ordered_pair_totals(sizes):
    pt = np.outer(sizes, sizes)
    pt[np.diag_indices_from(pt)] -= sizes
    return pt


def grouped_transition_counts(seq: SnapshotSequence, part: Partition) -> GroupedTransitionCounts:
    if part.n != seq.n:
        raise ValueError(f"partition has {part.n} nodes, sequence has {seq.n}")
    ev = seq.events
    k = part.k
    gu, gv = part.g[ev.u], part.g[ev.v]

    def fold(w):
        m = np.zeros((k, k), dtype=np.int64)
        np.add.at(m, (gu, gv), w)
        np.add.at(m, (gv, gu), w)
        return m

    m01, m10, m11 = fold(ev.n01), fold(ev.n10), fold(ev.n11)
    m00 = seq.T * _ordered_pair_totals(part.sizes) - m01 - m10 - m11
    return GroupedTransitionCounts(k, seq.T, fold(ev.a0), m01, m10, m11, m00)


def node_group_profile(seq, part, node):
    """Per-group totals of (a0, n01, n10, n11) over the pairs incident on ``node``."""
    ev = seq.events
    indptr, nbr, pair = ev.csr
    sl = slice(indptr[node], indptr[node + 1])
    groups = part.g[nbr[sl]]
    p = pair[sl]
    return [np.bincount(groups, weights=w[p], minlength=part.k).astype(np.int64)
            for w in (ev.a0, ev.n01, ev.n10, ev.n11)]


def _shift(m, a, r, s):
    m = m.copy()
    for t in range(len(a)):
        if t == r or t == s:
            continue
        m[r, t] -= a[t]
        m[t, r] -= a[t]
        m[s, t] += a[t]
        m[t, s] += a[t]
    m[r, r] -= 2 * a[r]
    m[s, s] += 2 * a[s]
    m[r, s] += a[r] - a[s]
    m[s, r] += a[r] - a[s]
    return m


def move_delta(counts: GroupedTransitionCounts, seq: SnapshotSequence, part: Partition,
               node: int, new_group: int) -> GroupedTransitionCounts:
    """Counts after moving ``node`` to ``new_group``, touching only its incident pairs."""
    r = int(part.g[node])
    s = int(new_group)
    if not 0 <= s < part.k:
        raise ValueError(f"group {s} out of range [0, {part.k})")
    if s == r:
        raise ValueError("new_group equals the node's current group")
    if part.sizes[r] == 1:
        raise ValueError(f"moving node {node} would empty group {r}")
    a0, a01, a10, a11 = node_group_profile(seq, part, node)
    m01 = _shift(counts.m01, a01, r, s)
    m10 = _shift(counts.m10, a10, r, s)
    m11 = _shift(counts.m11, a11, r, s)
    sizes = part.sizes.copy()
    sizes[r] -= 1
    sizes[s] += 1
    m00 = counts.T * _ordered_pair_totals(sizes) - m01 - m10 - m11
    return GroupedTransitionCounts(counts.k, counts.T, _shift(counts.m0, a0, r, s), m01, m10, m11, m00)
