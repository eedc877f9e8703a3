"""Partition comparison and brute-force oracles used to certify the fast paths."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .dyn_cl import ClParams
from .dyn_dcsbm import DcsbmParams, profile_loglike
from .dyn_er import ErParams, _loglike_counts
from .snapshots import Partition, SnapshotSequence, transition_counts


@dataclass(frozen=True)
class ContingencyTable:
    table: np.ndarray

    @property
    def n(self):
        return int(self.table.sum())

    @property
    def rows(self):
        return self.table.sum(axis=1)

    @property
    def cols(self):
        return self.table.sum(axis=0)


def contingency(a: Partition, b: Partition) -> ContingencyTable:
    if a.n != b.n:
        raise ValueError(f"partitions have different sizes ({a.n} vs {b.n})")
    flat = np.bincount(a.g * b.k + b.g, minlength=a.k * b.k)
    return ContingencyTable(flat.reshape(a.k, b.k))


def _entropy_terms(counts, n):
    p = counts[counts > 0] / n
    return -(p * np.log(p))


def nmi(a: Partition, b: Partition) -> float:
    """Normalized mutual information ``2 I(A;B) / (H(A) + H(B))``, natural logs.

    Sums are exactly rounded (``math.fsum``) so swapping the arguments gives the
    identical float.
    """
    ct = contingency(a, b)
    n = ct.n
    h = math.fsum(np.concatenate([_entropy_terms(ct.rows, n), _entropy_terms(ct.cols, n)]))
    if h == 0:
        # both trivial: one occupied group each, so the structures coincide
        return 1.0
    nz = ct.table > 0
    joint = ct.table[nz] / n
    outer = np.outer(ct.rows, ct.cols)[nz] / (n * n)
    mi = math.fsum(joint * np.log(joint / outer))
    return min(max(2.0 * mi / h, 0.0), 1.0)


def error_rate(found: Partition, truth: Partition) -> float:
    """Fraction of misassigned nodes under the best matching of group labels.

    The matching is an exact assignment problem, solved by the Hungarian
    method, so any k is accepted.
    """
    if found.k != truth.k:
        raise ValueError(f"group counts differ ({found.k} vs {truth.k})")
    ct = contingency(found, truth).table
    rows, cols = linear_sum_assignment(ct, maximize=True)
    return 1.0 - ct[rows, cols].sum() / found.n


def brute_force_fit_er(seq: SnapshotSequence, grid_resolution=200) -> ErParams:
    """Grid maximiser of the ER likelihood over the open unit square, refined once
    on a grid of the same resolution spanning the best cell's neighbours."""
    c = transition_counts(seq)

    def search(a_lo, a_hi, b_lo, b_hi):
        ga = a_lo + (np.arange(grid_resolution) + 0.5) * (a_hi - a_lo) / grid_resolution
        gb = b_lo + (np.arange(grid_resolution) + 0.5) * (b_hi - b_lo) / grid_resolution
        best = (-np.inf, ga[0], gb[0])
        for a in ga:
            for b in gb:
                v = _loglike_counts(c, a, b)
                if v > best[0]:
                    best = (v, a, b)
        return best, (a_hi - a_lo) / grid_resolution, (b_hi - b_lo) / grid_resolution

    (_, a, b), ha, hb = search(0.0, 1.0, 0.0, 1.0)
    (_, a, b), _, _ = search(max(a - ha, 0.0), min(a + ha, 1.0), max(b - hb, 0.0), min(b + hb, 1.0))
    return ErParams(float(a), float(b))


def _pair_loglike(A, p_init1, p_init0, a01, a00, b10, b11):
    """Literal sum over pairs of log P(A_ij(0)) + sum_t log P(A_ij(t-1) -> A_ij(t)).

    Every probability argument is an (n, n) array; pairs with zero probability
    of their observed history give -inf.
    """
    x0 = A[0]
    L = np.where(x0, np.log(p_init1), np.log(p_init0))
    for t in range(1, A.shape[0]):
        prev, cur = A[t - 1], A[t]
        step = np.where(prev, np.where(cur, np.log(b11), np.log(b10)),
                        np.where(cur, np.log(a01), np.log(a00)))
        L = L + step
    return L


def dense_loglike_oracle(seq: SnapshotSequence, params, model=None) -> float:
    """Log-likelihood as a literal product over ordered node pairs and steps.

    ER: pairs i != j, stationary Bernoulli(p) start, Markov steps (alpha, beta).
    CL and DC-SBM: every ordered pair including i = j (self-pairs are never
    observed as edges), Poisson start ``mean^A e^-mean`` and steps
    ``p00 = e^{-b mean}``, ``p01 = b mean e^{-b mean}``, ``p10 = b e^{-b mean}``,
    ``p11 = (1-b) e^{-b mean}``. No sufficient statistics are used.
    """
    if model is None:
        model = {ErParams: "er", ClParams: "cl", DcsbmParams: "dcsbm"}[type(params)]
    n = seq.n
    A = np.stack([_snapshot_dense(seq, t) for t in range(seq.T + 1)])
    with np.errstate(divide="ignore", invalid="ignore"):
        if model == "er":
            a, b = params.alpha, params.beta
            p = a / (a + b)
            full = np.ones((n, n))
            L = _pair_loglike(A, p * full, (1 - p) * full, a * full, (1 - a) * full,
                              b * full, (1 - b) * full)
            off = ~np.eye(n, dtype=bool)
            return float(L[off].sum())
        if model == "cl":
            m = params.m
            mean = np.outer(params.d, params.d) / (2.0 * m)
            beta = np.full((n, n), params.beta)
        elif model == "dcsbm":
            g = params.g
            mean = params.omega[np.ix_(g, g)] * np.outer(params.theta, params.theta)
            beta = params.beta[np.ix_(g, g)]
        else:
            raise ValueError(f"unknown model {model!r}")
        e0 = np.exp(-mean)
        es = np.exp(-beta * mean)
        L = _pair_loglike(A, mean * e0, e0, beta * mean * es, es, beta * es, (1 - beta) * es)
    return float(L.sum())


def _snapshot_dense(seq, t):
    out = np.zeros((seq.n, seq.n), dtype=bool)
    e = seq.edges[t]
    out[e[:, 0], e[:, 1]] = True
    out[e[:, 1], e[:, 0]] = True
    return out


def exhaustive_best_partition(seq: SnapshotSequence, k=2):
    """Global maximiser of the profile log-likelihood over every assignment with
    no empty group (node 0 pinned to group 0 to skip relabelings)."""
    n = seq.n
    best = (-np.inf, None)
    for tail in itertools.product(range(k), repeat=n - 1):
        g = np.array((0,) + tail)
        if np.bincount(g, minlength=k).min() == 0:
            continue
        part = Partition(k, g)
        v = profile_loglike(seq, part)
        if v > best[0]:
            best = (v, part)
    return best[1], best[0]
