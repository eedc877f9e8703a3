"""Dynamic degree-corrected stochastic block model.

Pair (i, j) in groups (r, s) has a latent multiplicity with stationary mean
``omega[r, s] * theta[i] * theta[j]``; existing edges die with per-step
probability ``beta[r, s]``. Degree parameters sum to one within each group.

Fitting has a closed-form part (omega, beta, theta given the groups) and a
discrete part, the group assignment, found by maximising the profile
log-likelihood with single-node moves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlog1py, xlogy

from . import _kl
from .dyn_cl import _chain_to_sequence, immigration_death_chain, poisson_pair_probs, self_consistent_beta
from .snapshots import (Partition, SnapshotSequence, grouped_transition_counts, move_delta,
                        node_appearance_sums)


@dataclass(frozen=True, eq=False)
class DcsbmParams:
    partition: Partition
    theta: np.ndarray
    omega: np.ndarray
    beta: np.ndarray
    flags: tuple = ()

    def __post_init__(self):
        k = self.partition.k
        theta = np.asarray(self.theta, dtype=float)
        omega = np.asarray(self.omega, dtype=float)
        beta = np.asarray(self.beta, dtype=float)
        if theta.shape != (self.partition.n,):
            raise ValueError("theta must have one entry per node")
        if omega.shape != (k, k) or beta.shape != (k, k):
            raise ValueError(f"omega and beta must be {k}x{k}")
        if (theta < 0).any() or (omega < 0).any():
            raise ValueError("theta and omega must be nonnegative")
        if ((beta < 0) | (beta > 1)).any():
            raise ValueError("beta entries must lie in [0, 1]")
        if not (np.array_equal(omega, omega.T) and np.array_equal(beta, beta.T)):
            raise ValueError("omega and beta must be symmetric")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "beta", beta)

    @property
    def k(self):
        return self.partition.k

    @property
    def g(self):
        return self.partition.g

    @property
    def mu(self):
        with np.errstate(divide="ignore"):
            return -np.log1p(-self.beta)


def dcsbm_transition_probs(theta_i, theta_j, omega_rs, beta_rs):
    return poisson_pair_probs(omega_rs * theta_i * theta_j, beta_rs)


def expected_degrees(params: DcsbmParams) -> np.ndarray:
    return params.theta * params.omega.sum(axis=1)[params.g]


def generate_dcsbm(n, T, params: DcsbmParams, seed=None, return_multiplicities=False):
    if params.partition.n != n:
        raise ValueError(f"partition has {params.partition.n} nodes, n={n}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    gi, gj = params.g[iu], params.g[ju]
    means = params.omega[gi, gj] * params.theta[iu] * params.theta[ju]
    live = means > 0
    iu, ju = iu[live], ju[live]
    chain = immigration_death_chain(means[live], params.beta[gi, gj][live], T, rng)
    seq, mult = _chain_to_sequence(n, iu, ju, chain, return_multiplicities)
    if return_multiplicities:
        return seq, mult, (iu, ju)
    return seq


def estimate_given_groups(seq: SnapshotSequence, part: Partition) -> DcsbmParams:
    """Closed-form maximum-likelihood omega, beta, theta for a fixed assignment.

    Each group pair's (omega, beta) is the joint stationary point, which reduces
    to one quadratic in beta. Group pairs without any event get beta = 0 and a
    ``beta_unidentified`` flag; with T = 0 every beta is flagged. A group whose
    nodes have no edges at all gets uniform theta and an ``empty_group`` flag.
    """
    gc = grouped_transition_counts(seq, part)
    T = seq.T
    E = gc.appear.astype(float)
    X = gc.flips.astype(float)
    Y = gc.m11.astype(float)
    k = part.k
    beta = np.zeros((k, k))
    flags = []
    for r in range(k):
        for s in range(r, k):
            if T == 0 or E[r, s] + X[r, s] + Y[r, s] == 0:
                flags.append(f"beta_unidentified:{r},{s}")
                continue
            beta[r, s] = beta[s, r] = self_consistent_beta(E[r, s], X[r, s], Y[r, s], T)
    omega = E / (1.0 + T * beta)
    snode = node_appearance_sums(seq).astype(float)
    denom = ((1.0 + T * beta) * omega).sum(axis=1)
    theta = np.empty(seq.n)
    sizes = part.sizes
    for r in range(k):
        members = part.g == r
        if denom[r] > 0:
            theta[members] = snode[members] / denom[r]
        elif sizes[r] > 0:
            theta[members] = 1.0 / sizes[r]
            flags.append(f"empty_group:{r}")
    return DcsbmParams(part, theta, omega, beta, tuple(flags))


def _profile_from_counts(gc, T, snode):
    E = gc.appear.astype(float)
    X = gc.flips.astype(float)
    Y = gc.m11.astype(float)
    k = gc.k
    F = 0.0
    for r in range(k):
        for s in range(k):
            e, x, y = E[r, s], X[r, s], Y[r, s]
            if e + x + y == 0:
                continue
            b = self_consistent_beta(e, x, y, T)
            F += float(xlogy(e, e) - e * math.log1p(T * b) + xlogy(x, b) + xlog1py(y, -b))
    kappa = E.sum(axis=1)
    return F - 2.0 * float(xlogy(kappa, kappa).sum()) + 2.0 * float(xlogy(snode, snode).sum())


def profile_loglike(seq: SnapshotSequence, part: Partition) -> float:
    """Log-likelihood at `estimate_given_groups`, without the assignment-independent
    ``-sum_rs (1 + T beta_rs) omega_rs`` term."""
    gc = grouped_transition_counts(seq, part)
    return _profile_from_counts(gc, seq.T, node_appearance_sums(seq).astype(float))


def loglike_dcsbm(seq: SnapshotSequence, params: DcsbmParams) -> float:
    """Full log-likelihood (ordered pairs, self-pairs in the mean term) for any parameters."""
    part = params.partition
    gc = grouped_transition_counts(seq, part)
    T = seq.T
    s = node_appearance_sums(seq)
    om, b = params.omega, params.beta
    K = np.bincount(part.g, weights=params.theta, minlength=part.k)
    L = 2.0 * xlogy(s, params.theta).sum()
    L += (xlogy(gc.m0, om) + xlogy(gc.m01, b * om) + xlogy(gc.m10, b) + xlog1py(gc.m11, -b)).sum()
    L -= ((1.0 + T * b) * om * np.outer(K, K)).sum()
    return float(L)


def _kl_inputs(seq):
    ev = seq.events
    indptr, nbr, pair = ev.csr
    return (indptr, nbr,
            ev.appear[pair].astype(float), ev.flips[pair].astype(float), ev.n11[pair].astype(float),
            node_appearance_sums(seq).astype(float))


def random_assignment(n, k, rng):
    """Uniform labels, redrawn until every group is non-empty."""
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    while True:
        g = rng.integers(k, size=n)
        if np.bincount(g, minlength=k).min() > 0:
            return Partition(k, g)


def kernighan_lin(seq: SnapshotSequence, init: Partition, engine="fast", max_sweeps=1000):
    """Optimise the assignment from ``init`` by repeated single-move sweeps.

    In a sweep every node is moved exactly once, each time taking the best
    available move (ties: lowest node, then lowest group; moves emptying a group
    are excluded). The best state seen in the sweep, including its start, seeds
    the next sweep; sweeps stop when none improves.

    Returns ``(partition, profile value, trace)`` where ``trace`` rows hold the
    profile value at the start of each sweep and after it. ``engine="reference"``
    recomputes the profile from scratch for every candidate (slow; for checks).
    """
    if init.n != seq.n:
        raise ValueError("partition size does not match the sequence")
    if (init.sizes == 0).any():
        raise ValueError("initial partition has an empty group")
    snode = node_appearance_sums(seq).astype(float)
    const = 2.0 * float(xlogy(snode, snode).sum())
    if engine == "fast":
        indptr, nbr, wE, wX, wY, snode = _kl_inputs(seq)
        xlx = _kl.xlogx_table(int(snode.sum()))
        g, F, trace = _kl.kl_optimize(indptr, nbr, wE, wX, wY, snode,
                                      init.g.astype(np.int64), init.k, seq.T, max_sweeps, xlx)
        return Partition(init.k, g), F + const, trace + const
    if engine == "reference":
        return _kl_reference(seq, init, snode, max_sweeps)
    raise ValueError(f"unknown engine {engine!r}")


def _kl_reference(seq, part, snode, max_sweeps):
    T = seq.T
    counts = grouped_transition_counts(seq, part)
    value = _profile_from_counts(counts, T, snode)
    trace = []
    for _ in range(max_sweeps):
        start = value
        tol = 1e-10 * max(1.0, abs(start))
        best_val, best_state = start, (part, counts)
        moved = np.zeros(seq.n, dtype=bool)
        cur_part, cur_counts, cur_val = part, counts, value
        for _step in range(seq.n):
            choice = None
            sizes = cur_part.sizes
            for i in range(seq.n):
                r = cur_part.g[i]
                if moved[i] or sizes[r] <= 1:
                    continue
                for s in range(cur_part.k):
                    if s == r:
                        continue
                    c2 = move_delta(cur_counts, seq, cur_part, i, s)
                    v = _profile_from_counts(c2, T, snode)
                    if choice is None or v > choice[0]:
                        choice = (v, i, s, c2)
            if choice is None:
                break
            cur_val, i, s, cur_counts = choice
            cur_part = cur_part.moved(i, s)
            moved[i] = True
            if cur_val > best_val + tol:
                best_val, best_state = cur_val, (cur_part, cur_counts)
        part, counts = best_state
        value = _profile_from_counts(counts, T, snode)
        trace.append((start, value))
        if best_val == start:
            break
    return part, value, np.array(trace)


def fit_dcsbm(seq: SnapshotSequence, k, restarts=5, seed=None, engine="fast"):
    """Best of ``restarts`` heuristic runs from random assignments.

    Returns ``(DcsbmParams, profile log-likelihood)``. Each restart draws its
    initial assignment from its own child stream of ``seed``.
    """
    n = seq.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    best = None
    for child in np.random.SeedSequence(seed).spawn(restarts):
        init = random_assignment(n, k, np.random.default_rng(child))
        part, value, _ = kernighan_lin(seq, init, engine=engine)
        if best is None or value > best[1] + 1e-10 * max(1.0, abs(best[1])):
            best = (part, value)
    part, value = best
    return estimate_given_groups(seq, part), value

