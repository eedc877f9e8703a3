"""Dynamic Erdos-Renyi graph: each pair is an independent two-state Markov chain.

Between snapshots an absent pair gains an edge with probability ``alpha`` and a
present edge vanishes with probability ``beta``. The t=0 snapshot is drawn from
the stationary law G(n, p) with ``p = alpha / (alpha + beta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import xlog1py, xlogy

from .errors import ConvergenceError, UnidentifiableError
from .snapshots import SnapshotSequence, transition_counts


@dataclass(frozen=True)
class ErParams:
    alpha: float
    beta: float
    flags: tuple = ()
    iterations: int = 0
    residual: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta"):
            x = getattr(self, name)
            if not 0.0 <= x <= 1.0:
                raise ValueError(f"{name}={x} outside [0, 1]")

    @property
    def stationary_p(self):
        s = self.alpha + self.beta
        return self.alpha / s if s > 0 else None

    @classmethod
    def from_rates(cls, lam, mu):
        """Per-snapshot probabilities for continuous-time rates lam (appear) and mu (vanish)."""
        tot = lam + mu
        if tot <= 0:
            return cls(0.0, 0.0)
        decay = -math.expm1(-tot)
        return cls(lam / tot * decay, mu / tot * decay)

    def rates(self):
        """Invert `from_rates`; requires ``alpha + beta < 1``."""
        s = self.alpha + self.beta
        if not 0 < s < 1:
            raise ValueError("rates exist only for 0 < alpha + beta < 1")
        tot = -math.log1p(-s)
        return self.alpha / s * tot, self.beta / s * tot


def generate_er(n, T, params: ErParams, seed=None) -> SnapshotSequence:
    p = params.stationary_p
    if p is None:
        raise ValueError("alpha + beta == 0: the chain has no stationary distribution")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    state = rng.random(len(iu)) < p
    snaps = [np.column_stack([iu[state], ju[state]])]
    for _ in range(T):
        u = rng.random(len(iu))
        state = np.where(state, u >= params.beta, u < params.alpha)
        snaps.append(np.column_stack([iu[state], ju[state]]))
    return SnapshotSequence(n, tuple(snaps))


def _loglike_counts(c, alpha, beta):
    s = alpha + beta
    if s == 0:
        # no stationary law; only the all-absent history under alpha=0 has mass
        return 0.0 if c.e0 == 0 and c.n01 == 0 else -math.inf
    p = alpha / s
    half = (xlogy(c.e0, p) + xlog1py(c.pairs_total - c.e0, -p)
            + xlogy(c.n01, alpha) + xlog1py(c.n00, -alpha)
            + xlogy(c.n10, beta) + xlog1py(c.n11, -beta))
    return 2.0 * float(half)


def loglike_er(seq: SnapshotSequence, params: ErParams) -> float:
    """Log-likelihood summed over ordered pairs (twice the unordered sum).

    Returns ``-inf`` when the data contain an event the parameters forbid.
    """
    return _loglike_counts(transition_counts(seq), params.alpha, params.beta)


def er_update(c, alpha, beta):
    """One application of the self-consistent maximum-likelihood map."""
    p = alpha / (alpha + beta)
    P = c.pairs_total
    na = c.e0 - p * P + c.n01
    nb = p * P - c.e0 + c.n10
    da = na + c.n00
    db = nb + c.n11
    return (na / da if da != 0 else math.nan), (nb / db if db != 0 else math.nan)


def _rates_given_p(c, p, free_a, free_b):
    P = c.pairs_total
    na, nb = c.e0 - p * P + c.n01, p * P - c.e0 + c.n10
    alpha = na / (na + c.n00) if free_a and na + c.n00 > 0 else (0.0 if free_a else 1.0)
    beta = nb / (nb + c.n11) if free_b and nb + c.n11 > 0 else (0.0 if free_b else 1.0)
    return min(max(alpha, 0.0), 1.0), min(max(beta, 0.0), 1.0)


def fit_er(seq: SnapshotSequence, tol=1e-12, max_iter=10000) -> ErParams:
    """Maximum-likelihood (alpha, beta): the self-consistent solution of `er_update`.

    For fixed p the update gives alpha and beta in closed form, so the fixed point
    is the root of ``alpha(p) / (alpha(p) + beta(p)) - p``. That root is bracketed
    by the p values where alpha or beta hit zero and is found by Brent's method.
    Iterating the map directly is not used because it diverges on short histories.

    A parameter whose events never had a chance to occur (no absent-pair steps
    for alpha, no present-pair steps for beta) is flagged unidentifiable and
    pinned to 1.0, which is a maximiser of the likelihood in that case; the other
    parameter is still estimated.
    """
    c = transition_counts(seq)
    if c.T < 1:
        raise UnidentifiableError("T=0: appearance and disappearance rates are not identifiable")
    if c.pairs_total == 0:
        raise UnidentifiableError("n=1: no node pairs")
    flags = []
    free_a = c.n01 + c.n00 > 0
    free_b = c.n10 + c.n11 > 0
    if not free_a:
        flags.append("alpha_unidentified")
    if not free_b:
        flags.append("beta_unidentified")
    P = c.pairs_total

    if c.n01 == 0 and c.n10 == 0:
        # nothing ever changed: both free rates are exactly zero
        alpha, beta, its = (0.0 if free_a else 1.0), (0.0 if free_b else 1.0), 0
    else:
        def h(p):
            a, b = _rates_given_p(c, p, free_a, free_b)
            return a / (a + b) - p

        lo = max(0.0, (c.e0 - c.n10) / P) if free_b else 0.0
        hi = min(1.0, (c.e0 + c.n01) / P) if free_a else 1.0
        if hi - lo <= 0.0 or h(lo) == 0.0:
            p, its = lo, 0
        elif h(hi) == 0.0:
            p, its = hi, 0
        else:
            try:
                p, info = brentq(h, lo, hi, xtol=tol * 1e-3, rtol=4 * np.finfo(float).eps,
                                 maxiter=max_iter, full_output=True)
            except RuntimeError as exc:
                raise ConvergenceError(str(exc), last=(lo, hi)) from exc
            its = info.iterations
        alpha, beta = _rates_given_p(c, p, free_a, free_b)

    na, nb = er_update(c, alpha, beta) if alpha + beta > 0 else (alpha, beta)
    resid = max(abs(na - alpha) if free_a and not math.isnan(na) else 0.0,
                abs(nb - beta) if free_b and not math.isnan(nb) else 0.0)
    if resid > max(tol, 1e-10):
        raise ConvergenceError(f"fixed-point residual {resid:.3g} above tolerance",
                               last=ErParams(alpha, beta, tuple(flags), its, resid))
    return ErParams(alpha, beta, tuple(flags), its, resid)
