"""Dynamic Chung-Lu model.

Each pair carries a latent edge multiplicity that follows an immigration-death
process: edges arrive at rate ``mu * d_i d_j / 2m`` and each dies at rate ``mu``.
Snapshots record whether the multiplicity is nonzero. Over one unit of time an
edge dies with probability ``beta = 1 - exp(-mu)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlog1py, xlogy

from .errors import ConvergenceError, UnidentifiableError
from .snapshots import SnapshotSequence, node_appearance_sums, transition_counts


@dataclass(frozen=True, eq=False)
class ClParams:
    d: np.ndarray
    beta: float
    flags: tuple = ()
    iterations: int = 0
    residual: float = 0.0

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if (d < 0).any():
            raise ValueError("expected degrees must be nonnegative")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta={self.beta} outside [0, 1]")
        object.__setattr__(self, "d", d)

    @property
    def m(self):
        return 0.5 * float(self.d.sum())

    @property
    def mu(self):
        return math.inf if self.beta == 1.0 else -math.log1p(-self.beta)


@dataclass(frozen=True)
class PairTransitionProbs:
    """One-step probabilities for a binary-observed pair (leading order in the mean)."""

    p00: float
    p01: float
    p10: float
    p11: float


def poisson_pair_probs(mean, beta) -> PairTransitionProbs:
    x = beta * mean
    e = math.exp(-x)
    return PairTransitionProbs(e, x * e, beta * e, (1.0 - beta) * e)


def cl_transition_probs(di, dj, m, beta) -> PairTransitionProbs:
    return poisson_pair_probs(di * dj / (2.0 * m), beta)


def immigration_death_chain(means, beta, T, rng):
    """Yield T+1 arrays of exact latent multiplicities for independent pairs.

    ``k(0) ~ Poisson(mean)`` and ``k(t+1) = Binomial(k(t), 1-beta) + Poisson(beta*mean)``,
    the exact one-step law of the process; the Poisson(mean) stationary law is
    preserved. ``beta`` may be a scalar or an array aligned with ``means``;
    ``beta=1`` gives independent snapshots.
    """
    means = np.asarray(means, dtype=float)
    beta = np.broadcast_to(np.asarray(beta, dtype=float), means.shape)
    k = rng.poisson(means)
    yield k
    arrivals = beta * means
    for _ in range(T):
        k = rng.binomial(k, 1.0 - beta) + rng.poisson(arrivals)
        yield k


def _chain_to_sequence(n, iu, ju, chain, keep):
    snaps, mult = [], []
    for k in chain:
        on = k > 0
        snaps.append(np.column_stack([iu[on], ju[on]]))
        if keep:
            mult.append(k)
    return SnapshotSequence(n, tuple(snaps)), (np.array(mult) if keep else None)


def generate_cl(n, T, params: ClParams, seed=None, return_multiplicities=False):
    """Sample T+1 snapshots; optionally also the ``(T+1, pairs)`` latent multiplicities.

    Multiplicities are reported for the pairs with ``d_i d_j > 0``, in the order of
    the returned ``(iu, ju)`` index arrays.
    """
    if len(params.d) != n:
        raise ValueError(f"params has {len(params.d)} degrees, n={n}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    if params.m > 0:
        means = params.d[iu] * params.d[ju] / (2.0 * params.m)
        live = means > 0
    else:
        means = np.zeros(len(iu))
        live = np.zeros(len(iu), dtype=bool)
    iu, ju, means = iu[live], ju[live], means[live]
    seq, mult = _chain_to_sequence(n, iu, ju, immigration_death_chain(means, params.beta, T, rng),
                                   return_multiplicities)
    if return_multiplicities:
        return seq, mult, (iu, ju)
    return seq


def loglike_cl(seq: SnapshotSequence, params: ClParams) -> float:
    """Log-likelihood in the ordered-pair convention, self-pairs included in the mean term.

    Returns ``-inf`` for data the parameters give zero probability.
    """
    c = transition_counts(seq)
    s = node_appearance_sums(seq)
    m, beta, T = params.m, params.beta, seq.T
    E = c.e0 + c.n01
    if m == 0:
        return 0.0 if E == 0 else -math.inf
    L = (2.0 * float(xlogy(s, params.d).sum()) - 2.0 * E * math.log(2.0 * m)
         + 2.0 * float(xlogy(c.n01 + c.n10, beta)) + 2.0 * float(xlog1py(c.n11, -beta))
         - 2.0 * m * (1.0 + T * beta))
    return float(L)


def solve_beta_quadratic(mT, n01, n10, n11) -> float:
    """Root in [0, 1] of ``mT b^2 - (mT + n01 + n10 + n11) b + n01 + n10 = 0``.

    f(0) >= 0 and f(1) <= 0, so the smaller root is the one in [0, 1]; it is
    computed in the cancellation-free form ``2c / (-b + sqrt(disc))``.
    """
    if mT < 0 or min(n01, n10, n11) < 0:
        raise ValueError("inputs must be nonnegative")
    x = float(n01 + n10)
    b = -(mT + x + n11)
    if b == 0:
        raise UnidentifiableError("all inputs are zero")
    disc = b * b - 4.0 * mT * x
    root = 2.0 * x / (-b + math.sqrt(max(disc, 0.0)))
    return min(max(root, 0.0), 1.0)


def self_consistent_beta(E, X, Y, T) -> float:
    """Joint stationary point of the rate equations with the mean eliminated.

    For appearance total ``E`` (initial edges plus appearances), flip total ``X``
    (appearances plus disappearances) and persistence total ``Y``, substituting
    ``mean = E / (1 + T beta)`` into the beta equation leaves the quadratic
    ``T(E-X-Y) b^2 + (T(X-E) - X - Y) b + X = 0``, whose leading coefficient is
    never positive. Its unique root in [0, 1] is returned. ``E = X = Y = 0`` gives 0.
    """
    A = T * (E - X - Y)
    B = T * (X - E) - X - Y
    if X == 0:
        return 0.0
    disc = math.sqrt(max(B * B - 4.0 * A * X, 0.0))
    if B <= 0:
        root = 2.0 * X / (-B + disc)
    else:
        root = (-B - disc) / (2.0 * A)
    return min(max(root, 0.0), 1.0)


def fit_cl(seq: SnapshotSequence, tol=1e-12, max_iter=10000) -> ClParams:
    """Maximum-likelihood (d, beta) by alternating the degree and beta equations."""
    c = transition_counts(seq)
    T = seq.T
    if T < 1:
        raise UnidentifiableError("T=0: beta is not identifiable")
    s = node_appearance_sums(seq).astype(float)
    E = c.e0 + c.n01
    if c.n01 + c.n10 + c.n11 == 0:
        # no edge ever present: beta carries no information, all degrees vanish
        return ClParams(np.zeros(seq.n), 0.0, ("beta_unidentified",), 0, 0.0)
    beta = c.n10 / (c.n10 + c.n11) if c.n10 + c.n11 > 0 else 0.5
    change = math.inf
    for it in range(1, max_iter + 1):
        mT = T * E / (1.0 + T * beta)
        new = solve_beta_quadratic(mT, c.n01, c.n10, c.n11)
        change = abs(new - beta)
        beta = new
        if change < tol:
            return ClParams(s / (1.0 + T * beta), beta, (), it, change)
    raise ConvergenceError(f"no convergence in {max_iter} iterations (last change {change:.3g})",
                           last=ClParams(s / (1.0 + T * beta), beta, (), max_iter, change))
