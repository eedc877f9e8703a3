"""Compiled kernel for the single-node-move profile-likelihood heuristic.

The partition-dependent part of the profile log-likelihood is

    F = sum_rs phi(E_rs, X_rs, Y_rs) - 2 sum_r kappa_r log kappa_r

with ordered-pair group totals E (initial edges + appearances), X (appearances +
disappearances), Y (persistences), kappa_r = sum_s E_rs, and phi the per-pair
term at the self-consistent (omega, beta). A move only touches rows r and s,
so each candidate costs O(k) phi evaluations.
"""

import math

import numpy as np
from numba import njit

NEG_INF = -np.inf

# error_model="numpy" drops the zero-division checks numba inserts by default;
# they block if-conversion and cost about half of the run time here.
jit = njit(cache=True, error_model="numpy")


@njit(cache=True, error_model="numpy", inline="always")
def phi(E, X, Y, T, xlx):
    """Per-group-pair profile term; ``xlx[c] = c log c`` for integer counts.

    beta solves T(E-X-Y) b^2 + (T(X-E) - X - Y) b + X = 0 in [0, 1]; both
    branches below are the same root, each written without cancellation.
    """
    v = xlx[np.int64(E)]
    if X <= 0.0:
        # beta = 0: only the initial/appearance term survives
        return v
    A = T * (E - X - Y)
    B = T * (X - E) - X - Y
    disc = math.sqrt(max(B * B - 4.0 * A * X, 0.0))
    b = 2.0 * X / (-B + disc) if B <= 0.0 else (-B - disc) / (2.0 * A)
    b = min(b, 1.0)
    # Y log(1 - b) is -inf at b = 1, the correct limit; Y = 0 contributes nothing
    ly = math.log(1.0 - b) if Y > 0.0 else 0.0
    return v - E * math.log(1.0 + T * b) + X * math.log(b) + Y * ly


def xlogx_table(size):
    c = np.arange(size + 1, dtype=np.float64)
    out = np.zeros(size + 1)
    out[1:] = c[1:] * np.log(c[1:])
    return out


@jit
def _objective(ME, MX, MY, kappa, T, PHI, xlx):
    k = ME.shape[0]
    F = 0.0
    for r in range(k):
        for s in range(k):
            PHI[r, s] = phi(ME[r, s], MX[r, s], MY[r, s], T, xlx)
            F += PHI[r, s]
        F -= 2.0 * xlx[np.int64(kappa[r])]
    return F


@njit(cache=True, error_model="numpy", inline="always")
def _gain(i, r, s, ME, MX, MY, aE, aX, aY, base, kappa, snode, T, xlx):
    """Change in F from moving node i from r to s; ``base[r, s]`` holds the
    current values of every term the move touches."""
    er, es = aE[i, r], aE[i, s]
    xr, xs = aX[i, r], aX[i, s]
    yr, ys = aY[i, r], aY[i, s]
    g = phi(ME[r, r] - 2.0 * er, MX[r, r] - 2.0 * xr, MY[r, r] - 2.0 * yr, T, xlx)
    g += phi(ME[s, s] + 2.0 * es, MX[s, s] + 2.0 * xs, MY[s, s] + 2.0 * ys, T, xlx)
    g += 2.0 * phi(ME[r, s] + er - es, MX[r, s] + xr - xs, MY[r, s] + yr - ys, T, xlx)
    for t in range(ME.shape[0]):
        if t == r or t == s:
            continue
        g += 2.0 * phi(ME[r, t] - aE[i, t], MX[r, t] - aX[i, t], MY[r, t] - aY[i, t], T, xlx)
        g += 2.0 * phi(ME[s, t] + aE[i, t], MX[s, t] + aX[i, t], MY[s, t] + aY[i, t], T, xlx)
    d = snode[i]
    g -= 2.0 * (xlx[np.int64(kappa[r] - d)] + xlx[np.int64(kappa[s] + d)])
    return g - base[r, s]


@jit
def _fill_base(base, PHI, kappa, xlx):
    k = PHI.shape[0]
    for r in range(k):
        for s in range(k):
            if r == s:
                continue
            v = PHI[r, r] + PHI[s, s] + 2.0 * PHI[r, s]
            for t in range(k):
                if t != r and t != s:
                    v += 2.0 * (PHI[r, t] + PHI[s, t])
            base[r, s] = v - 2.0 * (xlx[np.int64(kappa[r])] + xlx[np.int64(kappa[s])])


@jit
def _shift(M, a, i, r, s):
    k = M.shape[0]
    for t in range(k):
        if t == r or t == s:
            continue
        M[r, t] -= a[i, t]
        M[t, r] -= a[i, t]
        M[s, t] += a[i, t]
        M[t, s] += a[i, t]
    M[r, r] -= 2.0 * a[i, r]
    M[s, s] += 2.0 * a[i, s]
    d = a[i, r] - a[i, s]
    M[r, s] += d
    M[s, r] += d


@jit
def _apply(i, s, g, sizes, ME, MX, MY, aE, aX, aY, PHI, kappa, snode, T, xlx,
           indptr, nbr, wE, wX, wY):
    r = g[i]
    k = ME.shape[0]
    _shift(ME, aE, i, r, s)
    _shift(MX, aX, i, r, s)
    _shift(MY, aY, i, r, s)
    for t in range(k):
        for u in (r, s):
            PHI[u, t] = phi(ME[u, t], MX[u, t], MY[u, t], T, xlx)
            PHI[t, u] = PHI[u, t]
    kappa[r] -= snode[i]
    kappa[s] += snode[i]
    sizes[r] -= 1
    sizes[s] += 1
    for p in range(indptr[i], indptr[i + 1]):
        j = nbr[p]
        aE[j, r] -= wE[p]
        aE[j, s] += wE[p]
        aX[j, r] -= wX[p]
        aX[j, s] += wX[p]
        aY[j, r] -= wY[p]
        aY[j, s] += wY[p]
    g[i] = s


@jit
def kl_optimize(indptr, nbr, wE, wX, wY, snode, g0, k, T, max_sweeps, xlx):
    """Run sweeps from ``g0`` until a sweep brings no improvement.

    Returns the final labels, the final objective F and an array of
    (F at sweep start, F accepted after the sweep) rows.
    """
    n = snode.shape[0]
    g = g0.copy()
    aE = np.zeros((n, k))
    aX = np.zeros((n, k))
    aY = np.zeros((n, k))
    for i in range(n):
        for p in range(indptr[i], indptr[i + 1]):
            j = nbr[p]
            aE[i, g[j]] += wE[p]
            aX[i, g[j]] += wX[p]
            aY[i, g[j]] += wY[p]
    ME = np.zeros((k, k))
    MX = np.zeros((k, k))
    MY = np.zeros((k, k))
    kappa = np.zeros(k)
    sizes = np.zeros(k, dtype=np.int64)
    for i in range(n):
        r = g[i]
        sizes[r] += 1
        kappa[r] += snode[i]
        for t in range(k):
            ME[r, t] += aE[i, t]
            MX[r, t] += aX[i, t]
            MY[r, t] += aY[i, t]
    PHI = np.zeros((k, k))
    base = np.zeros((k, k))
    F = _objective(ME, MX, MY, kappa, T, PHI, xlx)

    trace = np.empty((max_sweeps, 2))
    moved = np.zeros(n, dtype=np.bool_)
    path_node = np.empty(n, dtype=np.int64)
    path_from = np.empty(n, dtype=np.int64)
    n_sweeps = 0
    for sweep in range(max_sweeps):
        F_start = F
        tol = 1e-10 * max(1.0, abs(F_start))
        best_F = F_start
        best_len = 0
        moved[:] = False
        steps = 0
        for step in range(n):
            _fill_base(base, PHI, kappa, xlx)
            best_gain = NEG_INF
            bi = -1
            bs = -1
            for i in range(n):
                if moved[i]:
                    continue
                r = g[i]
                if sizes[r] <= 1:
                    continue
                for s in range(k):
                    if s == r:
                        continue
                    gain = _gain(i, r, s, ME, MX, MY, aE, aX, aY, base, kappa, snode, T, xlx)
                    if gain > best_gain or bi < 0:
                        best_gain = gain
                        bi = i
                        bs = s
            if bi < 0:
                break
            path_node[step] = bi
            path_from[step] = g[bi]
            _apply(bi, bs, g, sizes, ME, MX, MY, aE, aX, aY, PHI, kappa, snode, T, xlx,
                   indptr, nbr, wE, wX, wY)
            moved[bi] = True
            F += best_gain
            steps = step + 1
            if F > best_F + tol:
                best_F = F
                best_len = steps
        for step in range(steps - 1, best_len - 1, -1):
            _apply(path_node[step], path_from[step], g, sizes, ME, MX, MY, aE, aX, aY, PHI,
                   kappa, snode, T, xlx, indptr, nbr, wE, wX, wY)
        F = _objective(ME, MX, MY, kappa, T, PHI, xlx)
        trace[sweep, 0] = F_start
        trace[sweep, 1] = F
        n_sweeps = sweep + 1
        if best_len == 0:
            break
    return g, F, trace[:n_sweeps].copy()
