"""Planted-partition benchmark for the dynamic block model.

Edge density is interpolated by ``delta`` between a flat and a purely
block-diagonal omega; edge dynamics by ``eta`` between a uniform death
probability and group-pair specific ones. Every node has expected degree ``c``
throughout, so only the structure strength changes along either axis.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dyn_dcsbm import DcsbmParams, fit_dcsbm, generate_dcsbm
from .errors import DynrgError
from .metrics import nmi
from .snapshots import Partition


@dataclass(frozen=True)
class BenchmarkSpec:
    n: int = 500
    k: int = 2
    c: float = 16.0
    delta: float = 0.0
    eta: float = 0.0
    beta_uniform: float = 0.4
    beta_in: float = 0.3
    beta_out: float = 0.5
    T_values: tuple = (0, 1, 2, 3, 4, 5)
    reps: int = 30
    seed: int = 0
    restarts: int = 5

    def __post_init__(self):
        if self.k < 1 or self.n < self.k or self.n % self.k:
            raise ValueError(f"n={self.n} must split into k={self.k} equal groups")
        for name in ("delta", "eta", "beta_uniform", "beta_in", "beta_out"):
            x = getattr(self, name)
            if not 0.0 <= x <= 1.0:
                raise ValueError(f"{name}={x} outside [0, 1]")
        if not self.T_values or min(self.T_values) < 0:
            raise ValueError("T_values must be a non-empty list of non-negative integers")
        if self.reps < 1 or self.restarts < 1:
            raise ValueError("reps and restarts must be >= 1")
        object.__setattr__(self, "T_values", tuple(int(t) for t in self.T_values))


PANELS = {
    # delta swept, no dynamic signal
    "a": dict(axis="delta", values=(0.0, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 1.0),
              spec=dict(eta=0.0, beta_uniform=0.4)),
    # delta swept, dynamics fully correlated with the groups
    "b": dict(axis="delta", values=(0.0, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 1.0),
              spec=dict(eta=1.0, beta_in=0.3, beta_out=0.5)),
    # no density signal, dynamics contrast swept
    "c": dict(axis="eta", values=(0.0, 0.25, 0.5, 0.75, 1.0),
              spec=dict(delta=0.0, beta_uniform=0.4, beta_in=0.0, beta_out=0.8)),
}


def panel_spec(panel, **overrides):
    """``(spec, axis, values)`` for one of the preset panels ``a``, ``b``, ``c``."""
    if panel not in PANELS:
        raise ValueError(f"unknown panel {panel!r}; choose from {sorted(PANELS)}")
    p = PANELS[panel]
    values = overrides.pop("values", p["values"])
    return BenchmarkSpec(**{**p["spec"], **overrides}), p["axis"], tuple(values)


def planted_partition(spec: BenchmarkSpec) -> Partition:
    return Partition(spec.k, np.repeat(np.arange(spec.k), spec.n // spec.k))


def benchmark_params(spec: BenchmarkSpec) -> DcsbmParams:
    """Uniform theta = k/n; omega and beta interpolated as described above.

    With theta_i = k/n a node's expected degree is (k/n) * (row sum of omega),
    so the planted diagonal is c n / k and the flat value c n / k^2.
    """
    n, k, c = spec.n, spec.k, spec.c
    if not 0 < c <= n / k - 1:
        raise ValueError(f"mean degree c={c} infeasible for groups of {n // k} nodes")
    planted = np.eye(k) * (c * n / k)
    flat = np.full((k, k), c * n / k**2)
    omega = spec.delta * planted + (1.0 - spec.delta) * flat
    beta_planted = np.where(np.eye(k, dtype=bool), spec.beta_in, spec.beta_out)
    beta = spec.eta * beta_planted + (1.0 - spec.eta) * spec.beta_uniform
    theta = np.full(n, k / n)
    return DcsbmParams(planted_partition(spec), theta, omega, beta)


def detectability_reference(spec: BenchmarkSpec) -> float:
    """delta at which the static model has |c_in - c_out| = 2 sqrt(c).

    Here c_in - c_out = delta * c * k; the value is a reference line taken from
    the two-group static theory, not something this package derives.
    """
    return 2.0 * math.sqrt(spec.c) / (spec.c * spec.k)


@dataclass(frozen=True)
class BenchmarkRow:
    delta: float
    eta: float
    T: int
    rep: int
    seed: int
    nmi: float
    status: str = "ok"


@dataclass
class BenchmarkResult:
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def mean_nmi(self, T, **where):
        """Mean and standard error of NMI over successful rows matching ``where``."""
        vals = np.array([r.nmi for r in self.rows if r.T == T and r.status == "ok"
                         and all(math.isclose(getattr(r, key), v) for key, v in where.items())])
        if len(vals) == 0:
            return math.nan, math.nan
        se = vals.std(ddof=1) / math.sqrt(len(vals)) if len(vals) > 1 else 0.0
        return float(vals.mean()), float(se)


def row_seed(spec: BenchmarkSpec, grid_index, rep) -> int:
    ss = np.random.SeedSequence(spec.seed, spawn_key=(grid_index, rep))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def _run_cell(spec: BenchmarkSpec, grid_index, rep):
    """All T values for one (grid point, replicate): one history, truncated per T."""
    seed = row_seed(spec, grid_index, rep)
    truth = planted_partition(spec)
    out = []
    try:
        hist = generate_dcsbm(spec.n, max(spec.T_values), benchmark_params(spec), seed=[seed, 0])
    except DynrgError as exc:
        return [BenchmarkRow(spec.delta, spec.eta, T, rep, seed, math.nan, f"failed: {exc}")
                for T in spec.T_values]
    for T in spec.T_values:
        try:
            est, _ = fit_dcsbm(hist.truncate(T), spec.k, restarts=spec.restarts, seed=[seed, 1, T])
            out.append(BenchmarkRow(spec.delta, spec.eta, T, rep, seed, nmi(est.partition, truth)))
        except (DynrgError, ValueError, FloatingPointError) as exc:
            out.append(BenchmarkRow(spec.delta, spec.eta, T, rep, seed, math.nan, f"failed: {exc}"))
    return out


def _run_cell_args(args):
    return _run_cell(*args)


def run_benchmark(spec: BenchmarkSpec, axis="delta", values=None, jobs=1) -> BenchmarkResult:
    """Sweep ``axis`` (``delta`` or ``eta``) over ``values`` with ``spec.reps`` replicates.

    Each (grid point, replicate) draws its seed from ``spec.seed`` and its own
    indices, so results do not depend on ``jobs`` or scheduling. Rows come back
    in grid order, then T, then replicate.
    """
    if axis not in ("delta", "eta"):
        raise ValueError(f"axis must be 'delta' or 'eta', got {axis!r}")
    values = (getattr(spec, axis),) if values is None else tuple(values)
    tasks = []
    for gi, v in enumerate(values):
        cell_spec = replace(spec, **{axis: float(v)})
        benchmark_params(cell_spec)
        tasks.extend((cell_spec, gi, rep) for rep in range(spec.reps))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_cell_args, tasks))
    else:
        chunks = [_run_cell(*t) for t in tasks]
    order = {v: i for i, v in enumerate(values)}
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (order[getattr(r, axis)], r.T, r.rep))
    meta = {"axis": axis, "values": list(values),
            "detectability_reference_delta": detectability_reference(spec),
            "spec": {k: (list(v) if isinstance(v, tuple) else v) for k, v in spec.__dict__.items()}}
    return BenchmarkResult(rows, meta)
