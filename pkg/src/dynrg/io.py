"""Text formats: snapshot files, parameter JSON, partition files, benchmark CSV.

Snapshot file::

    #dynsnap 1
    n <int>
    T <int>
    t u v        (0 <= t <= T, 0 <= u < v < n; any order; '#' comments allowed)
"""

from __future__ import annotations

import json
import math
import os
import tempfile

import numpy as np

from .dyn_cl import ClParams
from .dyn_dcsbm import DcsbmParams
from .dyn_er import ErParams
from .errors import SnapshotError
from .snapshots import Partition, SnapshotSequence

MAGIC = "#dynsnap 1"


def render_snapshots(seq: SnapshotSequence) -> str:
    lines = [MAGIC, f"n {seq.n}", f"T {seq.T}"]
    for t, e in enumerate(seq.edges):
        lines.extend(f"{t} {u} {v}" for u, v in e.tolist())
    return "\n".join(lines) + "\n"


def _header_value(line, key, lineno):
    parts = line.split()
    if len(parts) != 2 or parts[0] != key:
        raise SnapshotError(f"expected '{key} <int>', got {line.strip()!r}", lineno)
    try:
        value = int(parts[1])
    except ValueError:
        raise SnapshotError(f"'{key}' needs an integer, got {parts[1]!r}", lineno) from None
    return value


def parse_snapshots(text: str) -> SnapshotSequence:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise SnapshotError(f"first line must be {MAGIC!r}", 1)
    if len(lines) < 3:
        raise SnapshotError("missing 'n' or 'T' header line", len(lines) + 1)
    n = _header_value(lines[1], "n", 2)
    T = _header_value(lines[2], "T", 3)
    if n < 1:
        raise SnapshotError(f"n must be >= 1, got {n}", 2)
    if T < 0:
        raise SnapshotError(f"T must be >= 0, got {T}", 3)
    snaps = [dict() for _ in range(T + 1)]
    for lineno, line in enumerate(lines[3:], start=4):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) != 3:
            raise SnapshotError(f"expected 't u v', got {s!r}", lineno)
        try:
            t, u, v = (int(p) for p in parts)
        except ValueError:
            raise SnapshotError(f"non-integer field in {s!r}", lineno) from None
        if not 0 <= t <= T:
            raise SnapshotError(f"snapshot index {t} outside [0, {T}]", lineno)
        if u == v:
            raise SnapshotError(f"self-loop at node {u}", lineno)
        if u > v:
            raise SnapshotError("endpoints must satisfy u < v", lineno)
        if u < 0 or v >= n:
            raise SnapshotError(f"node index outside [0, {n})", lineno)
        if (u, v) in snaps[t]:
            raise SnapshotError(f"duplicate edge ({u}, {v}) in snapshot {t} "
                                f"(first on line {snaps[t][(u, v)]})", lineno)
        snaps[t][(u, v)] = lineno
    return SnapshotSequence.from_edge_lists(n, [list(s) for s in snaps])


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file, so failures leave no partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_snapshots(path) -> SnapshotSequence:
    with open(path) as fh:
        return parse_snapshots(fh.read())


def write_snapshots(path, seq):
    atomic_write(path, render_snapshots(seq))


def params_to_dict(params, n, T, loglike=None, model=None):
    if isinstance(params, ErParams):
        model, body = "er", {"alpha": params.alpha, "beta": params.beta}
        its, res = params.iterations, params.residual
    elif isinstance(params, ClParams):
        model, body = "cl", {"d": params.d.tolist(), "beta": params.beta}
        its, res = params.iterations, params.residual
    elif isinstance(params, DcsbmParams):
        model = "dcsbm"
        body = {"k": params.k, "groups": params.g.tolist(), "theta": params.theta.tolist(),
                "omega": params.omega.tolist(), "beta": params.beta.tolist()}
        its, res = 0, 0.0
    else:
        raise TypeError(f"unsupported parameter type {type(params).__name__}")
    flags = list(params.flags)
    if loglike is not None and math.isinf(loglike):
        flags.append("loglike_neg_inf")
        loglike = None
    return {"model": model, "n": int(n), "T": int(T), "params": body, "loglike": loglike,
            "iterations": int(its), "residual": float(res), "flags": flags}


def params_from_dict(doc):
    model, p = doc.get("model"), doc.get("params", {})
    flags = tuple(f for f in doc.get("flags", ()) if f != "loglike_neg_inf")
    try:
        if model == "er":
            return ErParams(float(p["alpha"]), float(p["beta"]), flags,
                            int(doc.get("iterations", 0)), float(doc.get("residual", 0.0)))
        if model == "cl":
            return ClParams(np.array(p["d"], dtype=float), float(p["beta"]), flags,
                            int(doc.get("iterations", 0)), float(doc.get("residual", 0.0)))
        if model == "dcsbm":
            part = Partition(int(p["k"]), np.array(p["groups"], dtype=np.int64))
            return DcsbmParams(part, np.array(p["theta"], dtype=float),
                               np.array(p["omega"], dtype=float), np.array(p["beta"], dtype=float), flags)
    except KeyError as exc:
        raise ValueError(f"params document lacks field {exc}") from None
    raise ValueError(f"unknown model {model!r}")


def dump_params(params, n, T, loglike=None) -> str:
    return json.dumps(params_to_dict(params, n, T, loglike), indent=2, allow_nan=False) + "\n"


def read_params(path):
    with open(path) as fh:
        doc = json.load(fh)
    return params_from_dict(doc), doc


def render_partition(part: Partition) -> str:
    return "".join(f"{i} {g}\n" for i, g in enumerate(part.g.tolist()))


def parse_partition(text, k=None) -> Partition:
    """``node group`` lines covering nodes 0..n-1 once each; k defaults to max label + 1."""
    labels = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        try:
            node, group = (int(x) for x in parts)
        except ValueError:
            raise SnapshotError(f"expected 'node group', got {s!r}", lineno) from None
        if node < 0 or group < 0:
            raise SnapshotError("node and group must be non-negative", lineno)
        if node in labels:
            raise SnapshotError(f"node {node} listed twice", lineno)
        labels[node] = group
    if not labels:
        raise SnapshotError("empty partition file")
    n = max(labels) + 1
    if len(labels) != n:
        missing = min(set(range(n)) - set(labels))
        raise SnapshotError(f"node {missing} has no group")
    g = np.array([labels[i] for i in range(n)], dtype=np.int64)
    return Partition(int(g.max()) + 1 if k is None else k, g)


def read_partition(path, k=None) -> Partition:
    with open(path) as fh:
        return parse_partition(fh.read(), k)


CSV_HEADER = "delta,eta,T,rep,seed,nmi,status"


def render_benchmark_csv(result) -> str:
    out = [CSV_HEADER]
    for r in result.rows:
        nmi = "" if math.isnan(r.nmi) else repr(float(r.nmi))
        status = r.status.replace(",", ";").replace("\n", " ")
        out.append(f"{r.delta!r},{r.eta!r},{r.T},{r.rep},{r.seed},{nmi},{status}")
    return "\n".join(out) + "\n"
