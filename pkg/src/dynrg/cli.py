"""Command-line interface: ``dynrg generate|fit|nmi|error-rate|benchmark``.

Exit codes: 0 success, 1 usage error, 2 data or model error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io
from .dyn_cl import ClParams, fit_cl, generate_cl, loglike_cl
from .dyn_dcsbm import (DcsbmParams, estimate_given_groups, fit_dcsbm, generate_dcsbm,
                        loglike_dcsbm)
from .dyn_er import ErParams, fit_er, generate_er, loglike_er
from .errors import DynrgError
from .metrics import error_rate, nmi
from .snapshots import Partition
from .synthgen import PANELS, BenchmarkSpec, benchmark_params, panel_spec, run_benchmark


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text):
    return tuple(int(x) for x in text.split(",") if x.strip())


def build_parser():
    p = _Parser(prog="dynrg", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="sample a snapshot sequence")
    g.add_argument("--model", choices=("er", "cl", "dcsbm"), required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--T", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--params", help="parameter JSON (as written by fit) to sample from")
    g.add_argument("--alpha", type=float, help="er: appearance probability")
    g.add_argument("--beta", type=float, help="er/cl: disappearance probability")
    g.add_argument("--degrees", help="cl: file with one expected degree per line")
    g.add_argument("--multiplicities", help="cl/dcsbm: also save latent multiplicities (.npy)")
    g.add_argument("--k", type=int, default=2, help="dcsbm planted model: group count")
    g.add_argument("--c", type=float, default=16.0, help="dcsbm planted model: mean degree")
    g.add_argument("--delta", type=float, default=0.0)
    g.add_argument("--eta", type=float, default=0.0)
    g.add_argument("--beta-uniform", type=float, default=0.4)
    g.add_argument("--beta-in", type=float, default=0.3)
    g.add_argument("--beta-out", type=float, default=0.5)

    f = sub.add_parser("fit", help="maximum-likelihood fit of a snapshot file")
    f.add_argument("--model", choices=("er", "cl", "dcsbm"), required=True)
    f.add_argument("--input", required=True)
    f.add_argument("--out", required=True)
    f.add_argument("--tol", type=float, default=1e-12)
    f.add_argument("--max-iter", type=int, default=10000)
    f.add_argument("--k", type=int, help="dcsbm: group count")
    f.add_argument("--restarts", type=int, default=5)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--partition", help="dcsbm: fixed group file; skips the group search")
    f.add_argument("--partition-out", help="dcsbm: write the found groups here")

    m = sub.add_parser("nmi", help="normalized mutual information of two partition files")
    m.add_argument("--a", required=True)
    m.add_argument("--b", required=True)

    e = sub.add_parser("error-rate", help="misassigned fraction under the best label matching")
    e.add_argument("--found", required=True)
    e.add_argument("--truth", required=True)

    b = sub.add_parser("benchmark", help="planted-partition NMI sweep to CSV")
    b.add_argument("--panel", choices=sorted(PANELS))
    b.add_argument("--axis", choices=("delta", "eta"))
    b.add_argument("--values", type=_floats, help="comma-separated grid for the swept axis")
    b.add_argument("--out", required=True)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--n", type=int)
    b.add_argument("--k", type=int)
    b.add_argument("--c", type=float)
    b.add_argument("--delta", type=float)
    b.add_argument("--eta", type=float)
    b.add_argument("--beta-uniform", type=float)
    b.add_argument("--beta-in", type=float)
    b.add_argument("--beta-out", type=float)
    b.add_argument("--T-values", type=_ints)
    b.add_argument("--reps", type=int)
    b.add_argument("--seed", type=int)
    b.add_argument("--restarts", type=int)
    return p


def _cmd_generate(a):
    if a.params:
        params, doc = io.read_params(a.params)
        n = doc["n"] if a.n is None else a.n
    else:
        n = a.n
        if n is None:
            raise UsageError("--n is required unless --params is given")
        if a.model == "er":
            if a.alpha is None or a.beta is None:
                raise UsageError("er needs --alpha and --beta")
            params = ErParams(a.alpha, a.beta)
        elif a.model == "cl":
            if a.degrees is None or a.beta is None:
                raise UsageError("cl needs --degrees and --beta")
            params = ClParams(np.loadtxt(a.degrees, ndmin=1), a.beta)
        else:
            params = benchmark_params(BenchmarkSpec(n=n, k=a.k, c=a.c, delta=a.delta, eta=a.eta,
                                                    beta_uniform=a.beta_uniform, beta_in=a.beta_in,
                                                    beta_out=a.beta_out))
    if n is None or n < 1:
        raise UsageError("--n must be >= 1")
    if a.T < 0:
        raise UsageError("--T must be >= 0")
    tag = {ErParams: "er", ClParams: "cl", DcsbmParams: "dcsbm"}[type(params)]
    if tag != a.model:
        raise ValueError(f"--params holds a {tag} model, not {a.model}")
    mult = None
    if a.model == "er":
        seq = generate_er(n, a.T, params, seed=a.seed)
    elif a.model == "cl":
        seq, mult, _ = generate_cl(n, a.T, params, seed=a.seed, return_multiplicities=True)
    else:
        seq, mult, _ = generate_dcsbm(n, a.T, params, seed=a.seed, return_multiplicities=True)
    io.write_snapshots(a.out, seq)
    if a.multiplicities and mult is not None:
        np.save(a.multiplicities, mult)
    return 0


def _cmd_fit(a):
    seq = io.read_snapshots(a.input)
    part_text = None
    if a.model == "er":
        params = fit_er(seq, tol=a.tol, max_iter=a.max_iter)
        L = loglike_er(seq, params)
    elif a.model == "cl":
        params = fit_cl(seq, tol=a.tol, max_iter=a.max_iter)
        L = loglike_cl(seq, params)
    else:
        if a.partition:
            part = io.read_partition(a.partition, a.k)
            if part.n != seq.n:
                raise ValueError(f"partition covers {part.n} nodes, sequence has {seq.n}")
            params = estimate_given_groups(seq, part)
        else:
            if a.k is None:
                raise UsageError("dcsbm fit needs --k (or --partition)")
            params, _ = fit_dcsbm(seq, a.k, restarts=a.restarts, seed=a.seed)
        L = loglike_dcsbm(seq, params)
        part_text = io.render_partition(params.partition)
    text = io.dump_params(params, seq.n, seq.T, L)
    io.atomic_write(a.out, text)
    if a.partition_out and part_text is not None:
        io.atomic_write(a.partition_out, part_text)
    return 0


def _cmd_nmi(a):
    pa, pb = io.read_partition(a.a), io.read_partition(a.b)
    print(f"{nmi(pa, pb):.6f}")
    return 0


def _cmd_error_rate(a):
    found, truth = io.read_partition(a.found), io.read_partition(a.truth)
    k = max(found.k, truth.k)
    print(f"{error_rate(Partition(k, found.g), Partition(k, truth.g)):.6f}")
    return 0


def _cmd_benchmark(a):
    overrides = {key: getattr(a, key) for key in
                 ("n", "k", "c", "delta", "eta", "beta_uniform", "beta_in", "beta_out",
                  "T_values", "reps", "seed", "restarts") if getattr(a, key) is not None}
    if a.panel:
        spec, axis, values = panel_spec(a.panel, **overrides)
    else:
        spec, axis, values = BenchmarkSpec(**overrides), "delta", None
    if a.axis:
        axis = a.axis
    if a.values is not None:
        values = a.values
    if a.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    result = run_benchmark(spec, axis, values, jobs=a.jobs)
    io.atomic_write(a.out, io.render_benchmark_csv(result))
    io.atomic_write(a.out + ".meta.json", json.dumps(result.metadata, indent=2, sort_keys=True) + "\n")
    failed = sum(r.status != "ok" for r in result.rows)
    if failed:
        print(f"{failed} of {len(result.rows)} rows failed", file=sys.stderr)
    return 0


COMMANDS = {"generate": _cmd_generate, "fit": _cmd_fit, "nmi": _cmd_nmi,
            "error-rate": _cmd_error_rate, "benchmark": _cmd_benchmark}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (DynrgError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"dynrg: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
