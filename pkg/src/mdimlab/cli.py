"""Command-line front end.

Subcommands (see README for the full flag reference)::

    map eval | map mdim-formula | map holder
    entropy estimate
    matrix bound
    dims box | dims assouad | dims spectrum
    tube measure
    report

Every invocation prints a one-line JSON summary to stdout and writes its
artifact under --out with a fixed name (entropy.csv, bounds.json, dims.json,
tube.json, report.json).  Data files are byte-deterministic for identical
arguments; run provenance (timestamp, argv) goes to a separate run_meta.json.
All logarithms are natural.  Exit codes: 0 success, 2 validation/usage error,
1 runtime error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .params import ParameterError, ParameterSpec, spec_from_config
from .horseshoe import DomainError, HorseshoeMap
from ._piecewise import ConstantMap, IdentityMap
from .metric_engine import (CountingError, PointCloud, ResolutionError,
                            entropy_ladder, write_entropy_csv)
from .fractal_dims import (assouad_dimension, assouad_spectrum, box_dimension,
                           cantor_endpoints, dyadic_grid)
from .transition_spectral import (MatrixBuildError, bound, build_cover,
                                  build_matrix_exact, build_matrix_sampled,
                                  build_mesh_cover)
from .orbit_tube import corollary43_estimate, enumerate_orbit_cells, tube_bracket

ARTIFACTS = ("entropy.csv", "bounds.json", "dims.json", "tube.json")


class UsageError(ValueError):
    pass


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _write_meta(outdir, argv) -> None:
    meta = {"argv": list(argv), "version": __version__, "timestamp": time.time()}
    _write_json(os.path.join(outdir, "run_meta.json"), meta)


def parse_ladder(text: str) -> list[float]:
    """Either "2^-A..2^-B" (A < B, powers of two) or a comma list of floats."""
    text = text.strip()
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)

        def exp_of(s: str) -> int:
            s = s.strip()
            if not s.startswith("2^-"):
                raise UsageError(f"ladder bound {s!r} must look like 2^-K")
            return int(s[3:])

        a, b = exp_of(lo_s), exp_of(hi_s)
        if a >= b:
            raise UsageError("ladder spec 2^-A..2^-B needs A < B")
        return [2.0 ** -j for j in range(a, b + 1)]
    vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise UsageError("empty ladder")
    return vals


def map_from_args(args) -> object:
    if getattr(args, "map", None):
        name = args.map
        if name == "blackbox:identity":
            return IdentityMap()
        if name.startswith("blackbox:constant"):
            c = name.split(":", 2)[-1]
            return ConstantMap(float(c.split("=", 1)[1]) if "=" in c else 0.0)
        raise UsageError(f"unknown builtin map {name!r}")
    if getattr(args, "config", None):
        with open(args.config) as fh:
            return HorseshoeMap(spec_from_config(json.load(fh)))
    if getattr(args, "gaps", None):
        gaps = [float(v) for v in args.gaps.split(",")]
        branches = [int(v) for v in args.branches.split(",")]
        return HorseshoeMap(ParameterSpec.explicit(gaps, branches))
    preset = getattr(args, "preset", None)
    if preset == "preset1":
        return HorseshoeMap(ParameterSpec.preset1(args.k_max))
    if preset == "preset2":
        if args.beta is None:
            raise UsageError("preset2 requires --beta")
        return HorseshoeMap(ParameterSpec.preset2(args.beta, args.k_max))
    if preset == "preset3":
        return HorseshoeMap(ParameterSpec.preset3(args.k_max))
    raise UsageError("no map given: use --preset/--gaps/--config/--map")


def _add_map_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=["preset1", "preset2", "preset3"])
    p.add_argument("--beta", type=float)
    p.add_argument("--k-max", dest="k_max", type=int, default=64)
    p.add_argument("--gaps", help="comma list of gap lengths (explicit spec)")
    p.add_argument("--branches", help="comma list of odd branch counts")
    p.add_argument("--config", help="JSON parameter-spec file")
    p.add_argument("--map", help="blackbox:identity | blackbox:constant=c")


def cloud_from_args(args) -> PointCloud:
    if args.cloud:
        pts = np.loadtxt(args.cloud, delimiter=",", ndmin=2)
        return PointCloud(pts, metric=args.metric)
    if args.builtin:
        kind, _, param = args.builtin.partition(":")
        if kind == "dyadic":
            return PointCloud(dyadic_grid(int(param or 1024)), metric=args.metric)
        if kind == "cantor":
            return PointCloud(cantor_endpoints(int(param or 10)), metric=args.metric)
        raise UsageError(f"unknown builtin cloud {args.builtin!r}")
    raise UsageError("no cloud given: use --cloud file.csv or --builtin dyadic:N|cantor:D")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_map(args, outdir, argv) -> int:
    m = map_from_args(args)
    if args.action == "eval":
        if not isinstance(m, HorseshoeMap):
            y = m(args.x)
        else:
            y = m.eval(args.x)
        _emit({"x": args.x, "y": y})
        return 0
    if not isinstance(m, HorseshoeMap):
        raise UsageError("closed forms need a horseshoe parameter spec")
    if args.action == "mdim-formula":
        report = m.mdim_formula(args.k_max)
        _emit(report.as_dict())
        return 0
    if args.action == "holder":
        if args.alpha is None:
            raise UsageError("map holder requires --alpha")
        hs = m.holder_constants(min(args.k_max, 400), args.alpha)
        argmax = int(hs.argmax()) + 1
        _emit({
            "alpha": args.alpha,
            "max": float(hs.max()),
            "argmax_k": argmax,
            "tail_decreasing": bool(np.all(np.diff(hs[argmax - 1:]) < 0.0)),
            "final": float(hs[-1]),
        })
        return 0
    raise UsageError(f"unknown map action {args.action!r}")


def cmd_entropy(args, outdir, argv) -> int:
    m = map_from_args(args)
    ladder = parse_ladder(args.eps_ladder)
    result = entropy_ladder(m, ladder, args.n_max, args.delta, method=args.method,
                            enforce_resolution=not args.force)
    path = os.path.join(outdir, "entropy.csv")
    write_entropy_csv(result, path)
    _write_meta(outdir, argv)
    rows = result.summary_rows()
    _emit({"artifact": path,
           "h_eps": {repr(r.epsilon): r.h_eps for r in rows},
           "method": result.method})
    return 0


def cmd_matrix(args, outdir, argv) -> int:
    m = map_from_args(args)
    ladder = parse_ladder(args.eps_ladder) if args.eps_ladder else [args.eps]
    if any(e is None for e in ladder):
        raise UsageError("matrix bound needs --eps or --eps-ladder")
    method = args.method.replace("-", "_")
    entries = []
    for eps in ladder:
        cover = build_mesh_cover(eps) if args.cover == "mesh" else build_cover(eps)
        if args.sampled:
            matrix = build_matrix_sampled(m, cover, args.samples)
        else:
            matrix = build_matrix_exact(m, cover)
        sb = bound(matrix, method, k=args.k)
        entry = {"epsilon": eps, "cover": args.cover, "size": matrix.size}
        entry.update(sb.as_dict())
        entry["bound_log"] = sb.value
        entries.append(entry)
        if args.dump_matrix:
            matrix.write_coo(os.path.join(outdir, f"matrix_{eps!r}.txt"))
    path = os.path.join(outdir, "bounds.json")
    _write_json(path, {"bounds": entries})
    _write_meta(outdir, argv)
    _emit({"artifact": path, "bound_log": entries[-1]["bound_log"], "method": method})
    return 0


def cmd_dims(args, outdir, argv) -> int:
    cloud = cloud_from_args(args)
    ladder = parse_ladder(args.eps_ladder) if args.eps_ladder else None
    if args.action == "box":
        upper, lower = box_dimension(cloud, ladder)
        payload = {"box_upper": upper.as_dict(), "box_lower": lower.as_dict()}
        headline = upper.value
    elif args.action == "spectrum":
        est = assouad_spectrum(cloud, args.theta, ladder)
        payload = {"assouad_spectrum": est.as_dict()}
        headline = est.value
    elif args.action == "assouad":
        if ladder is None:
            raise UsageError("dims assouad needs --eps-ladder (base scales R)")
        pairs = [(eps / 2.0 ** args.pair_gap, eps) for eps in ladder]
        est = assouad_dimension(cloud, pairs)
        payload = {"assouad": est.as_dict()}
        headline = est.value
    else:
        raise UsageError(f"unknown dims action {args.action!r}")
    path = os.path.join(outdir, "dims.json")
    _write_json(path, payload)
    _write_meta(outdir, argv)
    _emit({"artifact": path, "value": headline, "kind": args.action})
    return 0


def cmd_tube(args, outdir, argv) -> int:
    m = map_from_args(args)
    ladder = parse_ladder(args.eps_ladder) if args.eps_ladder else [args.eps]
    if any(e is None for e in ladder):
        raise UsageError("tube measure needs --eps or --eps-ladder")
    budget = None if args.no_budget else 10 ** 9
    estimates = corollary43_estimate(m, args.n, ladder, budget=budget)
    payload = {"entries": [e.as_dict() for e in estimates]}
    path = os.path.join(outdir, "tube.json")
    _write_json(path, payload)
    if args.dump_cells:
        cells = enumerate_orbit_cells(m, min(args.n, 4), ladder[-1], budget=budget)
        with open(os.path.join(outdir, "tube_cells.txt"), "w") as fh:
            fh.write("\n".join(" ".join(str(c) for c in t) for t in cells) + "\n")
    _write_meta(outdir, argv)
    _emit({"artifact": path,
           "estimates": [e.estimate for e in estimates]})
    return 0


def cmd_report(args, outdir, argv) -> int:
    inputs = {}
    for name in ARTIFACTS:
        path = os.path.join(outdir, name)
        if not os.path.exists(path):
            continue
        with open(path, "rb") as fh:
            blob = fh.read()
        entry = {"sha256": hashlib.sha256(blob).hexdigest(), "bytes": len(blob)}
        if name.endswith(".json"):
            entry["content"] = json.loads(blob.decode())
        else:
            entry["rows"] = blob.decode().count("\n") - 1
        inputs[name] = entry
    if not inputs:
        raise UsageError(f"no artifacts found under {outdir}; run the other subcommands first")
    path = os.path.join(outdir, "report.json")
    _write_json(path, {"inputs": inputs})
    _emit({"artifact": path, "inputs": sorted(inputs)})
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mdimlab",
        description="Metric mean dimension laboratory for interval maps "
                    "(all logarithms natural; outputs deterministic).",
    )
    ap.add_argument("--out", default="out", help="artifact directory (default ./out)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("map", help="evaluate the map / closed-form reports")
    p.add_argument("action", choices=["eval", "mdim-formula", "holder"])
    _add_map_args(p)
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--alpha", type=float)

    p = sub.add_parser("entropy", help="sampled eps-entropy ladder")
    p.add_argument("action", choices=["estimate"])
    _add_map_args(p)
    p.add_argument("--eps-ladder", required=True)
    p.add_argument("--n-max", dest="n_max", type=int, default=8)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--method", choices=["separated", "spanning", "cover"], default="separated")
    p.add_argument("--force", action="store_true",
                   help="run even when the grid cannot resolve the horizon")

    p = sub.add_parser("matrix", help="transition-matrix spectral bounds")
    p.add_argument("action", choices=["bound"])
    _add_map_args(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--eps-ladder")
    p.add_argument("--method", default="gershgorin-row",
                   choices=["gershgorin-row", "gershgorin-col", "knorm", "power-iteration"])
    p.add_argument("--k", type=int, default=12)
    p.add_argument("--cover", choices=["mesh", "ball"], default="mesh")
    p.add_argument("--sampled", action="store_true")
    p.add_argument("--samples", type=int, default=16)
    p.add_argument("--dump-matrix", action="store_true")

    p = sub.add_parser("dims", help="fractal dimension estimators")
    p.add_argument("action", choices=["box", "assouad", "spectrum"])
    p.add_argument("--cloud", help="CSV, one point per row, no header")
    p.add_argument("--builtin", help="dyadic:N | cantor:DEPTH")
    p.add_argument("--metric", choices=["euclidean", "sup"], default="euclidean")
    p.add_argument("--eps-ladder")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--pair-gap", dest="pair_gap", type=int, default=3,
                   help="assouad pairs (R/2^gap, R) from the ladder")

    p = sub.add_parser("tube", help="orbit-tube volume brackets")
    p.add_argument("action", choices=["measure"])
    _add_map_args(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--eps-ladder")
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--dump-cells", action="store_true")
    p.add_argument("--no-budget", action="store_true")

    sub.add_parser("report", help="combine existing artifacts into report.json")
    return ap


def run(argv) -> int:
    """Entry point returning an exit code (0 ok, 2 validation, 1 runtime)."""
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    outdir = args.out
    try:
        os.makedirs(outdir, exist_ok=True)
        if args.command == "map":
            return cmd_map(args, outdir, argv)
        if args.command == "entropy":
            return cmd_entropy(args, outdir, argv)
        if args.command == "matrix":
            return cmd_matrix(args, outdir, argv)
        if args.command == "dims":
            return cmd_dims(args, outdir, argv)
        if args.command == "tube":
            return cmd_tube(args, outdir, argv)
        if args.command == "report":
            return cmd_report(args, outdir, argv)
        raise UsageError(f"unknown command {args.command!r}")
    except (UsageError, ParameterError, DomainError, CountingError,
            MatrixBuildError, ResolutionError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except Exception as exc:  # runtime failure
        sys.stderr.write(f"runtime error: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
