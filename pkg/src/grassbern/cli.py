"""Command-line front end.  Exit codes: 0 success, 2 validation error, 3 check failure."""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import flow as fl
from . import gaussmap as gg
from . import grassmann as gm
from . import regions as rg
from . import verify as vf
from .report import to_jsonable

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 2, 3


class CliError(ValueError):
    pass


def _emit(text: str, output):
    if output:
        Path(output).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _csv(header, rows) -> str:
    def fmt(v):
        if isinstance(v, (bool, np.bool_)):
            return str(int(v))
        if isinstance(v, (float, np.floating)):
            return format(float(v), ".17g")
        return str(v)

    return "\n".join([",".join(header)] + [",".join(fmt(v) for v in row) for row in rows]) + "\n"


def _numbers(tokens, what):
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise CliError(f"{what}: expected numbers, got {tokens}") from exc


def _frame(values, p, n, what):
    vals = _numbers(values, what)
    if len(vals) != n * p:
        raise CliError(f"{what}: need {n * p} entries (row-major {n} x {p})")
    return gm.OrientedFrame.orthonormalize(np.array(vals).reshape(n, p)).cols


def parse_direction(spec, p: int, n: int) -> np.ndarray:
    """'type1 i a' | 'type2 i j [a b]' | 'lambdas l1 .. lr' | 'matrix a11 .. apq' -> p x q matrix."""
    if not spec:
        raise CliError("empty direction spec")
    kind, args = spec[0], spec[1:]
    q = n - p
    A = np.zeros((p, q))

    def idx(tok, hi, label):
        try:
            k = int(tok)
        except ValueError as exc:
            raise CliError(f"{label} must be an integer, got {tok!r}") from exc
        if not 1 <= k <= hi:
            raise CliError(f"{label} must lie in 1..{hi}")
        return k - 1

    if kind == "type1":
        if len(args) != 2:
            raise CliError("type1 takes 'i alpha'")
        A[idx(args[0], p, "i"), idx(args[1], q, "alpha")] = 1.0
    elif kind == "type2":
        if len(args) not in (2, 4):
            raise CliError("type2 takes 'i j' or 'i j alpha beta'")
        i, j = idx(args[0], p, "i"), idx(args[1], p, "j")
        a, b = (0, 1) if len(args) == 2 else (idx(args[2], q, "alpha"), idx(args[3], q, "beta"))
        if i == j or a == b or q < 2:
            raise CliError("type2 needs two distinct columns and two distinct normals")
        A[i, a] = A[j, b] = 1 / math.sqrt(2)
    elif kind == "lambdas":
        lam = _numbers(args, "lambdas")
        if not 1 <= len(lam) <= min(p, q):
            raise CliError(f"between 1 and {min(p, q)} speeds required")
        A[np.arange(len(lam)), np.arange(len(lam))] = lam
    elif kind == "matrix":
        vals = _numbers(args, "matrix")
        if len(vals) != p * q:
            raise CliError(f"matrix needs {p * q} entries")
        A = np.array(vals).reshape(p, q)
    else:
        raise CliError(f"unknown direction kind {kind!r}")
    if not np.any(A):
        raise CliError("direction is zero")
    return A


def _base(args):
    if args.p is None or args.n is None or not 1 <= args.p < args.n:
        raise CliError("need 1 <= p < n")
    if args.base:
        return gm.GrassPoint(gm.OrientedFrame(_frame(args.base, args.p, args.n, "base")))
    return vf.coordinate_point(args.p, args.n)


def cmd_geodesic(args) -> int:
    w = _base(args)
    X = gm.kozlov_canonical(w, parse_direction(args.dir, args.p, args.n))
    if args.steps < 1:
        raise CliError("steps must be positive")
    ts = np.linspace(0.0, args.tmax, args.steps + 1)
    rows = []
    for t, F in zip(ts, gm.geodesic_frames(X, ts)):
        rows.append((t, gm.w_product(w, F), gm.dist(w, F), gm.in_BG(w, F)))
    header = ["t", "w_product", "dist", "in_BG"]
    if args.format == "json":
        _emit(_json({"lambdas": X.lambdas, "rows": [dict(zip(header, r)) for r in rows]}), args.output)
    else:
        _emit(_csv(header, rows), args.output)
    return EXIT_OK


def cmd_dist(args) -> int:
    if not 1 <= args.p < args.n:
        raise CliError("need 1 <= p < n")
    A = _frame(args.a, args.p, args.n, "a")
    B = _frame(args.b, args.p, args.n, "b")
    _emit(_json({"dist": gm.dist(A, B), "angles": gm.oriented_principal_angles(A, B),
                 "w_product": gm.w_product(A, B), "in_BG": gm.in_BG(A, B)}), args.output)
    return EXIT_OK


def cmd_canonical(args) -> int:
    w = _base(args)
    X = gm.kozlov_canonical(w, parse_direction(args.dir, args.p, args.n))
    U = X.normalized()
    _emit(_json({"r": X.r, "lambdas": X.lambdas, "frame": X.frame, "normals": X.normals,
                 "norm": X.norm(), "t_crit_unit": gm.t_crit(U),
                 "period_unit": gm.closed_geodesic_period(U, max_k=args.k_max)}), args.output)
    return EXIT_OK


def cmd_region_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.region == "half-equator":
        R = rg.SphereMinusHalfEquator(args.eps)
    else:
        R = rg.build_codim2_region(vf.coordinate_point(args.p, args.n), args.eps)
    if args.check == "contains":
        if not args.point:
            raise CliError("--point is required for the contains check")
        vals = np.array(_numbers(args.point, "point"))
        x = vals if isinstance(R, rg.SphereMinusHalfEquator) else vals.reshape(args.n, args.p)
        _emit(_json({"region": args.region, "eps": args.eps, "contains": rg.contains(R, x)}), args.output)
        return EXIT_OK
    pts = rg.sample_region(R, args.samples, rng)
    if args.check == "condition-i":
        K = args.K if args.K is not None else (2 * math.pi if args.region == "half-equator" else math.pi)
        rep = rg.condition_i_check(R, [(x, R.space.random_unit_tangent(x, rng)) for x in pts], K)
    else:
        if args.region != "slab":
            raise CliError("no-closed-geodesic applies to the slab region")
        rep = rg.no_closed_geodesic_check(R, pts, k_max=args.k_max, seed=args.seed)
    rep.parameters["seed"] = args.seed
    _emit(rep.to_json() + "\n", args.output)
    return EXIT_OK if rep.passed else EXIT_FAILED


def cmd_flow(args) -> int:
    cfg = fl.parse_config(Path(args.config).read_text(encoding="utf-8"))
    rep = fl.run_config(cfg)
    prefix = args.output or "flow"
    Path(prefix + ".csv").write_text(rep.to_csv(), encoding="utf-8", newline="\n")
    Path(prefix + ".json").write_text(rep.to_json() + "\n", encoding="utf-8", newline="\n")
    sys.stdout.write(rep.to_json() + "\n")
    return EXIT_OK


def cmd_slope_scan(args) -> int:
    if args.grid_file:
        samples = gg.parse_grid_file(Path(args.grid_file).read_text(encoding="utf-8"))
        rep = gg.bernstein_verdict(samples, args.beta0, args.eps)
    else:
        if args.sampler not in gg.BUILTIN_SAMPLERS:
            raise CliError(f"unknown sampler {args.sampler!r}")
        f = gg.BUILTIN_SAMPLERS[args.sampler]()
        if args.growing:
            rep = gg.growing_box_scan(f, args.beta0, points=args.points)
        else:
            rep = gg.bernstein_verdict(gg.grid_samples(f, args.box, args.points), args.beta0, args.eps)
        rep.parameters["sampler"] = args.sampler
    _emit(rep.to_json() + "\n", args.output)
    return EXIT_OK if rep.passed else EXIT_FAILED


def cmd_verify(args) -> int:
    res = vf.run_suite(args.suite)
    _emit(vf.suite_json(res), args.output)
    return EXIT_OK if res["passed"] else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="grassbern", description=__doc__, allow_abbrev=False)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, fmt=False):
        sp.add_argument("--output", default=None)
        sp.add_argument("--seed", type=int, default=0)
        if fmt:
            sp.add_argument("--format", choices=["csv", "json"], default="csv")

    g = sub.add_parser("geodesic", allow_abbrev=False, help="tabulate a geodesic from a base plane")
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--dir", nargs="+", required=True)
    g.add_argument("--tmax", type=float, default=2 * math.pi)
    g.add_argument("--steps", type=int, default=100)
    g.add_argument("--base", nargs="+", default=None)
    common(g, fmt=True)
    g.set_defaults(func=cmd_geodesic)

    d = sub.add_parser("dist", allow_abbrev=False, help="distance and oriented principal angles of two planes")
    d.add_argument("--p", type=int, required=True)
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--a", nargs="+", required=True)
    d.add_argument("--b", nargs="+", required=True)
    common(d)
    d.set_defaults(func=cmd_dist)

    c = sub.add_parser("canonical", allow_abbrev=False, help="canonical form of a tangent direction")
    c.add_argument("--p", type=int, required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--dir", nargs="+", required=True)
    c.add_argument("--base", nargs="+", default=None)
    c.add_argument("--k-max", type=int, default=64)
    common(c)
    c.set_defaults(func=cmd_canonical)

    r = sub.add_parser("region-check", allow_abbrev=False, help="membership and hypothesis checks for barrier regions")
    r.add_argument("--region", choices=["half-equator", "slab"], required=True)
    r.add_argument("--check", choices=["contains", "condition-i", "no-closed-geodesic"], default="contains")
    r.add_argument("--eps", type=float, default=0.1)
    r.add_argument("--p", type=int, default=2)
    r.add_argument("--n", type=int, default=4)
    r.add_argument("--point", nargs="+", default=None)
    r.add_argument("--samples", type=int, default=100)
    r.add_argument("--K", type=float, default=None)
    r.add_argument("--k-max", type=int, default=8)
    common(r)
    r.set_defaults(func=cmd_region_check)

    f = sub.add_parser("flow", allow_abbrev=False, help="run a heat-flow experiment from a key=value config")
    f.add_argument("--config", required=True)
    f.add_argument("--output", default=None, help="output prefix for .csv and .json")
    f.set_defaults(func=cmd_flow)

    s = sub.add_parser("slope-scan", allow_abbrev=False, help="Bernstein verdict for codimension-2 graph data")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--sampler")
    src.add_argument("--grid-file")
    s.add_argument("--beta0", type=float, default=2.0)
    s.add_argument("--eps", type=float, default=None)
    s.add_argument("--box", type=float, default=10.0)
    s.add_argument("--points", type=int, default=9)
    s.add_argument("--growing", action="store_true")
    common(s)
    s.set_defaults(func=cmd_slope_scan)

    v = sub.add_parser("verify", allow_abbrev=False, help="run a verification suite")
    v.add_argument("--suite", choices=list(vf.SUITES) + ["all"], default="all")
    v.add_argument("--output", default=None)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
