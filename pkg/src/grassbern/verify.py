"""Named verification suites reproducing the toolkit's reference numbers.

Every check returns a Report; suite output carries no timings so that two runs
serialize to identical bytes.
"""
from __future__ import annotations

import json
import math
from typing import Callable

import numpy as np

from . import flow as fl
from . import gaussmap as gg
from . import grassmann as gm
from . import regions as rg
from .multivec import MultiVector, inner_mult, is_simple, scalar_product, wedge
from .report import Report, to_jsonable

SLAB_EPS = 0.1


def _max_report(name, errors, tol, **params) -> Report:
    errors = np.asarray(errors, dtype=float)
    k = int(np.argmax(errors))
    return Report(name, bool(errors[k] < tol), int(errors.size),
                  {"index": k, "error": float(errors[k])}, {"tolerance": tol, **params})


def coordinate_point(p: int, n: int) -> gm.GrassPoint:
    return gm.GrassPoint(gm.OrientedFrame(np.eye(n)[:, :p]))


def equal_speed_direction(w: gm.GrassPoint, r: int) -> gm.TangentCanonical:
    """Unit direction rotating the first r columns into the first r normals at speed 1/sqrt(r)."""
    A = np.zeros((w.p, w.n - w.p))
    A[np.arange(r), np.arange(r)] = 1 / math.sqrt(r)
    return gm.kozlov_canonical(w, A)


def plucker_products(w: gm.GrassPoint, frames) -> np.ndarray:
    return np.array([scalar_product(MultiVector.from_columns(F), w.plucker) for F in frames])


def random_multivector(rng, n, p) -> MultiVector:
    return MultiVector(n, p, rng.standard_normal(math.comb(n, p)))


# -- algebra -----------------------------------------------------------------


def check_adjoint(count: int = 10000, seed: int = 7) -> Report:
    rng = np.random.default_rng(seed)
    errs = []
    for _ in range(count):
        n = int(rng.integers(1, 7))
        p = int(rng.integers(0, n + 1))
        q = int(rng.integers(0, p + 1))
        om, xi, phi = (random_multivector(rng, n, k) for k in (p, q, p - q))
        errs.append(abs(scalar_product(inner_mult(om, xi), phi) - scalar_product(om, wedge(xi, phi))))
    return _max_report("adjoint_identity", errs, 1e-10, seed=seed)


def check_anticommutativity(count: int = 2000, seed: int = 8) -> Report:
    rng = np.random.default_rng(seed)
    errs = []
    for _ in range(count):
        n = int(rng.integers(1, 7))
        p = int(rng.integers(0, n + 1))
        q = int(rng.integers(0, n - p + 1))
        a, b = random_multivector(rng, n, p), random_multivector(rng, n, q)
        errs.append(np.max(np.abs(wedge(a, b).coeffs - (-1) ** (p * q) * wedge(b, a).coeffs)))
    return _max_report("graded_anticommutativity", errs, 1e-12, seed=seed)


def check_simple_wedges(count: int = 200, seed: int = 9) -> Report:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(count):
        n = int(rng.integers(2, 9))
        p = int(rng.integers(1, min(4, n) + 1))
        bad += not is_simple(MultiVector.from_columns(rng.standard_normal((n, p))))
    return Report("random_wedges_simple", bad == 0, count, {"not_simple": bad}, {"seed": seed})


def check_basis_examples() -> Report:
    e = lambda *i: MultiVector.basis(4, i)
    cases = {
        "e1^e2": wedge(e(1), e(2)).allclose(e(1, 2)),
        "e1^e1": not np.any(wedge(e(1), e(1)).coeffs),
        "e12 _| e1": inner_mult(e(1, 2), e(1)).allclose(e(2)),
        "e12 _| e2": inner_mult(e(1, 2), e(2)).allclose(-e(1)),
        "e12 _| e12": abs(inner_mult(e(1, 2), e(1, 2)).coeffs[0] - 1) < 1e-15,
        "e12+e34 not simple": not is_simple(e(1, 2) + e(3, 4)),
    }
    failed = [k for k, ok in cases.items() if not ok]
    return Report("basis_examples", not failed, len(cases), {"failed": failed})


# -- grassmann ---------------------------------------------------------------


def check_cos_law(p: int, n: int, r: int, count: int = 1000) -> Report:
    """<w_X(t), w> = cos^r(t / sqrt(r)) along the equal-speed type-r direction."""
    w = coordinate_point(p, n)
    X = equal_speed_direction(w, r)
    ts = np.linspace(0, 2 * math.sqrt(r) * math.pi, count)
    got = plucker_products(w, gm.geodesic_frames(X, ts))
    return _max_report(f"cos_power_law_r{r}_G({p},{n})", np.abs(got - np.cos(ts / math.sqrt(r)) ** r),
                       1e-10, samples=count)


def check_periods() -> Report:
    cases = [((2, 4), 1, 2 * math.pi), ((2, 4), 2, math.sqrt(2) * math.pi),
             ((3, 6), 3, 2 * math.sqrt(3) * math.pi)]
    rows = []
    for (p, n), r, expected in cases:
        w = coordinate_point(p, n)
        X = equal_speed_direction(w, r)
        T = gm.closed_geodesic_period(X, max_k=64)
        back = gm.geodesic_eval(X, T).plucker
        rows.append({"p": p, "n": n, "r": r, "period": T, "expected": expected,
                     "period_error": abs(T - expected), "return_error": float(np.max(np.abs(back.coeffs - w.plucker.coeffs)))})
    ok = all(row["period_error"] < 1e-9 and row["return_error"] < 1e-9 for row in rows)
    worst = max(rows, key=lambda row: max(row["period_error"], row["return_error"]))
    return Report("closed_geodesic_periods", ok, len(rows), worst, {"tolerance": 1e-9}, {"cases": rows})


def check_critical_times(h: float = 1e-4) -> Report:
    cases = [((2, 4), 1, math.pi / 2), ((2, 4), 2, math.sqrt(2) * math.pi / 4),
             ((3, 6), 3, math.sqrt(3) * math.pi / 4)]
    rows = []
    for (p, n), r, expected in cases:
        w = coordinate_point(p, n)
        X = equal_speed_direction(w, r)
        tc = gm.t_crit(X)
        # scan only a window around the prediction; the set is convex so the exit is unique
        lo = expected - 0.01
        ts = lo + h * np.arange(int(0.02 / h) + 1)
        flags = [gm.in_BG(w, F, closed=True) for F in gm.geodesic_frames(X, ts)]
        k = next((j for j, f in enumerate(flags) if not f), None)
        inside_before = all(gm.in_BG(w, F) for F in gm.geodesic_frames(X, np.linspace(0, lo, 50)))
        bracket = None if k is None or k == 0 else (float(ts[k - 1]), float(ts[k]))
        rows.append({"r": r, "t_crit": tc, "expected": expected, "error": abs(tc - expected),
                     "grid_bracket": bracket, "inside_before_window": inside_before})
    ok = all(row["error"] < 1e-15 and row["grid_bracket"] is not None and row["inside_before_window"]
             and row["grid_bracket"][0] - 1e-9 <= row["t_crit"] <= row["grid_bracket"][1] + 1e-9
             for row in rows)
    return Report("critical_times", ok, len(rows), max(rows, key=lambda x: x["error"]),
                  {"grid_step": h}, {"cases": rows})


def check_diameter(count: int = 10000, seed: int = 11) -> Report:
    rng = np.random.default_rng(seed)
    d = []
    for k in range(count):
        P = gm.random_point(2, 4, rng)
        Q = -P if k < 10 else gm.random_point(2, 4, rng)
        d.append(gm.dist(P, Q))
    d = np.array(d)
    ok = gm.diameter(2, 4) == math.pi and d.max() <= math.pi + 1e-9 and d.max() >= math.pi - 0.05
    return Report("diameter_G(2,4)", bool(ok), count, {"max_dist": float(d.max())},
                  {"seed": seed, "antipodal_pairs": 10}, {"diameter": gm.diameter(2, 4)})


def check_exp_log(count: int = 1000, seed: int = 12) -> Report:
    rng = np.random.default_rng(seed)
    errs = []
    for p, n in ((2, 4), (3, 6)):
        done = 0
        while done < count:
            w, v = gm.random_point(p, n, rng), gm.random_point(p, n, rng)
            if gm.oriented_principal_angles(w, v)[0] >= math.pi - 0.1:
                continue
            back = gm.geodesic_eval(gm.log_map(w, v), 1.0)
            errs.append(gm.dist(back, v))
            done += 1
    return _max_report("exp_log_round_trip", errs, 1e-7, seed=seed)


# -- regions -----------------------------------------------------------------


def check_membership_examples() -> Report:
    R = rg.SphereMinusHalfEquator(0.1)
    w = coordinate_point(2, 4)
    S = rg.HemisphereSlab(w, 0.1)
    eq = gm.geodesic_eval(equal_speed_direction(w, 1), math.pi / 2)
    cases = {
        "north pole inside": rg.contains(R, [0, 0, 1]),
        "south pole outside": not rg.contains(R, [0, 0, -1]),
        "slab center inside": rg.contains(S, w.E),
        "slab equator outside": not rg.contains(S, eq.E),
        "slab antipode outside": not rg.contains(S, (-w).E),
    }
    failed = [k for k, ok in cases.items() if not ok]
    return Report("membership_examples", not failed, len(cases), {"failed": failed})


def check_tube_slabs(resolution: float = 0.02) -> Report:
    T = rg.half_equator_tube(0.2)
    net = rg.region_net(T, resolution)
    t0s = np.round(np.linspace(0.05, 0.95, 19), 2)
    res = [rg.slab_disconnection_check(T, t0, net=net, resolution=resolution) for t0 in t0s]
    bad = [float(t) for t, ok in zip(t0s, res) if not ok]
    return Report("tube_slab_disconnection", not bad, len(t0s), {"failing_t0": bad},
                  {"resolution": resolution, "eps": 0.2})


def check_half_equator_condition_i(count: int = 100, seed: int = 13) -> Report:
    R = rg.SphereMinusHalfEquator(0.2)
    rng = np.random.default_rng(seed)
    pts = rg.sample_region(R, count, rng)
    samples = [(x, R.space.random_unit_tangent(x, rng)) for x in pts]
    rep = rg.condition_i_check(R, samples, 2 * math.pi)
    rep.check = "half_equator_condition_i"
    rep.parameters["seed"] = seed
    return rep


def slab_samples(p: int, n: int, count: int, seed: int):
    w = coordinate_point(p, n)
    R = rg.build_codim2_region(w, SLAB_EPS)
    rng = np.random.default_rng(seed)
    pts = rg.sample_region(R, count, rng)
    return R, pts, rng


def check_codim2_no_closed_geodesic(p: int, n: int, count: int = 100, seed: int = 21) -> Report:
    R, pts, _ = slab_samples(p, n, count, seed)
    rep = rg.no_closed_geodesic_check(R, pts, k_max=8, seed=seed)
    rep.check = f"no_closed_geodesic_G({p},{n})"
    return rep


def check_codim2_condition_i(p: int, n: int, count: int = 100, seed: int = 21) -> Report:
    R, pts, rng = slab_samples(p, n, count, seed)
    samples = [(x, R.space.random_unit_tangent(x, rng)) for x in pts]
    rep = rg.condition_i_check(R, samples, math.pi)
    rep.check = f"slab_condition_i_G({p},{n})"
    rep.parameters["seed"] = seed
    return rep


# -- flow --------------------------------------------------------------------


def check_flow_collapse(recipe: str = "banana") -> Report:
    rep = fl.run_config(fl.FlowConfig(target="sphere", region="half_equator", eps=0.2,
                                      initial=recipe, m=32, budget=200000))
    ok = rep.classification == "collapsed to constant" and rep.final_diameter < 1e-3
    return Report(f"flow_collapse_{recipe}", ok, rep.steps,
                  {"final_diameter": rep.final_diameter, "first_exit_step": rep.first_exit_step},
                  rep.parameters, {"classification": rep.classification, "energy_increases": rep.energy_increases,
                                   "note": rep.note})


def check_flow_equator(m: int = 64, steps: int = 10000) -> Report:
    mesh = fl.build_torus_mesh(m)
    target = fl.SphereTarget(2)
    U = fl.sphere_initial("equator", m)
    tau = fl.default_step(mesh)
    for _ in range(steps):
        U = fl.flow_step(mesh, target, U, tau)
    diam = fl.image_diameter(U)
    tn = fl.tension(mesh, target, U)[1]
    return Report("flow_equator_persists", bool(diam > 1 and tn < 1e-2), steps,
                  {"diameter": diam, "tension_norm": tn}, {"m": m, "tau": tau})


def check_checkerboard_energy() -> Report:
    mesh = fl.build_torus_mesh(4)
    U = np.array([[0, 0, 1.0] if (k // 4 + k % 4) % 2 == 0 else [0, 0, -1.0] for k in range(16)])
    e = fl.energy(mesh, U)
    return Report("checkerboard_energy", abs(e - 64) < 1e-12, 1, {"energy": e})


# -- gauss -------------------------------------------------------------------


def check_reciprocal(count: int = 10000, seed: int = 14) -> Report:
    rng = np.random.default_rng(seed)
    errs = []
    for _ in range(count):
        p, q = (int(v) for v in rng.integers(1, 5, size=2))
        J = rng.standard_normal((p, q)) * rng.uniform(0, 3)
        errs.append(gg.reciprocal_check(gg.GraphJacobianSample(np.zeros(p), J)))
    return _max_report("slope_reciprocal", errs, 1e-10, seed=seed)


def check_verdicts() -> Report:
    rows = {}
    for name in ("affine", "sincos", "perturbed"):
        rep = gg.bernstein_verdict(gg.grid_samples(gg.BUILTIN_SAMPLERS[name]()), 2.0)
        rows[name] = {"passed": rep.passed, "min_w_product": rep.details["min_w_product"],
                      "gauss_spread": rep.details["gauss_spread"]}
    quad = gg.growing_box_scan(gg.quadratic_sampler(), 2.0)
    rows["quadratic"] = {"passed": quad.passed, "box": quad.parameters["box"]}
    ok = (rows["affine"]["passed"] and rows["affine"]["gauss_spread"] < 1e-12
          and rows["sincos"]["passed"] and rows["sincos"]["min_w_product"] >= 0.5
          and rows["perturbed"]["passed"] and rows["perturbed"]["gauss_spread"] > 0
          and not rows["quadratic"]["passed"])
    return Report("bernstein_verdicts", bool(ok), len(rows), None, {"beta0": 2.0}, rows)


SUITES: dict[str, list[Callable[[], Report]]] = {
    "algebra": [check_basis_examples, check_adjoint, check_anticommutativity, check_simple_wedges],
    "grassmann": [
        lambda: check_cos_law(2, 4, 2), lambda: check_cos_law(3, 6, 2), lambda: check_cos_law(3, 6, 3),
        check_periods, check_critical_times, check_diameter, check_exp_log,
    ],
    "regions": [
        check_membership_examples, check_tube_slabs, check_half_equator_condition_i,
        lambda: check_codim2_no_closed_geodesic(2, 4), lambda: check_codim2_no_closed_geodesic(4, 6),
        lambda: check_codim2_condition_i(2, 4), lambda: check_codim2_condition_i(4, 6),
    ],
    "flow": [check_checkerboard_energy, lambda: check_flow_collapse("cap"),
             lambda: check_flow_collapse("banana"), check_flow_equator],
    "gauss": [check_reciprocal, check_verdicts],
}


def run_suite(name: str) -> dict:
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all']}")
    checks = []
    for suite in names:
        for fn in SUITES[suite]:
            d = fn().to_dict()
            d["suite"] = suite
            checks.append(d)
    return to_jsonable({"suite": name, "passed": all(c["passed"] for c in checks), "checks": checks})


def suite_json(result: dict) -> str:
    return json.dumps(result, indent=2, sort_keys=True) + "\n"
