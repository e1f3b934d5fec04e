"""Acceptance criteria at their stated tolerances, one PASS/FAIL line each."""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from grassbern import flow as fl
from grassbern import gaussmap as gg
from grassbern import grassmann as gm
from grassbern import regions as rg
from grassbern import verify as vf
from grassbern.multivec import MultiVector, inner_mult, scalar_product, wedge

from conftest import record_criterion


def coord(p, n):
    return gm.GrassPoint(gm.OrientedFrame(np.eye(n)[:, :p]))


def test_criterion_01_type2_cos_law():
    start = time.perf_counter()
    errs = []
    for p, n in ((2, 4), (3, 6)):
        w = coord(p, n)
        X2 = vf.equal_speed_direction(w, 2)
        ts = np.linspace(0, 4 * math.pi, 1000)
        got = np.array([scalar_product(MultiVector.from_columns(F), w.plucker) for F in gm.geodesic_frames(X2, ts)])
        errs.append(np.max(np.abs(got - np.cos(ts / math.sqrt(2)) ** 2)))
    elapsed = time.perf_counter() - start
    ok = max(errs) < 1e-10 and elapsed < 1.0
    record_criterion(1, "type-2 cos^2 law", ok, f"max_err={max(errs):.2e} time={elapsed:.2f}s")
    assert ok


def test_criterion_02_cos_power_law():
    w = coord(3, 6)
    X = vf.equal_speed_direction(w, 3)
    ts = np.linspace(0, 2 * math.sqrt(3) * math.pi, 1000)
    got = np.array([scalar_product(MultiVector.from_columns(F), w.plucker) for F in gm.geodesic_frames(X, ts)])
    err = np.max(np.abs(got - np.cos(ts / math.sqrt(3)) ** 3))
    ok = err < 1e-10
    record_criterion(2, "cos^3 law r0=3", ok, f"max_err={err:.2e}")
    assert ok


def test_criterion_03_closed_geodesic_periods():
    cases = [((2, 4), 1, 2 * math.pi), ((2, 4), 2, math.sqrt(2) * math.pi), ((3, 6), 3, 2 * math.sqrt(3) * math.pi)]
    worst = 0.0
    for (p, n), r, expected in cases:
        w = coord(p, n)
        X = vf.equal_speed_direction(w, r)
        T = gm.closed_geodesic_period(X)
        back = gm.geodesic_eval(X, T)
        worst = max(worst, abs(T - expected), np.max(np.abs(back.plucker.coeffs - w.plucker.coeffs)))
    ok = worst < 1e-9
    record_criterion(3, "closed geodesic periods", ok, f"worst={worst:.2e}")
    assert ok


def test_criterion_04_critical_times():
    h = 1e-4
    cases = [((2, 4), 1, math.pi / 2), ((2, 4), 2, math.sqrt(2) * math.pi / 4), ((3, 6), 3, math.sqrt(3) * math.pi / 4)]
    ok = True
    worst = 0.0
    for (p, n), r, expected in cases:
        w = coord(p, n)
        X = vf.equal_speed_direction(w, r)
        tc = gm.t_crit(X)
        worst = max(worst, abs(tc - expected))
        ts = np.arange(0, 2 * expected, h)
        flags = np.array([gm.in_BG(w, F) for F in gm.geodesic_frames(X, ts)])
        k = int(np.argmin(flags))
        # inside up to the last grid point at or before t_crit, outside from the next one on
        ok &= bool(flags[:k].all() and not flags[k:].any() and ts[k - 1] - 1e-9 <= tc <= ts[k] + 1e-9)
    ok &= worst < 1e-15
    record_criterion(4, "critical times vs B_G transitions", ok, f"closed_form_err={worst:.1e} grid={h}")
    assert ok


def test_criterion_05_diameter():
    rng = np.random.default_rng(5)
    d = []
    for k in range(10000):
        P = gm.random_point(2, 4, rng)
        Q = -P if k < 20 else gm.random_point(2, 4, rng)
        d.append(gm.dist(P, Q))
    dmax = max(d)
    ok = gm.diameter(2, 4) == math.pi and math.pi - 0.05 <= dmax <= math.pi + 1e-9
    record_criterion(5, "diameter of G+(2,4)", ok, f"max_dist={dmax:.12f}")
    assert ok


def test_criterion_06_slope_reciprocal():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(10000):
        p, q = (int(v) for v in rng.integers(1, 5, size=2))
        J = rng.standard_normal((p, q)) * rng.uniform(0, 3)
        s = gg.GraphJacobianSample(np.zeros(p), J)
        # oracle: det of the top p x p block of the orthonormalized graph frame times sqrt(det(I + J J^T))
        w = gm.w_product(gg.gauss_point(s), gg.base_point(p, q))
        worst = max(worst, abs(w * math.sqrt(np.linalg.det(np.eye(p) + J @ J.T)) - 1))
    ok = worst < 1e-10
    record_criterion(6, "slope reciprocal law", ok, f"max_err={worst:.2e}")
    assert ok


def test_criterion_07_adjoint_fuzz():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(10000):
        n = int(rng.integers(1, 7))
        p = int(rng.integers(0, n + 1))
        q = int(rng.integers(0, p + 1))
        om, xi, phi = (MultiVector(n, k, rng.standard_normal(math.comb(n, k))) for k in (p, q, p - q))
        worst = max(worst, abs(scalar_product(inner_mult(om, xi), phi) - scalar_product(om, wedge(xi, phi))))
    ok = worst < 1e-10
    record_criterion(7, "adjoint identity fuzz", ok, f"max_err={worst:.2e}")
    assert ok


def test_criterion_08_exp_log():
    rng = np.random.default_rng(8)
    worst = 0.0
    for p, n in ((2, 4), (3, 6)):
        done = 0
        while done < 1000:
            w, v = gm.random_point(p, n, rng), gm.random_point(p, n, rng)
            if gm.oriented_principal_angles(w, v)[0] >= math.pi - 0.1:
                continue
            worst = max(worst, gm.dist(gm.exp_map(w, gm.log_map(w, v).matrix()), v))
            done += 1
    ok = worst < 1e-7
    record_criterion(8, "exp/log round trip", ok, f"max_dist={worst:.2e}")
    assert ok


def test_criterion_09_property_star_probe():
    cfg = fl.FlowConfig(target="sphere", region="half_equator", eps=0.2, initial="banana", m=32, budget=200000)
    rep = fl.run_config(cfg)
    collapse_ok = rep.classification == "collapsed to constant" and rep.final_diameter < 1e-3
    mesh = fl.build_torus_mesh(64)
    S = fl.SphereTarget(2)
    U = fl.sphere_initial("equator", 64)
    for _ in range(10000):
        U = fl.flow_step(mesh, S, U, fl.default_step(mesh))
    diam, tn = fl.image_diameter(U), fl.tension(mesh, S, U)[1]
    ok = collapse_ok and diam > 1 and tn < 1e-2
    record_criterion(9, "heat-flow probe (evidence only)", ok,
                     f"collapse_steps={rep.steps} final_diam={rep.final_diameter:.1e} "
                     f"equator_diam={diam:.3f} equator_tension={tn:.1e}")
    assert ok


def test_criterion_10_codim2_region_coherence():
    start = time.perf_counter()
    results = {}
    for p, n in ((2, 4), (4, 6)):
        w = coord(p, n)
        R = rg.build_codim2_region(w, vf.SLAB_EPS)
        rng = np.random.default_rng(10 + n)
        pts = rg.sample_region(R, 100, rng)
        loops = rg.no_closed_geodesic_check(R, pts, k_max=8, seed=n)
        cond = rg.condition_i_check(R, [(x, R.space.random_unit_tangent(x, rng)) for x in pts], math.pi)
        results[(p, n)] = (loops, cond)
    elapsed = time.perf_counter() - start
    ok = all(a.passed and b.passed for a, b in results.values()) and elapsed < 60
    detail = " ".join(
        f"G({p},{n}):loops_inside={a.details['violations']}/{a.details['closed_loops']},"
        f"max_exit={b.worst_case['exit_time']}"
        for (p, n), (a, b) in results.items()
    )
    record_criterion(10, "codim-2 slab: no closed geodesics, exits by pi", ok, f"{detail} time={elapsed:.1f}s")
    assert ok


def test_criterion_11_verify_determinism(tmp_path):
    outs = []
    start = time.perf_counter()
    for k in range(2):
        path = tmp_path / f"all{k}.json"
        subprocess.run([sys.executable, "-m", "grassbern.cli", "verify", "--suite", "all", "--output", str(path)],
                       check=False, capture_output=True)
        outs.append(path.read_bytes())
    per_run = (time.perf_counter() - start) / 2
    ok = outs[0] == outs[1] and per_run < 300
    record_criterion(11, "verify --suite all is byte-identical", ok, f"per_run={per_run:.1f}s")
    assert ok
