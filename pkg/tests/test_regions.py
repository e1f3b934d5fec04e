import math

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from grassbern import grassmann as gm
from grassbern import regions as rg
from grassbern.spaces import Euclidean, Sphere

S2 = 1 / math.sqrt(2)


def coord(p, n):
    return gm.GrassPoint(gm.OrientedFrame(np.eye(n)[:, :p]))


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


@pytest.fixture(scope="module")
def tube():
    return rg.half_equator_tube(0.2)


@pytest.fixture(scope="module")
def tube_net(tube):
    return rg.region_net(tube, 0.02)


def test_half_equator_membership():
    R = rg.SphereMinusHalfEquator(0.1)
    assert rg.contains(R, [0, 0, 1])
    assert not rg.contains(R, [0, 0, -1])
    # the arc's endpoints are (0, +-1, 0); the ball around them is removed too
    assert not rg.contains(R, unit([0.05, 1, 0.05]))
    assert rg.contains(R, unit([0, 1, 0.2]))
    assert rg.contains(R, [1, 0, 0])
    with pytest.raises(ValueError):
        rg.contains(R, [0, 0, 2])


@given(st.integers(0, 2**32 - 1))
def test_arc_distance_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    R = rg.SphereMinusHalfEquator(0.1)
    x = unit(rng.standard_normal(3))
    s = np.linspace(0, math.pi, 20001)
    arc = np.column_stack([0 * s, np.cos(s), -np.sin(s)])
    brute = np.min(np.arccos(np.clip(arc @ x, -1, 1)))
    assert R.arc_distance(x)[0] == pytest.approx(brute, abs=1e-3)


def test_slab_membership():
    w = coord(2, 4)
    S = rg.HemisphereSlab(w, 0.1)
    eq = gm.geodesic_eval(gm.type_k_directions(w, 1)[0], math.pi / 2)
    assert rg.contains(S, w.E)
    assert not rg.contains(S, eq.E)
    assert not rg.contains(S, (-w).E)
    with pytest.raises(ValueError):
        rg.HemisphereSlab(w, 2.0)


def test_slab_monotone_in_eps(rng):
    w = coord(3, 5)
    small, big = rg.HemisphereSlab(w, 0.1), rg.HemisphereSlab(w, 0.4)
    F = np.array([gm.random_point(3, 5, rng).E for _ in range(300)])
    assert np.all(rg.contains_many(small, F) >= rg.contains_many(big, F))


def test_product_region(rng):
    A = rg.SphereMinusHalfEquator(0.2)
    B = rg.SphereMinusHalfEquator(0.5)
    P = rg.ProductRegion(A, B)
    for _ in range(200):
        x, y = unit(rng.standard_normal(3)), unit(rng.standard_normal(3))
        assert rg.contains(P, (x, y)) == (rg.contains(A, x) and rg.contains(B, y))


def test_tube_validation():
    with pytest.raises(ValueError):
        rg.TubeAlongCurve(Sphere(2), np.eye(3), [0.1, 0.1, 2.0], [0, 1, 2], convexity_radius=1.0)
    with pytest.raises(ValueError):
        rg.TubeAlongCurve(Sphere(2), np.eye(3), [0.1, 0.1], [0, 1, 2])


def test_tube_membership_fast_path_matches_distances(tube, rng):
    X = rng.standard_normal((500, 3))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    slow = np.min(tube.space.pairwise(tube.centers, X) - tube.radii[:, None], axis=0) < 0
    assert np.array_equal(rg.contains_many(tube, X), slow)


@pytest.mark.parametrize("t0", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_half_equator_tube_splits(tube, tube_net, t0):
    assert rg.slab_disconnection_check(tube, t0, net=tube_net, resolution=0.02)


def test_constant_curve_tube_does_not_split():
    C = rg.TubeAlongCurve(Sphere(2), np.tile([0, 0, 1.0], (5, 1)), np.full(5, 0.5), np.linspace(0, 1, 5))
    assert not rg.slab_disconnection_check(C, 0.5)


def test_bulging_tube_does_not_split():
    eps = 0.1

    def curve(t):
        return np.array([-math.cos(math.pi * t), 0, math.sin(math.pi * t)])

    B = rg.TubeAlongCurve.from_curve(Sphere(2), curve, lambda t: eps / 2 + 9.5 * eps * math.sin(math.pi * t / eps) ** 2,
                                     0, eps, 401)
    assert not rg.slab_disconnection_check(B, eps / 4, resolution=0.01)


def test_slab_check_preconditions(tube):
    with pytest.raises(ValueError):
        rg.slab_disconnection_check(tube, 0.5, resolution=0.5)
    with pytest.raises(ValueError):
        rg.slab_disconnection_check(tube, 0.5, net=np.zeros((0, 3)))


def test_kappa_examples(tube):
    j = tube.index_of(0.4)
    k = rg.kappa(tube, tube.centers[j])
    assert k.values[j] == pytest.approx(-tube.radii[j])
    # a point on the boundary sphere of the ball at t0 = 0.4
    c = tube.centers[j]
    y = math.cos(tube.radii[j]) * c + math.sin(tube.radii[j]) * np.array([0, 1.0, 0])
    assert rg.kappa(tube, y).values[j] == pytest.approx(0, abs=1e-12)


def test_kappa_sign_change_brackets_closed_form(tube):
    eps = 0.2
    y = tube.centers[tube.index_of(0.7)]
    k = rg.kappa(tube, y, t0=0.0)
    t1 = 0.7 - (math.pi / 2 - eps / 2) / math.pi
    lo, hi = k.t1_bracket
    assert k.inside and lo <= t1 <= hi and hi - lo <= 1e-3 + 1e-12


def test_kappa_flags_outside_point(tube):
    assert not rg.kappa(tube, np.array([0, 0, -1.0])).inside


def test_condition_i_half_equator(rng):
    R = rg.SphereMinusHalfEquator(0.2)
    pts = rg.sample_region(R, 30, rng)
    rep = rg.condition_i_check(R, [(x, R.space.random_unit_tangent(x, rng)) for x in pts], 2 * math.pi)
    assert rep.passed and rep.worst_case["exit_time"] <= 2 * math.pi


def test_condition_i_full_sphere_never_exits():
    R = rg.TubeAlongCurve(Sphere(2), np.array([[0, 0, 1.0]]), [math.pi + 0.1], [0.0])
    rep = rg.condition_i_check(R, [(np.array([0, 0, 1.0]), np.array([1.0, 0, 0]))], 1.0, h=0.05)
    assert not rep.passed and rep.details["never_exited"] == [0]


def test_condition_i_type1_exit_time():
    eps = 0.1
    w = coord(2, 4)
    S = rg.HemisphereSlab(w, eps)
    X1 = gm.type_k_directions(w, 1)[0]
    rep = rg.condition_i_check(S, [(w.E, X1)], math.pi, h=1e-3)
    # w_product along the type-1 geodesic is cos t, which hits sin(eps) at pi/2 - eps
    assert rep.details["exit_times"][0] == pytest.approx(math.pi / 2 - eps, abs=1.1e-3)


def test_condition_i_rejects_outside_sample():
    R = rg.SphereMinusHalfEquator(0.2)
    with pytest.raises(ValueError):
        rg.condition_i_check(R, [(np.array([0, 0, -1.0]), np.array([1.0, 0, 0]))], 1.0)


def test_condition_ii_disc():
    D = rg.TubeAlongCurve(Euclidean(2), np.zeros((3, 2)), np.full(3, 1.0), np.linspace(0, 1, 3))
    rep = rg.condition_ii_check(D, np.zeros(2), np.array([1.0, 0]), 0.5, 16, 0.05, 0.01)
    dec = rep.details["decreasing"]
    assert rep.passed and 0 < dec.sum() < 16
    # the decreasing directions point back toward the centre
    dirs = rg._circle_directions(D.space, np.array([0.5, 0]), 16)
    assert np.all(dirs[dec] @ np.array([1.0, 0]) < 0)


def test_condition_ii_half_equator_matches_ambient():
    R = rg.SphereMinusHalfEquator(0.2)
    rep = rg.condition_ii_check(R, np.array([0, 0, 1.0]), np.array([0, 1.0, 0]), 0.6, 16, 0.05, 0.02)
    assert rep.passed and rep.details["agreement_with_ambient"] == 1.0


def test_condition_ii_band_around_closed_geodesic_fails():
    ts = np.linspace(0, 2 * math.pi, 2001)
    E = rg.TubeAlongCurve(Sphere(2), np.column_stack([np.cos(ts), np.sin(ts), 0 * ts]), np.full(ts.size, 0.2), ts)
    rep = rg.condition_ii_check(E, np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), math.pi, 16, 0.05, 0.02)
    assert not rep.passed


def test_condition_ii_preconditions():
    R = rg.SphereMinusHalfEquator(0.2)
    with pytest.raises(ValueError, match="coarse"):
        rg.condition_ii_check(R, np.array([0, 0, 1.0]), np.array([0, 1.0, 0]), 0.3, 4)
    with pytest.raises(ValueError, match="exit"):
        rg.condition_ii_check(R, np.array([0, 0, 1.0]), np.array([1.0, 0, 0]), 3.0)


def test_no_closed_geodesic_at_center_passes():
    # from the centre itself every type-1/type-2 loop dips to w_product <= 0
    w = coord(2, 4)
    S = rg.build_codim2_region(w, 0.1)
    rep = rg.no_closed_geodesic_check(S, [w], k_max=8, random_mixes=0)
    assert rep.passed and rep.details["closed_loops"] == 5


def test_no_closed_geodesic_irrational_is_vacuous():
    w = coord(2, 4)
    S = rg.build_codim2_region(w, 0.1)
    rep = rg.no_closed_geodesic_check(S, [w], k_max=8, random_mixes=0)
    X = gm.kozlov_canonical(w, np.diag([1.0, math.sqrt(2) - 1]))
    assert gm.closed_geodesic_period(X, max_k=8) is None
    assert rep.details["directions_checked"] == 5


def test_explicit_closed_geodesic_inside_slab_is_detected():
    # a type-2 loop through a plane at 45 degrees to w keeps w_product = 1/2 for all t
    w = coord(2, 4)
    f = np.array([[1, 0], [0, 1], [1, 0], [0, 1]]) * S2
    g = np.array([[0, -1], [1, 0], [0, 1], [-1, 0]]) * S2
    base = gm.GrassPoint(gm.OrientedFrame(f))
    X = gm.canonical_from_horizontal(base, g * S2)
    T = gm.closed_geodesic_period(X, max_k=8)
    assert T == pytest.approx(math.sqrt(2) * math.pi)
    wp = [gm.w_product(w, F) for F in gm.geodesic_frames(X, np.linspace(0, T, 200))]
    assert np.allclose(wp, 0.5, atol=1e-12)
    S = rg.build_codim2_region(w, 0.1)
    rep = rg.no_closed_geodesic_check(S, [(base, [X])], k_max=8, random_mixes=0)
    assert not rep.passed and rep.worst_case["direction"] == "extra[0]"


def test_build_codim2_region_examples():
    w = coord(3, 5)
    R = rg.build_codim2_region(w, 0.1)
    assert rg.contains(R, w.E) and not rg.contains(R, (-w).E)
    [X] = [d for d in gm.type_k_directions(w, 2)][:1]
    for t in np.linspace(0, 4, 30):
        z = gm.geodesic_eval(X, t)
        assert rg.contains(R, z.E) == (math.cos(t * S2) ** 2 > math.sin(0.1))
    with pytest.raises(ValueError):
        rg.build_codim2_region(coord(2, 5), 0.1)
    with pytest.raises(ValueError):
        rg.build_codim2_region(w, 0)


def test_union_form_crosscheck_reports_margin():
    rep = rg.union_form_crosscheck(coord(2, 4), 0.1, 200, seed=3)
    assert rep.samples == 200 and "min_margin" in rep.worst_case
    assert 0 < rep.details["fraction_inside"] <= 1


def test_report_json_shape():
    rep = rg.no_closed_geodesic_check(rg.build_codim2_region(coord(2, 4), 0.1), [coord(2, 4)], random_mixes=0)
    d = rep.to_dict()
    assert {"check", "passed", "samples", "worst_case", "parameters"} <= set(d)
