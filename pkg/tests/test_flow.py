import math

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from grassbern import flow as fl
from grassbern import regions as rg


@pytest.mark.parametrize("m", [3, 8])
def test_torus_mesh_counts(m):
    mesh = fl.build_torus_mesh(m)
    assert mesh.n_vertices == m * m and len(mesh.edges) == 2 * m * m
    assert np.all(mesh.degree == 4)


def test_torus_mesh_rejects_small():
    with pytest.raises(ValueError):
        fl.build_torus_mesh(2)


def test_disconnected_mesh_rejected():
    with pytest.raises(ValueError):
        fl.DomainMesh(4, [[0, 1], [2, 3]], [1.0, 1.0])


def test_energy_examples():
    mesh = fl.build_torus_mesh(4)
    assert fl.energy(mesh, fl.sphere_initial("constant", 4)) == 0
    checker = np.array([[0, 0, 1.0] if (k // 4 + k % 4) % 2 == 0 else [0, 0, -1.0] for k in range(16)])
    assert fl.energy(mesh, checker) == pytest.approx(64)
    with pytest.raises(ValueError):
        fl.energy(mesh, checker[:5])


def test_energy_matches_brute_force_loop():
    m = 6
    mesh = fl.build_torus_mesh(m)
    U = fl.sphere_initial("equator", m)
    total = 0.0
    for i in range(m):
        for j in range(m):
            a = U[i * m + j]
            for b in (U[i * m + (j + 1) % m], U[((i + 1) % m) * m + j]):
                total += 0.5 * np.sum((a - b) ** 2)
    assert fl.energy(mesh, U) == pytest.approx(total, rel=1e-14)


def test_tension_examples():
    mesh = fl.build_torus_mesh(64)
    S = fl.SphereTarget(2)
    assert fl.tension(mesh, S, fl.sphere_initial("constant", 64))[1] == 0
    assert fl.tension(mesh, S, fl.sphere_initial("equator", 64))[1] < 1e-2
    assert fl.tension(mesh, S, fl.sphere_initial("random", 64, seed=1))[1] > 0.1


@given(st.integers(0, 2**32 - 1))
def test_targets_project_idempotent_and_tangent(seed):
    rng = np.random.default_rng(seed)
    for T in (fl.SphereTarget(2), fl.ProductTarget(fl.SphereTarget(2), fl.SphereTarget(2)), fl.GrassmannTarget(2, 4)):
        U = T.project(rng.standard_normal((5, T.ambient_dim)))
        assert np.allclose(T.project(U), U, atol=1e-12)
        V = T.tangent_project(U, rng.standard_normal(U.shape))
        # tangent part is killed by a second projection only if it already was tangent
        assert np.allclose(T.tangent_project(U, V), V, atol=1e-10)


def test_grassmann_projection_is_orthonormal(rng):
    T = fl.GrassmannTarget(3, 5)
    F = T.as_points(T.project(rng.standard_normal((4, 15))))
    for E in F:
        assert np.allclose(E.T @ E, np.eye(3), atol=1e-12)


def test_flow_step_constant_unchanged():
    mesh = fl.build_torus_mesh(5)
    U = fl.sphere_initial("constant", 5)
    assert np.array_equal(fl.flow_step(mesh, fl.SphereTarget(2), U, fl.default_step(mesh)), U)


def test_flow_step_rejects_large_step():
    mesh = fl.build_torus_mesh(5)
    with pytest.raises(ValueError):
        fl.flow_step(mesh, fl.SphereTarget(2), fl.sphere_initial("constant", 5), 0.3 / mesh.max_degree)


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.2))
def test_energy_monotone_on_sphere(seed, factor):
    mesh = fl.build_torus_mesh(6)
    S = fl.SphereTarget(2)
    U = fl.sphere_initial("random", 6, seed=seed)
    e = fl.energy(mesh, U)
    for _ in range(30):
        U = fl.flow_step(mesh, S, U, factor / mesh.max_degree)
        e_new = fl.energy(mesh, U)
        assert e_new <= e + 1e-12
        assert np.max(np.abs(S.project(U) - U)) < 1e-10
        e = e_new


def test_cap_collapses_inside_region():
    rep = fl.run_config(fl.FlowConfig(initial="cap", region="half_equator", m=16, budget=50000))
    assert rep.classification == "collapsed to constant"
    assert rep.first_exit_step is None and rep.energy_increases == 0


def test_equator_is_near_harmonic():
    rep = fl.run_config(fl.FlowConfig(initial="equator", m=64, budget=10))
    assert rep.classification == "nonconstant near-harmonic" and rep.final_diameter > 1


def test_equator_persists_long_run():
    mesh = fl.build_torus_mesh(64)
    S = fl.SphereTarget(2)
    U = fl.sphere_initial("equator", 64)
    tau = fl.default_step(mesh)
    for _ in range(100000):
        U = fl.flow_step(mesh, S, U, tau)
    assert fl.image_diameter(U) > 1


def test_constant_initial_needs_no_steps():
    rep = fl.run_config(fl.FlowConfig(initial="constant"))
    assert rep.classification == "collapsed to constant" and rep.steps == 0


def test_product_target_collapses():
    rep = fl.run_config(fl.FlowConfig(target="s2xs2", initial="banana", initial2="cap",
                                      region="product_half_equator", m=16, budget=50000))
    assert rep.classification == "collapsed to constant" and rep.first_exit_step is None


def test_grassmann_target_collapses():
    rep = fl.run_config(fl.FlowConfig(target="grassmann", initial="cap", region="slab", eps=0.1,
                                      m=16, budget=50000))
    assert rep.classification == "collapsed to constant"


def test_region_violations_are_reported_not_clamped():
    # initial data outside the claimed region or off the target is rejected up front
    mesh = fl.build_torus_mesh(8)
    S = fl.SphereTarget(2)
    with pytest.raises(ValueError, match="region"):
        fl.run_experiment(mesh, S, fl.sphere_initial("equator", 8), rg.SphereMinusHalfEquator(0.2))
    with pytest.raises(ValueError, match="target"):
        fl.run_experiment(mesh, S, 2 * fl.sphere_initial("constant", 8))


def test_exit_is_recorded():
    # a tube that only covers the initial cap: the flow drifts out toward the mean
    mesh = fl.build_torus_mesh(8)
    S = fl.SphereTarget(2)
    U = fl.sphere_initial("cap", 8)
    R = rg.TubeAlongCurve(rg.Sphere(2), U, np.full(len(U), 0.02), np.arange(len(U), dtype=float))
    rep = fl.run_experiment(mesh, S, U, R, budget=200, record_every=50)
    assert rep.first_exit_step is not None and rep.first_exit_step >= 1


def test_report_serialization_is_deterministic():
    cfg = fl.FlowConfig(initial="cap", m=8, budget=300, record_every=100)
    a, b = fl.run_config(cfg), fl.run_config(cfg)
    assert a.to_json() == b.to_json() and a.to_csv() == b.to_csv()
    header, first = a.to_csv().splitlines()[:2]
    assert header == "step,energy,tension_norm,diameter,in_region"
    assert first.startswith("0,")


def test_parse_config():
    cfg = fl.parse_config("# comment\ntarget = s2xs2\nm=8\ntau=0.01\n\nbudget=10\n")
    assert cfg.target == "s2xs2" and cfg.m == 8 and cfg.tau == 0.01 and cfg.budget == 10
    with pytest.raises(ValueError, match="unknown key"):
        fl.parse_config("colour=red")
    with pytest.raises(ValueError, match="bad value"):
        fl.parse_config("m=eight")
    with pytest.raises(ValueError):
        fl.parse_config("m")
