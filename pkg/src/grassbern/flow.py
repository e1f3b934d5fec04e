"""Discrete harmonic-map heat flow from periodic grids into embedded targets.

The scheme is projected explicit Euler on the graph Dirichlet energy:
u_i <- project(u_i + tau * sum_j w_ij (u_j - u_i)).  For sphere targets the
normal part of the graph Laplacian only rescales the step, so the update is a
tangent step followed by a 1-Lipschitz normalization and the energy cannot
increase while tau <= 0.2 / max_degree.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.spatial.distance import pdist

from . import regions as rg
from .grassmann import GrassPoint, OrientedFrame
from .report import to_jsonable

COLLAPSE_DIAMETER = 1e-3
HARMONIC_TENSION = 1e-3
STEP_FACTOR = 0.1
MAX_STEP_FACTOR = 0.2


# -- domain ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DomainMesh:
    n_vertices: int
    edges: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    description: str = ""

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.intp).reshape(-1, 2)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(edges) != len(weights):
            raise ValueError("one weight per edge")
        if np.any(weights <= 0):
            raise ValueError("edge weights must be positive")
        if edges.size and (edges.min() < 0 or edges.max() >= self.n_vertices):
            raise ValueError("edge endpoint out of range")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", weights)
        A = sparse.coo_matrix((weights, (edges[:, 0], edges[:, 1])), shape=(self.n_vertices,) * 2)
        A = (A + A.T).tocsr()
        object.__setattr__(self, "_adj", A)
        object.__setattr__(self, "_deg", np.asarray(A.sum(axis=1)).reshape(-1))
        ncomp = sparse.csgraph.connected_components(A, directed=False)[0]
        if ncomp != 1:
            raise ValueError("domain graph must be connected")

    @property
    def adjacency(self) -> sparse.csr_matrix:
        return self._adj

    @property
    def degree(self) -> np.ndarray:
        return self._deg

    @property
    def max_degree(self) -> float:
        return float(self._deg.max())

    def laplacian_apply(self, U: np.ndarray) -> np.ndarray:
        """sum_j w_ij (u_j - u_i) for every vertex."""
        return self._adj @ U - self._deg[:, None] * U


def build_torus_mesh(m: int) -> DomainMesh:
    """m x m periodic grid with 4-neighbour unit-weight edges; vertex id i*m + j."""
    if m < 3:
        raise ValueError("torus mesh needs m >= 3")
    idx = np.arange(m * m).reshape(m, m)
    right = np.column_stack([idx.ravel(), np.roll(idx, -1, axis=1).ravel()])
    down = np.column_stack([idx.ravel(), np.roll(idx, -1, axis=0).ravel()])
    edges = np.vstack([right, down])
    return DomainMesh(m * m, edges, np.ones(len(edges)), f"{m}x{m} periodic grid")


# -- targets -----------------------------------------------------------------


@dataclass(frozen=True)
class SphereTarget:
    dim: int = 2

    @property
    def name(self) -> str:
        return f"S^{self.dim}"

    @property
    def ambient_dim(self) -> int:
        return self.dim + 1

    def project(self, U):
        U = np.asarray(U, dtype=float)
        nrm = np.linalg.norm(U, axis=-1, keepdims=True)
        if np.any(nrm < 1e-12):
            raise ValueError("cannot project the origin onto the sphere")
        return U / nrm

    def tangent_project(self, U, W):
        return W - np.sum(U * W, axis=-1, keepdims=True) * U

    def as_points(self, U):
        return U


@dataclass(frozen=True)
class ProductTarget:
    first: object
    second: object

    @property
    def name(self) -> str:
        return f"{self.first.name}x{self.second.name}"

    @property
    def ambient_dim(self) -> int:
        return self.first.ambient_dim + self.second.ambient_dim

    def _split(self, U):
        k = self.first.ambient_dim
        return U[..., :k], U[..., k:]

    def project(self, U):
        a, b = self._split(np.asarray(U, dtype=float))
        return np.concatenate([self.first.project(a), self.second.project(b)], axis=-1)

    def tangent_project(self, U, W):
        ua, ub = self._split(U)
        wa, wb = self._split(W)
        return np.concatenate([self.first.tangent_project(ua, wa), self.second.tangent_project(ub, wb)], axis=-1)

    def as_points(self, U):
        a, b = self._split(U)
        return (self.first.as_points(a), self.second.as_points(b))


@dataclass(frozen=True)
class GrassmannTarget:
    """G+(p, n) through n x p frames flattened row-major; projection is the polar factor."""

    p: int
    n: int

    @property
    def name(self) -> str:
        return f"G+({self.p},{self.n})"

    @property
    def ambient_dim(self) -> int:
        return self.n * self.p

    def project(self, U):
        U = np.asarray(U, dtype=float)
        F = U.reshape(U.shape[:-1] + (self.n, self.p))
        u, s, vt = np.linalg.svd(F, full_matrices=False)
        if np.any(s[..., -1] < 1e-12):
            raise ValueError("rank-deficient frame cannot be projected")
        return (u @ vt).reshape(U.shape)

    def tangent_project(self, U, W):
        F = U.reshape(U.shape[:-1] + (self.n, self.p))
        Z = W.reshape(F.shape)
        S = np.swapaxes(F, -1, -2) @ Z
        return (Z - F @ (0.5 * (S + np.swapaxes(S, -1, -2)))).reshape(W.shape)

    def as_points(self, U):
        return U.reshape(U.shape[:-1] + (self.n, self.p))


# -- flow --------------------------------------------------------------------


@dataclass
class MapState:
    values: np.ndarray
    energy: float
    tension_norm: float


def _check_sizes(mesh: DomainMesh, U):
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[0] != mesh.n_vertices:
        raise ValueError(f"expected {mesh.n_vertices} vertex values, got shape {U.shape}")
    return U


def energy(mesh: DomainMesh, U) -> float:
    U = _check_sizes(mesh, U)
    d = U[mesh.edges[:, 0]] - U[mesh.edges[:, 1]]
    return float(0.5 * np.sum(mesh.weights * np.sum(d * d, axis=1)))


def tension(mesh: DomainMesh, target, U):
    """Per-vertex tangent part of the graph Laplacian and its max norm."""
    U = _check_sizes(mesh, U)
    T = target.tangent_project(U, mesh.laplacian_apply(U))
    return T, float(np.max(np.linalg.norm(T, axis=1)))


def make_state(mesh: DomainMesh, target, U) -> MapState:
    return MapState(U, energy(mesh, U), tension(mesh, target, U)[1])


def default_step(mesh: DomainMesh) -> float:
    return STEP_FACTOR / mesh.max_degree


def flow_step(mesh: DomainMesh, target, U, tau: float) -> np.ndarray:
    U = _check_sizes(mesh, U)
    if not 0 < tau <= MAX_STEP_FACTOR / mesh.max_degree * (1 + 1e-12):
        raise ValueError(f"step {tau} outside (0, {MAX_STEP_FACTOR}/max_degree]")
    return target.project(U + tau * mesh.laplacian_apply(U))


def image_diameter(U) -> float:
    if len(U) < 2:
        return 0.0
    return float(pdist(U).max())


@dataclass
class ExperimentReport:
    classification: str
    steps: int
    final_energy: float
    final_tension: float
    final_diameter: float
    first_exit_step: Optional[int]
    energy_increases: int
    parameters: dict
    trace: dict = field(repr=False)
    note: str = ("evidence at desk scale on one compact domain; "
                 "the collapse property concerns every compact domain")

    def summary(self) -> dict:
        return to_jsonable({
            "classification": self.classification,
            "steps": self.steps,
            "final_energy": self.final_energy,
            "final_tension": self.final_tension,
            "final_diameter": self.final_diameter,
            "first_exit_step": self.first_exit_step,
            "energy_increases": self.energy_increases,
            "parameters": self.parameters,
            "note": self.note,
        })

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        cols = ["step", "energy", "tension_norm", "diameter", "in_region"]
        lines = [",".join(cols)]
        for k in range(len(self.trace["step"])):
            inr = self.trace["in_region"][k]
            lines.append(",".join([
                str(int(self.trace["step"][k])),
                format(self.trace["energy"][k], ".17g"),
                format(self.trace["tension_norm"][k], ".17g"),
                format(self.trace["diameter"][k], ".17g"),
                "" if inr is None else str(int(inr)),
            ]))
        return "\n".join(lines) + "\n"


def run_experiment(mesh: DomainMesh, target, initial, region=None, budget: int = 200000,
                   tau: Optional[float] = None, record_every: int = 500,
                   collapse: float = COLLAPSE_DIAMETER, harmonic: float = HARMONIC_TENSION) -> ExperimentReport:
    """Flow until the image collapses, the tension vanishes, or the budget runs out.

    Near-harmonic means tension_norm below ``harmonic`` both absolutely and
    relative to the image diameter.
    """
    U = _check_sizes(mesh, initial)
    if np.max(np.abs(target.project(U) - U)) > 1e-10:
        raise ValueError("initial values are not on the target")
    if region is not None and not np.all(rg.contains_many(region, target.as_points(U))):
        raise ValueError("initial image is not inside the claimed region")
    tau = default_step(mesh) if tau is None else tau

    trace = {"step": [], "energy": [], "tension_norm": [], "diameter": [], "in_region": []}
    first_exit = None
    increases = 0
    e_prev = energy(mesh, U)
    step = 0
    while True:
        e = energy(mesh, U)
        tn = tension(mesh, target, U)[1]
        diam = image_diameter(U)
        inside = None
        if region is not None:
            inside = bool(np.all(rg.contains_many(region, target.as_points(U))))
            if not inside and first_exit is None:
                first_exit = step
        for key, val in zip(trace, (step, e, tn, diam, inside)):
            trace[key].append(val)
        if diam < collapse:
            label = "collapsed to constant"
            break
        # a shrinking map has tension ~ lambda_1 * diameter, so smallness must be relative too
        if tn < harmonic and tn < harmonic * diam:
            label = "nonconstant near-harmonic"
            break
        if step >= budget:
            label = "budget exhausted"
            break
        for _ in range(min(record_every, budget - step)):
            U = flow_step(mesh, target, U, tau)
            step += 1
            e_new = energy(mesh, U)
            if e_new > e_prev + 1e-12:
                increases += 1
            e_prev = e_new
            if region is not None and first_exit is None:
                if not np.all(rg.contains_many(region, target.as_points(U))):
                    first_exit = step
    params = {"target": target.name, "mesh": mesh.description, "budget": budget, "tau": tau,
              "record_every": record_every, "region": None if region is None else type(region).__name__}
    return ExperimentReport(label, step, e, tn, diam, first_exit, increases, params,
                            {k: np.array(v, dtype=object if k == "in_region" else float) for k, v in trace.items()})


# -- initial maps ------------------------------------------------------------


def _grid(m: int):
    i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    return 2 * np.pi * i.ravel() / m, 2 * np.pi * j.ravel() / m


def _swing(phi, psi):
    """Points at angle phi from the north pole in the xz-plane, tilted by psi toward +y."""
    return np.column_stack([np.sin(phi) * np.cos(psi), np.sin(psi), np.cos(phi) * np.cos(psi)])


def sphere_initial(recipe: str, m: int, seed: int = 0) -> np.ndarray:
    s, t = _grid(m)
    if recipe == "cap":
        return _swing(np.sin(s), 0.5 * np.sin(t))
    if recipe == "banana":
        # wraps around the removed half-equator, staying 0.3 away from its circle
        return _swing((np.pi - 0.5) * np.sin(s), 0.2 * np.sin(t))
    if recipe == "equator":
        return np.column_stack([np.cos(s), np.sin(s), np.zeros_like(s)])
    if recipe == "constant":
        return np.tile([0.0, 0.0, 1.0], (m * m, 1))
    if recipe == "random":
        U = np.random.default_rng(seed).standard_normal((m * m, 3))
        return U / np.linalg.norm(U, axis=1, keepdims=True)
    raise ValueError(f"unknown sphere recipe {recipe!r}")


def grassmann_initial(recipe: str, p: int, n: int, m: int, seed: int = 0) -> np.ndarray:
    """Frames e_i cos(a) + n_i sin(a) rotating the first column (and second, if present)."""
    s, t = _grid(m)
    if recipe == "constant":
        a = np.zeros_like(s)
        b = np.zeros_like(s)
    elif recipe == "cap":
        a, b = 0.5 * np.sin(s), 0.5 * np.sin(t)
    elif recipe == "loop":
        a, b = s, np.zeros_like(s)
    else:
        raise ValueError(f"unknown grassmann recipe {recipe!r}")
    F = np.zeros((m * m, n, p))
    F[:, np.arange(p), np.arange(p)] = 1.0
    F[:, 0, 0] = np.cos(a)
    F[:, p, 0] = np.sin(a)
    if p >= 2 and n - p >= 2:
        F[:, 1, 1] = np.cos(b)
        F[:, p + 1, 1] = np.sin(b)
    return F.reshape(m * m, n * p)


# -- config ------------------------------------------------------------------


@dataclass
class FlowConfig:
    target: str = "sphere"
    region: str = "none"
    eps: float = 0.2
    initial: str = "cap"
    initial2: str = "cap"
    m: int = 32
    budget: int = 200000
    seed: int = 0
    tau: Optional[float] = None
    record_every: int = 500
    p: int = 2
    n: int = 4


def parse_config(text: str) -> FlowConfig:
    """Flat key=value lines; '#' starts a comment; unknown keys are rejected."""
    cfg = FlowConfig()
    kinds = {k: type(v) for k, v in vars(FlowConfig()).items()}
    kinds["tau"] = float
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value")
        key, val = (x.strip() for x in line.split("=", 1))
        if key not in kinds:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        try:
            setattr(cfg, key, kinds[key](val))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    return cfg


def setup_experiment(cfg: FlowConfig):
    """Mesh, target, initial values and region for a config."""
    mesh = build_torus_mesh(cfg.m)
    half = rg.SphereMinusHalfEquator(cfg.eps)
    if cfg.target == "sphere":
        target = SphereTarget(2)
        U = sphere_initial(cfg.initial, cfg.m, cfg.seed)
        regions = {"none": None, "half_equator": half}
    elif cfg.target == "s2xs2":
        target = ProductTarget(SphereTarget(2), SphereTarget(2))
        U = np.hstack([sphere_initial(cfg.initial, cfg.m, cfg.seed),
                       sphere_initial(cfg.initial2, cfg.m, cfg.seed + 1)])
        regions = {"none": None, "product_half_equator": rg.ProductRegion(half, half)}
    elif cfg.target == "grassmann":
        target = GrassmannTarget(cfg.p, cfg.n)
        U = grassmann_initial(cfg.initial, cfg.p, cfg.n, cfg.m, cfg.seed)
        w = GrassPoint(OrientedFrame(np.eye(cfg.n)[:, :cfg.p]))
        regions = {"none": None, "slab": rg.HemisphereSlab(w, cfg.eps)}
    else:
        raise ValueError(f"unknown target {cfg.target!r}")
    if cfg.region not in regions:
        raise ValueError(f"region {cfg.region!r} not available for target {cfg.target!r}")
    return mesh, target, U, regions[cfg.region]


def run_config(cfg: FlowConfig) -> ExperimentReport:
    mesh, target, U, region = setup_experiment(cfg)
    rep = run_experiment(mesh, target, U, region, cfg.budget, cfg.tau, cfg.record_every)
    rep.parameters.update({"initial": cfg.initial, "seed": cfg.seed, "eps": cfg.eps, "config_region": cfg.region})
    return rep
