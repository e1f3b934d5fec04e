"""Barrier regions for harmonic maps: membership and sampling-based verifiers.

Regions are closed-form membership predicates.  The verifiers are falsifiers:
they march geodesics, build epsilon-net graphs and look for witnesses against
the hypotheses of the barrier theorems.  A passing report is evidence at the
stated resolution, never a certificate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import cKDTree

from . import grassmann as gm
from .report import Report
from .spaces import Euclidean, Grassmannian, ProductSpace, Sphere, sphere_angle


# -- region kinds ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TubeAlongCurve:
    """Union of geodesic balls B(centers[j], radii[j]) along a sampled curve."""

    space: object
    centers: np.ndarray = field(repr=False)
    radii: np.ndarray = field(repr=False)
    ts: np.ndarray = field(repr=False)
    convexity_radius: Optional[float] = None

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float).reshape(-1)
        ts = np.asarray(self.ts, dtype=float).reshape(-1)
        centers = np.asarray(self.centers, dtype=float)
        if not (len(centers) == len(radii) == len(ts)) or len(ts) == 0:
            raise ValueError("centers, radii and ts must be non-empty and of equal length")
        if np.any(radii <= 0):
            raise ValueError("radii must be positive")
        if self.convexity_radius is not None and np.any(radii >= self.convexity_radius):
            raise ValueError("every radius must stay below the supplied convexity radius")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "ts", ts)

    @classmethod
    def from_curve(cls, space, curve: Callable, radius: Callable, a: float, b: float,
                   samples: int = 1001, convexity_radius: Optional[float] = None):
        ts = np.linspace(a, b, samples)
        centers = np.array([curve(t) for t in ts])
        radii = np.array([radius(t) for t in ts], dtype=float)
        return cls(space, centers, radii, ts, convexity_radius)

    def index_of(self, t: float) -> int:
        return int(np.argmin(np.abs(self.ts - t)))


@dataclass(frozen=True)
class SphereMinusHalfEquator:
    """S^2 minus the closed eps-neighbourhood of a half great circle.

    The removed arc lies on the great circle orthogonal to ``axis``, on the side
    where <x, pole> <= 0.  Defaults remove the half of {x = 0} through (0,0,-1).
    """

    eps: float
    axis: tuple = (1.0, 0.0, 0.0)
    pole: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        a = np.asarray(self.axis, dtype=float)
        c = np.asarray(self.pole, dtype=float)
        if abs(np.linalg.norm(a) - 1) > 1e-12 or abs(np.linalg.norm(c) - 1) > 1e-12 or abs(a @ c) > 1e-12:
            raise ValueError("axis and pole must be orthonormal")
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    @property
    def space(self):
        return Sphere(2)

    def arc_distance(self, xs) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        a = np.asarray(self.axis, dtype=float)
        c = np.asarray(self.pole, dtype=float)
        b = np.cross(a, c)
        s = xs @ a
        xp = xs - s[:, None] * a[None, :]
        rho = np.linalg.norm(xp, axis=1)
        onto = (xp @ c <= 0) & (rho > 0)
        d_end = np.minimum(sphere_angle(xs, b[None, :]), sphere_angle(xs, -b[None, :]))
        d_arc = np.arctan2(np.abs(s), rho)
        return np.where(onto, d_arc, d_end)


@dataclass(frozen=True)
class ProductRegion:
    first: object
    second: object

    @property
    def space(self):
        return ProductSpace(self.first.space, self.second.space)


@dataclass(frozen=True, eq=False)
class HemisphereSlab:
    """Points x of G+(p, n) with w_product(x, center) > sin(eps)."""

    center: gm.GrassPoint
    eps: float

    def __post_init__(self):
        if not isinstance(self.center, gm.GrassPoint):
            object.__setattr__(self, "center", gm.as_point(self.center))
        if not 0 < self.eps < math.pi / 2:
            raise ValueError("eps must lie in (0, pi/2)")

    @property
    def space(self):
        return Grassmannian(self.center.p, self.center.n)

    @property
    def threshold(self) -> float:
        return math.sin(self.eps)

    def w_products(self, frames) -> np.ndarray:
        frames = np.asarray(frames, dtype=float)
        if frames.ndim == 2:
            frames = frames[None]
        return np.linalg.det(np.einsum("ip,tiq->tpq", self.center.E, frames))


def contains_many(R, pts) -> np.ndarray:
    """Vectorized membership for a batch of points (no on-manifold validation)."""
    if isinstance(R, TubeAlongCurve):
        if isinstance(R.space, Sphere):
            # angle < r  <=>  <c, x> > cos r, one matmul instead of a distance tensor
            hit = (np.asarray(pts) @ R.centers.T > np.cos(R.radii)[None, :]) | (R.radii >= np.pi)[None, :]
            return np.any(hit, axis=1)
        D = R.space.pairwise(R.centers, pts)
        return np.min(D - R.radii[:, None], axis=0) < 0
    if isinstance(R, SphereMinusHalfEquator):
        return R.arc_distance(pts) > R.eps
    if isinstance(R, HemisphereSlab):
        return R.w_products(pts) > R.threshold
    if isinstance(R, ProductRegion):
        return contains_many(R.first, pts[0]) & contains_many(R.second, pts[1])
    raise TypeError(f"unknown region type {type(R).__name__}")


def _batch_of_one(space, x):
    if isinstance(space, ProductSpace):
        return (_batch_of_one(space.first, x[0]), _batch_of_one(space.second, x[1]))
    return np.asarray(gm.as_frame(x) if isinstance(space, Grassmannian) else x, dtype=float)[None]


def contains(R, x) -> bool:
    x = R.space.check(x)
    return bool(contains_many(R, _batch_of_one(R.space, x))[0])


def build_codim2_region(w: gm.GrassPoint, eps: float) -> HemisphereSlab:
    """The eps-shrunk open hemisphere of w inside G+(p, p+2)."""
    if w.n != w.p + 2:
        raise ValueError("the codimension-2 construction needs n = p + 2")
    if not 0 < eps < math.pi / 2:
        raise ValueError("eps must lie in (0, pi/2)")
    return HemisphereSlab(w, eps)


def half_equator_tube(eps: float, samples: int = 1001) -> TubeAlongCurve:
    """Tube of radius pi/2 - eps/2 around the upper half of the xz great circle."""
    def curve(t):
        return np.array([-math.cos(math.pi * t), 0.0, math.sin(math.pi * t)])

    return TubeAlongCurve.from_curve(Sphere(2), curve, lambda t: math.pi / 2 - eps / 2, 0.0, 1.0, samples)


def sample_region(R, count: int, rng: np.random.Generator, max_tries: int = 100000) -> list:
    """Rejection-sample ``count`` points of R from the space's uniform measure."""
    out = []
    for _ in range(max_tries):
        x = R.space.random_point(rng)
        if contains_many(R, _batch_of_one(R.space, x))[0]:
            out.append(x)
            if len(out) == count:
                return out
    raise RuntimeError(f"only {len(out)} of {count} samples found inside the region")


# -- epsilon nets ------------------------------------------------------------


def sphere_net(resolution: float) -> np.ndarray:
    """Fibonacci lattice on S^2 with spacing close to ``resolution``."""
    N = int(math.ceil(4 * math.pi / resolution**2))
    i = np.arange(N) + 0.5
    z = 1 - 2 * i / N
    phi = i * math.pi * (3 - math.sqrt(5))
    rho = np.sqrt(1 - z * z)
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def plane_net(lo, hi, resolution: float) -> np.ndarray:
    xs = np.arange(lo[0], hi[0] + resolution / 2, resolution)
    ys = np.arange(lo[1], hi[1] + resolution / 2, resolution)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()])


def region_net(R, resolution: float) -> np.ndarray:
    """Net points of R at the given spacing (2-dimensional spaces only)."""
    space = R.space
    if isinstance(space, Sphere) and space.dim == 2:
        pts = sphere_net(resolution)
    elif isinstance(space, Euclidean) and space.dim == 2 and isinstance(R, TubeAlongCurve):
        rmax = float(np.max(R.radii))
        pts = plane_net(R.centers.min(axis=0) - rmax, R.centers.max(axis=0) + rmax, resolution)
    else:
        raise NotImplementedError("epsilon nets are only built for 2-dimensional spaces")
    return pts[contains_many(R, pts)]


def _net_graph(space, pts: np.ndarray, resolution: float):
    tree = cKDTree(pts)
    pairs = tree.query_pairs(2 * resolution, output_type="ndarray")
    if isinstance(space, Sphere):
        wts = sphere_angle(pts[pairs[:, 0]], pts[pairs[:, 1]])
    else:
        wts = np.linalg.norm(pts[pairs[:, 0]] - pts[pairs[:, 1]], axis=1)
    n = len(pts)
    G = coo_matrix((wts, (pairs[:, 0], pairs[:, 1])), shape=(n, n)).tocsr()
    return tree, G


# -- tube hypothesis checks --------------------------------------------------


def slab_components(R: TubeAlongCurve, t0: float, net: Optional[np.ndarray] = None,
                    resolution: float = 0.02, min_component: int = 3):
    """Components of the net of R minus the closed ball at t0.

    Components with fewer than ``min_component`` net points are slivers below
    the net's resolution and are discarded.  Returns (number of components,
    label of the point nearest the curve start, label of the point nearest the
    curve end); labels are None when nothing remains.
    """
    if resolution >= float(np.min(R.radii)) / 4:
        raise ValueError("net resolution must be finer than a quarter of the smallest radius")
    if net is None:
        net = region_net(R, resolution)
    net = np.asarray(net, dtype=float)
    if len(net) == 0:
        raise ValueError("empty net")
    j0 = R.index_of(t0)
    d0 = R.space.pairwise(R.centers[j0:j0 + 1], net)[0]
    rest = net[d0 > R.radii[j0]]
    if len(rest) == 0:
        return 0, None, None
    _, G = _net_graph(R.space, rest, resolution)
    _, labels = connected_components(G, directed=False)
    sizes = np.bincount(labels)
    keep = sizes[labels] >= min_component
    if not np.any(keep):
        return 0, None, None
    rest = rest[keep]
    _, labels = np.unique(labels[keep], return_inverse=True)
    ncomp = int(labels.max()) + 1
    ia = int(np.argmin(R.space.pairwise(R.centers[:1], rest)[0]))
    ib = int(np.argmin(R.space.pairwise(R.centers[-1:], rest)[0]))
    return int(ncomp), int(labels[ia]), int(labels[ib])


def slab_disconnection_check(R: TubeAlongCurve, t0: float, net: Optional[np.ndarray] = None,
                             resolution: float = 0.02, min_component: int = 3) -> bool:
    """True iff R minus the closed ball at t0 splits into exactly the two end components."""
    ncomp, la, lb = slab_components(R, t0, net, resolution, min_component)
    return ncomp == 2 and la != lb


@dataclass
class KappaReport:
    ts: np.ndarray
    values: np.ndarray
    inside: bool
    t1_bracket: Optional[tuple]


def kappa(R: TubeAlongCurve, y, t0: Optional[float] = None) -> KappaReport:
    """Samples of d(curve(t), y) - r(t) and the first sign change (after t0 if given)."""
    y = R.space.check(y)
    vals = R.space.pairwise(R.centers, _batch_of_one(R.space, y))[:, 0] - R.radii
    inside = bool(np.any(vals < 0))
    start = 0 if t0 is None else R.index_of(t0)
    sign = np.sign(vals)
    bracket = None
    for j in range(start, len(vals) - 1):
        if sign[j] != sign[j + 1]:
            bracket = (float(R.ts[j]), float(R.ts[j + 1]))
            break
    return KappaReport(R.ts, vals, inside, bracket)


# -- barrier conditions ------------------------------------------------------


def _first_exit(R, x, v, t_max: float, h: float, chunk: int = 1024) -> Optional[float]:
    space = R.space
    if isinstance(space, Grassmannian) and not isinstance(v, gm.TangentCanonical):
        v = space.canonical(x, v)
    t = 0.0
    while t <= t_max:
        ts = t + h * np.arange(chunk)
        ts = ts[ts <= t_max]
        inside = contains_many(R, space.geodesic(x, v, ts))
        out = np.flatnonzero(~inside)
        if out.size:
            return float(ts[out[0]])
        t = float(ts[-1]) + h
    return None


def condition_i_check(R, samples: Sequence, K: float, h: float = 0.01) -> Report:
    """Every sampled unit-speed geodesic must leave R within time K."""
    exits = []
    worst = None
    for k, (x, v) in enumerate(samples):
        if not contains_many(R, _batch_of_one(R.space, x))[0]:
            raise ValueError(f"sample {k} is not inside the region")
        te = _first_exit(R, x, v, 10 * K, h)
        exits.append(te)
        key = math.inf if te is None else te
        if worst is None or key > worst[1]:
            worst = (k, key)
    passed = all(te is not None and te <= K for te in exits)
    never = [k for k, te in enumerate(exits) if te is None]
    return Report(
        check="condition_i",
        passed=passed,
        samples=len(exits),
        worst_case={"sample": worst[0] if worst else None,
                    "exit_time": None if worst is None or worst[1] == math.inf else worst[1]},
        parameters={"K": K, "step": h, "horizon": 10 * K},
        details={"exit_times": exits, "never_exited": never},
    )


def _circle_directions(space, q, count: int) -> np.ndarray:
    B = space.tangent_basis(q)
    if B.shape[1] != 2:
        raise NotImplementedError("integer direction nets need a 2-dimensional tangent space")
    ang = 2 * math.pi * np.arange(count) / count
    return (B @ np.vstack([np.cos(ang), np.sin(ang)])).T


def condition_ii_check(R, p, nu, t: float, direction_net=16, eps_step: float = 0.1,
                       resolution: float = 0.02, net: Optional[np.ndarray] = None) -> Report:
    """Classify directions at q = gamma_{p,nu}(t) by whether a short step decreases d_R(p, .).

    d_R is approximated by shortest paths on an epsilon-net graph of R.  The
    hypothesis holds at this sample when the decreasing set is a proper,
    connected subset of the direction net.
    """
    space = R.space
    p = space.check(p)
    path = space.geodesic(p, nu, np.arange(0.0, t + 1e-12, min(resolution, t / 8) if t > 0 else 1.0))
    if not np.all(contains_many(R, path)):
        raise ValueError("t must be smaller than the first exit time of the geodesic")
    q = space.geodesic(p, nu, [t])[0]
    if isinstance(direction_net, (int, np.integer)):
        dirs = _circle_directions(space, q, int(direction_net))
    else:
        dirs = np.asarray(direction_net, dtype=float)
    if len(dirs) < 8:
        raise ValueError("direction net too coarse (need at least 8 directions)")

    if net is None:
        net = region_net(R, resolution)
    pts = np.vstack([p[None, :], net])
    tree, G = _net_graph(space, pts, resolution)
    D = dijkstra(G, directed=False, indices=0)

    def d_region(y):
        nb = tree.query_ball_point(y, 2 * resolution)
        if not nb:
            return math.inf
        nb = np.asarray(nb)
        return float(np.min(D[nb] + space.pairwise(pts[nb], y[None, :])[:, 0]))

    dq = d_region(q)
    ends = np.array([space.geodesic(q, eta, [eps_step])[0] for eta in dirs])
    inside = contains_many(R, ends)
    dists = np.array([d_region(y) if ok else math.inf for y, ok in zip(ends, inside)])
    decreasing = dists < dq
    ambient = space.pairwise(p[None, :], ends)[0] < space.dist(p, q)

    # directions adjacent when within 1.5x the coarsest nearest-neighbour angle
    cosang = np.clip(dirs @ dirs.T / np.outer(np.linalg.norm(dirs, axis=1), np.linalg.norm(dirs, axis=1)), -1, 1)
    ang = np.arccos(cosang)
    np.fill_diagonal(ang, np.inf)
    thresh = 1.5 * float(np.max(np.min(ang, axis=1)))
    idx = np.flatnonzero(decreasing)
    if idx.size:
        sub = (ang[np.ix_(idx, idx)] <= thresh).astype(float)
        ncomp = connected_components(coo_matrix(sub), directed=False)[0]
    else:
        ncomp = 0
    proper = bool(not np.all(decreasing))
    connected = ncomp <= 1
    return Report(
        check="condition_ii",
        passed=proper and connected,
        samples=len(dirs),
        worst_case={"proper": proper, "components": int(ncomp)},
        parameters={"t": t, "eps_step": eps_step, "resolution": resolution},
        details={
            "decreasing": decreasing,
            "ambient_decreasing": ambient,
            "agreement_with_ambient": float(np.mean(decreasing == ambient)),
            "left_region": ~inside,
            "d_region_q": dq,
        },
    )


def _loop_directions(x: gm.GrassPoint, rng: np.random.Generator, random_mixes: int) -> list:
    out = []
    for k in (1, 2):
        if k <= min(x.p, x.n - x.p):
            for j, X in enumerate(gm.type_k_directions(x, k)):
                out.append((f"type{k}[{j}]", X))
    for j in range(random_mixes):
        out.append((f"mix[{j}]", gm.kozlov_canonical(x, gm.random_tangent(x, rng))))
    return out


def no_closed_geodesic_check(R: HemisphereSlab, base_samples: Sequence, k_max: int = 8,
                             random_mixes: int = 2, seed: int = 0, h: float = 0.01) -> Report:
    """Every closed geodesic found from the samples must leave R before closing up.

    A sample is a point, or a pair (point, extra TangentCanonical directions)
    checked alongside the type-1, type-2 and random directions.
    """
    rng = np.random.default_rng(seed)
    violations = []
    loops = 0
    checked = 0
    for k, x in enumerate(base_samples):
        extra = []
        if isinstance(x, tuple):
            x, extra = x
        x = gm.as_point(x)
        if not contains_many(R, x.E)[0]:
            raise ValueError(f"base sample {k} is not inside the region")
        dirs = _loop_directions(x, rng, random_mixes) + [(f"extra[{j}]", X) for j, X in enumerate(extra)]
        for label, X in dirs:
            checked += 1
            X = X.normalized()
            T = gm.closed_geodesic_period(X, max_k=k_max)
            if T is None:
                continue
            loops += 1
            ts = np.append(np.arange(0.0, T, h), T)
            wp = R.w_products(gm.geodesic_frames(X, ts))
            if np.all(wp > R.threshold):
                violations.append({"sample": k, "direction": label, "period": T,
                                   "min_w_product": float(wp.min())})
    worst = max(violations, key=lambda v: v["min_w_product"]) if violations else None
    return Report(
        check="no_closed_geodesic",
        passed=not violations,
        samples=len(base_samples),
        worst_case=worst,
        parameters={"eps": R.eps, "k_max": k_max, "random_mixes": random_mixes, "seed": seed,
                    "step": h, "p": R.center.p, "n": R.center.n},
        details={"directions_checked": checked, "closed_loops": loops,
                 "violations": len(violations), "violation_list": violations[:20]},
    )


def union_form_crosscheck(w: gm.GrassPoint, eps: float, count: int, seed: int = 0) -> Report:
    """Sample the union-of-B_G description and test membership in the slab description.

    Points are drawn as z = w_Y(s) with y = w_{X2}(t) on a type-2 geodesic from w,
    |t| < t_crit(X2) - eps, Y a random unit direction at y and 0 <= s < t_crit(Y).
    """
    R = build_codim2_region(w, eps)
    rng = np.random.default_rng(seed)
    dirs = gm.type_k_directions(w, 2)
    margins = []
    for _ in range(count):
        X = dirs[int(rng.integers(len(dirs)))]
        tX = gm.t_crit(X)
        t = rng.uniform(-(tX - eps), tX - eps)
        y = gm.geodesic_eval(X, t)
        Y = gm.kozlov_canonical(y, gm.random_tangent(y, rng)).normalized()
        s = rng.uniform(0, gm.t_crit(Y))
        z = gm.geodesic_eval(Y, s)
        margins.append(float(R.w_products(z.E)[0] - R.threshold))
    margins = np.array(margins)
    return Report(
        check="codim2_union_vs_slab",
        passed=bool(np.all(margins > 0)),
        samples=count,
        worst_case={"min_margin": float(margins.min())},
        parameters={"eps": eps, "seed": seed, "p": w.p, "n": w.n},
        details={"fraction_inside": float(np.mean(margins > 0))},
    )
