"""Gauss maps and slope of entire graphs from Jacobian samples.

For a graph x -> (x, f(x)) over R^p with f: R^p -> R^q, the tangent plane at x
is spanned by e_i + sum_a J[i, a] eta_a.  Its Plucker image has w-product
1 / slope with the base plane e_1 ^ ... ^ e_p.  The Bernstein verdict here is
conditional: sampled Jacobians cannot certify minimality.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.spatial.distance import pdist

from . import grassmann as gm
from .regions import build_codim2_region, contains_many
from .report import Report

MAX_SCAN_DIM = 4


@dataclass(frozen=True, eq=False)
class GraphJacobianSample:
    x: np.ndarray
    J: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        J = np.atleast_2d(np.asarray(self.J, dtype=float))
        if J.shape[0] != x.shape[0]:
            raise ValueError(f"J must be p x q with p = {x.shape[0]}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(J))):
            raise ValueError("sample entries must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "J", J)

    @property
    def p(self) -> int:
        return self.J.shape[0]

    @property
    def q(self) -> int:
        return self.J.shape[1]


def graph_frame(J) -> np.ndarray:
    """Orthonormalized columns (e_i ; J[i, :]) via QR with a positive diagonal."""
    J = np.atleast_2d(np.asarray(J, dtype=float))
    M = np.vstack([np.eye(J.shape[0]), J.T])
    Q, R = np.linalg.qr(M)
    return Q * np.sign(np.diag(R))[None, :]


def base_point(p: int, q: int) -> gm.GrassPoint:
    return gm.GrassPoint(gm.OrientedFrame(np.eye(p + q)[:, :p]))


def gauss_point(s: GraphJacobianSample) -> gm.GrassPoint:
    return gm.GrassPoint(gm.OrientedFrame(graph_frame(s.J)))


def slope(s: GraphJacobianSample) -> float:
    return float(math.sqrt(np.linalg.det(np.eye(s.p) + s.J @ s.J.T)))


def reciprocal_check(s: GraphJacobianSample) -> float:
    """|w_product(gauss, base) * slope - 1|; the w-product is the top p x p minor of the frame."""
    w = gm.w_product(gauss_point(s), base_point(s.p, s.q))
    return abs(w * slope(s) - 1.0)


def _gauss_products(samples) -> np.ndarray:
    # det of the top block of each orthonormal frame, i.e. w_product with the base plane
    return np.array([np.linalg.det(graph_frame(s.J)[: s.p]) for s in samples])


def hemisphere_report(samples: Sequence[GraphJacobianSample], beta0: float) -> Report:
    if beta0 < 1:
        raise ValueError("beta0 must be at least 1")
    slopes = np.array([slope(s) for s in samples])
    wp = _gauss_products(samples)
    bad = np.flatnonzero(slopes > beta0)
    k = int(np.argmin(wp))
    return Report(
        check="hemisphere",
        passed=bool(bad.size == 0 and wp.min() >= 1 / beta0 - 1e-12),
        samples=len(samples),
        worst_case={"sample": k, "x": samples[k].x, "w_product": float(wp[k]), "slope": float(slopes[k])},
        parameters={"beta0": beta0},
        details={"min_w_product": float(wp.min()), "max_slope": float(slopes.max()),
                 "slope_violations": bad[:20]},
    )


# -- samplers ----------------------------------------------------------------


@dataclass(frozen=True)
class GraphSampler:
    """f: R^p -> R^q together with its Jacobian, J[i, a] = d f^a / d x^i."""

    p: int
    q: int
    value: Callable
    jacobian: Callable
    name: str = "custom"

    def sample(self, x) -> GraphJacobianSample:
        return GraphJacobianSample(x, self.jacobian(np.asarray(x, dtype=float)))


def blow_down(f: GraphSampler, t: float) -> GraphSampler:
    """f_t(x) = f(t x) / t, so D f_t(x) = D f(t x)."""
    if not t > 0:
        raise ValueError("blow-down scale must be positive")
    return GraphSampler(
        f.p, f.q,
        lambda x: f.value(t * np.asarray(x, dtype=float)) / t,
        lambda x: f.jacobian(t * np.asarray(x, dtype=float)),
        f"{f.name}@{t:g}",
    )


def affine_sampler(A, b=None) -> GraphSampler:
    """f(x) = A x + b with A of shape q x p."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    q, p = A.shape
    b = np.zeros(q) if b is None else np.asarray(b, dtype=float)
    return GraphSampler(p, q, lambda x: A @ x + b, lambda x: A.T.copy(), "affine")


def sincos_sampler() -> GraphSampler:
    """f(x1, x2) = (sin x1, cos x2); slope^2 = (1 + cos^2 x1)(1 + sin^2 x2) <= 4."""
    return GraphSampler(
        2, 2,
        lambda x: np.array([math.sin(x[0]), math.cos(x[1])]),
        lambda x: np.array([[math.cos(x[0]), 0.0], [0.0, -math.sin(x[1])]]),
        "sincos",
    )


def quadratic_sampler(p: int = 2) -> GraphSampler:
    """f(x) = (|x|^2, 0): slope grows without bound."""
    return GraphSampler(
        p, 2,
        lambda x: np.array([float(x @ x), 0.0]),
        lambda x: np.column_stack([2 * x, np.zeros(p)]),
        "quadratic",
    )


def perturbed_sampler(a: float = 0.3) -> GraphSampler:
    """f(x1..x4) = a (sin x1 + sin x2, sin x3 + sin x4); slope <= 1 + 2 a^2."""
    def val(x):
        return a * np.array([math.sin(x[0]) + math.sin(x[1]), math.sin(x[2]) + math.sin(x[3])])

    def jac(x):
        J = np.zeros((4, 2))
        J[0, 0], J[1, 0] = a * math.cos(x[0]), a * math.cos(x[1])
        J[2, 1], J[3, 1] = a * math.cos(x[2]), a * math.cos(x[3])
        return J

    return GraphSampler(4, 2, val, jac, "perturbed")


BUILTIN_SAMPLERS = {
    "affine": lambda: affine_sampler([[0.5, 0.2], [-0.3, 0.1]], [0.3, -1.0]),
    "sincos": sincos_sampler,
    "quadratic": quadratic_sampler,
    "perturbed": perturbed_sampler,
}


def grid_samples(f: GraphSampler, box: float = 10.0, points: int = 9) -> list:
    """Samples on the grid [-box, box]^p with ``points`` nodes per axis."""
    if f.p > MAX_SCAN_DIM:
        raise ValueError(f"grid scans are capped at p <= {MAX_SCAN_DIM}")
    axis = np.linspace(-box, box, points)
    return [f.sample(np.array(x)) for x in itertools.product(axis, repeat=f.p)]


def parse_grid_file(text: str) -> list:
    """Rows 'x1 ... xp ; J11 ... Jpq' (J row-major); blank and '#' lines ignored."""
    out = []
    shape = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.count(";") != 1:
            raise ValueError(f"line {lineno}: expected 'x ; J'")
        left, right = line.split(";")
        try:
            x = np.array([float(v) for v in left.split()])
            J = np.array([float(v) for v in right.split()])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: non-numeric entry") from exc
        p = x.size
        if p == 0 or J.size == 0 or J.size % p:
            raise ValueError(f"line {lineno}: J has {J.size} entries, not a multiple of p = {p}")
        if shape is None:
            shape = (p, J.size // p)
        elif shape != (p, J.size // p):
            raise ValueError(f"line {lineno}: shape {(p, J.size // p)} differs from {shape}")
        out.append(GraphJacobianSample(x, J.reshape(shape)))
    if not out:
        raise ValueError("grid file has no samples")
    return out


# -- verdict -----------------------------------------------------------------


def default_eps(beta0: float) -> float:
    return math.asin(1.0 / beta0 - 1e-6)


def plucker_spread(points: Sequence[gm.GrassPoint]) -> float:
    """Largest great-circle angle between Plucker images of the sampled Gauss points."""
    if len(points) < 2:
        return 0.0
    P = np.array([x.plucker.coeffs for x in points])
    chord = pdist(P).max()
    return float(2 * math.asin(min(1.0, chord / 2)))


def bernstein_verdict(samples: Sequence[GraphJacobianSample], beta0: float,
                      eps: Optional[float] = None) -> Report:
    """Check the bounded-slope hypothesis and region containment of the sampled Gauss image."""
    if not samples:
        raise ValueError("no samples")
    p, q = samples[0].p, samples[0].q
    if q != 2:
        raise ValueError("the verdict is only available in codimension 2")
    if any(s.p != p or s.q != q for s in samples):
        raise ValueError("samples must share (p, q)")
    if beta0 < 1:
        raise ValueError("beta0 must be at least 1")
    eps = default_eps(beta0) if eps is None else float(eps)
    if not 0 < eps < math.pi / 2 or math.sin(eps) >= 1 / beta0:
        raise ValueError("eps must satisfy 0 < sin(eps) < 1/beta0")
    R = build_codim2_region(base_point(p, q), eps)
    slopes = np.array([slope(s) for s in samples])
    frames = np.array([graph_frame(s.J) for s in samples])
    inside = contains_many(R, frames)
    wp = R.w_products(frames)
    slope_bad = np.flatnonzero(slopes > beta0)
    region_bad = np.flatnonzero(~inside)
    ok = slope_bad.size == 0 and region_bad.size == 0
    spread = plucker_spread([gm.GrassPoint(gm.OrientedFrame(F)) for F in frames])
    k = int(np.argmax(slopes))
    verdict = ("hypotheses hold on sampled evidence: graph predicted affine, "
               "conditional on the caller's minimality assumption") if ok else \
        "hypotheses violated at sampled points: no prediction"
    return Report(
        check="bernstein_verdict",
        passed=bool(ok),
        samples=len(samples),
        worst_case={"sample": k, "x": samples[k].x, "slope": float(slopes[k])},
        parameters={"beta0": beta0, "eps": eps, "p": p, "q": q},
        details={
            "verdict": verdict,
            "min_w_product": float(wp.min()),
            "gauss_spread": spread,
            "slope_violations": slope_bad[:20],
            "region_violations": region_bad[:20],
        },
    )


def growing_box_scan(f: GraphSampler, beta0: float, boxes=(1.0, 2.0, 4.0, 8.0, 16.0),
                     points: int = 9) -> Report:
    """Run the verdict on growing boxes and stop at the first box that violates the slope bound."""
    rep = None
    for box in boxes:
        rep = bernstein_verdict(grid_samples(f, box, points), beta0)
        rep.parameters["box"] = box
        if not rep.passed:
            break
    return rep
