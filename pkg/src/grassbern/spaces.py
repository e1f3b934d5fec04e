"""Ambient manifolds used by the region verifiers.

Each space knows its points, distance, closed-form geodesics and a way to
sample.  Points are numpy arrays (Euclidean, Sphere), n x p frames
(Grassmannian) or pairs of factor points (ProductSpace).  Geodesic batches
follow the same convention with a leading time axis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grassmann as gm

ON_MANIFOLD_TOL = 1e-8


def sphere_angle(x, y):
    """Great-circle distance, stable near 0 and pi. Broadcasts over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = np.linalg.norm(x - y, axis=-1)
    b = np.linalg.norm(x + y, axis=-1)
    return 2.0 * np.arctan2(a, b)


def _complement(x: np.ndarray) -> np.ndarray:
    return gm.normal_basis(x.reshape(-1, 1))


@dataclass(frozen=True)
class Euclidean:
    dim: int

    def check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected a point of R^{self.dim}")
        return x

    def dist(self, x, y) -> float:
        return float(np.linalg.norm(np.asarray(x) - np.asarray(y)))

    def pairwise(self, xs, ys) -> np.ndarray:
        xs, ys = np.asarray(xs), np.asarray(ys)
        return np.linalg.norm(xs[:, None, :] - ys[None, :, :], axis=-1)

    def geodesic(self, x, v, ts):
        ts = np.asarray(ts, dtype=float).reshape(-1)
        return np.asarray(x)[None, :] + ts[:, None] * np.asarray(v)[None, :]

    def tangent_basis(self, x) -> np.ndarray:
        return np.eye(self.dim)

    def embed(self, xs) -> np.ndarray:
        return np.asarray(xs, dtype=float)

    def random_unit_tangent(self, x, rng):
        v = rng.standard_normal(self.dim)
        return v / np.linalg.norm(v)


@dataclass(frozen=True)
class Sphere:
    """Unit sphere S^dim in R^{dim+1}."""

    dim: int = 2

    def check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim + 1,) or abs(np.linalg.norm(x) - 1.0) > ON_MANIFOLD_TOL:
            raise ValueError(f"point is not on S^{self.dim}")
        return x

    def dist(self, x, y) -> float:
        return float(sphere_angle(x, y))

    def pairwise(self, xs, ys) -> np.ndarray:
        xs, ys = np.asarray(xs), np.asarray(ys)
        return sphere_angle(xs[:, None, :], ys[None, :, :])

    def geodesic(self, x, v, ts):
        ts = np.asarray(ts, dtype=float).reshape(-1)
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        s = np.linalg.norm(v)
        if s == 0:
            return np.repeat(x[None, :], ts.shape[0], axis=0)
        u = v / s
        return np.cos(s * ts)[:, None] * x[None, :] + np.sin(s * ts)[:, None] * u[None, :]

    def tangent_basis(self, x) -> np.ndarray:
        return _complement(np.asarray(x, dtype=float))

    def embed(self, xs) -> np.ndarray:
        return np.asarray(xs, dtype=float)

    def random_point(self, rng):
        x = rng.standard_normal(self.dim + 1)
        return x / np.linalg.norm(x)

    def random_unit_tangent(self, x, rng):
        B = self.tangent_basis(x)
        c = rng.standard_normal(B.shape[1])
        return B @ (c / np.linalg.norm(c))


@dataclass(frozen=True)
class ProductSpace:
    first: object
    second: object

    def check(self, x):
        a, b = x
        return (self.first.check(a), self.second.check(b))

    def dist(self, x, y) -> float:
        return float(np.hypot(self.first.dist(x[0], y[0]), self.second.dist(x[1], y[1])))

    def pairwise(self, xs, ys) -> np.ndarray:
        return np.hypot(self.first.pairwise(xs[0], ys[0]), self.second.pairwise(xs[1], ys[1]))

    def geodesic(self, x, v, ts):
        return (self.first.geodesic(x[0], v[0], ts), self.second.geodesic(x[1], v[1], ts))

    def random_point(self, rng):
        return (self.first.random_point(rng), self.second.random_point(rng))

    def random_unit_tangent(self, x, rng):
        v1 = self.first.random_unit_tangent(x[0], rng)
        v2 = self.second.random_unit_tangent(x[1], rng)
        a = rng.uniform(0, np.pi / 2)
        return (np.cos(a) * v1, np.sin(a) * v2)


@dataclass(frozen=True)
class Grassmannian:
    """G+(p, n); points are oriented orthonormal n x p frames, tangents horizontal n x p matrices."""

    p: int
    n: int

    def check(self, x):
        E = gm.as_frame(x)
        if E.shape != (self.n, self.p):
            raise ValueError(f"expected an {self.n} x {self.p} frame")
        if np.max(np.abs(E.T @ E - np.eye(self.p))) > ON_MANIFOLD_TOL:
            raise ValueError("frame is not orthonormal")
        return E

    def dist(self, x, y) -> float:
        return gm.dist(x, y)

    def pairwise(self, xs, ys) -> np.ndarray:
        return np.array([[gm.dist(a, b) for b in ys] for a in xs])

    def canonical(self, x, v) -> gm.TangentCanonical:
        return gm.canonical_from_horizontal(gm.as_point(x), v)

    def geodesic(self, x, v, ts):
        if isinstance(v, gm.TangentCanonical):
            return gm.geodesic_frames(v, ts)
        if not np.any(v):
            ts = np.asarray(ts, dtype=float).reshape(-1)
            return np.repeat(gm.as_frame(x)[None], ts.shape[0], axis=0)
        return gm.geodesic_frames(self.canonical(x, v), ts)

    def random_point(self, rng):
        return gm.random_point(self.p, self.n, rng).E

    def random_unit_tangent(self, x, rng):
        w = gm.as_point(x)
        return w.normals @ gm.random_tangent(w, rng).T
