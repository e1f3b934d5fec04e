"""Oriented Grassmannian G+(p, n) in the Plücker picture.

Points are carried as oriented orthonormal frames (n x p matrices) with the
unit simple p-vector cached alongside.  Tangent vectors at a point w are
given by their p x (n-p) coefficient matrix A in the basis

    eta_{i,alpha} = e_1 ^ ... ^ n_alpha (slot i) ^ ... ^ e_p,

where (e_i) is the frame of w and (n_alpha) the deterministic normal basis
returned by ``GrassPoint.normals``.  Geodesics rotate frame vectors into
normals at constant speeds, so almost everything reduces to small SVDs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .multivec import MultiVector, scalar_product

ORTHO_TOL = 1e-10
DEFAULT_TOL = 1e-9


def _orthonormalize(cols: np.ndarray) -> np.ndarray:
    """Gram-Schmidt (via QR) in column order, keeping each column's direction."""
    cols = np.asarray(cols, dtype=float)
    q, r = np.linalg.qr(cols)
    d = np.diag(r)
    scale = max(1.0, float(np.max(np.abs(cols)))) if cols.size else 1.0
    if np.any(np.abs(d) < 1e-12 * scale):
        raise ValueError("frame columns are linearly dependent")
    return q * np.sign(d)


@dataclass(frozen=True, eq=False)
class OrientedFrame:
    """Column-orthonormal n x p matrix; column order carries the orientation."""

    cols: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.cols, dtype=float)
        if c.ndim != 2 or not 1 <= c.shape[1] < c.shape[0]:
            raise ValueError(f"expected an n x p matrix with 1 <= p < n, got shape {c.shape}")
        err = np.max(np.abs(c.T @ c - np.eye(c.shape[1])))
        if err > ORTHO_TOL:
            raise ValueError(f"columns are not orthonormal (max error {err:.2e})")
        c.setflags(write=False)
        object.__setattr__(self, "cols", c)

    @classmethod
    def orthonormalize(cls, cols) -> "OrientedFrame":
        return cls(_orthonormalize(cols))

    @property
    def n(self) -> int:
        return self.cols.shape[0]

    @property
    def p(self) -> int:
        return self.cols.shape[1]


def normal_basis(E: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of span(E), oriented so det[E N] = +1.

    Standard basis vectors are swept greedily (largest residual first, ties to the
    lowest index), so a coordinate plane gets the remaining coordinate axes.
    """
    n, p = E.shape
    basis = [E[:, i] for i in range(p)]
    chosen = []
    for _ in range(n - p):
        B = np.column_stack(basis)
        resid = np.eye(n) - B @ B.T
        norms = np.linalg.norm(resid, axis=0)
        k = int(np.argmax(norms))
        v = resid[:, k] / norms[k]
        # one re-orthogonalization pass
        v = v - B @ (B.T @ v)
        v /= np.linalg.norm(v)
        basis.append(v)
        chosen.append(v)
    N = np.column_stack(chosen) if chosen else np.zeros((n, 0))
    if N.shape[1] and np.linalg.det(np.column_stack([E, N])) < 0:
        N[:, -1] *= -1
    return N


@dataclass(frozen=True, eq=False)
class GrassPoint:
    """Oriented p-plane in R^n with its unit Plücker p-vector."""

    frame: OrientedFrame
    plucker: Optional[MultiVector] = field(default=None, repr=False)

    def __post_init__(self):
        if not isinstance(self.frame, OrientedFrame):
            object.__setattr__(self, "frame", OrientedFrame(self.frame))
        if self.plucker is None:
            object.__setattr__(self, "plucker", MultiVector.from_columns(self.frame.cols))

    @classmethod
    def from_columns(cls, cols) -> "GrassPoint":
        """Oriented span of arbitrary independent columns."""
        return cls(OrientedFrame.orthonormalize(cols))

    @classmethod
    def coordinate(cls, n: int, index: Sequence[int]) -> "GrassPoint":
        """span+(e_i1, ..., e_ip) for 1-based indices, in the given order."""
        E = np.zeros((n, len(index)))
        for j, i in enumerate(index):
            E[int(i) - 1, j] = 1.0
        return cls(OrientedFrame(E))

    @property
    def E(self) -> np.ndarray:
        return self.frame.cols

    @property
    def n(self) -> int:
        return self.frame.n

    @property
    def p(self) -> int:
        return self.frame.p

    @cached_property
    def normals(self) -> np.ndarray:
        return normal_basis(self.E)

    def __neg__(self) -> "GrassPoint":
        E = self.E.copy()
        E[:, 0] *= -1
        return GrassPoint(OrientedFrame(E))

    def tangent_basis(self) -> list:
        """The orthonormal tangent basis eta_{i,alpha}, ordered row-major in (i, alpha)."""
        out = []
        for i in range(self.p):
            for a in range(self.n - self.p):
                cols = self.E.copy()
                cols[:, i] = self.normals[:, a]
                out.append(MultiVector.from_columns(cols))
        return out

    def tangent_coefficients(self, X: MultiVector) -> np.ndarray:
        """Project an ambient p-vector onto the eta basis, giving the p x (n-p) matrix A."""
        q = self.n - self.p
        eta = self.tangent_basis()
        return np.array([scalar_product(X, e) for e in eta]).reshape(self.p, q)


def as_frame(x) -> np.ndarray:
    if isinstance(x, GrassPoint):
        return x.E
    if isinstance(x, OrientedFrame):
        return x.cols
    return np.asarray(x, dtype=float)


def as_point(x) -> GrassPoint:
    if isinstance(x, GrassPoint):
        return x
    return GrassPoint(OrientedFrame(as_frame(x)))


def plucker(frame) -> MultiVector:
    """Unit p-vector of the oriented span of the frame's columns (need not be orthonormal)."""
    raw = MultiVector.from_columns(as_frame(frame))
    nrm = raw.norm()
    if nrm < 1e-12:
        raise ValueError("frame is rank deficient")
    return raw / nrm


def _check_shapes(P: np.ndarray, Q: np.ndarray):
    if P.shape != Q.shape:
        raise ValueError(f"shape mismatch: {P.shape} vs {Q.shape}")


def w_product(P, Q) -> float:
    """det(E_P^T E_Q) for oriented orthonormal frames."""
    EP, EQ = as_frame(P), as_frame(Q)
    _check_shapes(EP, EQ)
    return float(np.linalg.det(EP.T @ EQ))


def w_product_plucker(P, Q) -> float:
    """Same quantity computed as the Euclidean product of Plücker coordinates."""
    return scalar_product(as_point(P).plucker, as_point(Q).plucker)


def _principal_decomposition(EP: np.ndarray, EQ: np.ndarray):
    """Oriented principal frames of two planes.

    Returns (e, f, theta, resid) with e an oriented frame of P, f an oriented frame
    of Q, f_i = cos(theta_i) e_i + resid_i and |resid_i| = sin(theta_i).  When the
    orientations disagree, the pair with the smallest cosine is turned past pi/2.
    """
    M = EP.T @ EQ
    U, _, Vt = np.linalg.svd(M)
    V = Vt.T
    if np.linalg.det(U) < 0:
        U[:, -1] *= -1
        V[:, -1] *= -1
    e = EP @ U
    f = EQ @ V
    if np.linalg.det(V) < 0:
        f[:, -1] *= -1
    c = np.einsum("ij,ij->j", e, f)
    resid = f - e * c
    s = np.linalg.norm(resid, axis=0)
    theta = np.arctan2(s, c)
    return e, f, theta, resid


def oriented_principal_angles(P, Q) -> np.ndarray:
    """Oriented principal angles, descending; their cosines multiply to w_product(P, Q)."""
    EP, EQ = as_frame(P), as_frame(Q)
    _check_shapes(EP, EQ)
    theta = _principal_decomposition(EP, EQ)[2]
    return np.sort(theta)[::-1]


def dist(P, Q) -> float:
    return float(np.linalg.norm(oriented_principal_angles(P, Q)))


def diameter(p: int, n: int) -> float:
    if not 1 <= p < n:
        raise ValueError(f"invalid Grassmannian G+({p},{n})")
    r0 = min(p, n - p)
    return max(math.pi, math.sqrt(r0) * math.pi / 2)


@dataclass(frozen=True, eq=False)
class TangentCanonical:
    """Canonical (rotation) form of a tangent vector at ``base``.

    ``frame`` is an oriented frame of the base plane whose first r columns are
    rotated into ``normals`` at speeds ``lambdas`` (descending, positive); the
    remaining columns are left fixed.
    """

    base: GrassPoint
    frame: np.ndarray = field(repr=False)
    normals: np.ndarray = field(repr=False)
    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float).reshape(-1)
        frame = np.asarray(self.frame, dtype=float)
        normals = np.asarray(self.normals, dtype=float).reshape(frame.shape[0], -1)
        if normals.shape[1] != lam.shape[0]:
            raise ValueError("need one normal per rotation speed")
        if np.any(lam <= 0) or np.any(np.diff(lam) > 1e-15):
            raise ValueError("rotation speeds must be positive and sorted descending")
        if lam.shape[0] > min(frame.shape[1], frame.shape[0] - frame.shape[1]):
            raise ValueError("too many rotation planes")
        for name, v in (("frame", frame), ("normals", normals), ("lambdas", lam)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def r(self) -> int:
        return self.lambdas.shape[0]

    @property
    def X0(self) -> np.ndarray:
        return self.frame[:, self.r:]

    def norm(self) -> float:
        return float(np.linalg.norm(self.lambdas))

    def scaled(self, c: float) -> "TangentCanonical":
        if c == 0:
            return TangentCanonical(self.base, self.frame, self.normals[:, :0], self.lambdas[:0])
        normals = self.normals if c > 0 else -self.normals
        return TangentCanonical(self.base, self.frame, normals, self.lambdas * abs(c))

    def normalized(self) -> "TangentCanonical":
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("zero tangent vector")
        return self.scaled(1.0 / nrm)

    def velocity(self) -> np.ndarray:
        """n x p matrix of frame-column velocities for ``frame``."""
        D = np.zeros_like(self.frame)
        D[:, : self.r] = self.normals * self.lambdas
        return D

    def horizontal(self) -> np.ndarray:
        """Velocity of the base point's own frame columns (orthogonal to the plane)."""
        U = self.base.E.T @ self.frame
        return self.velocity() @ U.T

    def matrix(self) -> np.ndarray:
        """Coefficient matrix A in the base point's eta basis."""
        return self.horizontal().T @ self.base.normals

    def pvector(self) -> MultiVector:
        out = MultiVector.zero(self.base.n, self.base.p)
        for i in range(self.r):
            cols = self.frame.copy()
            cols[:, i] = self.normals[:, i]
            out = out + self.lambdas[i] * MultiVector.from_columns(cols)
        return out


def kozlov_canonical(w: GrassPoint, A, tol: float = 1e-12) -> TangentCanonical:
    """Canonical form of the tangent vector sum_{i,alpha} A[i, alpha] eta_{i,alpha} at w."""
    A = np.asarray(A, dtype=float)
    p, q = w.p, w.n - w.p
    if A.shape != (p, q):
        raise ValueError(f"expected a {p} x {q} coefficient matrix, got {A.shape}")
    if not np.any(A):
        raise ValueError("zero tangent vector has no canonical form")
    U, s, Vt = np.linalg.svd(A)
    V = Vt.T
    if np.linalg.det(U) < 0:
        U[:, -1] *= -1
        if p - 1 < len(s):
            V[:, p - 1] *= -1
    r = int(np.sum(s > tol))
    frame = w.E @ U
    normals = w.normals @ V[:, :r]
    return TangentCanonical(w, frame, normals, s[:r])


def canonical_from_horizontal(w: GrassPoint, H) -> TangentCanonical:
    """Canonical form from an n x p velocity of w's frame (columns orthogonal to w)."""
    return kozlov_canonical(w, np.asarray(H, dtype=float).T @ w.normals)


def canonical_from_pvector(w: GrassPoint, X: MultiVector) -> TangentCanonical:
    return kozlov_canonical(w, w.tangent_coefficients(X))


@dataclass(frozen=True)
class GeodesicPath:
    canonical: TangentCanonical

    @property
    def speed(self) -> float:
        return self.canonical.norm()

    def frames(self, ts) -> np.ndarray:
        return geodesic_frames(self.canonical, ts)

    def __call__(self, t: float) -> GrassPoint:
        return geodesic_eval(self.canonical, t)


def geodesic_frames(X: TangentCanonical, ts) -> np.ndarray:
    """Frames of w_X(t) for an array of times, shape (len(ts), n, p)."""
    ts = np.asarray(ts, dtype=float).reshape(-1)
    out = np.broadcast_to(X.frame, (ts.shape[0],) + X.frame.shape).copy()
    if X.r:
        ang = ts[:, None] * X.lambdas[None, :]
        out[:, :, : X.r] = (
            X.frame[None, :, : X.r] * np.cos(ang)[:, None, :]
            + X.normals[None, :, :] * np.sin(ang)[:, None, :]
        )
    return out


def geodesic_eval(g, t: float) -> GrassPoint:
    X = g.canonical if isinstance(g, GeodesicPath) else g
    return GrassPoint(OrientedFrame(geodesic_frames(X, [t])[0]))


def exp_map(w: GrassPoint, A) -> GrassPoint:
    if not np.any(A):
        return w
    return geodesic_eval(kozlov_canonical(w, A), 1.0)


def log_map(w: GrassPoint, v, tol: float = DEFAULT_TOL) -> TangentCanonical:
    """Canonical form of the initial velocity of the minimizing geodesic from w to v."""
    Ew, Ev = w.E, as_frame(v)
    _check_shapes(Ew, Ev)
    e, _, theta, resid = _principal_decomposition(Ew, Ev)
    if np.max(theta) >= math.pi - tol:
        raise ValueError("v lies on the cut locus of w (antipodal direction)")
    order = np.argsort(-theta, kind="stable")
    # at most min(p, n-p) planes rotate; the rest are zero up to rounding
    rmax = min(w.p, w.n - w.p)
    keep = [i for i in order[:rmax] if theta[i] > 1e-13]
    rest = [i for i in order if i not in keep]
    perm = keep + rest
    frame = e[:, perm]
    normals = resid[:, keep] / np.sin(theta[keep]) if keep else np.zeros((w.n, 0))
    lam = theta[keep]
    if np.linalg.det(frame.T @ Ew) < 0:
        # an odd permutation flipped orientation; undo it on a fixed column if possible
        if rest:
            frame[:, -1] *= -1
        else:
            frame[:, 0] *= -1
            normals[:, 0] *= -1
    return TangentCanonical(w, frame, normals, lam)


def t_crit(X: TangentCanonical) -> float:
    """First time the unit-speed geodesic along X leaves the closed convex set B_G(w)."""
    if X.r == 0:
        raise ValueError("zero tangent vector")
    lam = X.lambdas / X.norm()
    top = lam[0] + (lam[1] if X.r > 1 else 0.0)
    return math.pi / (2.0 * top)


def in_BG(w, v, closed: bool = True, tol: float = DEFAULT_TOL) -> bool:
    theta = oriented_principal_angles(w, v)
    s = theta[0] + (theta[1] if theta.shape[0] > 1 else 0.0)
    if closed:
        return bool(s <= math.pi / 2 + tol)
    return bool(s < math.pi / 2 - tol)


def closed_geodesic_period(X: TangentCanonical, tol: float = DEFAULT_TOL, max_k: int = 64) -> Optional[float]:
    """Smallest T > 0 with w_X(T) = w_X(0), searched over k^1 <= max_k; None if not found."""
    if X.r == 0:
        raise ValueError("zero tangent vector")
    lam = X.lambdas
    for k1 in range(1, max_k + 1):
        T = math.pi * k1 / lam[0]
        x = lam[1:] * T / math.pi
        k = np.rint(x)
        if np.all(np.abs(x - k) < tol) and (k1 + int(k.sum())) % 2 == 0:
            return T
    return None


def type_k_matrices(p: int, n: int, k: int) -> list:
    """Coefficient matrices of the unit type-k directions: k frame columns into k normals."""
    q = n - p
    if not 1 <= k <= min(p, q):
        raise ValueError(f"type {k} needs 1 <= k <= min(p, n-p) = {min(p, q)}")
    out = []
    for cols in combinations(range(p), k):
        for nrm in combinations(range(q), k):
            A = np.zeros((p, q))
            A[list(cols), list(nrm)] = 1.0 / math.sqrt(k)
            out.append(A)
    return out


def type_k_directions(w: GrassPoint, k: int) -> list:
    return [kozlov_canonical(w, A) for A in type_k_matrices(w.p, w.n, k)]


def random_point(p: int, n: int, rng: np.random.Generator) -> GrassPoint:
    """Haar-distributed oriented p-plane."""
    return GrassPoint.from_columns(rng.standard_normal((n, p)))


def random_tangent(w: GrassPoint, rng: np.random.Generator, norm: float = 1.0) -> np.ndarray:
    A = rng.standard_normal((w.p, w.n - w.p))
    return A * (norm / np.linalg.norm(A))
