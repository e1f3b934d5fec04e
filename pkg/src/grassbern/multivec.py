"""Exterior algebra of R^n with dense coefficient storage.

A p-vector is stored as a length C(n, p) array indexed by the lexicographic
rank of increasing index tuples.  Index tuples exposed to callers are
1-based, matching the usual e_{i1...ip} notation; everything internal is
0-based.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

import numpy as np

DEFAULT_RANK_TOL = 1e-8


def rank_comb(c: Sequence[int], n: int) -> int:
    """Lexicographic rank of a strictly increasing 0-based tuple in C(n, len(c))."""
    p = len(c)
    r = 0
    prev = -1
    for i, ci in enumerate(c):
        if ci <= prev or ci >= n:
            raise ValueError(f"not a strictly increasing combination of range({n}): {tuple(c)}")
        # count combinations that agree on the prefix but carry a smaller entry here
        for v in range(prev + 1, ci):
            r += comb(n - 1 - v, p - 1 - i)
        prev = ci
    return r


def unrank_comb(r: int, p: int, n: int) -> tuple[int, ...]:
    total = comb(n, p)
    if not 0 <= r < total:
        raise ValueError(f"rank {r} out of range for C({n},{p})")
    out = []
    v = 0
    for i in range(p):
        while True:
            block = comb(n - 1 - v, p - 1 - i)
            if r < block:
                break
            r -= block
            v += 1
        out.append(v)
        v += 1
    return tuple(out)


@lru_cache(maxsize=None)
def combos(n: int, p: int) -> np.ndarray:
    """All 0-based p-combinations of range(n) as a (C(n,p), p) int array in rank order."""
    rows = list(combinations(range(n), p))
    arr = np.array(rows, dtype=np.intp).reshape(len(rows), p)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def _index_map(n: int, p: int) -> dict:
    return {tuple(c): k for k, c in enumerate(combos(n, p).tolist())}


def _merge_sign(a: tuple, b: tuple) -> int:
    # parity of the shuffle sorting a+b: count pairs (x in a, y in b) with x > y
    inv = sum(1 for x in a for y in b if x > y)
    return -1 if inv & 1 else 1


@lru_cache(maxsize=None)
def _wedge_table(n: int, p: int, q: int):
    """Index arrays (ia, ib, ic, sign) with e_a ^ e_b = sign * e_c for disjoint a, b."""
    index = _index_map(n, p + q)
    ia, ib, ic, sg = [], [], [], []
    for i, a in enumerate(combos(n, p).tolist()):
        sa = set(a)
        for j, b in enumerate(combos(n, q).tolist()):
            if sa.intersection(b):
                continue
            ia.append(i)
            ib.append(j)
            ic.append(index[tuple(sorted(a + b))])
            sg.append(_merge_sign(tuple(a), tuple(b)))
    out = tuple(np.asarray(x, dtype=np.intp) for x in (ia, ib, ic)) + (np.asarray(sg, dtype=float),)
    for x in out:
        x.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class MultiVector:
    """Element of the degree-p exterior power of R^n."""

    n: int
    p: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 0 or not 0 <= self.p <= self.n:
            raise ValueError(f"invalid degree {self.p} for ambient dimension {self.n}")
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.shape[0] != comb(self.n, self.p):
            raise ValueError(f"expected {comb(self.n, self.p)} coefficients, got {c.shape[0]}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, n: int, p: int) -> "MultiVector":
        return cls(n, p, np.zeros(comb(n, p)))

    @classmethod
    def scalar(cls, n: int, value: float) -> "MultiVector":
        return cls(n, 0, np.array([float(value)]))

    @classmethod
    def basis(cls, n: int, index: Iterable[int]) -> "MultiVector":
        """Basis p-vector e_{i1...ip} from a 1-based increasing index tuple."""
        idx = tuple(int(i) - 1 for i in index)
        c = np.zeros(comb(n, len(idx)))
        c[rank_comb(idx, n)] = 1.0
        return cls(n, len(idx), c)

    @classmethod
    def from_vector(cls, v) -> "MultiVector":
        v = np.asarray(v, dtype=float).reshape(-1)
        return cls(v.shape[0], 1, v)

    @classmethod
    def from_columns(cls, cols) -> "MultiVector":
        """Wedge of the columns of an n x p matrix, via p x p minors."""
        cols = np.asarray(cols, dtype=float)
        if cols.ndim != 2:
            raise ValueError("expected an n x p matrix")
        n, p = cols.shape
        if p == 0:
            return cls.scalar(n, 1.0)
        return cls(n, p, np.linalg.det(cols[combos(n, p)]))

    def coeff(self, index: Iterable[int]) -> float:
        """Coefficient w^lambda for a 1-based index tuple."""
        idx = tuple(int(i) - 1 for i in index)
        return float(self.coeffs[rank_comb(idx, self.n)])

    def norm(self) -> float:
        return float(np.sqrt(scalar_product(self, self)))

    def normalized(self) -> "MultiVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero p-vector")
        return MultiVector(self.n, self.p, self.coeffs / nrm)

    def _check_same(self, other: "MultiVector"):
        if not isinstance(other, MultiVector):
            raise TypeError(f"expected MultiVector, got {type(other).__name__}")
        if other.n != self.n or other.p != self.p:
            raise ValueError(
                f"degree/dimension mismatch: ({self.n},{self.p}) vs ({other.n},{other.p})"
            )

    def __add__(self, other):
        self._check_same(other)
        return MultiVector(self.n, self.p, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check_same(other)
        return MultiVector(self.n, self.p, self.coeffs - other.coeffs)

    def __neg__(self):
        return MultiVector(self.n, self.p, -self.coeffs)

    def __mul__(self, s):
        return MultiVector(self.n, self.p, self.coeffs * float(s))

    __rmul__ = __mul__

    def __truediv__(self, s):
        return MultiVector(self.n, self.p, self.coeffs / float(s))

    def __xor__(self, other):
        return wedge(self, other)

    def allclose(self, other: "MultiVector", atol: float = 1e-10) -> bool:
        self._check_same(other)
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=0.0, atol=atol))

    def terms(self, tol: float = 0.0) -> dict:
        """Nonzero coefficients keyed by 1-based index tuples."""
        out = {}
        for k, c in enumerate(self.coeffs):
            if abs(c) > tol:
                out[tuple(int(i) + 1 for i in combos(self.n, self.p)[k])] = float(c)
        return out

    def __repr__(self):
        return f"MultiVector(n={self.n}, p={self.p}, terms={self.terms(1e-15)})"


def wedge(a: MultiVector, b: MultiVector) -> MultiVector:
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    if a.p + b.p > a.n:
        raise ValueError(f"degree overflow: {a.p} + {b.p} > {a.n}")
    ia, ib, ic, sg = _wedge_table(a.n, a.p, b.p)
    out = np.zeros(comb(a.n, a.p + b.p))
    np.add.at(out, ic, sg * a.coeffs[ia] * b.coeffs[ib])
    return MultiVector(a.n, a.p + b.p, out)


def wedge_all(vectors: Sequence[MultiVector]) -> MultiVector:
    """Left fold of wedge over a non-empty sequence."""
    it = iter(vectors)
    acc = next(it)
    for v in it:
        acc = wedge(acc, v)
    return acc


def scalar_product(a: MultiVector, b: MultiVector) -> float:
    a._check_same(b)
    return float(a.coeffs @ b.coeffs)


def inner_mult(omega: MultiVector, xi: MultiVector) -> MultiVector:
    """Interior product omega _| xi, the adjoint of xi ^ (.)."""
    if omega.n != xi.n:
        raise ValueError(f"dimension mismatch: {omega.n} vs {xi.n}")
    p, q = omega.p, xi.p
    if q > p:
        raise ValueError(f"inner multiplication needs p >= q, got p={p}, q={q}")
    # <omega _| xi, phi> = <omega, xi ^ phi>: read the xi ^ phi table backwards
    ib, iphi, ic, sg = _wedge_table(omega.n, q, p - q)
    out = np.zeros(comb(omega.n, p - q))
    np.add.at(out, iphi, sg * xi.coeffs[ib] * omega.coeffs[ic])
    return MultiVector(omega.n, p - q, out)


def rank_space(w: MultiVector, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of span{ w _| e_mu : mu of degree p-1 }."""
    if w.p < 1:
        raise ValueError("rank space is defined for p >= 1")
    if not np.any(w.coeffs):
        return np.zeros((w.n, 0))
    # rows are the 1-vectors w _| e_mu, assembled from the wedge table directly
    ib, iphi, ic, sg = _wedge_table(w.n, w.p - 1, 1)
    rows = np.zeros((comb(w.n, w.p - 1), w.n))
    np.add.at(rows, (ib, iphi), sg * w.coeffs[ic])
    _, s, vt = np.linalg.svd(rows, full_matrices=False)
    k = int(np.sum(s > tol * s[0]))
    return vt[:k].T.copy()


def is_simple(w: MultiVector, tol: float = DEFAULT_RANK_TOL) -> bool:
    if not np.any(w.coeffs):
        raise ValueError("simplicity is undefined for the zero vector")
    if w.p == 0:
        return True
    return rank_space(w, tol).shape[1] == w.p
