"""Farthest distances, farthest-point sets and Chebyshev centers in (R^d, l_p).

Sets are either finite point clouds or axis-aligned boxes. Both have finitely
many extreme candidates (the points themselves, or the box vertices), and any
l_p norm is convex, so every supremum over the set is a maximum over the
candidates and is computed exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionCap, DomainError, InvalidInput

MAX_VERTEX_DIM = 25
MAX_CHEBYSHEV_DIM = 6


def _parse_p(p):
    if isinstance(p, str):
        if p.lower() in ("inf", "infinity", "max"):
            return math.inf
        p = float(p)
    p = float(p)
    if not (p >= 1):
        raise DomainError(f"l_p norm requires p >= 1, got {p}")
    return p


@dataclass(frozen=True)
class NormedSpace:
    dim: int
    p: float = 2.0

    def __post_init__(self):
        if int(self.dim) < 1:
            raise DomainError(f"dimension must be >= 1, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", _parse_p(self.p))

    @property
    def label(self):
        return f"l_{'inf' if math.isinf(self.p) else format(self.p, 'g')}^{self.dim}"

    def norms(self, vectors) -> np.ndarray:
        """Row norms of an ``(m, d)`` array.

        Coordinates are accumulated left to right so the result is bit-identical
        to a plain sequential loop over one vector.
        """
        a = np.abs(np.atleast_2d(np.asarray(vectors, dtype=float)))
        if a.shape[1] != self.dim:
            raise InvalidInput(f"expected vectors of dimension {self.dim}, got {a.shape[1]}")
        if math.isinf(self.p):
            return a.max(axis=1)
        acc = np.zeros(a.shape[0])
        if self.p == 1.0:
            for j in range(self.dim):
                acc += a[:, j]
            return acc
        if self.p == 2.0:
            for j in range(self.dim):
                acc += a[:, j] * a[:, j]
            return np.sqrt(acc)
        for j in range(self.dim):
            acc += a[:, j] ** self.p
        return acc ** (1.0 / self.p)

    def norm(self, v) -> float:
        return float(self.norms(np.reshape(np.asarray(v, dtype=float), (1, -1)))[0])

    def distances(self, x, points) -> np.ndarray:
        x = as_point(x, self.dim)
        return self.norms(np.asarray(points, dtype=float).reshape(-1, self.dim) - x)

    def dist(self, a, b) -> float:
        return self.norm(as_point(a, self.dim) - as_point(b, self.dim))

    def check_axioms(self, samples: int = 200, seed: int = 0, rtol: float = 1e-12) -> bool:
        """Spot-check triangle inequality, homogeneity and separation on random triples."""
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            u, v = rng.normal(size=(2, self.dim)) * rng.uniform(0.1, 10)
            lam = rng.normal() * 5
            nu, nv, nuv = self.norm(u), self.norm(v), self.norm(u + v)
            if nuv > (nu + nv) * (1 + rtol):
                return False
            if abs(self.norm(lam * u) - abs(lam) * nu) > rtol * max(1.0, abs(lam) * nu):
                return False
            if nu <= 0:
                return False
        return self.norm(np.zeros(self.dim)) == 0.0


def as_point(x, dim: Optional[int] = None) -> np.ndarray:
    pt = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if dim is not None and pt.size != dim:
        raise InvalidInput(f"expected a point of dimension {dim}, got {pt.size}")
    if not np.all(np.isfinite(pt)):
        raise InvalidInput(f"non-finite point coordinates: {pt.tolist()}")
    return pt


class BoundedSet:
    """A finite point cloud or an axis-aligned box in R^d.

    The 1-D interval ``[a, b]`` is the ``d = 1`` box.
    """

    __slots__ = ("kind", "dim", "_points", "lo", "hi")

    def __init__(self, kind, dim, points=None, lo=None, hi=None):
        self.kind = kind
        self.dim = dim
        self._points = points
        self.lo = lo
        self.hi = hi

    @classmethod
    def cloud(cls, points) -> "BoundedSet":
        arr = np.asarray(points, dtype=float)
        if arr.size == 0:
            raise DomainError("a point cloud must be non-empty (use BoundedSet.empty for the empty set)")
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise InvalidInput(f"cloud must be a list of points, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInput("cloud contains non-finite coordinates")
        arr = arr.copy()
        arr.setflags(write=False)
        return cls("cloud", arr.shape[1], points=arr)

    @classmethod
    def box(cls, lo, hi) -> "BoundedSet":
        lo = np.atleast_1d(np.asarray(lo, dtype=float)).copy()
        hi = np.atleast_1d(np.asarray(hi, dtype=float)).copy()
        if lo.shape != hi.shape or lo.ndim != 1:
            raise InvalidInput(f"box bounds must be equal-length vectors, got {lo.shape} and {hi.shape}")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InvalidInput("box bounds must be finite")
        if np.any(lo > hi):
            raise InvalidInput(f"box requires lo <= hi coordinatewise, got lo={lo.tolist()} hi={hi.tolist()}")
        lo.setflags(write=False)
        hi.setflags(write=False)
        return cls("box", lo.size, lo=lo, hi=hi)

    @classmethod
    def interval(cls, a: float, b: float) -> "BoundedSet":
        return cls.box([a], [b])

    @classmethod
    def empty(cls, dim: int) -> "BoundedSet":
        pts = np.zeros((0, dim))
        pts.setflags(write=False)
        return cls("empty", dim, points=pts)

    @property
    def is_empty(self) -> bool:
        return self.kind == "empty"

    def candidates(self) -> np.ndarray:
        """Extreme candidates: cloud members in given order, or box vertices."""
        if self.kind != "box":
            return self._points
        if self.dim > MAX_VERTEX_DIM:
            raise DimensionCap(f"vertex enumeration needs 2^{self.dim} points; cap is d <= {MAX_VERTEX_DIM}")
        axes = [(lo,) if lo == hi else (lo, hi) for lo, hi in zip(self.lo, self.hi)]
        verts = np.array(list(itertools.product(*axes)), dtype=float)
        verts.setflags(write=False)
        return verts

    def contains(self, point, tol: float = 0.0) -> bool:
        pt = as_point(point, self.dim)
        if self.kind == "box":
            return bool(np.all(pt >= self.lo - tol) and np.all(pt <= self.hi + tol))
        if self.is_empty:
            return False
        return bool(np.any(np.all(np.abs(self._points - pt) <= tol, axis=1)))

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "box":
            return np.array(self.lo), np.array(self.hi)
        if self.is_empty:
            raise DomainError("empty set has no bounding box")
        return self._points.min(axis=0), self._points.max(axis=0)

    def translated(self, v) -> "BoundedSet":
        v = as_point(v, self.dim)
        if self.kind == "box":
            return BoundedSet.box(self.lo + v, self.hi + v)
        if self.is_empty:
            return self
        return BoundedSet.cloud(self._points + v)

    def scaled(self, lam: float) -> "BoundedSet":
        if self.kind == "box":
            a, b = self.lo * lam, self.hi * lam
            return BoundedSet.box(np.minimum(a, b), np.maximum(a, b))
        if self.is_empty:
            return self
        return BoundedSet.cloud(self._points * lam)

    def to_dict(self):
        if self.kind == "box":
            return {"box": {"lo": self.lo.tolist(), "hi": self.hi.tolist()}}
        return {"cloud": self._points.tolist()}

    def __repr__(self):
        if self.kind == "box":
            return f"BoundedSet.box({self.lo.tolist()}, {self.hi.tolist()})"
        return f"BoundedSet.{self.kind}({self._points.tolist()})"


def _candidates_nonempty(S: BoundedSet) -> np.ndarray:
    if S.is_empty:
        raise DomainError("farthest distance is undefined on the empty set")
    return S.candidates()


def _space_for(S: BoundedSet, space: NormedSpace) -> NormedSpace:
    if space.dim != S.dim:
        raise InvalidInput(f"set has dimension {S.dim} but space has dimension {space.dim}")
    return space


def farthest_distance(x, S: BoundedSet, space: NormedSpace) -> float:
    """``sup {||x - e|| : e in S}``, attained at a candidate point."""
    _space_for(S, space)
    return float(space.distances(x, _candidates_nonempty(S)).max())


def default_eps_far(delta: float) -> float:
    return 1e-9 * (1.0 + delta)


def default_delta_unique(delta: float) -> float:
    return 1e-6 * (1.0 + delta)


def _lex_unique(points: np.ndarray) -> np.ndarray:
    if len(points) == 0:
        return points.reshape(0, points.shape[-1] if points.ndim == 2 else 1)
    return np.unique(points, axis=0)  # sorted lexicographically


@dataclass(frozen=True)
class FarthestResult:
    distance: float
    attainers: tuple
    unique: bool

    @property
    def attainer_array(self) -> np.ndarray:
        return np.array(self.attainers, dtype=float)

    def to_dict(self):
        return {"distance": self.distance, "attainers": [list(a) for a in self.attainers], "unique": self.unique}


def farthest_points(
    x,
    S: BoundedSet,
    space: NormedSpace,
    eps_far: Optional[float] = None,
    delta_unique: Optional[float] = None,
) -> FarthestResult:
    _space_for(S, space)
    cand = _candidates_nonempty(S)
    d = space.distances(x, cand)
    delta = float(d.max())
    eps_far = default_eps_far(delta) if eps_far is None else eps_far
    if eps_far < 0:
        raise InvalidInput(f"eps_far must be >= 0, got {eps_far}")
    delta_unique = default_delta_unique(delta) if delta_unique is None else delta_unique
    att = _lex_unique(cand[d >= delta - eps_far])
    unique = diameter(att, space) <= delta_unique
    return FarthestResult(delta, tuple(tuple(float(c) for c in row) for row in att), bool(unique))


def diameter(S, space: NormedSpace) -> float:
    """Max pairwise distance over candidates; 0 for the empty set and singletons."""
    pts = S.candidates() if isinstance(S, BoundedSet) else np.asarray(S, dtype=float).reshape(-1, space.dim)
    best = 0.0
    for i in range(len(pts) - 1):
        best = max(best, float(space.distances(pts[i], pts[i + 1 :]).max()))
    return best


# ---------------------------------------------------------------------------
# Chebyshev centers


def _objective(space, cand, X):
    X = np.atleast_2d(X)
    out = np.zeros(X.shape[0])
    for c in cand:
        np.maximum(out, space.norms(X - c), out=out)
    return out


def _subgradient(space, cand, c):
    d = space.distances(c, cand)
    i = int(np.argmax(d))
    v = c - cand[i]
    nv = d[i]
    if nv == 0.0:
        return None, float(nv)
    p = space.p
    if math.isinf(p):
        g = np.zeros_like(v)
        j = int(np.argmax(np.abs(v)))
        g[j] = np.sign(v[j])
    elif p == 1.0:
        g = np.sign(v)
    elif p == 2.0:
        g = v / nv
    else:
        g = np.sign(v) * (np.abs(v) / nv) ** (p - 1.0)
    return g, float(nv)


def chebyshev_center(
    S: BoundedSet,
    space: NormedSpace,
    grid_resolution: int = 21,
    refine_iters: Optional[int] = None,
    tol: float = 1e-12,
):
    """Minimise ``x -> farthest_distance(x, S)`` over R^d.

    A coarse grid over the bounding box inflated by the diameter picks the
    start; an ellipsoid cutting-plane descent then shrinks a region known to
    contain a minimiser, using subgradients of the active norm term. Returns
    ``(center, radius)``.
    """
    _space_for(S, space)
    cand = np.asarray(_candidates_nonempty(S))
    d = space.dim
    if d > MAX_CHEBYSHEV_DIM:
        raise DimensionCap(f"Chebyshev search supports d <= {MAX_CHEBYSHEV_DIM}, got {d}")
    uniq = _lex_unique(cand)
    if len(uniq) == 1:
        return uniq[0].copy(), 0.0

    lo, hi = S.bounding_box()
    diam = diameter(uniq, space)
    lo, hi = lo - diam, hi + diam
    per_axis = max(3, min(int(grid_resolution), int(20000 ** (1.0 / d))))
    axes = [np.linspace(a, b, per_axis) for a, b in zip(lo, hi)]
    grid = np.array(list(itertools.product(*axes)))
    vals = _objective(space, uniq, grid)
    k = int(np.argmin(vals))
    best, best_val = grid[k].copy(), float(vals[k])

    if refine_iters is None:
        refine_iters = 60 * 2 * d * (d + 1) + 100

    if d == 1:
        a, b = float(lo[0]), float(hi[0])
        for _ in range(refine_iters):
            c = np.array([(a + b) / 2])
            g, val = _subgradient(space, uniq, c)
            if val < best_val:
                best, best_val = c, val
            if g is None or g[0] == 0.0 or b - a <= tol * (1 + abs(c[0])):
                break
            if g[0] > 0:
                b = c[0]
            else:
                a = c[0]
        return best, best_val

    # the initial ball covers the whole (inflated) search box
    corner = np.where(best - lo > hi - best, lo, hi)
    r0 = float(np.linalg.norm(corner - best)) * 1.0001
    c = best.copy()
    P = np.eye(d) * r0 * r0
    for _ in range(refine_iters):
        g, val = _subgradient(space, uniq, c)
        if val < best_val:
            best, best_val = c.copy(), val
        if g is None:
            break
        Pg = P @ g
        gap = math.sqrt(max(float(g @ Pg), 0.0))
        if gap <= tol * (1.0 + best_val):
            break
        gt = Pg / gap
        c = c - gt / (d + 1)
        P = (d * d / (d * d - 1.0)) * (P - (2.0 / (d + 1)) * np.outer(gt, gt))
    return best, best_val


# ---------------------------------------------------------------------------
# remotality on probes


@dataclass(frozen=True)
class RemotalityScan:
    results: tuple
    remotal_on_probes: bool
    uniquely_remotal_on_probes: bool

    def to_dict(self):
        return {
            "remotal_on_probes": self.remotal_on_probes,
            "uniquely_remotal_on_probes": self.uniquely_remotal_on_probes,
            "results": [r.to_dict() for r in self.results],
        }


def remotality_scan(
    S: BoundedSet,
    space: NormedSpace,
    probes: Sequence,
    eps_far: Optional[float] = None,
    delta_unique: Optional[float] = None,
) -> RemotalityScan:
    probes = list(probes)
    if not probes:
        raise InvalidInput("remotality_scan needs at least one probe")
    results = tuple(farthest_points(x, S, space, eps_far, delta_unique) for x in probes)
    # finite clouds and boxes always attain the sup; recorded rather than assumed
    remotal = all(len(r.attainers) > 0 for r in results)
    return RemotalityScan(results, remotal, remotal and all(r.unique for r in results))
