"""Convex body representations and elementary functionals.

Bodies are compact convex sets with nonempty interior in R^d, given as
one of three concrete types:

* ``VPolytope``   - convex hull of finitely many vertices,
* ``Ellipsoid``   - {x : (x-c)^T A (x-c) <= 1} with A symmetric positive definite,
* ``Ball``        - Euclidean ball (special-cased for exact formulas).

The vertex representation is canonical for polytopes; the facet
(halfspace) form is computed on demand with qhull and cached.  Exact
hull paths are intended for d <= 6.  Lower-dimensional inputs are
rejected at construction.

All operations are pure: no method mutates its arguments, and the cached
facet form is computed idempotently, so bodies are safe to share across
threads after construction.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from . import config
from .errors import DegenerateBodyError, DomainError, PreconditionError

__all__ = [
    "Subspace",
    "AffineMap",
    "ConvexBody",
    "VPolytope",
    "Ellipsoid",
    "Ball",
    "polar",
    "project",
    "affine_image",
    "intersect_with_reflection",
    "chebyshev_center",
    "halfspaces_to_vertices",
    "unit_ball_volume",
]


def _as_array(x, dim=None, name="vector"):
    a = np.asarray(x, dtype=float)
    if a.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} has non-finite entries")
    if dim is not None and a.shape[0] != dim:
        raise DomainError(f"{name} has length {a.shape[0]}, expected {dim}")
    return a


def unit_ball_volume(n: int) -> float:
    """Lebesgue volume of the unit Euclidean ball in R^n (1 for n = 0)."""
    if n < 0:
        raise DomainError("dimension must be nonnegative")
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def orthonormalize_rows(rows, tol=1e-12):
    """Orthonormal basis for the row space of ``rows`` (Gram-Schmidt via QR)."""
    m = np.atleast_2d(np.asarray(rows, dtype=float))
    q, r = np.linalg.qr(m.T)
    keep = np.abs(np.diag(r)) > tol * max(1.0, np.abs(r).max())
    basis = q.T[keep]
    # sign convention: first sizable component of each row positive
    for row in basis:
        j = np.argmax(np.abs(row) > 1e-9)
        if row[j] < 0:
            row *= -1.0
    return basis


class Subspace:
    """Linear subspace of R^d carried by an orthonormal row basis (k x d)."""

    def __init__(self, basis):
        b = np.atleast_2d(np.asarray(basis, dtype=float))
        k, d = b.shape
        if not (1 <= k <= d):
            raise DomainError(f"basis shape {b.shape} invalid")
        gram = b @ b.T
        if np.abs(gram - np.eye(k)).max() > config.tols.geom:
            raise DomainError("basis is not orthonormal within tolerance")
        b = b.copy()
        b.setflags(write=False)
        self.basis = b

    @classmethod
    def from_vectors(cls, vectors) -> "Subspace":
        basis = orthonormalize_rows(vectors)
        if basis.shape[0] != np.atleast_2d(np.asarray(vectors)).shape[0]:
            raise DomainError("spanning vectors are linearly dependent")
        return cls(basis)

    @classmethod
    def coordinate(cls, ambient_dim: int, axes) -> "Subspace":
        axes = list(axes)
        basis = np.zeros((len(axes), ambient_dim))
        for i, ax in enumerate(axes):
            basis[i, ax] = 1.0
        return cls(basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[1]

    def complement(self) -> "Subspace":
        """Orthogonal complement, with a deterministic basis."""
        k, d = self.basis.shape
        if k == d:
            raise DomainError("complement of the full space is trivial")
        # null space of the basis rows via full SVD
        _, _, vt = np.linalg.svd(self.basis, full_matrices=True)
        comp = vt[k:]
        for row in comp:
            j = np.argmax(np.abs(row) > 1e-9)
            if row[j] < 0:
                row *= -1.0
        return Subspace(comp)

    def coords(self, points):
        """Coordinates of points (.., d) in this basis (.., k)."""
        return np.asarray(points, dtype=float) @ self.basis.T

    def embed(self, coords):
        """Map k-coordinates back into R^d."""
        return np.asarray(coords, dtype=float) @ self.basis

    def project_points(self, points):
        """Orthogonal projection of points onto the subspace, in R^d."""
        return self.coords(points) @ self.basis

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


class AffineMap:
    """Invertible affine map x -> M x + t on R^d."""

    def __init__(self, matrix, translation=None):
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        if m.shape[0] != m.shape[1]:
            raise DomainError("matrix must be square")
        d = m.shape[0]
        t = np.zeros(d) if translation is None else _as_array(translation, d, "translation")
        # invertibility judged after row scaling so badly conditioned but
        # honest maps are not rejected on raw determinant magnitude
        scale = np.linalg.norm(m, axis=1)
        if np.any(scale <= 0) or abs(np.linalg.det(m / scale[:, None])) <= 1e-12:
            raise DomainError("matrix is singular within tolerance")
        self.matrix = m.copy()
        self.translation = t.copy()
        self.matrix.setflags(write=False)
        self.translation.setflags(write=False)

    @classmethod
    def identity(cls, d: int) -> "AffineMap":
        return cls(np.eye(d))

    @classmethod
    def scaling(cls, d: int, factor: float, translation=None) -> "AffineMap":
        return cls(np.eye(d) * factor, translation)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, points):
        p = np.asarray(points, dtype=float)
        return p @ self.matrix.T + self.translation

    def inverse(self) -> "AffineMap":
        minv = np.linalg.inv(self.matrix)
        return AffineMap(minv, -minv @ self.translation)

    def compose(self, other: "AffineMap") -> "AffineMap":
        """self after other: x -> self(other(x))."""
        return AffineMap(self.matrix @ other.matrix,
                         self.matrix @ other.translation + self.translation)


def chebyshev_center(A, b):
    """Center and radius of the largest ball in {x : A x <= b}.

    Solved as the standard LP: maximize r subject to
    a_i^T x + ||a_i|| r <= b_i.  Returns (center, radius); radius < 0
    signals an empty interior.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m, d = A.shape
    norms = np.linalg.norm(A, axis=1)
    c = np.zeros(d + 1)
    c[d] = -1.0
    A_ub = np.hstack([A, norms[:, None]])
    res = linprog(c, A_ub=A_ub, b_ub=b, bounds=[(None, None)] * d + [(None, None)],
                  method="highs")
    if not res.success:
        return np.zeros(d), -np.inf
    return res.x[:d], res.x[d]


def _dedupe_rows(rows, decimals=9):
    rows = np.atleast_2d(rows)
    _, idx = np.unique(np.round(rows, decimals), axis=0, return_index=True)
    return rows[np.sort(idx)]


def vertices_to_facets(vertices):
    """Facet form (A, b) with unit outward normals for conv(vertices).

    ``A x <= b`` describes the hull; rows are deduplicated since qhull
    reports one equation per simplicial facet.
    """
    v = np.atleast_2d(np.asarray(vertices, dtype=float))
    d = v.shape[1]
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([v.max(), -v.min()])
    hull = ConvexHull(v)
    eq = _dedupe_rows(hull.equations)
    return eq[:, :-1], -eq[:, -1]


def halfspaces_to_vertices(A, b, *, interior_point=None, qhull_tol=1e-9):
    """Vertices of the (assumed bounded) polytope {x : A x <= b}.

    Returns None when the polytope is empty or has empty interior.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    d = A.shape[1]
    if d == 1:
        a = A[:, 0]
        ub = b[a > 0] / a[a > 0]
        lb = b[a < 0] / a[a < 0]
        if np.any(np.abs(a) < 1e-14) and np.any(b[np.abs(a) < 1e-14] < 0):
            return None
        lo = lb.max() if lb.size else -np.inf
        hi = ub.min() if ub.size else np.inf
        if not np.isfinite(lo) or not np.isfinite(hi) or hi - lo <= qhull_tol:
            return None
        return np.array([[lo], [hi]])
    if interior_point is None:
        center, radius = chebyshev_center(A, b)
        scale = max(1.0, np.abs(b).max())
        if radius <= 1e-11 * scale:
            return None
        interior_point = center
    try:
        hs = HalfspaceIntersection(np.hstack([A, -b[:, None]]), interior_point)
    except (QhullError, ValueError):
        return None
    pts = _dedupe_rows(hs.intersections)
    if pts.shape[0] <= d:
        return None
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return None
    return pts[hull.vertices]


class ConvexBody:
    """Abstract compact convex set with nonempty interior in R^dim."""

    dim: int

    # -- functionals -------------------------------------------------------

    def support(self, u) -> float:
        """h_K(u) = max_{x in K} <x, u>.  Raises on the zero vector."""
        u = _as_array(u, self.dim, "direction")
        if np.linalg.norm(u) <= 0:
            raise DomainError("support direction must be nonzero")
        return float(self.support_batch(u[None, :])[0])

    def support_batch(self, U):
        raise NotImplementedError

    def gauge(self, x) -> float:
        """Minkowski functional ||x||_K = inf{t > 0 : x in t K}.

        Requires the origin in the interior of the body.
        """
        x = _as_array(x, self.dim, "point")
        return float(self.gauge_batch(x[None, :])[0])

    def gauge_batch(self, X):
        raise NotImplementedError

    def contains(self, x, tol=1e-9) -> bool:
        x = _as_array(x, self.dim, "point")
        return bool(self.contains_batch(x[None, :], tol)[0])

    def contains_batch(self, X, tol=1e-9):
        raise NotImplementedError

    def bounding_box(self):
        """(lower, upper) corners of the axis-aligned bounding box."""
        raise NotImplementedError

    def inscribed_ball(self):
        """(center, radius) of a largest inscribed Euclidean ball."""
        raise NotImplementedError

    def sample_interior(self, n, rng):
        """n points uniform in the body, by rejection from the bounding box.

        Deterministic for a given Generator state: candidates are drawn in
        fixed-size batches and accepted in draw order.
        """
        lo, hi = self.bounding_box()
        out = []
        have = 0
        while have < n:
            cand = rng.uniform(lo, hi, size=(max(4 * n, 64), self.dim))
            keep = cand[self.contains_batch(cand, 0.0)]
            out.append(keep)
            have += keep.shape[0]
        return np.vstack(out)[:n]

    def _origin_interior_or_raise(self):
        raise NotImplementedError


class VPolytope(ConvexBody):
    """Polytope given by its vertices (n x d array)."""

    kind = "vpolytope"

    def __init__(self, vertices, *, reduce=False):
        v = np.atleast_2d(np.asarray(vertices, dtype=float))
        if v.ndim != 2 or v.shape[0] == 0:
            raise DomainError("vertices must form a nonempty 2-D array")
        if not np.all(np.isfinite(v)):
            raise DomainError("vertices contain non-finite entries")
        d = v.shape[1]
        if d < 1:
            raise DomainError("ambient dimension must be >= 1")
        if v.shape[0] < d + 1:
            raise DegenerateBodyError(
                f"{v.shape[0]} vertices cannot span R^{d}")
        centered = v - v.mean(axis=0)
        svals = np.linalg.svd(centered, compute_uv=False)
        if svals[-1] <= 1e-10 * max(1.0, svals[0]):
            raise DegenerateBodyError("vertices do not affinely span the space")
        if reduce:
            v = self._hull_reduce(v)
        v = v.copy()
        v.setflags(write=False)
        self.vertices = v
        self.dim = d
        self._facets = None

    @staticmethod
    def _hull_reduce(v):
        if v.shape[1] == 1:
            return np.array([[v.min()], [v.max()]])
        hull = ConvexHull(v)
        return v[hull.vertices]

    def facets(self):
        """(A, b) with unit outward normals; cached, computed once."""
        if self._facets is None:
            self._facets = vertices_to_facets(self.vertices)
        return self._facets

    def support_batch(self, U):
        return (np.asarray(U, dtype=float) @ self.vertices.T).max(axis=1)

    def contains_batch(self, X, tol=1e-9):
        A, b = self.facets()
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return (X @ A.T <= b + tol).all(axis=1)

    def _normalized_facets(self):
        """Facets scaled to <a, x> <= 1; requires the origin well inside."""
        A, b = self.facets()
        if b.min() <= config.tols.geom * max(1.0, np.abs(b).max()):
            raise PreconditionError("origin is not interior to the polytope")
        return A / b[:, None]

    def gauge_batch(self, X):
        An = self._normalized_facets()
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.maximum((X @ An.T).max(axis=1), 0.0)

    def _origin_interior_or_raise(self):
        self._normalized_facets()

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def inscribed_ball(self):
        A, b = self.facets()
        center, radius = chebyshev_center(A, b)
        if radius <= 0:
            raise DegenerateBodyError("polytope has empty interior")
        return center, radius

    def translate(self, t) -> "VPolytope":
        return VPolytope(self.vertices + _as_array(t, self.dim))

    def __repr__(self):
        return f"VPolytope(d={self.dim}, n_vertices={self.vertices.shape[0]})"


class Ellipsoid(ConvexBody):
    """{x : (x - c)^T A (x - c) <= 1} with A symmetric positive definite."""

    kind = "ellipsoid"

    def __init__(self, center, shape):
        a = np.atleast_2d(np.asarray(shape, dtype=float))
        d = a.shape[0]
        c = _as_array(center, d, "center")
        if a.shape != (d, d):
            raise DomainError("shape matrix must be square")
        if np.abs(a - a.T).max() > config.tols.geom * max(1.0, np.abs(a).max()):
            raise DomainError("shape matrix must be symmetric within tolerance")
        a = 0.5 * (a + a.T)
        eigvals = np.linalg.eigvalsh(a)
        if eigvals[0] <= 0:
            raise DomainError("shape matrix must be positive definite")
        self.center = c.copy()
        self.shape = a.copy()
        self.center.setflags(write=False)
        self.shape.setflags(write=False)
        self.dim = d
        self._inv_shape = np.linalg.inv(a)
        self._eigvals = eigvals

    def support_batch(self, U):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        quad = np.einsum("ij,jk,ik->i", U, self._inv_shape, U)
        return U @ self.center + np.sqrt(np.maximum(quad, 0.0))

    def _metric_batch(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float)) - self.center
        return np.sqrt(np.maximum(
            np.einsum("ij,jk,ik->i", X, self.shape, X), 0.0))

    def contains_batch(self, X, tol=1e-9):
        return self._metric_batch(X) <= 1.0 + tol

    def gauge_batch(self, X):
        # smallest t with x in t K; closed form from the quadratic in t
        c, A = self.center, self.shape
        alpha = 1.0 - float(c @ A @ c)
        if alpha <= config.tols.geom:
            raise PreconditionError("origin is not interior to the ellipsoid")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        beta = X @ (A @ c)
        gamma = np.einsum("ij,jk,ik->i", X, A, X)
        return (-beta + np.sqrt(np.maximum(beta**2 + alpha * gamma, 0.0))) / alpha

    def _origin_interior_or_raise(self):
        if 1.0 - float(self.center @ self.shape @ self.center) <= config.tols.geom:
            raise PreconditionError("origin is not interior to the ellipsoid")

    def bounding_box(self):
        half = np.sqrt(np.diag(self._inv_shape))
        return self.center - half, self.center + half

    def inscribed_ball(self):
        return self.center.copy(), 1.0 / math.sqrt(self._eigvals[-1])

    def boundary_points(self, n, rng=None):
        """n points on the boundary (images of sphere directions)."""
        if rng is None:
            dirs = _sphere_grid(self.dim, n)
        else:
            g = rng.standard_normal((n, self.dim))
            dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
        # map unit sphere through A^{-1/2}
        w, q = np.linalg.eigh(self.shape)
        m = q @ np.diag(1.0 / np.sqrt(w)) @ q.T
        return self.center + dirs @ m.T

    def __repr__(self):
        return f"Ellipsoid(d={self.dim})"


class Ball(ConvexBody):
    """Euclidean ball with the stated center and radius."""

    kind = "ball"

    def __init__(self, center, radius):
        c = _as_array(center, None, "center")
        r = float(radius)
        if r <= 0:
            raise DomainError("radius must be positive")
        self.center = c.copy()
        self.center.setflags(write=False)
        self.radius = r
        self.dim = c.shape[0]

    def support_batch(self, U):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        return U @ self.center + self.radius * np.linalg.norm(U, axis=1)

    def contains_batch(self, X, tol=1e-9):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.linalg.norm(X - self.center, axis=1) <= self.radius + tol

    def gauge_batch(self, X):
        return self.as_ellipsoid().gauge_batch(X)

    def _origin_interior_or_raise(self):
        if np.linalg.norm(self.center) >= self.radius - config.tols.geom:
            raise PreconditionError("origin is not interior to the ball")

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def inscribed_ball(self):
        return self.center.copy(), self.radius

    def as_ellipsoid(self) -> Ellipsoid:
        return Ellipsoid(self.center, np.eye(self.dim) / self.radius**2)

    def __repr__(self):
        return f"Ball(d={self.dim}, r={self.radius})"


def _sphere_grid(d, n):
    """Deterministic quasi-uniform directions on S^{d-1}."""
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        ang = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    rng = np.random.default_rng(0xD1EC7)
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


# -- derived bodies ---------------------------------------------------------


def polar(body: ConvexBody) -> ConvexBody:
    """Polar body K* = {y : <x, y> <= 1 for all x in K}.

    Requires the origin interior.  Polytopes map to polytopes (facet
    normals become vertices); centered ellipsoids map to ellipsoids with
    the inverse shape matrix.
    """
    body._origin_interior_or_raise()
    if isinstance(body, Ball):
        if np.linalg.norm(body.center) > config.tols.geom:
            return polar(body.as_ellipsoid())
        return Ball(np.zeros(body.dim), 1.0 / body.radius)
    if isinstance(body, Ellipsoid):
        if np.linalg.norm(body.center) > config.tols.geom:
            raise DomainError("polar of a non-centered ellipsoid is not an "
                              "ellipsoid; recenter first")
        return Ellipsoid(np.zeros(body.dim), body._inv_shape)
    verts = body._normalized_facets()
    if verts.shape[1] == 1:
        return VPolytope(verts)
    return VPolytope(verts, reduce=True)


def project(body: ConvexBody, E: Subspace) -> ConvexBody:
    """Orthogonal projection onto E, expressed in E's basis coordinates."""
    if E.ambient_dim != body.dim:
        raise DomainError("subspace ambient dimension mismatch")
    if isinstance(body, VPolytope):
        pts = E.coords(body.vertices)
        return VPolytope(pts, reduce=True)
    if isinstance(body, Ball):
        return Ball(E.coords(body.center), body.radius)
    if isinstance(body, Ellipsoid):
        if E.dim == body.dim:
            b = E.basis
            return Ellipsoid(E.coords(body.center),
                             b @ body.shape @ b.T)
        b = E.basis
        m = b @ body._inv_shape @ b.T  # inverse shape of the projection
        return Ellipsoid(E.coords(body.center), np.linalg.inv(m))
    raise DomainError(f"unsupported body type {type(body)!r}")


def affine_image(body: ConvexBody, T: AffineMap) -> ConvexBody:
    """Image T(K) = {M x + t : x in K}."""
    if T.dim != body.dim:
        raise DomainError("map dimension mismatch")
    if isinstance(body, VPolytope):
        return VPolytope(T(body.vertices), reduce=True)
    if isinstance(body, Ball):
        m = T.matrix
        if np.abs(m - m[0, 0] * np.eye(body.dim)).max() <= 1e-14 and m[0, 0] > 0:
            return Ball(T(body.center), m[0, 0] * body.radius)
        body = body.as_ellipsoid()
    if isinstance(body, Ellipsoid):
        minv = np.linalg.inv(T.matrix)
        shape = minv.T @ body.shape @ minv
        return Ellipsoid(T(body.center), 0.5 * (shape + shape.T))
    raise DomainError(f"unsupported body type {type(body)!r}")


def intersect_with_reflection(body: ConvexBody, *, n_directions=None):
    """K intersected with its reflection -K (origin interior required).

    Polytopes are intersected exactly by concatenating the facet systems
    of K and -K and re-enumerating vertices.  A centrally symmetric
    ellipsoid is its own intersection.  A non-centered ellipsoid is
    first replaced by a circumscribed polytope built from 200*d support
    directions; the result then carries ``approximate = True``.
    """
    body._origin_interior_or_raise()
    d = body.dim
    if isinstance(body, (Ball, Ellipsoid)):
        center = body.center
        if np.linalg.norm(center) <= config.tols.geom:
            return body
        if n_directions is None:
            n_directions = 200 * d
        dirs = _sphere_grid(d, n_directions)
        h = body.support_batch(dirs)
        A = np.vstack([dirs, -dirs])
        b = np.concatenate([h, body.support_batch(-dirs)])
        verts = halfspaces_to_vertices(A, b)
        if verts is None:
            raise DegenerateBodyError("intersection has empty interior")
        result = VPolytope(verts, reduce=True)
        result.approximate = True
        return result
    An = body._normalized_facets()
    stacked = np.vstack([An, -An])
    verts = halfspaces_to_vertices(stacked, np.ones(stacked.shape[0]))
    if verts is None:
        raise DegenerateBodyError("intersection has empty interior")
    result = VPolytope(verts, reduce=(d > 1))
    result.approximate = False
    return result
