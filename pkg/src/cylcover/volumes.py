"""Exact and Monte Carlo volumes, parallel-section maxima, and the
projection-section inequality checker.

Exact polytope volume comes from the qhull triangulation (sum of simplex
determinants over d!).  Monte Carlo volume uses rejection sampling from
the bounding box with a fixed 3-sigma binomial confidence radius; shard
seeds follow the splitmix discipline in :mod:`cylcover.rng`, so results
are identical for a fixed (seed, n_samples, shards) triple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import rng as rngmod
from .bodies import (Ball, ConvexBody, Ellipsoid, Subspace, VPolytope,
                     halfspaces_to_vertices, unit_ball_volume)
from .errors import DomainError

__all__ = [
    "VolumeResult",
    "volume_exact",
    "volume_mc",
    "section_volume",
    "max_parallel_section",
    "check_rogers_shephard",
]


@dataclass
class VolumeResult:
    value: float
    method: str  # "exact" | "monte-carlo"
    ci_halfwidth: float = 0.0
    samples: int = 0


def volume_exact(body: ConvexBody) -> VolumeResult:
    """d-dimensional Lebesgue volume, exact up to float rounding."""
    if isinstance(body, VPolytope):
        if body.dim == 1:
            val = float(body.vertices.max() - body.vertices.min())
        else:
            val = float(ConvexHull(body.vertices).volume)
        return VolumeResult(val, "exact")
    if isinstance(body, Ball):
        return VolumeResult(unit_ball_volume(body.dim) * body.radius**body.dim,
                            "exact")
    if isinstance(body, Ellipsoid):
        det = float(np.linalg.det(body.shape))
        return VolumeResult(unit_ball_volume(body.dim) / math.sqrt(det), "exact")
    raise DomainError(f"unsupported body type {type(body)!r}")


def volume_mc(body: ConvexBody, n_samples: int, seed: int, *, shards: int = 1) -> VolumeResult:
    """Monte Carlo volume by rejection from the bounding box.

    ci_halfwidth is the 3-sigma binomial half-width scaled by the box
    volume.  Per-shard generators are derived from (seed, shard index).
    """
    if n_samples < 1000:
        raise DomainError("n_samples must be >= 1000")
    if shards < 1:
        raise DomainError("shards must be >= 1")
    lo, hi = body.bounding_box()
    box_vol = float(np.prod(hi - lo))
    per = [n_samples // shards] * shards
    per[-1] += n_samples - sum(per)
    hits = 0
    for i, m in enumerate(per):
        if m == 0:
            continue
        g = rngmod.generator(seed, i)
        pts = g.uniform(lo, hi, size=(m, body.dim))
        hits += int(body.contains_batch(pts, 0.0).sum())
    p = hits / n_samples
    value = p * box_vol
    ci = 3.0 * math.sqrt(max(p * (1.0 - p), 0.0) / n_samples) * box_vol
    return VolumeResult(value, "monte-carlo", ci, n_samples)


# -- affine sections ---------------------------------------------------------


def _clip_polygon_area(A, b, radius):
    """Area of {t in R^2 : A t <= b} via halfplane clipping of a big box."""
    poly = [(-radius, -radius), (radius, -radius), (radius, radius), (-radius, radius)]
    for (a0, a1), bi in zip(A, b):
        out = []
        m = len(poly)
        for i in range(m):
            px, py = poly[i]
            qx, qy = poly[(i + 1) % m]
            dp = bi - (a0 * px + a1 * py)
            dq = bi - (a0 * qx + a1 * qy)
            if dp >= 0:
                out.append((px, py))
            if (dp >= 0) != (dq >= 0):
                t = dp / (dp - dq)
                out.append((px + t * (qx - px), py + t * (qy - py)))
        poly = out
        if len(poly) < 3:
            return 0.0
    area = 0.0
    m = len(poly)
    for i in range(m):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % m]
        area += x0 * y1 - x1 * y0
    return abs(area) / 2.0


def _hpoly_volume(A, b, radius):
    """Volume of the bounded polytope {t : A t <= b} (0 if empty/flat)."""
    dim = A.shape[1]
    # drop near-zero rows; they are either vacuous or make the set empty
    norms = np.linalg.norm(A, axis=1)
    tiny = norms <= 1e-12
    if np.any(tiny):
        if np.any(b[tiny] < -1e-9):
            return 0.0
        A, b, norms = A[~tiny], b[~tiny], norms[~tiny]
    if A.shape[0] == 0:
        return 0.0
    A = A / norms[:, None]
    b = b / norms
    if dim == 1:
        ub = b[A[:, 0] > 0].min() if np.any(A[:, 0] > 0) else radius
        lb = (b[A[:, 0] < 0] / A[A[:, 0] < 0, 0]).max() if np.any(A[:, 0] < 0) else -radius
        return max(0.0, min(ub, radius) - max(lb, -radius))
    if dim == 2:
        return _clip_polygon_area(A, b, radius)
    verts = halfspaces_to_vertices(A, b)
    if verts is None:
        return 0.0
    try:
        return float(ConvexHull(verts).volume)
    except QhullError:
        return 0.0


def _hull_segments(poly: VPolytope):
    """1-skeleton over-approximation: vertex pairs from hull simplices.

    Extra in-facet chords are harmless for hyperplane sections: their
    crossings lie on the section's boundary, so the convex hull of all
    crossings is still exactly the section.
    """
    cached = getattr(poly, "_segments", None)
    if cached is not None:
        return cached
    v = poly.vertices
    if poly.dim == 1:
        pairs = {(0, 1)}
    else:
        hull = ConvexHull(v)
        pairs = set()
        for simplex in hull.simplices:
            s = sorted(simplex)
            for i in range(len(s)):
                for j in range(i + 1, len(s)):
                    pairs.add((s[i], s[j]))
    idx = np.array(sorted(pairs), dtype=int)
    segs = (v[idx[:, 0]], v[idx[:, 1]])
    poly._segments = segs
    return segs


def _hyperplane_section_volume(poly: VPolytope, u, level, F):
    """vol_{d-1} of poly cut by {p : <u, p> = level}; F spans the cut."""
    P, Q = _hull_segments(poly)
    fp = P @ u - level
    fq = Q @ u - level
    pts = []
    on_p = np.abs(fp) <= 1e-12
    on_q = np.abs(fq) <= 1e-12
    if np.any(on_p):
        pts.append(P[on_p])
    if np.any(on_q):
        pts.append(Q[on_q])
    cross = (fp * fq < 0)
    if np.any(cross):
        alpha = fp[cross] / (fp[cross] - fq[cross])
        pts.append(P[cross] + alpha[:, None] * (Q[cross] - P[cross]))
    if not pts:
        return 0.0
    coords = _dedupe_points(np.vstack(pts) @ F.T)
    m = F.shape[0]
    if coords.shape[0] <= m:
        return 0.0
    if m == 1:
        return float(coords.max() - coords.min())
    try:
        return float(ConvexHull(coords).volume)
    except QhullError:
        return 0.0


def _dedupe_points(pts, decimals=10):
    _, idx = np.unique(np.round(pts, decimals), axis=0, return_index=True)
    return pts[np.sort(idx)]


def section_volume(body: ConvexBody, E: Subspace, x) -> float:
    """vol_{d-k} of K intersected with the affine flat (x + E_perp).

    ``x`` is given in E's basis coordinates (k components); the flat is
    E.embed(x) + E_perp.  Returns 0 when the flat misses the body.
    """
    if not (1 <= E.dim <= body.dim - 1):
        raise DomainError("E must be a proper nontrivial subspace")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    F = E.complement().basis          # (d-k) x d
    base_pt = E.embed(x)              # point of the flat in R^d
    if isinstance(body, VPolytope):
        if E.dim == 1:
            return _hyperplane_section_volume(body, E.basis[0], float(x[0]), F)
        A, b = body.facets()
        A_t = A @ F.T
        b_t = b - A @ base_pt
        lo, hi = body.bounding_box()
        radius = float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi)))) + 1.0
        return _hpoly_volume(A_t, b_t, radius)
    if isinstance(body, Ball):
        body = body.as_ellipsoid()
    if isinstance(body, Ellipsoid):
        # restrict the quadratic to the flat: t^T M t + 2 g^T t + h <= 1
        diff = base_pt - body.center
        M = F @ body.shape @ F.T
        g = F @ body.shape @ diff
        h = float(diff @ body.shape @ diff)
        t0 = np.linalg.solve(M, -g)
        rho = 1.0 - h - float(g @ t0)
        if rho <= 0:
            return 0.0
        m = F.shape[0]
        return unit_ball_volume(m) * rho ** (m / 2) / math.sqrt(np.linalg.det(M))
    raise DomainError(f"unsupported body type {type(body)!r}")


def _golden_max(f, lo, hi, rel_bracket=1e-9):
    """Golden-section maximum of a unimodal function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > rel_bracket * max(1.0, abs(lo) + abs(hi)):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    xbest = (a + b) / 2.0
    return xbest, f(xbest)


def _section_evaluator(body: ConvexBody, E: Subspace):
    """Callable x -> vol_{d-k}(K cut by x + E_perp), with setup hoisted."""
    d, k = body.dim, E.dim
    F = E.complement().basis
    if isinstance(body, (Ball, Ellipsoid)):
        return lambda x: section_volume(body, E, x)
    if k == 1:
        u = E.basis[0]
        return lambda x: _hyperplane_section_volume(
            body, u, float(np.atleast_1d(x)[0]), F)
    A, b = body.facets()
    A_t = A @ F.T
    M_E = A @ E.basis.T
    lo, hi = body.bounding_box()
    radius = float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi)))) + 1.0

    def ev(x):
        return _hpoly_volume(A_t, b - M_E @ np.atleast_1d(x), radius)

    return ev


def max_parallel_section(body: ConvexBody, E: Subspace) -> float:
    """max over x of vol_{d-k}(K cut by the flat x + E_perp).

    The (d-k)-th root of the section volume is concave on the projection
    of K (Brunn-Minkowski), so a golden-section line search (k = 1) or a
    grid plus Nelder-Mead refinement (k >= 2) finds the global maximum.
    """
    d, k = body.dim, E.dim
    if not (1 <= k <= d - 1):
        raise DomainError("E must have dimension in [1, d-1]")
    if isinstance(body, (Ball, Ellipsoid)):
        # symmetric and concave in x, so the projected center is optimal
        return section_volume(body, E, E.coords(body.center))

    root = 1.0 / (d - k)
    sec = _section_evaluator(body, E)

    def froot(x):
        return sec(x) ** root

    if k == 1:
        u = E.basis[0]
        hi = body.support(u)
        lo = -body.support(-u)
        _, best = _golden_max(froot, lo, hi)
        return best ** (d - k)

    proj = E.coords(body.vertices)
    lo, hi = proj.min(axis=0), proj.max(axis=0)
    n_axis = 7 if k == 2 else 5
    grid_axes = [np.linspace(lo[i], hi[i], n_axis) for i in range(k)]
    mesh = np.stack(np.meshgrid(*grid_axes, indexing="ij"), axis=-1).reshape(-1, k)
    mesh = np.vstack([mesh, proj.mean(axis=0)[None, :]])
    vals = np.array([froot(x) for x in mesh])
    order = np.argsort(vals)[::-1]
    best = float(vals[order[0]])
    from scipy.optimize import minimize

    span = max(float((hi - lo).max()), 1e-9)
    res = minimize(lambda x: -froot(x), mesh[order[0]], method="Nelder-Mead",
                   options={"xatol": 1e-7 * span,
                            "fatol": 1e-9 * max(best, 1e-9),
                            "maxiter": 180})
    best = max(best, float(-res.fun))
    return best ** (d - k)


def check_rogers_shephard(body: ConvexBody, E: Subspace, rel_tol: float = 1e-6) -> dict:
    """Sandwich test for max-section times projection volume.

    Computes L = (max parallel section volume) * vol_k(projection onto E)
    and checks  vol_d(K) <= L <= binom(d, k) * vol_d(K)  to relative
    tolerance.  The lower bound is the Fubini estimate, the upper bound
    the Rogers-Shephard inequality.
    """
    from .bodies import project

    d, k = body.dim, E.dim
    max_sec = max_parallel_section(body, E)
    proj_vol = volume_exact(project(body, E)).value
    lhs = max_sec * proj_vol
    vol = volume_exact(body).value
    fubini_lower = vol
    rs_upper = math.comb(d, k) * vol
    ok = (lhs >= fubini_lower * (1.0 - rel_tol)) and (lhs <= rs_upper * (1.0 + rel_tol))
    return {"lhs": lhs, "fubini_lower": fubini_lower, "rs_upper": rs_upper,
            "pass": bool(ok)}
