"""Cylinders, cross-sectional volumes, cover falsification, and the
chord-density integrals used to verify covering inequalities on balls.

A cylinder is C = H + B: a k-dimensional direction subspace H plus a
base body B living in the coordinates of a stored orthonormal basis of
E = H_perp.  Its cross-sectional volume relative to a body K is

    crv_K(C) = vol_{d-k}(B) / vol_{d-k}(P_E K),

which is invariant under invertible affine maps applied to both K and C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import rng as rngmod
from .bodies import (AffineMap, Ball, ConvexBody, Ellipsoid, Subspace,
                     VPolytope, orthonormalize_rows, project, affine_image,
                     unit_ball_volume)
from .errors import DomainError, PreconditionError
from .volumes import volume_exact

__all__ = [
    "Cylinder",
    "CoverCheckReport",
    "BangMeasureResult",
    "crv",
    "crv_oblique",
    "crv_invariance_check",
    "check_cover",
    "crv_sum_bound_check",
    "bang_chord_integral",
    "bang_measure_mc",
    "remark1_bound_check",
]


class Cylinder:
    """C = H + B with direction subspace H and base B in E = H_perp.

    ``base`` is any ConvexBody of dimension d - k, expressed in the
    coordinates of ``e_basis`` (rows orthonormal, orthogonal to H).
    """

    def __init__(self, direction: Subspace, base: ConvexBody, e_basis=None):
        d = direction.ambient_dim
        k = direction.dim
        if not (1 <= k <= d - 1):
            raise DomainError("direction dimension must be in [1, d-1]")
        if e_basis is None:
            e_basis = direction.complement().basis
        e_basis = np.atleast_2d(np.asarray(e_basis, dtype=float))
        if e_basis.shape != (d - k, d):
            raise DomainError("e_basis must have shape (d-k, d)")
        if np.abs(e_basis @ e_basis.T - np.eye(d - k)).max() > 1e-10:
            raise DomainError("e_basis is not orthonormal")
        if np.abs(direction.basis @ e_basis.T).max() > 1e-10:
            raise DomainError("e_basis is not orthogonal to the direction")
        if base.dim != d - k:
            raise DomainError("base dimension must equal d - k")
        self.direction = direction
        self.e_basis = e_basis.copy()
        self.e_basis.setflags(write=False)
        self.base = base

    @property
    def ambient_dim(self) -> int:
        return self.direction.ambient_dim

    @property
    def codim(self) -> int:
        """Dimension of the base; the cylinder is (dim H)-codimensional
        in the sense that its direction subspace has dimension dim H."""
        return self.ambient_dim - self.direction.dim

    def e_subspace(self) -> Subspace:
        return Subspace(self.e_basis)

    def base_coords(self, points):
        return np.atleast_2d(np.asarray(points, dtype=float)) @ self.e_basis.T

    def contains_batch(self, points, tol=1e-9):
        return self.base.contains_batch(self.base_coords(points), tol)

    def membership_excess_batch(self, points):
        """How far (in E) each point's projection lies outside the base.

        Nonpositive inside, positive outside; Euclidean units for
        polytope and ball bases.
        """
        z = self.base_coords(points)
        base = self.base
        if isinstance(base, VPolytope):
            A, b = base.facets()
            return (z @ A.T - b).max(axis=1)
        if isinstance(base, Ball):
            return np.linalg.norm(z - base.center, axis=1) - base.radius
        if isinstance(base, Ellipsoid):
            return base._metric_batch(z) - 1.0
        raise DomainError(f"unsupported base type {type(base)!r}")

    def transform(self, T: AffineMap) -> "Cylinder":
        """The image T(C), re-expressed as a cylinder.

        The image direction is the span of T applied to H; the base maps
        by the induced invertible affine map between the two E-frames.
        """
        if T.dim != self.ambient_dim:
            raise DomainError("map dimension mismatch")
        h_img = self.direction.basis @ T.matrix.T
        new_dir = Subspace(orthonormalize_rows(h_img))
        if new_dir.dim != self.direction.dim:
            raise DomainError("map collapses the direction subspace")
        new_e = new_dir.complement().basis
        m = new_e @ T.matrix @ self.e_basis.T
        t = new_e @ T.translation
        new_base = affine_image(self.base, AffineMap(m, t))
        return Cylinder(new_dir, new_base, new_e)

    def __repr__(self):
        return (f"Cylinder(d={self.ambient_dim}, k={self.direction.dim}, "
                f"base={self.base!r})")


def canonical_cylinder(body: ConvexBody, direction: Subspace) -> Cylinder:
    """The cylinder whose base is the full projection of the body; it
    covers the body by construction and has crv exactly 1."""
    e = direction.complement()
    return Cylinder(direction, project(body, e), e.basis)


def crv(body: ConvexBody, cyl: Cylinder) -> float:
    """vol(base) / vol(projection of the body onto E), both in E coords."""
    if cyl.ambient_dim != body.dim:
        raise DomainError("dimension mismatch")
    base_vol = volume_exact(cyl.base).value
    if base_vol <= 0:
        raise DomainError("cylinder base is degenerate")
    proj = project(body, cyl.e_subspace())
    return base_vol / volume_exact(proj).value


def crv_oblique(body: ConvexBody, cyl: Cylinder, H: Subspace) -> float:
    """crv computed through a hyperplane section instead of E.

    For a 1-codimensional-direction cylinder (dim H_cyl = 1) and any
    (d-1)-dimensional subspace H not containing the direction line,
    crv equals vol(C cut by H) / vol(projection of K onto H along the
    direction).  Exercised as an independent computation path.
    """
    if cyl.direction.dim != 1:
        raise DomainError("oblique form applies to line-direction cylinders")
    d = body.dim
    if H.dim != d - 1 or H.ambient_dim != d:
        raise DomainError("H must be a hyperplane subspace")
    m = cyl.e_basis @ H.basis.T  # (d-1) x (d-1)
    if abs(np.linalg.det(m)) < 1e-12:
        raise DomainError("H contains the cylinder direction")
    minv = AffineMap(np.linalg.inv(m))
    sec = affine_image(cyl.base, minv)          # C cut by H, in H coords
    proj_e = project(body, cyl.e_subspace())
    proj_h = affine_image(proj_e, minv)          # projection along the line
    return volume_exact(sec).value / volume_exact(proj_h).value


def crv_invariance_check(body: ConvexBody, cyl: Cylinder, T: AffineMap,
                         rel_tol: float = 1e-8) -> bool:
    """Whether crv_K(C) equals crv_{T K}(T C) within relative tolerance."""
    before = crv(body, cyl)
    after = crv(affine_image(body, T), cyl.transform(T))
    return abs(after - before) <= rel_tol * abs(before)


@dataclass
class CoverCheckReport:
    covered: bool
    witness: Optional[np.ndarray]
    samples_tested: int
    margin: float

    def to_dict(self):
        return {
            "covered": self.covered,
            "witness": None if self.witness is None else [float(v) for v in self.witness],
            "samples_tested": self.samples_tested,
            "margin": self.margin,
        }


def _cover_test_points(body: ConvexBody, grid_res: int, n_random: int, seed: int):
    pts = []
    if isinstance(body, VPolytope):
        pts.append(body.vertices)
    lo, hi = body.bounding_box()
    axes = [np.linspace(lo[i], hi[i], grid_res) for i in range(body.dim)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, body.dim)
    pts.append(grid[body.contains_batch(grid, 1e-9)])
    if n_random > 0:
        pts.append(body.sample_interior(n_random, rngmod.generator(seed, 0xC0)))
    return np.vstack(pts)


def check_cover(body: ConvexBody, cylinders, grid_res: int = 8,
                n_random: int = 256, seed: int = 0, tol: float = 1e-9) -> CoverCheckReport:
    """Falsification test of the hypothesis that the cylinders cover K.

    Tests the body's vertices, a grid over the bounding box filtered to
    K, and random interior samples.  ``covered = True`` means no
    counterexample was found among the tested points, not a certificate
    of coverage; ``covered = False`` comes with a concrete witness point
    that lies in K but outside every cylinder by more than ``margin``.
    """
    if grid_res < 2:
        raise DomainError("grid_res must be >= 2")
    cylinders = list(cylinders)
    pts = _cover_test_points(body, grid_res, n_random, seed)
    if not cylinders:
        w = pts[0]
        return CoverCheckReport(False, w, pts.shape[0], math.inf)
    excess = np.stack([c.membership_excess_batch(pts) for c in cylinders])
    worst = excess.min(axis=0)  # per point: distance outside the nearest cylinder
    bad = np.nonzero(worst > tol)[0]
    if bad.size == 0:
        return CoverCheckReport(True, None, pts.shape[0], 0.0)
    first = int(bad[0])
    return CoverCheckReport(False, pts[first], pts.shape[0], float(worst[first]))


def crv_sum_bound_check(body: ConvexBody, cylinders, grid_res: int = 8,
                        n_random: int = 256, seed: int = 0,
                        slack: float = 1e-9) -> dict:
    """Sum of crv values against the covering lower bound.

    The bound is 1 for ellipsoids and balls with line directions, and
    1 / binom(d, k) in general for direction dimension k.  Requires the
    cylinders to pass the cover falsification test first.
    """
    cylinders = list(cylinders)
    if not cylinders:
        raise PreconditionError("no cylinders supplied")
    ks = {c.direction.dim for c in cylinders}
    if len(ks) != 1:
        raise DomainError("cylinders must share one direction dimension")
    k = ks.pop()
    report = check_cover(body, cylinders, grid_res, n_random, seed)
    if not report.covered:
        err = PreconditionError(
            f"cylinders do not cover the body; witness {report.witness}")
        err.witness = report.witness
        raise err
    d = body.dim
    total = sum(crv(body, c) for c in cylinders)
    if isinstance(body, (Ball, Ellipsoid)) and k == 1:
        bound = 1.0
    else:
        bound = 1.0 / math.comb(d, k)
    return {"sum_crv": total, "bound": bound, "pass": bool(total >= bound - slack),
            "k": k, "n_cylinders": len(cylinders)}


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def density_at(points) -> np.ndarray:
    """p(x) = 1 / sqrt(1 - |x|^2) inside the unit ball, 0 outside."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    s = 1.0 - np.einsum("ij,ij->i", x, x)
    out = np.zeros(x.shape[0])
    inside = s > 0
    out[inside] = 1.0 / np.sqrt(s[inside])
    return out


def bang_chord_integral(z_offset, dim: Optional[int] = None) -> float:
    """Integral of p(x) = 1/sqrt(1-|x|^2) over the chord (line + z) of
    the unit ball, where z is the offset inside E = line_perp.

    The chord is parametrized as t = R sin(theta) with R the chord
    half-length, which removes the inverse-square-root endpoint
    singularity; 64-node Gauss-Legendre then integrates the smooth
    remainder.  For every admissible z the value is pi.
    """
    z = np.atleast_1d(np.asarray(z_offset, dtype=float))
    if dim is None:
        dim = z.shape[0] + 1
    if z.shape[0] != dim - 1:
        raise DomainError("offset must have dimension d - 1")
    zz = float(z @ z)
    if zz >= 1.0:
        raise DomainError("offset must satisfy |z| < 1 for a nondegenerate chord")
    R = math.sqrt(1.0 - zz)
    theta = (math.pi / 2.0) * _GL_NODES
    pts = np.zeros((theta.shape[0], dim))
    pts[:, 0] = R * np.sin(theta)
    pts[:, 1:] = z
    vals = density_at(pts) * R * np.cos(theta)
    return float((math.pi / 2.0) * (_GL_WEIGHTS @ vals))


@dataclass
class BangMeasureResult:
    value: float
    ci_halfwidth: float
    samples: int


def _assert_inside_unit_ball(base: ConvexBody, tol=1e-9):
    if isinstance(base, VPolytope):
        if np.linalg.norm(base.vertices, axis=1).max() > 1.0 + tol:
            raise PreconditionError("base is not contained in the unit ball")
    elif isinstance(base, Ball):
        if np.linalg.norm(base.center) + base.radius > 1.0 + tol:
            raise PreconditionError("base is not contained in the unit ball")
    elif isinstance(base, Ellipsoid):
        circum = np.linalg.norm(base.center) + 1.0 / math.sqrt(base._eigvals[0])
        if circum > 1.0 + tol:
            raise PreconditionError("base circumradius exceeds the unit ball")
    else:
        raise DomainError(f"unsupported base type {type(base)!r}")


def bang_measure_mc(region, n: int, seed: int) -> BangMeasureResult:
    """Monte Carlo of the measure mu(region) with density 1/sqrt(1-|x|^2).

    Samples uniformly in the unit ball and weights by the density.  For
    ``region`` a ConvexBody contained in the unit ball this estimates
    mu(region); for a Cylinder (whose base must fit inside the unit ball
    of E) it estimates mu(C intersect ball), whose closed form is
    pi * vol(base).
    """
    if isinstance(region, Cylinder):
        d = region.ambient_dim
        _assert_inside_unit_ball(region.base)
        member = region.contains_batch
    elif isinstance(region, ConvexBody):
        d = region.dim
        _assert_inside_unit_ball(region)
        member = region.contains_batch
    else:
        raise DomainError("region must be a ConvexBody or Cylinder")
    g = rngmod.generator(seed, 0xBA)
    dirs = g.standard_normal((n, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = g.uniform(0.0, 1.0, n) ** (1.0 / d)
    pts = dirs * radii[:, None]
    vals = density_at(pts) * member(pts, 0.0)
    vball = unit_ball_volume(d)
    mean = float(vals.mean())
    sigma = float(vals.std(ddof=1)) / math.sqrt(n)
    return BangMeasureResult(vball * mean, 3.0 * vball * sigma, n)


def remark1_bound_check(body: ConvexBody, cylinders, dK_upper: float,
                        grid_res: int = 8, n_random: int = 256, seed: int = 0,
                        slack: float = 1e-9) -> dict:
    """Near-ball refinement of the covering bound.

    For a covered instance, checks sum crv >= dK_upper^{-(d-1)}.  Since
    dK_upper only upper-bounds the Banach-Mazur distance to the ball,
    the asserted inequality is a valid (weaker) consequence of the
    sharp one.
    """
    if dK_upper < 1.0:
        raise DomainError("dK_upper must be >= 1")
    report = check_cover(body, cylinders, grid_res, n_random, seed)
    if not report.covered:
        err = PreconditionError(
            f"cylinders do not cover the body; witness {report.witness}")
        err.witness = report.witness
        raise err
    d = body.dim
    total = sum(crv(body, c) for c in cylinders)
    bound = dK_upper ** (-(d - 1))
    return {"sum_crv": total, "bound": bound, "dK_upper": dK_upper,
            "pass": bool(total >= bound - slack)}
