"""Lattice-point enumeration, lattice width, lattice-freeness, and
width evidence for lattice-free ellipsoids.

The lattice width of K is min over nonzero integer y of
support(K, y) + support(K, -y).  The minimizing direction reported here
is canonicalized to have positive first nonzero coordinate and, among
directions whose widths tie within 1e-9, the one minimizing
(squared norm, index of first nonzero coordinate, coordinate tuple).
Under that rule the unit cube reports e_1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .bodies import Ball, ConvexBody, Ellipsoid, VPolytope
from .errors import DomainError, PreconditionError, ResourceLimitError

__all__ = [
    "LatticeWidthResult",
    "enumerate_lattice_points",
    "lattice_width",
    "directional_width",
    "is_lattice_free",
    "random_lattice_free_ellipsoid",
    "ellipsoid_flatness_evidence",
]

_BOX_LIMIT = 10**7
_CANDIDATE_LIMIT = 10**6


def _integer_box(body: ConvexBody, tol: float):
    lo, hi = body.bounding_box()
    lo_i = np.ceil(lo - tol).astype(int)
    hi_i = np.floor(hi + tol).astype(int)
    return lo_i, hi_i


def enumerate_lattice_points(body: ConvexBody, tol: float = 1e-9) -> np.ndarray:
    """All integer points of the (closed) body, boundary included.

    Iterates the integer bounding box and keeps contained points.
    Raises ResourceLimitError when the box holds more than 10^7 points;
    shrink or recenter the body in that case.
    """
    lo, hi = _integer_box(body, tol)
    counts = np.maximum(hi - lo + 1, 0)
    total = int(np.prod(counts.astype(object)))
    if total > _BOX_LIMIT:
        raise ResourceLimitError(
            f"integer bounding box holds {total} > {_BOX_LIMIT} points; "
            "reduce the body size")
    if total == 0:
        return np.zeros((0, body.dim), dtype=int)
    axes = [np.arange(lo[i], hi[i] + 1) for i in range(body.dim)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, body.dim)
    keep = body.contains_batch(grid.astype(float), tol)
    return grid[keep]


@dataclass
class LatticeWidthResult:
    width: float
    direction: np.ndarray  # integer vector
    evaluations: int

    def to_dict(self):
        return {"width": self.width,
                "direction": [int(v) for v in self.direction]}


def directional_width(body: ConvexBody, y) -> float:
    y = np.asarray(y, dtype=float)
    return body.support(y) + body.support(-y)


def _canonical_half(cands: np.ndarray) -> np.ndarray:
    """Keep one representative of each +-y pair: first nonzero positive."""
    keep = np.zeros(cands.shape[0], dtype=bool)
    for i, y in enumerate(cands):
        nz = np.nonzero(y)[0]
        if nz.size and y[nz[0]] > 0:
            keep[i] = True
    return cands[keep]


def _first_nonzero_index(y) -> int:
    nz = np.nonzero(y)[0]
    return int(nz[0]) if nz.size else 10**9


def select_min_width(cands: np.ndarray, widths: np.ndarray,
                     tie_tol: float = 1e-9):
    """Documented tie-break: minimal width, then (|y|^2, first nonzero
    index, lexicographic tuple) among widths within tie_tol of the min."""
    wmin = widths.min()
    tied = cands[widths <= wmin + tie_tol]
    key = min(
        (int(y @ y), _first_nonzero_index(y), tuple(int(v) for v in y))
        for y in tied)
    best = np.array(key[2], dtype=int)
    # report the width of the selected direction itself
    idx = next(i for i, y in enumerate(cands) if tuple(int(v) for v in y) == key[2])
    return float(widths[idx]), best


def lattice_width(body: ConvexBody) -> LatticeWidthResult:
    """Exact lattice width by pruned enumeration of integer directions.

    Pruning lemma: if B(c, r) is inside K then for any direction y,
    support(K-c, y) + support(K-c, -y) >= 2 r |y| (the inscribed ball's
    own width in direction y); widths are translation invariant, so any
    y with 2 r |y| > W0 cannot beat the incumbent W0 taken over the
    coordinate directions.  Hence only |y| <= W0 / (2 r) needs
    enumeration and the returned minimum is exact.
    """
    d = body.dim
    eye = np.eye(d)
    coord = np.vstack([eye]).astype(int)
    coord_widths = np.array([directional_width(body, y) for y in coord])
    w0 = float(coord_widths.min())
    _, r = body.inscribed_ball()
    if r <= 0:
        raise DomainError("body has empty interior")
    radius = w0 / (2.0 * r)
    m = int(math.floor(radius + 1e-12))
    if (2 * m + 1) ** d > 2 * _CANDIDATE_LIMIT:
        raise ResourceLimitError(
            f"pruning radius {radius:.3g} requires more than "
            f"{_CANDIDATE_LIMIT} candidate directions")
    if m >= 1:
        axes = [np.arange(-m, m + 1)] * d
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        norms = np.einsum("ij,ij->i", grid, grid)
        grid = grid[(norms > 0) & (norms <= radius**2 + 1e-9)]
        cands = _canonical_half(grid)
    else:
        cands = np.zeros((0, d), dtype=int)
    cands = np.vstack([coord, cands])
    # dedupe
    cands = np.unique(cands, axis=0)
    support_pos = body.support_batch(cands.astype(float))
    support_neg = body.support_batch(-cands.astype(float))
    widths = support_pos + support_neg
    width, direction = select_min_width(cands, widths)
    return LatticeWidthResult(width, direction, int(cands.shape[0]))


def is_lattice_free(body: ConvexBody, mode: str = "closed",
                    tol: float = 1e-9) -> bool:
    """Whether the body misses the integer lattice.

    mode="closed": the closed body contains no integer point (matches
    the freeness condition in the flatness parameter's definition).
    mode="open": only interior integer points violate freeness, so
    boundary lattice points are allowed.
    """
    if mode not in ("closed", "open"):
        raise DomainError("mode must be 'closed' or 'open'")
    membership_tol = tol if mode == "closed" else -tol
    lo, hi = _integer_box(body, tol)
    counts = np.maximum(hi - lo + 1, 0)
    total = int(np.prod(counts.astype(object)))
    if total > _BOX_LIMIT:
        raise ResourceLimitError("integer bounding box too large")
    if total == 0:
        return True
    axes = [np.arange(lo[i], hi[i] + 1) for i in range(body.dim)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, body.dim)
    return not bool(body.contains_batch(grid.astype(float), membership_tol).any())


def random_lattice_free_ellipsoid(d: int, rng: np.random.Generator,
                                  max_attempts: int = 100,
                                  bisect_iters: int = 48) -> Ellipsoid:
    """A random ellipsoid inflated until just lattice-free (closed mode).

    Shape eigenvalues are drawn in [1, 9] (condition kept modest so the
    integer bounding box stays small), the center is jittered off the
    lattice, and the scale is bisected to the largest lattice-free
    inflation.
    """
    for _ in range(max_attempts):
        g = rng.standard_normal((d, d))
        q, _ = np.linalg.qr(g)
        eig = rng.uniform(1.0, 9.0, d)
        metric = q @ np.diag(eig) @ q.T
        metric = 0.5 * (metric + metric.T)
        center = rng.uniform(0.15, 0.85, d)

        def free_at(s):
            return is_lattice_free(Ellipsoid(center, metric / s**2), "closed")

        s_lo, s_hi = 0.05, 6.0 * math.sqrt(d * eig.max())
        if not free_at(s_lo):
            continue
        if free_at(s_hi):
            continue
        for _ in range(bisect_iters):
            mid = 0.5 * (s_lo + s_hi)
            if free_at(mid):
                s_lo = mid
            else:
                s_hi = mid
        return Ellipsoid(center, metric / s_lo**2)
    raise ResourceLimitError("failed to generate a lattice-free ellipsoid")


def ellipsoid_flatness_evidence(trials: int, d: int, seed: int) -> dict:
    """Width evidence for lattice-free ellipsoids.

    Generates ``trials`` random just-lattice-free ellipsoids and asserts
    lattice width <= d + 1e-6 for each; the maximal observed width is
    reported.  Any violation would contradict the flatness bound for
    ellipsoids and is returned in ``violations``.
    """
    if d not in (2, 3, 4):
        raise PreconditionError("d must be 2, 3, or 4")
    if trials < 1:
        raise DomainError("trials must be >= 1")
    widths = []
    violations = []
    for i in range(trials):
        rng = rngmod.generator(seed, 0xF1A7, i)
        ell = random_lattice_free_ellipsoid(d, rng)
        w = lattice_width(ell).width
        widths.append(w)
        if w > d + 1e-6:
            violations.append({"trial": i, "width": w})
    return {
        "trials": trials,
        "d": d,
        "max_width": max(widths),
        "mean_width": float(np.mean(widths)),
        "bound": float(d),
        "violations": violations,
        "pass": not violations,
    }
