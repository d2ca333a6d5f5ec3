"""
Geometry of three-dimensional rate regions.

Every region handled here is a subset of the non-negative orthant in
(R0, R1, R2) that is closed under coordinate-wise decrease. A single
bound instance is a polytope ``{R >= 0, A R <= b}`` with 0/1 rows in
``A``; a swept region is a cloud of corner points, and its time-sharing
closure is stored as the vertex set of the downward-closed convex hull.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .errors import UsageError, ValidationError

FEAS_TOL = 1e-9
DEDUP_TOL = 1e-12
CONTAIN_TOL = 1e-6
LP_FEAS_TOL = 1e-9  # shortfall accepted as zero, at the solver's feasibility tolerance

AXES = ("r0", "r1", "r2")
_CHUNK = 4096


class RateTuple(NamedTuple):
    r0: float
    r1: float
    r2: float


def _coeff_label(row):
    return "+".join(f"R{i}" for i in range(3) if row[i]) or "0"


@dataclass(frozen=True)
class ConstraintSet:
    """Rate constraints ``coeffs @ (R0, R1, R2) <= bounds``.

    Negative bounds are clamped to zero on construction, since every rate
    is non-negative anyway.
    """

    coeffs: np.ndarray
    bounds: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=int).reshape(-1, 3)
        bounds = np.array(self.bounds, dtype=float).reshape(-1)
        if coeffs.shape[0] != bounds.shape[0]:
            raise ValidationError("one bound per coefficient row")
        if not np.all(np.isin(coeffs, (0, 1))):
            raise ValidationError("coefficients must be 0 or 1")
        if len({tuple(r) for r in coeffs}) != len(coeffs):
            raise ValidationError("duplicate coefficient rows")
        if not np.all(np.isfinite(bounds)):
            raise ValidationError("bounds must be finite")
        for axis in range(3):
            if not coeffs[:, axis].any():
                raise ValidationError(f"R{axis} is unbounded in this constraint set")
        # differences of equal informations land within float noise of 0
        bounds = np.where(bounds < DEDUP_TOL, 0.0, bounds)
        coeffs.flags.writeable = False
        bounds.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "bounds", bounds)

    @property
    def labels(self):
        return [_coeff_label(r) for r in self.coeffs]

    def as_dict(self):
        return {lab: float(b) for lab, b in zip(self.labels, self.bounds)}

    def satisfied_by(self, point, tol=FEAS_TOL):
        p = np.asarray(point, dtype=float)
        return bool(np.all(p >= -tol) and np.all(self.coeffs @ p <= self.bounds + tol))

    def axis_maxima(self):
        """Largest value of each rate alone: the smallest bound that involves it."""
        return np.array([self.bounds[self.coeffs[:, i] == 1].min() for i in range(3)])


def _plane_triples(coeffs):
    """Invertible 3x3 systems among the constraint planes and the axis planes."""
    k = coeffs.shape[0]
    planes = np.vstack([coeffs, -np.eye(3)])
    triples, inverses = [], []
    for tri in itertools.combinations(range(k + 3), 3):
        m = planes[list(tri)]
        if abs(np.linalg.det(m)) < 0.5:
            continue
        triples.append(tri)
        inverses.append(np.linalg.inv(m))
    return planes, np.array(triples, dtype=int), np.array(inverses)


def batch_vertices(coeffs, bounds):
    """Vertices of many polytopes that share one coefficient matrix.

    Parameters
    ----------
    coeffs : (k, 3) array of 0/1
    bounds : (B, k) array, one row of right-hand sides per polytope

    Returns
    -------
    points : (M, 3) array
    owner : (M,) array giving the row of ``bounds`` each point belongs to
    """
    coeffs = np.asarray(coeffs, dtype=float)
    bounds = np.maximum(np.atleast_2d(np.asarray(bounds, dtype=float)), 0.0)
    planes, triples, inverses = _plane_triples(coeffs)
    pts_out, own_out = [], []
    for start in range(0, bounds.shape[0], _CHUNK):
        chunk = bounds[start:start + _CHUNK]
        rhs = np.hstack([chunk, np.zeros((chunk.shape[0], 3))])
        # (B, T, 3): solution of every invertible plane triple, per polytope
        cand = np.einsum("tij,btj->bti", inverses, rhs[:, triples])
        slack = np.einsum("pj,btj->btp", planes, cand) - rhs[:, None, :]
        scale = np.maximum(1.0, np.abs(rhs))[:, None, :]
        ok = np.all(slack <= FEAS_TOL * scale, axis=2)
        owner, _ = np.nonzero(ok)
        pts_out.append(cand[ok])
        own_out.append(owner + start)
    points = np.concatenate(pts_out) if pts_out else np.empty((0, 3))
    owner = np.concatenate(own_out) if own_out else np.empty(0, dtype=int)
    points[np.abs(points) < DEDUP_TOL] = 0.0
    return np.maximum(points, 0.0), owner


def vertices_of(cs: ConstraintSet):
    """All corner points of ``{R >= 0, A R <= b}`` as RateTuples."""
    pts, _ = batch_vertices(cs.coeffs, cs.bounds[None, :])
    return [RateTuple(*map(float, p)) for p in dedupe_points(pts)]


def dedupe_points(points, tol=DEDUP_TOL):
    """Merge points that agree to within ``tol`` per coordinate.

    The first occurrence of each group is kept and the result is sorted
    lexicographically, so the output only depends on the input order
    through which near-identical representative survives.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if pts.shape[0] == 0:
        return pts.copy()
    pts = np.where(np.abs(pts) < tol, 0.0, pts)
    keys = np.round(pts / tol).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    return pts[first]


@dataclass(frozen=True)
class RegionCloud:
    """Finite set of achievable rate points plus sweep metadata.

    ``closed`` marks the vertex set of a downward-closed convex hull, the
    only form that :func:`contains` and :func:`compare` accept.
    """

    points: np.ndarray
    meta: dict = field(default_factory=dict)
    closed: bool = False

    def __post_init__(self):
        pts = dedupe_points(self.points)
        if np.any(pts < 0):
            raise ValidationError("rates must be non-negative")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "meta", dict(self.meta))

    def __len__(self):
        return self.points.shape[0]

    def rate_tuples(self):
        return [RateTuple(*map(float, p)) for p in self.points]

    def axis_maxima(self):
        if len(self) == 0:
            return np.zeros(3)
        return self.points.max(axis=0)

    def max_rate(self, axis):
        return float(self.axis_maxima()[_axis_index(axis)])


def _affine_hull_vertices(pts):
    """Indices of the extreme points of ``pts`` in any affine dimension."""
    if pts.shape[0] == 1:
        return np.array([0])
    center = pts.mean(axis=0)
    centered = pts - center
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    scale = max(1.0, float(np.abs(pts).max()))
    rank = int(np.sum(s > 1e-10 * scale * np.sqrt(pts.shape[0])))
    if rank == 0:
        return np.array([0])
    if rank == 1:
        t = centered @ vt[0]
        return np.unique([int(np.argmin(t)), int(np.argmax(t))])
    coords = centered @ vt[:rank].T
    try:
        return ConvexHull(coords).vertices
    except QhullError:
        return ConvexHull(coords, qhull_options="QJ").vertices


def _projections(pts):
    """Every point with every subset of its coordinates set to zero."""
    masks = np.array(list(itertools.product((0.0, 1.0), repeat=3)))
    return (pts[:, None, :] * masks[None, :, :]).reshape(-1, 3)


def convex_closure(cloud: RegionCloud) -> RegionCloud:
    """Vertex set of the downward-closed convex hull of ``cloud``."""
    if len(cloud) == 0:
        raise UsageError("cannot close an empty cloud")
    pts = cloud.points
    hull = pts[_affine_hull_vertices(pts)]
    aug = dedupe_points(_projections(hull))
    verts = aug[_affine_hull_vertices(aug)]
    meta = dict(cloud.meta)
    meta["kind"] = "downward-closed convex hull"
    meta["raw_points"] = len(cloud)
    return RegionCloud(verts, meta, closed=True)


def pareto_frontier(cloud: RegionCloud):
    """Points not dominated coordinate-wise by any other point of the cloud."""
    pts = cloud.points
    if pts.shape[0] == 0:
        return []
    order = np.lexsort((-pts[:, 2], -pts[:, 1], -pts[:, 0]))
    front = np.empty((0, 3))
    for p in pts[order]:
        if front.shape[0] and np.any(np.all(front >= p, axis=1)):
            continue
        front = np.vstack([front, p])
    return [RateTuple(*map(float, p)) for p in front]


def _require_closed(cloud):
    if not cloud.closed:
        raise UsageError("region must be a convex_closure output")


def contains(cloud: RegionCloud, p, tol=CONTAIN_TOL) -> bool:
    """Whether some convex combination of the closure's vertices dominates ``p - tol``."""
    _require_closed(cloud)
    verts = cloud.points
    q = np.maximum(np.asarray(p, dtype=float) - tol, 0.0)
    if verts.shape[0] == 0:
        return not np.any(q > 0)
    if np.any(np.all(verts >= q, axis=1)):
        return True
    if np.any(q > verts.max(axis=0)):
        return False
    # minimize the total shortfall s >= 0 in verts.T @ lam + s >= q; always feasible,
    # so the solver never has to certify infeasibility on near-degenerate inputs
    m = verts.shape[0]
    cost = np.concatenate([np.zeros(m), np.ones(3)])
    a_ub = -np.hstack([verts.T, np.eye(3)])
    a_eq = np.concatenate([np.ones(m), np.zeros(3)])[None, :]
    res = linprog(cost, A_ub=a_ub, b_ub=-q, A_eq=a_eq, b_eq=[1.0], bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"containment program failed: {res.message}")
    return bool(res.fun <= LP_FEAS_TOL)


def _axis_index(axis):
    key = str(axis).lower()
    if key not in AXES:
        raise UsageError(f"unknown rate axis {axis!r}; use one of {AXES}")
    return AXES.index(key)


def project(cloud: RegionCloud, axes):
    """Shadow of the cloud on two rate axes, as an (N, 2) array."""
    if len(axes) != 2:
        raise UsageError("project needs exactly two axes")
    i, j = (_axis_index(a) for a in axes)
    if i == j:
        raise UsageError(f"duplicate axis {axes[0]!r}")
    return cloud.points[:, [i, j]].copy()


@dataclass
class ComparisonReport:
    max_a: np.ndarray
    max_b: np.ndarray
    a_in_b: bool
    b_in_a: bool
    tol: float
    witnesses_a_not_in_b: list
    witnesses_b_not_in_a: list

    @property
    def verdict(self):
        if self.a_in_b and self.b_in_a:
            return "equal"
        if self.a_in_b:
            return "a_subset_b"
        if self.b_in_a:
            return "b_subset_a"
        return "incomparable"

    def to_dict(self):
        return {
            "tol": self.tol,
            "verdict": self.verdict,
            "a_subset_of_b": self.a_in_b,
            "b_subset_of_a": self.b_in_a,
            "max_a": dict(zip(("R0", "R1", "R2"), map(float, self.max_a))),
            "max_b": dict(zip(("R0", "R1", "R2"), map(float, self.max_b))),
            "witnesses_a_not_in_b": [list(map(float, w)) for w in self.witnesses_a_not_in_b],
            "witnesses_b_not_in_a": [list(map(float, w)) for w in self.witnesses_b_not_in_a],
        }


def compare(a: RegionCloud, b: RegionCloud, tol=CONTAIN_TOL) -> ComparisonReport:
    """Containment verdicts between two closed regions, vertex by vertex."""
    if not tol > 0:
        raise UsageError("tolerance must be positive")
    _require_closed(a)
    _require_closed(b)
    out_a = [RateTuple(*map(float, v)) for v in a.points if not contains(b, v, tol)]
    out_b = [RateTuple(*map(float, v)) for v in b.points if not contains(a, v, tol)]
    return ComparisonReport(a.axis_maxima(), b.axis_maxima(), not out_a, not out_b, tol,
                            out_a, out_b)
