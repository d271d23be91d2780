"""Optimization-relevant expressivity analytics.

The p=1 parameter sweep builds a matrix whose rows are outcome probability
distributions; PCA projects the swept manifold onto its two directions of
largest variance, and the projected area is estimated with an alpha-shape
(concave envelope).  The alpha parameter is a circumradius threshold:
Delaunay triangles with circumradius <= alpha are kept, so large alpha
recovers the convex hull and small alpha tightens the boundary.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay, QhullError
from shapely.geometry import Polygon
from shapely.ops import unary_union

from .analytics import DenseState, dephase
from .problems import IsingHamiltonian
from .qaoa import QaoaParams, run


class ExpressivityError(ValueError):
    pass


@dataclass
class DistributionMatrix:
    """Rows: (gamma, xi) grid points; columns: 2^n outcome probabilities."""

    rows: np.ndarray
    gammas: np.ndarray
    xis: np.ndarray
    n: int

    def write_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(
                ["gamma", "xi"] + [f"p{j}" for j in range(self.rows.shape[1])]
            )
            k = 0
            for g in self.gammas:
                for x in self.xis:
                    w.writerow([repr(float(g)), repr(float(x))] +
                               [repr(float(v)) for v in self.rows[k]])
                    k += 1


@dataclass
class PcaResult:
    components: np.ndarray  # orthonormal rows, by decreasing variance
    variances: np.ndarray
    projection: np.ndarray  # rows projected on the top-2 components
    mean: np.ndarray

    def write_projection_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["pc1", "pc2"])
            for row in self.projection:
                w.writerow([repr(float(row[0])), repr(float(row[1]))])


def sweep_p1(
    psi0: DenseState,
    h: IsingHamiltonian,
    resolution: int = 64,
    gamma_max: float = 2 * np.pi,
    xi_max: float = np.pi,
) -> DistributionMatrix:
    """Outcome distributions of a p=1 QAOA over an equispaced parameter grid."""
    if resolution < 8:
        raise ExpressivityError("resolution must be >= 8 per axis")
    gammas = np.linspace(0, gamma_max, resolution, endpoint=False)
    xis = np.linspace(0, xi_max, resolution, endpoint=False)
    rows = np.empty((resolution * resolution, 2**h.n))
    k = 0
    for g in gammas:
        for x in xis:
            psi = run(psi0, h, QaoaParams(gamma=[g], xi=[x]))
            rows[k] = dephase(psi)
            k += 1
    return DistributionMatrix(rows=rows, gammas=gammas, xis=xis, n=h.n)


def pca(m) -> PcaResult:
    """Mean-centered covariance eigendecomposition via SVD of the data matrix."""
    rows = m.rows if isinstance(m, DistributionMatrix) else np.asarray(m, dtype=float)
    if rows.shape[0] < 3:
        raise ExpressivityError("need at least 3 rows for PCA")
    mean = rows.mean(axis=0)
    centered = rows - mean
    _, s, vh = np.linalg.svd(centered, full_matrices=False)
    variances = s**2 / (rows.shape[0] - 1)
    projection = centered @ vh[:2].T
    return PcaResult(components=vh, variances=variances, projection=projection, mean=mean)


def _triangulation(points: np.ndarray):
    """Delaunay triangles with their circumradii; None for degenerate input."""
    try:
        tri = Delaunay(points)
    except QhullError:
        return None
    simplices = tri.simplices
    t = points[simplices]
    a = np.linalg.norm(t[:, 0] - t[:, 1], axis=1)
    b = np.linalg.norm(t[:, 1] - t[:, 2], axis=1)
    c = np.linalg.norm(t[:, 2] - t[:, 0], axis=1)
    s = (a + b + c) / 2
    area2 = np.maximum(s * (s - a) * (s - b) * (s - c), 0.0)
    areas = np.sqrt(area2)
    with np.errstate(divide="ignore", invalid="ignore"):
        circum = np.where(areas > 0, a * b * c / (4 * areas), np.inf)
    return simplices, circum


def _single_covering_component(simplices, keep, n_points) -> bool:
    """True if the kept triangles form one edge-connected component whose
    vertices include every input point."""
    kept = simplices[keep]
    if kept.size == 0:
        return False
    if len(np.unique(kept)) != n_points:
        return False
    parent = list(range(len(kept)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    edge_owner = {}
    for idx, tri in enumerate(kept):
        for e in ((0, 1), (1, 2), (0, 2)):
            key = tuple(sorted((tri[e[0]], tri[e[1]])))
            if key in edge_owner:
                ri, rj = find(edge_owner[key]), find(idx)
                parent[ri] = rj
            else:
                edge_owner[key] = idx
    roots = {find(i) for i in range(len(kept))}
    return len(roots) == 1


def envelope_area(points, alpha="auto") -> float:
    """Area of the alpha-shape polygon of 2D points.

    alpha="auto" selects the smallest circumradius threshold whose kept
    triangles form a single connected polygon containing all points (the
    tightest envelope that still covers the sample).  Collinear or
    degenerate inputs have zero area.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ExpressivityError("expected an (N, 2) point array")
    points = np.unique(points, axis=0)
    if points.shape[0] < 3:
        return 0.0
    tri = _triangulation(points)
    if tri is None:
        return 0.0
    simplices, circum = tri

    if alpha == "auto":
        radii = np.unique(circum[np.isfinite(circum)])
        if radii.size == 0:
            return 0.0
        lo, hi = 0, radii.size - 1
        if not _single_covering_component(
            simplices, circum <= radii[hi], points.shape[0]
        ):
            keep = np.ones(len(simplices), dtype=bool)  # fall back to everything
        else:
            while lo < hi:
                mid = (lo + hi) // 2
                if _single_covering_component(
                    simplices, circum <= radii[mid], points.shape[0]
                ):
                    hi = mid
                else:
                    lo = mid + 1
            keep = circum <= radii[lo]
    else:
        alpha = float(alpha)
        if alpha <= 0:
            raise ExpressivityError("alpha must be positive")
        keep = circum <= alpha
        if not keep.any():
            return 0.0
    polys = [Polygon(points[s]) for s in simplices[keep]]
    return float(unary_union(polys).area)


def normalized_projection_area(res: PcaResult) -> float:
    """Alpha-shape area of the projection in unit-variance principal
    coordinates.

    Dividing each principal axis by its standard deviation removes the
    cloud's overall Euclidean scale, which otherwise shrinks as outcome
    distributions spread over 2^n basis states; the result is a scale-free
    filledness measure comparable across initialization states and
    instances."""
    v = res.variances[:2]
    # a second component at roundoff level is degenerate, not a real direction
    if v.size < 2 or v[0] <= 0 or v[1] <= 1e-12 * v[0]:
        return 0.0
    return envelope_area(res.projection / np.sqrt(v))


def convex_hull_area(points) -> float:
    """Convex-hull baseline for the same point set."""
    points = np.unique(np.asarray(points, dtype=float), axis=0)
    tri = _triangulation(points)
    if tri is None:
        return 0.0
    simplices, _ = tri
    return float(unary_union([Polygon(points[s]) for s in simplices]).area)


def significant_rank(variances, threshold: float = 0.01) -> int:
    """Count of PCA variances at least threshold * leading variance."""
    variances = np.asarray(variances, dtype=float)
    if variances.size == 0 or variances.max() <= 0:
        return 0
    return int((variances >= threshold * variances.max()).sum())


def epsilon_distinct_count(m, eps: float, metric: str = "tv") -> int:
    """Greedy epsilon-net size over the distribution rows (deterministic order).

    Estimates how many pairwise epsilon-distinct outcome distributions the
    swept circuit family reaches."""
    if eps <= 0:
        raise ExpressivityError("eps must be positive")
    rows = m.rows if isinstance(m, DistributionMatrix) else np.asarray(m, dtype=float)
    if metric == "tv":
        dist = lambda a, b: 0.5 * np.abs(a - b).sum(axis=1)
    elif metric == "euclidean":
        dist = lambda a, b: np.linalg.norm(a - b, axis=1)
    else:
        raise ExpressivityError(f"unknown metric {metric!r}")
    reps = np.empty((0, rows.shape[1]))
    for row in rows:
        if reps.shape[0] == 0 or dist(reps, row[None, :]).min() > eps:
            reps = np.vstack([reps, row])
    return reps.shape[0]


def write_summary_json(path, area, normalized_area, rank, distinct=None):
    data = {"area": area, "normalized_area": normalized_area, "rank": rank}
    if distinct is not None:
        data["epsilon_distinct"] = distinct
    with open(path, "w") as f:
        json.dump(data, f, indent=2)
