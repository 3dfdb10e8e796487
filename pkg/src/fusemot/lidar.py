"""Point-cloud front end: ground removal and Euclidean clustering.

Clusters are connected components of the fixed-radius neighbor graph in
full 3D; centroids are reported in the plane because the tracker is
planar. A k-d tree accelerates neighbor queries but the result is
identical to brute force over the full distance matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .core import LidarMeasurement


@dataclass
class PointCloud:
    points: np.ndarray  # (n, 3)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(self.points)):
            raise ValueError("point cloud contains non-finite points")

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def from_text(cls, path) -> "PointCloud":
        """Load ``x y z`` rows (whitespace or comma separated), one point per line."""
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.replace(",", " ").split()
                if len(parts) != 3:
                    raise ValueError(f"expected 3 coordinates per line, got: {line!r}")
                rows.append([float(v) for v in parts])
        return cls(np.array(rows).reshape(-1, 3))


@dataclass
class Cluster:
    member_indices: np.ndarray
    centroid: np.ndarray  # planar (x, y)


@dataclass
class ClusteringParams:
    distance_tolerance: float = 0.5
    min_cluster_size: int = 5
    max_cluster_size: int = 10000
    ground_inlier_threshold: float = 0.15
    ground_height_fallback: float = 0.3
    ransac_iterations: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.distance_tolerance <= 0:
            raise ValueError("distance_tolerance must be positive")
        if not (0 < self.min_cluster_size <= self.max_cluster_size):
            raise ValueError("need 0 < min_cluster_size <= max_cluster_size")


def remove_ground(cloud: PointCloud, params: ClusteringParams) -> PointCloud:
    """Strip the dominant near-horizontal plane via randomized consensus.

    If the consensus plane is not close to horizontal (normal more than
    30 degrees from vertical) a plain height cut is used instead.
    """
    pts = cloud.points
    if len(pts) < 3:
        return PointCloud(pts.copy())
    rng = np.random.default_rng(params.seed)
    best_inliers = 0
    best = None
    for _ in range(params.ransac_iterations):
        idx = rng.choice(len(pts), size=3, replace=False)
        p0, p1, p2 = pts[idx]
        normal = np.cross(p1 - p0, p2 - p0)
        norm = np.linalg.norm(normal)
        if norm < 1e-12:
            continue
        normal = normal / norm
        dist = np.abs((pts - p0) @ normal)
        n_in = int(np.sum(dist <= params.ground_inlier_threshold))
        if n_in > best_inliers:
            best_inliers = n_in
            best = (normal, p0)
    if best is not None:
        normal, p0 = best
        if abs(normal[2]) >= math.cos(math.radians(30.0)):
            keep = np.abs((pts - p0) @ normal) > params.ground_inlier_threshold
            return PointCloud(pts[keep])
    # non-horizontal consensus plane: fall back to a height cut
    return PointCloud(pts[pts[:, 2] >= params.ground_height_fallback])


def euclidean_cluster(cloud: PointCloud, params: ClusteringParams) -> list[Cluster]:
    """Connected components within distance_tolerance, size-filtered,
    sorted by ascending centroid range."""
    pts = cloud.points
    n = len(pts)
    if n == 0:
        return []
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    tree = cKDTree(pts)
    for i, j in tree.query_pairs(params.distance_tolerance):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj

    components: dict[int, list[int]] = {}
    for i in range(n):
        components.setdefault(find(i), []).append(i)

    clusters = []
    for members in components.values():
        if not (params.min_cluster_size <= len(members) <= params.max_cluster_size):
            continue
        idx = np.array(sorted(members))
        centroid = pts[idx, :2].mean(axis=0)
        clusters.append(Cluster(member_indices=idx, centroid=centroid))
    clusters.sort(key=lambda c: (float(np.hypot(*c.centroid)), c.centroid[0], c.centroid[1]))
    return clusters


def process_cloud(cloud: PointCloud, params: ClusteringParams) -> list[LidarMeasurement]:
    """Full front end: ground removal, clustering, planar centroids."""
    kept = remove_ground(cloud, params)
    return [
        LidarMeasurement(c.centroid[0], c.centroid[1])
        for c in euclidean_cluster(kept, params)
    ]
