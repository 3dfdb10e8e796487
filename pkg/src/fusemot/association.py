"""Three-step gated association between LiDAR clusters, camera detections
and existing tracks.

Step 1 pairs LiDAR measurements with tracks, step 2 pairs camera
measurements with tracks (class-dependent gates), step 3 pairs the
leftover LiDAR and camera measurements with each other. A track matched
by both sensors yields a fused group triple. Duplicate LiDAR clusters of
an already-matched track are suppressed afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import assignment
from .core import CameraMeasurement, LidarMeasurement, TrackerConfig
from .ekf import EkfTrackFilter


@dataclass
class AssociationOutcome:
    lidar_track_pairs: set = field(default_factory=set)  # (lidar_idx, track_id)
    camera_track_pairs: set = field(default_factory=set)  # (camera_idx, track_id)
    group_triples: set = field(default_factory=set)  # (lidar_idx, camera_idx, track_id)
    lidar_camera_pairs: set = field(default_factory=set)  # (lidar_idx, camera_idx)
    unmatched_lidar: set = field(default_factory=set)
    unmatched_camera: set = field(default_factory=set)
    unmatched_tracks: set = field(default_factory=set)


def _mahalanobis_sq(diff: np.ndarray, S: np.ndarray) -> float:
    try:
        if np.linalg.cond(S) > 1e12:
            return math.inf
        return float(diff @ np.linalg.solve(S, diff))
    except np.linalg.LinAlgError:
        return math.inf


def lidar_track_distance(z: LidarMeasurement, track: EkfTrackFilter) -> float:
    """Squared Mahalanobis distance between a LiDAR centroid and a track's
    predicted position, weighted by the inverse position innovation covariance."""
    diff = z.position() - track.state.as_array()[:2]
    return _mahalanobis_sq(diff, track.position_innovation_cov())


def camera_track_distance(z: CameraMeasurement, track: EkfTrackFilter) -> float:
    """Same quadratic form on the camera's planar position; yaw and class
    do not enter the distance."""
    diff = z.position() - track.state.as_array()[:2]
    return _mahalanobis_sq(diff, track.position_innovation_cov())


def lidar_camera_distance(zl: LidarMeasurement, zc: CameraMeasurement) -> float:
    """Squared Euclidean distance between the two planar positions, m^2."""
    diff = zl.position() - zc.position()
    return float(diff @ diff)


def associate_frame(
    lidar: list[LidarMeasurement],
    camera: list[CameraMeasurement],
    tracks: list[EkfTrackFilter],
    config: TrackerConfig,
    track_ids: list[int] | None = None,
) -> tuple[AssociationOutcome, set]:
    """Run the three association steps on one frame.

    ``tracks`` must already be predicted to the frame time. ``track_ids``
    defaults to list positions. Returns the outcome sets plus the set of
    suppressed (duplicate-cluster) LiDAR indices.
    """
    if track_ids is None:
        track_ids = list(range(len(tracks)))
    out = AssociationOutcome()

    # step 1: LiDAR - track
    D_lt = np.array(
        [[lidar_track_distance(z, trk) for trk in tracks] for z in lidar]
    ).reshape(len(lidar), len(tracks))
    lt_pairs = assignment.solve(assignment.gate(D_lt, config.tau_G_lidar)) if tracks and lidar else []
    lidar_of_track = {j: i for i, j in lt_pairs}

    # step 2: camera - track over ALL tracks (enables fused triples);
    # rows are tracks so the class-dependent gate is per column
    D_ct = np.array(
        [[camera_track_distance(z, trk) for z in camera] for trk in tracks]
    ).reshape(len(tracks), len(camera))
    taus = np.array([config.gate_cam(z.class_id) for z in camera])
    ct_pairs = (
        assignment.solve(assignment.gate(D_ct, taus)) if tracks and camera else []
    )
    camera_of_track = {j: w for j, w in ct_pairs}

    # merge steps 1+2
    for j in range(len(tracks)):
        tid = track_ids[j]
        li = lidar_of_track.get(j)
        ci = camera_of_track.get(j)
        if li is not None and ci is not None:
            out.group_triples.add((li, ci, tid))
        elif li is not None:
            out.lidar_track_pairs.add((li, tid))
        elif ci is not None:
            out.camera_track_pairs.add((ci, tid))
        else:
            out.unmatched_tracks.add(tid)

    used_lidar = set(lidar_of_track.values())
    used_camera = set(camera_of_track.values())

    # step 3: camera - LiDAR on the leftover measurements
    free_lidar = [i for i in range(len(lidar)) if i not in used_lidar]
    free_camera = [w for w in range(len(camera)) if w not in used_camera]
    if free_lidar and free_camera:
        D_lc = np.array(
            [[lidar_camera_distance(lidar[i], camera[w]) for w in free_camera] for i in free_lidar]
        )
        taus_fuse = np.array([config.gate_fuse(camera[w].class_id) for w in free_camera])
        for r, c in assignment.solve(assignment.gate(D_lc, taus_fuse)):
            out.lidar_camera_pairs.add((free_lidar[r], free_camera[c]))

    paired_lidar = used_lidar | {i for i, _ in out.lidar_camera_pairs}
    paired_camera = used_camera | {w for _, w in out.lidar_camera_pairs}

    # overclustering suppression: an unmatched cluster close to a track
    # that already holds a LiDAR match is a duplicate, not a new object
    lidar_matched_tracks = [
        j for j in range(len(tracks)) if j in lidar_of_track
    ]
    suppressed = set()
    for i in range(len(lidar)):
        if i in paired_lidar:
            continue
        for j in lidar_matched_tracks:
            if D_lt[i, j] <= config.tau_G_lidar:
                suppressed.add(i)
                break

    out.unmatched_lidar = {
        i for i in range(len(lidar)) if i not in paired_lidar and i not in suppressed
    }
    out.unmatched_camera = {w for w in range(len(camera)) if w not in paired_camera}
    return out, suppressed
