"""Track lifecycle and the per-frame tracking step.

Tracks are born tentative from fused LiDAR+camera pairs only, get
confirmed by an M-of-N rule over the frames following creation, and are
deleted when they stop receiving measurements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .association import AssociationOutcome, associate_frame
from .core import (
    CameraMeasurement,
    EgoMotion,
    LidarMeasurement,
    ObjectClass,
    TrackerConfig,
    TrackState,
)
from .ekf import CameraOnly, EkfTrackFilter, Group, LidarOnly


class TrackStatus(Enum):
    TENTATIVE = "tentative"
    CONFIRMED = "confirmed"
    DEAD = "dead"


@dataclass
class Track:
    id: int
    filter: EkfTrackFilter
    class_id: ObjectClass
    status: TrackStatus = TrackStatus.TENTATIVE
    hit_history: list = field(default_factory=list)
    age: int = 0  # frames recorded since creation (creation frame excluded)
    class_disagreements: int = 0


@dataclass
class FrameDecisions:
    created: set = field(default_factory=set)
    confirmed: set = field(default_factory=set)
    deleted: set = field(default_factory=set)


def initialize_track(
    pair: tuple[LidarMeasurement, CameraMeasurement],
    config: TrackerConfig,
    track_id: int,
) -> Track:
    """New tentative track: position from LiDAR, yaw and class from camera,
    zero initial speed and yaw rate under a generous P0."""
    zl, zc = pair
    state = TrackState(zl.x_lidar, zl.y_lidar, zc.psi_cam, 0.0, 0.0)
    filt = EkfTrackFilter(state=state, cov=config.P0.copy(), config=config)
    return Track(id=track_id, filter=filt, class_id=zc.class_id)


def record_frame(track: Track, associated: bool, config: TrackerConfig) -> Track:
    """Append one frame's association outcome and update lifecycle status.

    A tentative track is confirmed once it collects Mc hits within the Nc
    frames after creation, and dropped if the window expires short.
    """
    window = max(config.Nc, config.Ne)
    track.hit_history.append(bool(associated))
    if len(track.hit_history) > window:
        del track.hit_history[0]
    track.age += 1
    if track.status is TrackStatus.TENTATIVE:
        hits_since_creation = sum(track.hit_history[-min(track.age, config.Nc):])
        if track.age <= config.Nc and hits_since_creation >= config.Mc:
            track.status = TrackStatus.CONFIRMED
        elif track.age >= config.Nc:
            track.status = TrackStatus.DEAD
    return track


def should_delete(track: Track, config: TrackerConfig) -> bool:
    """Confirmed-track deletion: fewer than Me hits in the last Ne frames."""
    window = track.hit_history[-config.Ne:]
    return sum(window) < config.Me


class MultiObjectTracker:
    """Owns the track table and advances it one frame at a time.

    ``modality`` selects which measurements may initialize tracks:
    "fusion" (default) uses fused LiDAR+camera pairs per the lifecycle
    rule; "camera" / "lidar" fall back to that modality's unmatched
    measurements so single-sensor runs can create tracks at all.
    """

    def __init__(self, config: TrackerConfig, modality: str = "fusion"):
        if modality not in ("fusion", "camera", "lidar"):
            raise ValueError(f"unknown modality: {modality}")
        self.config = config
        self.modality = modality
        self.tracks: list[Track] = []
        self._next_id = 0

    def _new_id(self) -> int:
        tid = self._next_id
        self._next_id += 1
        return tid

    def step(
        self,
        lidar: list[LidarMeasurement],
        camera: list[CameraMeasurement],
        ego: EgoMotion,
    ) -> tuple[FrameDecisions, AssociationOutcome]:
        """Predict, associate, correct, and manage the track table."""
        cfg = self.config
        decisions = FrameDecisions()

        # predict; numeric blow-up force-deletes the track
        alive: list[Track] = []
        for trk in self.tracks:
            try:
                trk.filter.predict(ego)
                if not np.all(np.isfinite(trk.filter.state.as_array())):
                    raise FloatingPointError
                alive.append(trk)
            except FloatingPointError:
                decisions.deleted.add(trk.id)
        self.tracks = alive

        outcome, _suppressed = associate_frame(
            lidar,
            camera,
            [t.filter for t in self.tracks],
            cfg,
            track_ids=[t.id for t in self.tracks],
        )
        by_id = {t.id: t for t in self.tracks}

        # corrections per outcome set
        for li, tid in outcome.lidar_track_pairs:
            by_id[tid].filter.correct(LidarOnly(y=lidar[li].position()))
        for ci, tid in outcome.camera_track_pairs:
            z = camera[ci]
            by_id[tid].filter.correct(
                CameraOnly(y=np.array([z.x_cam, z.y_cam, z.psi_cam]))
            )
            if z.class_id is not by_id[tid].class_id:
                by_id[tid].class_disagreements += 1
        for li, ci, tid in outcome.group_triples:
            zl, zc = lidar[li], camera[ci]
            by_id[tid].filter.correct(
                Group(y=np.array([zl.x_lidar, zl.y_lidar, zc.psi_cam]))
            )
            if zc.class_id is not by_id[tid].class_id:
                by_id[tid].class_disagreements += 1

        associated_ids = (
            {tid for _, tid in outcome.lidar_track_pairs}
            | {tid for _, tid in outcome.camera_track_pairs}
            | {tid for *_, tid in outcome.group_triples}
        )

        # lifecycle bookkeeping
        survivors: list[Track] = []
        for trk in self.tracks:
            was_tentative = trk.status is TrackStatus.TENTATIVE
            record_frame(trk, trk.id in associated_ids, cfg)
            if trk.status is TrackStatus.DEAD:
                decisions.deleted.add(trk.id)
                continue
            if was_tentative and trk.status is TrackStatus.CONFIRMED:
                decisions.confirmed.add(trk.id)
            if trk.status is TrackStatus.CONFIRMED and should_delete(trk, cfg):
                decisions.deleted.add(trk.id)
                continue
            survivors.append(trk)
        self.tracks = survivors

        # initialization (new tracks start recording next frame)
        for zl, zc in self._initialization_pairs(lidar, camera, outcome):
            trk = initialize_track((zl, zc), cfg, self._new_id())
            decisions.created.add(trk.id)
            self.tracks.append(trk)

        return decisions, outcome

    def _initialization_pairs(self, lidar, camera, outcome: AssociationOutcome):
        if self.modality == "fusion":
            for li, ci in sorted(outcome.lidar_camera_pairs):
                yield lidar[li], camera[ci]
        elif self.modality == "camera":
            for ci in sorted(outcome.unmatched_camera):
                z = camera[ci]
                yield LidarMeasurement(z.x_cam, z.y_cam), z
        else:  # lidar
            for li in sorted(outcome.unmatched_lidar):
                z = lidar[li]
                yield z, CameraMeasurement(z.x_lidar, z.y_lidar, 0.0, ObjectClass.OTHER)

    def snapshots(self, confirmed_only: bool = True) -> list[dict]:
        """JSON-ready per-track snapshots for logging."""
        out = []
        for trk in self.tracks:
            if confirmed_only and trk.status is not TrackStatus.CONFIRMED:
                continue
            out.append(
                {
                    "id": trk.id,
                    "status": trk.status.value,
                    "class": trk.class_id.value,
                    "state": trk.filter.state.as_array().tolist(),
                    "cov_diag": np.diag(trk.filter.cov).tolist(),
                }
            )
        return out


def step_tracker(
    tracks: MultiObjectTracker,
    lidar: list[LidarMeasurement],
    camera: list[CameraMeasurement],
    ego: EgoMotion,
) -> tuple[FrameDecisions, AssociationOutcome]:
    """Functional alias for MultiObjectTracker.step."""
    return tracks.step(lidar, camera, ego)
