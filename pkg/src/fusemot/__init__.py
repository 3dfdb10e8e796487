"""Camera/LiDAR multi-object tracking with ego-relative EKFs, gated
Munkres association and M/N track lifecycle, plus a scenario simulator
and a truth-matched metrics harness."""

from .core import (
    CameraMeasurement,
    EgoMotion,
    LidarMeasurement,
    ObjectClass,
    TrackerConfig,
    TrackState,
    rotate_into_new_ego_frame,
    wrap_angle,
)
from .ekf import CameraOnly, EkfTrackFilter, Group, LidarOnly, motion_f, motion_jacobian
from .tracker import MultiObjectTracker, Track, TrackStatus

__all__ = [
    "CameraMeasurement",
    "CameraOnly",
    "EgoMotion",
    "EkfTrackFilter",
    "Group",
    "LidarMeasurement",
    "LidarOnly",
    "MultiObjectTracker",
    "ObjectClass",
    "Track",
    "TrackState",
    "TrackStatus",
    "TrackerConfig",
    "motion_f",
    "motion_jacobian",
    "rotate_into_new_ego_frame",
    "wrap_angle",
]

__version__ = "0.1.0"
