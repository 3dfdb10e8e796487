"""Shared domain types and frame conventions.

Conventions fixed once, used everywhere:
  - ego body frame: x forward, y left, headings counter-clockwise positive
  - angles wrapped to (-pi, pi], closed at +pi
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class ObjectClass(Enum):
    PEDESTRIAN = "pedestrian"
    CYCLIST = "cyclist"
    CAR = "car"
    OTHER = "other"

    @classmethod
    def from_string(cls, name: str) -> "ObjectClass":
        """Map a detector class label to the closed enumeration.

        Unknown labels fall back to OTHER, which carries the most
        conservative gates.
        """
        try:
            return cls(name.lower())
        except ValueError:
            return cls.OTHER


def wrap_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi], closed at +pi."""
    if not math.isfinite(theta):
        raise ValueError(f"non-finite angle: {theta}")
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped = math.pi
    return wrapped


def rotate_into_new_ego_frame(p: np.ndarray, omega_ego: float, Ts: float) -> np.ndarray:
    """Re-express a planar point in the ego frame after the ego yaws by omega_ego*Ts.

    Equivalent to rotating the point by -omega_ego*Ts:
      out_x =  p_x*cos(a) + p_y*sin(a)
      out_y = -p_x*sin(a) + p_y*cos(a)      with a = omega_ego*Ts
    """
    p = np.asarray(p, dtype=float)
    if not (np.all(np.isfinite(p)) and math.isfinite(omega_ego) and math.isfinite(Ts)):
        raise ValueError("non-finite input to rotate_into_new_ego_frame")
    a = omega_ego * Ts
    c, s = math.cos(a), math.sin(a)
    return np.array([p[0] * c + p[1] * s, -p[0] * s + p[1] * c])


@dataclass(frozen=True)
class EgoMotion:
    """Ego vehicle body-frame velocities consumed by the motion model."""

    vx_ego: float  # longitudinal, m/s
    vy_ego: float  # lateral, m/s
    omega_ego: float  # yaw rate, rad/s

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.vx_ego, self.vy_ego, self.omega_ego)):
            raise ValueError("EgoMotion fields must be finite")


@dataclass(frozen=True)
class TrackState:
    """Ego-relative track state (x, y, psi, v, omega).

    x, y are relative position in meters, psi the relative heading in
    radians (wrapped), v and omega the object's absolute linear speed and
    yaw rate.
    """

    x: float
    y: float
    psi: float
    v: float
    omega: float

    def __post_init__(self):
        vals = (self.x, self.y, self.psi, self.v, self.omega)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("TrackState components must be finite")
        object.__setattr__(self, "psi", wrap_angle(self.psi))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.psi, self.v, self.omega])

    @classmethod
    def from_array(cls, a) -> "TrackState":
        a = np.asarray(a, dtype=float)
        return cls(a[0], a[1], a[2], a[3], a[4])


@dataclass(frozen=True)
class CameraMeasurement:
    """Camera detection: relative planar position, yaw and object class."""

    x_cam: float
    y_cam: float
    psi_cam: float
    class_id: ObjectClass

    def __post_init__(self):
        object.__setattr__(self, "psi_cam", wrap_angle(self.psi_cam))

    def position(self) -> np.ndarray:
        return np.array([self.x_cam, self.y_cam])


@dataclass(frozen=True)
class LidarMeasurement:
    """LiDAR cluster centroid: relative planar position."""

    x_lidar: float
    y_lidar: float

    def __post_init__(self):
        if not (math.isfinite(self.x_lidar) and math.isfinite(self.y_lidar)):
            raise ValueError("LidarMeasurement must be finite")

    def position(self) -> np.ndarray:
        return np.array([self.x_lidar, self.y_lidar])


def _default_Q() -> np.ndarray:
    # process noise for Ts = 0.1 s; heading/velocity terms scale with Ts
    Ts = 0.1
    return np.diag([1e-4, 1e-4, (0.3 * Ts) ** 2, (1.5 * Ts) ** 2, (1.0 * Ts) ** 2])


def _default_R_lidar() -> np.ndarray:
    return np.diag([0.05**2, 0.05**2])


def _default_R_cam() -> np.ndarray:
    return np.diag([0.5**2, 0.5**2, math.radians(8.0) ** 2])


def _default_R_group() -> np.ndarray:
    # position entries mirror the LiDAR noise (group corrections take
    # position from LiDAR), yaw entry mirrors the camera yaw noise
    return np.diag([0.05**2, 0.05**2, math.radians(8.0) ** 2])


def _default_P0() -> np.ndarray:
    # generous v/omega variance: both start at zero on initialization
    return np.diag([0.25, 0.25, math.radians(10.0) ** 2, 4.0, 1.0])


def _default_tau_cam() -> dict:
    return {
        ObjectClass.CAR: 200.0,
        ObjectClass.CYCLIST: 250.0,
        ObjectClass.PEDESTRIAN: 300.0,
        ObjectClass.OTHER: 300.0,
    }


def _default_tau_fuse() -> dict:
    return {
        ObjectClass.CAR: 6.0,
        ObjectClass.CYCLIST: 7.0,
        ObjectClass.PEDESTRIAN: 8.0,
        ObjectClass.OTHER: 8.0,
    }


@dataclass
class TrackerConfig:
    """All tracker tuning in one place.

    Gating thresholds: tau_G_lidar and tau_G_cam are in squared-Mahalanobis
    units, tau_G_fuse in m^2. Camera and fusion gates are per object class
    because camera position error depends on the detected class.
    """

    Ts: float = 0.1
    tau_G_lidar: float = 9.21  # chi-square 2 dof, 99%
    tau_G_cam: dict = field(default_factory=_default_tau_cam)
    tau_G_fuse: dict = field(default_factory=_default_tau_fuse)
    Q: np.ndarray = field(default_factory=_default_Q)
    R_lidar: np.ndarray = field(default_factory=_default_R_lidar)
    R_cam: np.ndarray = field(default_factory=_default_R_cam)
    R_group: np.ndarray = field(default_factory=_default_R_group)
    Mc: int = 2
    Nc: int = 3
    Me: int = 1
    Ne: int = 5
    P0: np.ndarray = field(default_factory=_default_P0)

    def __post_init__(self):
        self.Q = np.asarray(self.Q, dtype=float)
        self.R_lidar = np.asarray(self.R_lidar, dtype=float)
        self.R_cam = np.asarray(self.R_cam, dtype=float)
        self.R_group = np.asarray(self.R_group, dtype=float)
        self.P0 = np.asarray(self.P0, dtype=float)
        self.validate()

    def validate(self):
        if self.Ts <= 0:
            raise ValueError("Ts must be positive")
        if self.tau_G_lidar <= 0:
            raise ValueError("tau_G_lidar must be positive")
        for name, gates in (("tau_G_cam", self.tau_G_cam), ("tau_G_fuse", self.tau_G_fuse)):
            if any(v <= 0 for v in gates.values()):
                raise ValueError(f"{name} thresholds must be positive")
        if not (self.Mc <= self.Nc and self.Me <= self.Ne):
            raise ValueError("lifecycle constants require Mc <= Nc and Me <= Ne")
        for name, M, dim in (
            ("Q", self.Q, 5),
            ("R_lidar", self.R_lidar, 2),
            ("R_cam", self.R_cam, 3),
            ("R_group", self.R_group, 3),
            ("P0", self.P0, 5),
        ):
            if M.shape != (dim, dim):
                raise ValueError(f"{name} must be {dim}x{dim}")
            if not np.allclose(M, M.T, rtol=1e-9, atol=1e-12):
                raise ValueError(f"{name} must be symmetric")
            if np.any(np.linalg.eigvalsh(M) < -1e-12 * max(np.trace(M), 1.0)):
                raise ValueError(f"{name} must be positive semi-definite")

    def gate_cam(self, cls: ObjectClass) -> float:
        return self.tau_G_cam.get(cls, self.tau_G_cam[ObjectClass.OTHER])

    def gate_fuse(self, cls: ObjectClass) -> float:
        return self.tau_G_fuse.get(cls, self.tau_G_fuse[ObjectClass.OTHER])
