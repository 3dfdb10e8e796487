"""Per-track Extended Kalman Filter.

Prediction uses a CTRV model written in the ego body frame: the object
moves with constant absolute speed and yaw rate while the frame itself
translates and rotates with the ego vehicle. Correction accepts a
variable-dimension measurement (LiDAR position, camera pose, or the
fused position-from-LiDAR / yaw-from-camera combination).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import EgoMotion, TrackerConfig, TrackState, rotate_into_new_ego_frame, wrap_angle

_H_LIDAR = np.array([[1.0, 0, 0, 0, 0], [0, 1.0, 0, 0, 0]])
_H_CAM = np.array([[1.0, 0, 0, 0, 0], [0, 1.0, 0, 0, 0], [0, 0, 1.0, 0, 0]])

MAX_S_CONDITION = 1e12


@dataclass(frozen=True)
class LidarOnly:
    """Position-only correction, y = (x_lidar, y_lidar)."""

    y: np.ndarray

    H = _H_LIDAR
    angle_index = None

    def R(self, config: TrackerConfig) -> np.ndarray:
        return config.R_lidar


@dataclass(frozen=True)
class CameraOnly:
    """Pose correction, y = (x_cam, y_cam, psi_cam)."""

    y: np.ndarray

    H = _H_CAM
    angle_index = 2

    def R(self, config: TrackerConfig) -> np.ndarray:
        return config.R_cam


@dataclass(frozen=True)
class Group:
    """Fused correction: position from LiDAR, yaw from camera."""

    y: np.ndarray

    H = _H_CAM
    angle_index = 2

    def R(self, config: TrackerConfig) -> np.ndarray:
        return config.R_group


MeasurementVariant = LidarOnly | CameraOnly | Group


@dataclass
class InnovationReport:
    innovation: np.ndarray
    S: np.ndarray
    kalman_gain_applied: bool


def motion_f(state: TrackState, ego: EgoMotion, Ts: float) -> TrackState:
    """One CTRV step of the relative state, Euler-discretized.

    The object advances with its own (v, omega); the ego's translation is
    subtracted and the result is re-expressed in the rotated ego frame.
    """
    f1 = state.x + Ts * state.v * math.cos(state.psi) - Ts * ego.vx_ego
    f2 = state.y + Ts * state.v * math.sin(state.psi) - Ts * ego.vy_ego
    p = rotate_into_new_ego_frame(np.array([f1, f2]), ego.omega_ego, Ts)
    psi = wrap_angle(state.psi + Ts * (state.omega - ego.omega_ego))
    return TrackState(p[0], p[1], psi, state.v, state.omega)


def motion_jacobian(state: TrackState, ego: EgoMotion, Ts: float) -> np.ndarray:
    """Analytic d(motion_f)/d(state), 5x5."""
    a = ego.omega_ego * Ts
    c, s = math.cos(a), math.sin(a)
    cp, sp = math.cos(state.psi), math.sin(state.psi)
    # partials of f1, f2 w.r.t. (x, y, psi, v, omega)
    df1 = np.array([1.0, 0.0, -Ts * state.v * sp, Ts * cp, 0.0])
    df2 = np.array([0.0, 1.0, Ts * state.v * cp, Ts * sp, 0.0])
    F = np.zeros((5, 5))
    F[0] = c * df1 + s * df2
    F[1] = -s * df1 + c * df2
    F[2] = [0.0, 0.0, 1.0, 0.0, Ts]
    F[3, 3] = 1.0
    F[4, 4] = 1.0
    return F


@dataclass
class EkfTrackFilter:
    """EKF state/covariance pair for one track."""

    state: TrackState
    cov: np.ndarray
    config: TrackerConfig

    def __post_init__(self):
        self.cov = np.asarray(self.cov, dtype=float)
        if self.cov.shape != (5, 5):
            raise ValueError("covariance must be 5x5")

    def predict(self, ego: EgoMotion) -> None:
        """Time update: state through motion_f, covariance through F P F^T + Q."""
        F = motion_jacobian(self.state, ego, self.config.Ts)
        self.state = motion_f(self.state, ego, self.config.Ts)
        P = F @ self.cov @ F.T + self.config.Q
        self.cov = 0.5 * (P + P.T)
        if not np.all(np.isfinite(self.cov)):
            raise FloatingPointError("covariance diverged in predict")

    def correct(self, meas: MeasurementVariant) -> InnovationReport:
        """Measurement update in Joseph form; rejects ill-conditioned S."""
        H = meas.H
        R = meas.R(self.config)
        x = self.state.as_array()
        nu = np.asarray(meas.y, dtype=float) - H @ x
        if meas.angle_index is not None:
            nu[meas.angle_index] = wrap_angle(nu[meas.angle_index])
        S = H @ self.cov @ H.T + R
        S = 0.5 * (S + S.T)
        if np.linalg.cond(S) > MAX_S_CONDITION:
            return InnovationReport(innovation=nu, S=S, kalman_gain_applied=False)
        K = self.cov @ H.T @ np.linalg.inv(S)
        x_new = x + K @ nu
        x_new[2] = wrap_angle(x_new[2])
        IKH = np.eye(5) - K @ H
        P = IKH @ self.cov @ IKH.T + K @ R @ K.T
        self.cov = 0.5 * (P + P.T)
        self.state = TrackState.from_array(x_new)
        return InnovationReport(innovation=nu, S=S, kalman_gain_applied=True)

    def position_innovation_cov(self) -> np.ndarray:
        """2x2 position innovation covariance used by association gating."""
        return self.cov[:2, :2] + self.config.R_lidar

    def copy(self) -> "EkfTrackFilter":
        return EkfTrackFilter(state=self.state, cov=self.cov.copy(), config=self.config)
