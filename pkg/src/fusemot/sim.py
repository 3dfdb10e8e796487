"""Synthetic world generator: ground-truth trajectories, ego motion and
noisy camera/LiDAR sensor models with field-of-view limits.

Truth follows exact constant-turn-rate arcs in the global frame; the
sensors see the ego-relative world through Gaussian noise, a detection
probability and an angular/range cut. Everything is deterministic given
the scenario seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    CameraMeasurement,
    EgoMotion,
    LidarMeasurement,
    ObjectClass,
    TrackerConfig,
    TrackState,
    wrap_angle,
)
from .ekf import motion_f
from .lidar import ClusteringParams, PointCloud, process_cloud

FORMAT_VERSION = 1


@dataclass(frozen=True)
class GlobalPose:
    X: float
    Y: float
    Psi: float


@dataclass(frozen=True)
class MotionSegment:
    duration_frames: int
    v: float
    omega: float
    vy: float = 0.0  # lateral velocity; only meaningful for the ego


@dataclass
class AgentSpec:
    agent_id: int
    class_id: ObjectClass
    pose0: GlobalPose
    segments: list[MotionSegment]


@dataclass
class EgoSpec:
    pose0: GlobalPose
    segments: list[MotionSegment]


@dataclass
class CameraModel:
    fov_deg: float = 120.0
    range_m: float = 60.0
    p_detect: float = 0.95
    sigma_pos_per_class: dict = field(
        default_factory=lambda: {
            ObjectClass.CAR: 0.5,
            ObjectClass.CYCLIST: 0.6,
            ObjectClass.PEDESTRIAN: 0.7,
            ObjectClass.OTHER: 0.7,
        }
    )
    sigma_yaw_deg: float = 5.0


@dataclass
class LidarModel:
    mode: str = "centroid"  # "centroid" or "cloud"
    fov_deg: float = 180.0
    range_m: float = 60.0
    p_detect: float = 0.95
    sigma_pos: float = 0.1
    box_dims: tuple = (4.0, 1.8, 1.5)  # cloud mode: sampled box length/width/height
    points_per_face: int = 80
    clustering: ClusteringParams = field(
        default_factory=lambda: ClusteringParams(distance_tolerance=1.0)
    )


@dataclass
class Scenario:
    Ts: float
    n_frames: int
    seed: int
    ego: EgoSpec
    agents: list[AgentSpec]
    camera: CameraModel
    lidar: LidarModel


@dataclass
class AgentFrame:
    agent_id: int
    class_id: ObjectClass
    pose: GlobalPose
    v: float
    omega: float
    rel: TrackState  # truth relative to the ego, with true v/omega


@dataclass
class FrameTruth:
    frame: int
    t: float
    ego_pose: GlobalPose
    ego_motion: EgoMotion
    agents: list[AgentFrame]


def _ctrv_arc(pose: GlobalPose, vx: float, vy: float, omega: float, Ts: float) -> GlobalPose:
    """Exact constant-rate step in the global frame."""
    X, Y, Psi = pose.X, pose.Y, pose.Psi
    if abs(omega) < 1e-9:
        c, s = math.cos(Psi), math.sin(Psi)
        return GlobalPose(X + (vx * c - vy * s) * Ts, Y + (vx * s + vy * c) * Ts, Psi)
    Psi2 = Psi + omega * Ts
    s1, s2 = math.sin(Psi), math.sin(Psi2)
    c1, c2 = math.cos(Psi), math.cos(Psi2)
    X2 = X + (vx * (s2 - s1) + vy * (c2 - c1)) / omega
    Y2 = Y + (-vx * (c2 - c1) + vy * (s2 - s1)) / omega
    return GlobalPose(X2, Y2, wrap_angle(Psi2))


def _segment_at(segments: list[MotionSegment], frame: int) -> MotionSegment:
    k = frame
    for seg in segments:
        if k < seg.duration_frames:
            return seg
        k -= seg.duration_frames
    return segments[-1]


def world_to_ego(agent_pose: GlobalPose, ego_pose: GlobalPose) -> tuple[float, float, float]:
    """Rigid-body transform of a global pose into the ego body frame."""
    dx = agent_pose.X - ego_pose.X
    dy = agent_pose.Y - ego_pose.Y
    c, s = math.cos(ego_pose.Psi), math.sin(ego_pose.Psi)
    return (c * dx + s * dy, -s * dx + c * dy, wrap_angle(agent_pose.Psi - ego_pose.Psi))


def propagate_truth(scenario: Scenario) -> list[FrameTruth]:
    """Exact world states for every frame of the scenario."""
    ego_pose = scenario.ego.pose0
    agent_poses = {a.agent_id: a.pose0 for a in scenario.agents}
    frames = []
    for k in range(scenario.n_frames):
        ego_seg = _segment_at(scenario.ego.segments, k)
        ego_motion = EgoMotion(ego_seg.v, ego_seg.vy, ego_seg.omega)
        agents = []
        for a in scenario.agents:
            seg = _segment_at(a.segments, k)
            pose = agent_poses[a.agent_id]
            rx, ry, rpsi = world_to_ego(pose, ego_pose)
            agents.append(
                AgentFrame(
                    agent_id=a.agent_id,
                    class_id=a.class_id,
                    pose=pose,
                    v=seg.v,
                    omega=seg.omega,
                    rel=TrackState(rx, ry, rpsi, seg.v, seg.omega),
                )
            )
        frames.append(
            FrameTruth(
                frame=k,
                t=k * scenario.Ts,
                ego_pose=ego_pose,
                ego_motion=ego_motion,
                agents=agents,
            )
        )
        # advance to next frame
        for a in scenario.agents:
            seg = _segment_at(a.segments, k)
            agent_poses[a.agent_id] = _ctrv_arc(agent_poses[a.agent_id], seg.v, 0.0, seg.omega, scenario.Ts)
        ego_pose = _ctrv_arc(ego_pose, ego_seg.v, ego_seg.vy, ego_seg.omega, scenario.Ts)
    return frames


def _in_fov(rel_x: float, rel_y: float, fov_deg: float, range_m: float) -> bool:
    rng = math.hypot(rel_x, rel_y)
    if rng > range_m or rng < 1e-9:
        return False
    return abs(math.atan2(rel_y, rel_x)) <= math.radians(fov_deg) / 2.0


def _box_cloud(rel: TrackState, dims, points_per_face: int, rng) -> np.ndarray:
    """Sample points on the vertical faces of an oriented box at the
    agent's relative pose."""
    length, width, height = dims
    pts = []
    n = points_per_face
    u = rng.uniform(-0.5, 0.5, size=(4, n))
    z = rng.uniform(0.25, 0.25 + height, size=(4, n))
    faces = [
        (u[0] * length, np.full(n, -width / 2), z[0]),
        (u[1] * length, np.full(n, width / 2), z[1]),
        (np.full(n, -length / 2), u[2] * width, z[2]),
        (np.full(n, length / 2), u[3] * width, z[3]),
    ]
    c, s = math.cos(rel.psi), math.sin(rel.psi)
    for fx, fy, fz in faces:
        gx = rel.x + c * fx - s * fy
        gy = rel.y + s * fx + c * fy
        pts.append(np.column_stack([gx, gy, fz]))
    return np.vstack(pts)


def render_measurements(
    frame: FrameTruth,
    camera: CameraModel,
    lidar: LidarModel,
    rng: np.random.Generator,
) -> tuple[list[CameraMeasurement], list[LidarMeasurement]]:
    """Noisy sensor observations of one frame; deterministic given rng state."""
    cam_out: list[CameraMeasurement] = []
    for a in frame.agents:
        if not _in_fov(a.rel.x, a.rel.y, camera.fov_deg, camera.range_m):
            continue
        if rng.uniform() >= camera.p_detect:
            continue
        sigma = camera.sigma_pos_per_class.get(
            a.class_id, camera.sigma_pos_per_class[ObjectClass.OTHER]
        )
        noise = rng.normal(size=3)
        cam_out.append(
            CameraMeasurement(
                a.rel.x + sigma * noise[0],
                a.rel.y + sigma * noise[1],
                wrap_angle(a.rel.psi + math.radians(camera.sigma_yaw_deg) * noise[2]),
                a.class_id,
            )
        )

    if lidar.mode == "cloud":
        pts = [np.empty((0, 3))]
        # coarse ground patch so the front end has something to remove
        gx, gy = np.meshgrid(np.arange(2.0, 30.0, 1.0), np.arange(-12.0, 12.0, 1.0))
        pts.append(np.column_stack([gx.ravel(), gy.ravel(), np.zeros(gx.size)]))
        for a in frame.agents:
            if not _in_fov(a.rel.x, a.rel.y, lidar.fov_deg, lidar.range_m):
                continue
            if rng.uniform() >= lidar.p_detect:
                continue
            pts.append(_box_cloud(a.rel, lidar.box_dims, lidar.points_per_face, rng))
        cloud = PointCloud(np.vstack(pts))
        return cam_out, process_cloud(cloud, lidar.clustering)

    lidar_out: list[LidarMeasurement] = []
    for a in frame.agents:
        if not _in_fov(a.rel.x, a.rel.y, lidar.fov_deg, lidar.range_m):
            continue
        if rng.uniform() >= lidar.p_detect:
            continue
        noise = rng.normal(size=2)
        lidar_out.append(
            LidarMeasurement(
                a.rel.x + lidar.sigma_pos * noise[0],
                a.rel.y + lidar.sigma_pos * noise[1],
            )
        )
    return cam_out, lidar_out


def simulate(scenario: Scenario) -> list[dict]:
    """Run the full scenario, returning JSON-ready per-frame records of
    truth and measurements."""
    records = []
    for frame in propagate_truth(scenario):
        rng = np.random.default_rng([scenario.seed, frame.frame])
        cam, lid = render_measurements(frame, scenario.camera, scenario.lidar, rng)
        records.append(
            {
                "frame": frame.frame,
                "t": round(frame.t, 9),
                "ego": {
                    "pose": [frame.ego_pose.X, frame.ego_pose.Y, frame.ego_pose.Psi],
                    "vx": frame.ego_motion.vx_ego,
                    "vy": frame.ego_motion.vy_ego,
                    "omega": frame.ego_motion.omega_ego,
                },
                "truth": [
                    {
                        "id": a.agent_id,
                        "class": a.class_id.value,
                        "global": [a.pose.X, a.pose.Y, a.pose.Psi],
                        "rel": [a.rel.x, a.rel.y, a.rel.psi],
                        "v": a.v,
                        "omega": a.omega,
                    }
                    for a in frame.agents
                ],
                "camera_meas": [
                    {"x": z.x_cam, "y": z.y_cam, "psi": z.psi_cam, "class": z.class_id.value}
                    for z in cam
                ],
                "lidar_meas": [{"x": z.x_lidar, "y": z.y_lidar} for z in lid],
            }
        )
    return records


@dataclass
class ConsistencyReport:
    """Per-step discrepancy between the tracker's motion model applied to
    true relative states and the simulator's exact relative geometry."""

    Ts: float
    position_errors: np.ndarray  # (n_steps,) max over agents per step
    heading_errors: np.ndarray

    @property
    def max_position_error(self) -> float:
        return float(self.position_errors.max()) if self.position_errors.size else 0.0

    def violations(self, c: float) -> list[int]:
        bound = c * self.Ts**2
        return [int(i) for i in np.flatnonzero(self.position_errors > bound)]


def consistency_check(scenario: Scenario) -> ConsistencyReport:
    """Apply the motion model to each agent's true relative state and
    compare with the next frame's true relative state."""
    truth = propagate_truth(scenario)
    pos_errs, psi_errs = [], []
    for k in range(len(truth) - 1):
        cur, nxt = truth[k], truth[k + 1]
        nxt_rel = {a.agent_id: a.rel for a in nxt.agents}
        step_pos, step_psi = 0.0, 0.0
        for a in cur.agents:
            pred = motion_f(a.rel, cur.ego_motion, scenario.Ts)
            ref = nxt_rel[a.agent_id]
            step_pos = max(step_pos, math.hypot(pred.x - ref.x, pred.y - ref.y))
            step_psi = max(step_psi, abs(wrap_angle(pred.psi - ref.psi)))
        pos_errs.append(step_pos)
        psi_errs.append(step_psi)
    return ConsistencyReport(
        Ts=scenario.Ts,
        position_errors=np.array(pos_errs),
        heading_errors=np.array(psi_errs),
    )


def refine_time_step(scenario: Scenario, factor: int) -> Scenario:
    """Same world sampled ``factor`` times faster (for convergence studies)."""

    def split(segs):
        return [
            MotionSegment(s.duration_frames * factor, s.v, s.omega, s.vy) for s in segs
        ]

    return Scenario(
        Ts=scenario.Ts / factor,
        n_frames=scenario.n_frames * factor,
        seed=scenario.seed,
        ego=EgoSpec(scenario.ego.pose0, split(scenario.ego.segments)),
        agents=[
            AgentSpec(a.agent_id, a.class_id, a.pose0, split(a.segments))
            for a in scenario.agents
        ],
        camera=scenario.camera,
        lidar=scenario.lidar,
    )


# ---------------------------------------------------------------------------
# scenario JSON (de)serialization

def scenario_to_dict(s: Scenario) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "Ts": s.Ts,
        "n_frames": s.n_frames,
        "seed": s.seed,
        "ego": {
            "pose0": [s.ego.pose0.X, s.ego.pose0.Y, s.ego.pose0.Psi],
            "segments": [
                {"duration_frames": g.duration_frames, "v": g.v, "omega": g.omega, "vy": g.vy}
                for g in s.ego.segments
            ],
        },
        "agents": [
            {
                "id": a.agent_id,
                "class": a.class_id.value,
                "pose0": [a.pose0.X, a.pose0.Y, a.pose0.Psi],
                "segments": [
                    {"duration_frames": g.duration_frames, "v": g.v, "omega": g.omega}
                    for g in a.segments
                ],
            }
            for a in s.agents
        ],
        "sensors": {
            "camera": {
                "fov_deg": s.camera.fov_deg,
                "range_m": s.camera.range_m,
                "p_detect": s.camera.p_detect,
                "sigma_pos_per_class": {
                    k.value: v for k, v in s.camera.sigma_pos_per_class.items()
                },
                "sigma_yaw_deg": s.camera.sigma_yaw_deg,
            },
            "lidar": {
                "mode": s.lidar.mode,
                "fov_deg": s.lidar.fov_deg,
                "range_m": s.lidar.range_m,
                "p_detect": s.lidar.p_detect,
                "sigma_pos": s.lidar.sigma_pos,
                "box_dims": list(s.lidar.box_dims),
                "points_per_face": s.lidar.points_per_face,
            },
        },
    }


def scenario_from_dict(d: dict) -> Scenario:
    if d.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported scenario format_version: {d.get('format_version')}")

    def segs(lst):
        return [
            MotionSegment(g["duration_frames"], g["v"], g["omega"], g.get("vy", 0.0))
            for g in lst
        ]

    cam = d["sensors"]["camera"]
    lid = d["sensors"]["lidar"]
    return Scenario(
        Ts=d["Ts"],
        n_frames=d["n_frames"],
        seed=d["seed"],
        ego=EgoSpec(GlobalPose(*d["ego"]["pose0"]), segs(d["ego"]["segments"])),
        agents=[
            AgentSpec(
                a["id"],
                ObjectClass.from_string(a["class"]),
                GlobalPose(*a["pose0"]),
                segs(a["segments"]),
            )
            for a in d["agents"]
        ],
        camera=CameraModel(
            fov_deg=cam["fov_deg"],
            range_m=cam["range_m"],
            p_detect=cam["p_detect"],
            sigma_pos_per_class={
                ObjectClass.from_string(k): v
                for k, v in cam["sigma_pos_per_class"].items()
            },
            sigma_yaw_deg=cam["sigma_yaw_deg"],
        ),
        lidar=LidarModel(
            mode=lid["mode"],
            fov_deg=lid["fov_deg"],
            range_m=lid["range_m"],
            p_detect=lid["p_detect"],
            sigma_pos=lid.get("sigma_pos", 0.1),
            box_dims=tuple(lid.get("box_dims", (4.0, 1.8, 1.5))),
            points_per_face=lid.get("points_per_face", 30),
        ),
    )


def save_scenario(s: Scenario, path) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(s), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# stock scenarios and matching tracker configuration

def default_urban_scenario(seed: int = 0, n_frames: int = 600) -> Scenario:
    """Stationary ego watching six agents (3 cars, 2 pedestrians, 1
    cyclist) circulating on disjoint circles inside both sensor FOVs."""

    def circling(agent_id, cls, center, radius, omega, phase):
        # pose0 on the circle; heading tangential for positive omega
        cx, cy = center
        x = cx + radius * math.cos(phase)
        y = cy + radius * math.sin(phase)
        heading = wrap_angle(phase + math.copysign(math.pi / 2, omega))
        v = abs(omega) * radius
        return AgentSpec(
            agent_id,
            cls,
            GlobalPose(x, y, heading),
            [MotionSegment(n_frames, v, omega)],
        )

    agents = [
        circling(0, ObjectClass.PEDESTRIAN, (12.0, 5.0), 2.0, 0.5, 0.0),
        circling(1, ObjectClass.PEDESTRIAN, (12.0, -5.0), 2.0, -0.5, math.pi),
        circling(2, ObjectClass.CYCLIST, (20.0, 0.0), 3.0, 0.5, math.pi / 2),
        circling(3, ObjectClass.CAR, (30.0, 9.0), 5.0, 0.5, 0.0),
        circling(4, ObjectClass.CAR, (30.0, -9.0), 5.0, -0.5, math.pi),
        circling(5, ObjectClass.CAR, (42.0, 0.0), 7.0, 0.5, math.pi / 2),
    ]
    return Scenario(
        Ts=0.1,
        n_frames=n_frames,
        seed=seed,
        ego=EgoSpec(GlobalPose(0.0, 0.0, 0.0), [MotionSegment(n_frames, 0.0, 0.0)]),
        agents=agents,
        camera=CameraModel(),
        lidar=LidarModel(),
    )


def turning_ego_scenario(Ts: float = 0.05, n_frames: int = 200) -> Scenario:
    """Turning ego, straight agent: exercises the ego-frame terms of the
    motion model for convergence studies."""
    n = n_frames
    return Scenario(
        Ts=Ts,
        n_frames=n,
        seed=0,
        ego=EgoSpec(GlobalPose(0.0, 0.0, 0.0), [MotionSegment(n, 3.0, 0.4)]),
        agents=[
            AgentSpec(
                0,
                ObjectClass.CAR,
                GlobalPose(15.0, 5.0, 0.2),
                [MotionSegment(n, 2.0, 0.0)],
            )
        ],
        camera=CameraModel(),
        lidar=LidarModel(),
    )


def matched_tracker_config(scenario: Scenario, **overrides) -> TrackerConfig:
    """Tracker configuration whose noise matrices mirror the scenario's
    sensor noise (car-class camera sigma for R_cam)."""
    sl = scenario.lidar.sigma_pos
    sc = scenario.camera.sigma_pos_per_class[ObjectClass.CAR]
    spsi = math.radians(scenario.camera.sigma_yaw_deg)
    kwargs = dict(
        Ts=scenario.Ts,
        R_lidar=np.diag([sl**2, sl**2]),
        R_cam=np.diag([sc**2, sc**2, spsi**2]),
        R_group=np.diag([sl**2, sl**2, spsi**2]),
    )
    kwargs.update(overrides)
    return TrackerConfig(**kwargs)
