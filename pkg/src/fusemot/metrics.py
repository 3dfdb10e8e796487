"""Truth-matched accuracy metrics and modality comparison.

Confirmed tracks are matched to ground-truth agents frame by frame with
a gated assignment; RMSE / MAE / MaAE are then computed per agent for
position, heading, speed and yaw rate. Angles are reported in degrees,
rates in degrees per second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import assignment
from .core import (
    CameraMeasurement,
    EgoMotion,
    LidarMeasurement,
    ObjectClass,
    TrackerConfig,
    wrap_angle,
)
from .tracker import MultiObjectTracker

MATCH_GATE_M = 2.0


def match_tracks_to_truth(
    track_positions: np.ndarray, truth_positions: np.ndarray, gate: float = MATCH_GATE_M
) -> list[tuple[int, int]]:
    """One-to-one (track, agent) pairing minimizing summed planar distance,
    gated at ``gate`` meters."""
    if len(track_positions) == 0 or len(truth_positions) == 0:
        return []
    diff = track_positions[:, None, :] - truth_positions[None, :, :]
    D = np.linalg.norm(diff, axis=2)
    return assignment.solve(assignment.gate(D, gate))


def _series_metrics(errors: np.ndarray) -> dict:
    a = np.abs(np.asarray(errors, dtype=float))
    return {
        "rmse": float(np.sqrt(np.mean(a**2))),
        "mae": float(np.mean(a)),
        "maae": float(np.max(a)),
    }


@dataclass
class AgentErrors:
    agent_id: int
    class_id: str
    n_samples: int
    n_present: int
    id_switches: int
    pos: dict
    psi_deg: dict
    v: dict
    omega_degs: dict

    @property
    def match_ratio(self) -> float:
        return self.n_samples / self.n_present if self.n_present else 0.0

    def to_dict(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "class": self.class_id,
            "n_samples": self.n_samples,
            "n_present": self.n_present,
            "match_ratio": self.match_ratio,
            "id_switches": self.id_switches,
            "pos": self.pos,
            "psi_deg": self.psi_deg,
            "v": self.v,
            "omega_degs": self.omega_degs,
        }


@dataclass
class ErrorReport:
    agents: list[AgentErrors]
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "agents": [a.to_dict() for a in self.agents],
            "warnings": self.warnings,
        }

    def by_class(self) -> dict:
        """Mean per-metric RMSE/MAE/MaAE over the agents of each class."""
        groups: dict[str, list[AgentErrors]] = {}
        for a in self.agents:
            groups.setdefault(a.class_id, []).append(a)
        out = {}
        for cls, members in groups.items():
            out[cls] = {
                series: {
                    stat: float(np.mean([getattr(a, series)[stat] for a in members]))
                    for stat in ("rmse", "mae", "maae")
                }
                for series in ("pos", "psi_deg", "v", "omega_degs")
            }
        return out

    def overall(self) -> dict:
        """Sample-weighted pooled metrics over all agents."""
        out = {}
        for series in ("pos", "psi_deg", "v", "omega_degs"):
            n = sum(a.n_samples for a in self.agents)
            if n == 0:
                out[series] = {"rmse": 0.0, "mae": 0.0, "maae": 0.0}
                continue
            sq = sum(a.n_samples * getattr(a, series)["rmse"] ** 2 for a in self.agents)
            ab = sum(a.n_samples * getattr(a, series)["mae"] for a in self.agents)
            mx = max(getattr(a, series)["maae"] for a in self.agents)
            out[series] = {
                "rmse": math.sqrt(sq / n),
                "mae": ab / n,
                "maae": mx,
            }
        return out


def run_tracker(
    sim_records: list[dict],
    config: TrackerConfig,
    modality: str = "fusion",
) -> list[dict]:
    """Feed simulated measurement records through the tracker; returns
    per-frame track-log records. Single-sensor modalities suppress the
    other sensor's measurements."""
    mot = MultiObjectTracker(config, modality=modality)
    log = []
    for rec in sim_records:
        ego = EgoMotion(rec["ego"]["vx"], rec["ego"]["vy"], rec["ego"]["omega"])
        camera = (
            []
            if modality == "lidar"
            else [
                CameraMeasurement(z["x"], z["y"], z["psi"], ObjectClass.from_string(z["class"]))
                for z in rec["camera_meas"]
            ]
        )
        lidar = (
            []
            if modality == "camera"
            else [LidarMeasurement(z["x"], z["y"]) for z in rec["lidar_meas"]]
        )
        decisions, outcome = mot.step(lidar, camera, ego)
        log.append(
            {
                "frame": rec["frame"],
                "t": rec["t"],
                "tracks": mot.snapshots(confirmed_only=False),
                "decisions": {
                    "created": sorted(decisions.created),
                    "confirmed": sorted(decisions.confirmed),
                    "deleted": sorted(decisions.deleted),
                },
                "association": {
                    "lidar_track": len(outcome.lidar_track_pairs),
                    "camera_track": len(outcome.camera_track_pairs),
                    "groups": len(outcome.group_triples),
                    "lidar_camera": len(outcome.lidar_camera_pairs),
                    "unmatched_lidar": len(outcome.unmatched_lidar),
                    "unmatched_camera": len(outcome.unmatched_camera),
                },
                "modality": modality,
            }
        )
    return log


def compute_errors(
    track_log: list[dict], truth_records: list[dict], gate: float = MATCH_GATE_M
) -> ErrorReport:
    """Per-agent error series over all frames where a confirmed track was
    matched to that agent."""
    series: dict[int, dict] = {}
    present: dict[int, int] = {}
    classes: dict[int, str] = {}
    last_track: dict[int, int] = {}
    switches: dict[int, int] = {}
    truth_by_frame = {rec["frame"]: rec for rec in truth_records}

    for entry in track_log:
        truth = truth_by_frame.get(entry["frame"])
        if truth is None:
            continue
        agents = truth["truth"]
        for a in agents:
            present[a["id"]] = present.get(a["id"], 0) + 1
            classes[a["id"]] = a["class"]
        confirmed = [t for t in entry["tracks"] if t["status"] == "confirmed"]
        if not confirmed or not agents:
            continue
        tpos = np.array([t["state"][:2] for t in confirmed])
        apos = np.array([a["rel"][:2] for a in agents])
        for ti, ai in match_tracks_to_truth(tpos, apos, gate):
            trk, agent = confirmed[ti], agents[ai]
            aid = agent["id"]
            st = trk["state"]
            rec = series.setdefault(aid, {"pos": [], "psi": [], "v": [], "omega": []})
            rec["pos"].append(math.hypot(st[0] - agent["rel"][0], st[1] - agent["rel"][1]))
            rec["psi"].append(math.degrees(wrap_angle(st[2] - agent["rel"][2])))
            rec["v"].append(st[3] - agent["v"])
            rec["omega"].append(math.degrees(st[4] - agent["omega"]))
            if aid in last_track and last_track[aid] != trk["id"]:
                switches[aid] = switches.get(aid, 0) + 1
            last_track[aid] = trk["id"]

    agents_out = []
    warnings = []
    for aid in sorted(present):
        if aid not in series:
            warnings.append(f"agent {aid} never matched by a confirmed track")
            continue
        rec = series[aid]
        agents_out.append(
            AgentErrors(
                agent_id=aid,
                class_id=classes[aid],
                n_samples=len(rec["pos"]),
                n_present=present[aid],
                id_switches=switches.get(aid, 0),
                pos=_series_metrics(np.array(rec["pos"])),
                psi_deg=_series_metrics(np.array(rec["psi"])),
                v=_series_metrics(np.array(rec["v"])),
                omega_degs=_series_metrics(np.array(rec["omega"])),
            )
        )
    return ErrorReport(agents=agents_out, warnings=warnings)


def error_time_series(
    track_log: list[dict], truth_records: list[dict], gate: float = MATCH_GATE_M
) -> dict[int, dict]:
    """Per-agent raw error series vs time (for plotting/CSV export)."""
    out: dict[int, dict] = {}
    truth_by_frame = {rec["frame"]: rec for rec in truth_records}
    for entry in track_log:
        truth = truth_by_frame.get(entry["frame"])
        if truth is None:
            continue
        agents = truth["truth"]
        confirmed = [t for t in entry["tracks"] if t["status"] == "confirmed"]
        if not confirmed or not agents:
            continue
        tpos = np.array([t["state"][:2] for t in confirmed])
        apos = np.array([a["rel"][:2] for a in agents])
        for ti, ai in match_tracks_to_truth(tpos, apos, gate):
            trk, agent = confirmed[ti], agents[ai]
            st = trk["state"]
            rec = out.setdefault(
                agent["id"],
                {"class": agent["class"], "t": [], "pos": [], "psi_deg": [], "v": [], "omega_degs": []},
            )
            rec["t"].append(entry["t"])
            rec["pos"].append(math.hypot(st[0] - agent["rel"][0], st[1] - agent["rel"][1]))
            rec["psi_deg"].append(math.degrees(wrap_angle(st[2] - agent["rel"][2])))
            rec["v"].append(st[3] - agent["v"])
            rec["omega_degs"].append(math.degrees(st[4] - agent["omega"]))
    return out


MODALITIES = ("camera", "lidar", "fusion")


@dataclass
class ModalityComparison:
    reports: dict  # modality -> ErrorReport
    seed: int

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "metadata": {
                "single_modality_init_fallback": True,
            },
            "reports": {m: r.to_dict() for m, r in self.reports.items()},
            "overall": {m: r.overall() for m, r in self.reports.items()},
        }


def run_modality_comparison(scenario, config: TrackerConfig) -> ModalityComparison:
    """Run the identical pipeline in camera-only, lidar-only and fused
    modes on one simulated measurement stream."""
    from .sim import simulate

    records = simulate(scenario)
    reports = {
        m: compute_errors(run_tracker(records, config, modality=m), records)
        for m in MODALITIES
    }
    return ModalityComparison(reports=reports, seed=scenario.seed)
