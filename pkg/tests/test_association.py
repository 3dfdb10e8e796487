import math

import numpy as np
import pytest

from fusemot.association import (
    associate_frame,
    camera_track_distance,
    lidar_camera_distance,
    lidar_track_distance,
)
from fusemot.core import (
    CameraMeasurement,
    LidarMeasurement,
    ObjectClass,
    TrackerConfig,
    TrackState,
)
from fusemot.ekf import EkfTrackFilter


def track_at(x, y, cfg=None, pos_cov=None):
    cfg = cfg or TrackerConfig()
    P = cfg.P0.copy()
    if pos_cov is not None:
        P[:2, :2] = pos_cov
    return EkfTrackFilter(state=TrackState(x, y, 0, 0, 0), cov=P, config=cfg)


class TestDistances:
    def test_zero_distance(self):
        trk = track_at(3.0, 4.0)
        assert lidar_track_distance(LidarMeasurement(3.0, 4.0), trk) == pytest.approx(0.0)

    def test_euclidean_reduction(self):
        # S = I: subtract R_lidar's contribution by shaping P accordingly
        cfg = TrackerConfig(R_lidar=0.5 * np.eye(2))
        trk = track_at(0, 0, cfg, pos_cov=0.5 * np.eye(2))
        d = lidar_track_distance(LidarMeasurement(3.0, 4.0), trk)
        assert d == pytest.approx(25.0)

    def test_hand_inverted_diagonal(self):
        # S = diag(2, 0.5), diff = (1, 1) -> 1/2 + 1/0.5 = 2.5
        cfg = TrackerConfig(R_lidar=np.diag([1.0, 0.25]))
        trk = track_at(0, 0, cfg, pos_cov=np.diag([1.0, 0.25]))
        d = lidar_track_distance(LidarMeasurement(1.0, 1.0), trk)
        assert d == pytest.approx(2.5)

    def test_camera_distance_ignores_yaw(self):
        trk = track_at(5.0, 5.0)
        for psi in (0.0, 1.0, -2.0):
            z = CameraMeasurement(5.0, 5.0, psi, ObjectClass.CAR)
            assert camera_track_distance(z, trk) == pytest.approx(0.0)

    def test_camera_same_form_as_lidar(self):
        trk = track_at(1.0, 2.0)
        zl = LidarMeasurement(2.5, 3.5)
        zc = CameraMeasurement(2.5, 3.5, 0.7, ObjectClass.PEDESTRIAN)
        assert camera_track_distance(zc, trk) == pytest.approx(
            lidar_track_distance(zl, trk)
        )

    def test_random_spd_matches_direct(self):
        rng = np.random.default_rng(41)
        for _ in range(50):
            A = rng.normal(size=(2, 2))
            S_target = A @ A.T + 0.1 * np.eye(2)
            cfg = TrackerConfig(R_lidar=0.5 * S_target)
            trk = track_at(0, 0, cfg, pos_cov=0.5 * S_target)
            z = rng.normal(scale=3, size=2)
            expected = z @ np.linalg.inv(S_target) @ z
            got = lidar_track_distance(LidarMeasurement(z[0], z[1]), trk)
            assert got == pytest.approx(expected, rel=1e-9)

    def test_lidar_camera_coincident(self):
        assert lidar_camera_distance(
            LidarMeasurement(1, 2), CameraMeasurement(1, 2, 0.5, ObjectClass.CAR)
        ) == pytest.approx(0.0)

    def test_lidar_camera_3_4_5(self):
        assert lidar_camera_distance(
            LidarMeasurement(0, 0), CameraMeasurement(3, 4, 0, ObjectClass.CAR)
        ) == pytest.approx(25.0)

    def test_lidar_camera_random(self):
        rng = np.random.default_rng(43)
        for _ in range(50):
            a, b = rng.normal(size=2), rng.normal(size=2)
            expected = float((a - b) @ (a - b))
            got = lidar_camera_distance(
                LidarMeasurement(*a), CameraMeasurement(b[0], b[1], 0, ObjectClass.CAR)
            )
            assert got == pytest.approx(expected, rel=1e-12)


class TestAssociateFrame:
    def test_empty_world(self):
        out, suppressed = associate_frame([], [], [], TrackerConfig())
        assert not (
            out.lidar_track_pairs
            or out.camera_track_pairs
            or out.group_triples
            or out.lidar_camera_pairs
            or out.unmatched_lidar
            or out.unmatched_camera
            or out.unmatched_tracks
            or suppressed
        )

    def test_single_group_triple(self):
        cfg = TrackerConfig()
        trk = track_at(0, 0, cfg)
        out, suppressed = associate_frame(
            [LidarMeasurement(0.1, 0.0)],
            [CameraMeasurement(0.2, 0.0, 0.0, ObjectClass.CAR)],
            [trk],
            cfg,
        )
        assert out.group_triples == {(0, 0, 0)}
        assert not out.lidar_track_pairs and not out.camera_track_pairs
        assert not out.lidar_camera_pairs
        assert not out.unmatched_lidar and not out.unmatched_camera
        assert not out.unmatched_tracks and not suppressed

    def test_lidar_camera_pair_without_tracks(self):
        cfg = TrackerConfig()
        out, _ = associate_frame(
            [LidarMeasurement(0.0, 0.0)],
            [CameraMeasurement(0.3, 0.0, 0.1, ObjectClass.CAR)],
            [],
            cfg,
        )
        assert out.lidar_camera_pairs == {(0, 0)}
        assert not out.unmatched_lidar and not out.unmatched_camera

    def test_gated_lidar_camera_pair(self):
        cfg = TrackerConfig()
        far = math.sqrt(max(cfg.tau_G_fuse.values())) + 1.0
        out, _ = associate_frame(
            [LidarMeasurement(0.0, 0.0)],
            [CameraMeasurement(far, 0.0, 0.0, ObjectClass.CAR)],
            [],
            cfg,
        )
        assert not out.lidar_camera_pairs
        assert out.unmatched_lidar == {0} and out.unmatched_camera == {0}

    def test_lidar_only_pair(self):
        cfg = TrackerConfig()
        trk = track_at(0, 0, cfg)
        out, _ = associate_frame([LidarMeasurement(0.1, 0.1)], [], [trk], cfg)
        assert out.lidar_track_pairs == {(0, 0)}
        assert not out.unmatched_tracks

    def test_camera_only_pair(self):
        cfg = TrackerConfig()
        trk = track_at(0, 0, cfg)
        out, _ = associate_frame(
            [], [CameraMeasurement(0.1, 0.1, 0.5, ObjectClass.PEDESTRIAN)], [trk], cfg
        )
        assert out.camera_track_pairs == {(0, 0)}

    def test_overclustering_suppression(self):
        cfg = TrackerConfig()
        trk = track_at(0, 0, cfg)
        # two clusters near one track: nearest wins, duplicate suppressed
        out, suppressed = associate_frame(
            [LidarMeasurement(0.05, 0.0), LidarMeasurement(0.3, 0.0)], [], [trk], cfg
        )
        assert out.lidar_track_pairs == {(0, 0)}
        assert suppressed == {1}
        assert not out.unmatched_lidar

    def test_track_ids_used_in_outcome(self):
        cfg = TrackerConfig()
        trk = track_at(0, 0, cfg)
        out, _ = associate_frame(
            [LidarMeasurement(0.0, 0.0)], [], [trk], cfg, track_ids=[42]
        )
        assert out.lidar_track_pairs == {(0, 42)}

    def test_partition_and_gates_fuzz(self):
        rng = np.random.default_rng(47)
        cfg = TrackerConfig()
        classes = list(ObjectClass)
        for _ in range(300):
            n_t = int(rng.integers(0, 6))
            n_l = int(rng.integers(0, 8))
            n_c = int(rng.integers(0, 8))
            tracks = [
                track_at(rng.uniform(-20, 20), rng.uniform(-20, 20), cfg)
                for _ in range(n_t)
            ]
            lidar = [
                LidarMeasurement(rng.uniform(-20, 20), rng.uniform(-20, 20))
                for _ in range(n_l)
            ]
            camera = [
                CameraMeasurement(
                    rng.uniform(-20, 20),
                    rng.uniform(-20, 20),
                    rng.uniform(-3, 3),
                    classes[rng.integers(0, 4)],
                )
                for _ in range(n_c)
            ]
            out, suppressed = associate_frame(lidar, camera, tracks, cfg)
            check_outcome_invariants(out, suppressed, lidar, camera, tracks, cfg)


def check_outcome_invariants(out, suppressed, lidar, camera, tracks, cfg):
    """Shared invariant checker (also used by the acceptance fuzz)."""
    lidar_sets = [
        {i for i, _ in out.lidar_track_pairs},
        {i for i, _, _ in out.group_triples},
        {i for i, _ in out.lidar_camera_pairs},
        out.unmatched_lidar,
        suppressed,
    ]
    cam_sets = [
        {w for w, _ in out.camera_track_pairs},
        {w for _, w, _ in out.group_triples},
        {w for _, w in out.lidar_camera_pairs},
        out.unmatched_camera,
    ]
    # partition: each index appears exactly once overall
    all_lidar = [i for s in lidar_sets for i in s]
    assert sorted(all_lidar) == list(range(len(lidar)))
    all_cam = [w for s in cam_sets for w in s]
    assert sorted(all_cam) == list(range(len(camera)))
    # one measurement per track
    tids = (
        [t for _, t in out.lidar_track_pairs]
        + [t for _, t in out.camera_track_pairs]
        + [t for *_, t in out.group_triples]
        + list(out.unmatched_tracks)
    )
    assert len(tids) == len(set(tids)) == len(tracks)
    # gating soundness against the original costs
    from fusemot.association import (
        camera_track_distance,
        lidar_camera_distance,
        lidar_track_distance,
    )

    for i, j in out.lidar_track_pairs:
        assert lidar_track_distance(lidar[i], tracks[j]) <= cfg.tau_G_lidar
    for w, j in out.camera_track_pairs:
        assert camera_track_distance(camera[w], tracks[j]) <= cfg.gate_cam(
            camera[w].class_id
        )
    for i, w, j in out.group_triples:
        assert lidar_track_distance(lidar[i], tracks[j]) <= cfg.tau_G_lidar
        assert camera_track_distance(camera[w], tracks[j]) <= cfg.gate_cam(
            camera[w].class_id
        )
    for i, w in out.lidar_camera_pairs:
        assert lidar_camera_distance(lidar[i], camera[w]) <= cfg.gate_fuse(
            camera[w].class_id
        )
    # step-3 exclusion: fused pairs never reuse track-associated measurements
    track_lidar = {i for i, _ in out.lidar_track_pairs} | {
        i for i, _, _ in out.group_triples
    }
    track_cam = {w for w, _ in out.camera_track_pairs} | {
        w for _, w, _ in out.group_triples
    }
    for i, w in out.lidar_camera_pairs:
        assert i not in track_lidar and w not in track_cam


class TestDeterminism:
    def test_identical_inputs_identical_outcome(self):
        rng = np.random.default_rng(53)
        cfg = TrackerConfig()
        tracks = [track_at(rng.uniform(-5, 5), rng.uniform(-5, 5), cfg) for _ in range(4)]
        lidar = [LidarMeasurement(rng.uniform(-5, 5), rng.uniform(-5, 5)) for _ in range(5)]
        camera = [
            CameraMeasurement(rng.uniform(-5, 5), rng.uniform(-5, 5), 0.1, ObjectClass.CAR)
            for _ in range(5)
        ]
        out1, sup1 = associate_frame(lidar, camera, tracks, cfg)
        out2, sup2 = associate_frame(lidar, camera, tracks, cfg)
        assert out1 == out2 and sup1 == sup2
