import itertools

import numpy as np

from fusemot.core import (
    CameraMeasurement,
    EgoMotion,
    LidarMeasurement,
    ObjectClass,
    TrackerConfig,
)
from fusemot.tracker import (
    MultiObjectTracker,
    TrackStatus,
    initialize_track,
    record_frame,
    should_delete,
)


def lifecycle_oracle(hits, Mc, Nc):
    """Direct window-count oracle for the tentative phase: scanning the
    first Nc recorded frames, confirm at the first frame where the
    cumulative hit count reaches Mc; dead if the window expires first.
    Returns (status, frame_index or None)."""
    count = 0
    for k, h in enumerate(hits[:Nc], start=1):
        count += h
        if count >= Mc:
            return "confirmed", k
    if len(hits) >= Nc:
        return "dead", Nc
    return "tentative", None


def run_history(hits, cfg):
    trk = initialize_track(
        (LidarMeasurement(0, 0), CameraMeasurement(0, 0, 0, ObjectClass.CAR)), cfg, 0
    )
    for h in hits:
        record_frame(trk, h, cfg)
        if trk.status is TrackStatus.DEAD:
            break
    return trk


class TestInitializeTrack:
    def test_field_mapping(self):
        cfg = TrackerConfig()
        trk = initialize_track(
            (LidarMeasurement(5, 2), CameraMeasurement(5.2, 2.1, 0.3, ObjectClass.CAR)),
            cfg,
            7,
        )
        np.testing.assert_allclose(trk.filter.state.as_array(), [5, 2, 0.3, 0, 0])
        assert trk.class_id is ObjectClass.CAR
        assert trk.status is TrackStatus.TENTATIVE
        assert trk.id == 7

    def test_velocity_floor_in_P0(self):
        cfg = TrackerConfig()
        trk = initialize_track(
            (LidarMeasurement(0, 0), CameraMeasurement(0, 0, 0, ObjectClass.OTHER)), cfg, 0
        )
        assert trk.filter.cov[3, 3] >= 1.0
        assert trk.filter.cov[4, 4] >= 0.25

    def test_ids_strictly_increasing(self):
        cfg = TrackerConfig()
        mot = MultiObjectTracker(cfg)
        lidar = [LidarMeasurement(0, 0), LidarMeasurement(10, 0)]
        camera = [
            CameraMeasurement(0.1, 0, 0, ObjectClass.CAR),
            CameraMeasurement(10.1, 0, 0, ObjectClass.PEDESTRIAN),
        ]
        decisions, _ = mot.step(lidar, camera, EgoMotion(0, 0, 0))
        assert decisions.created == {0, 1}
        ids = [t.id for t in mot.tracks]
        assert ids == sorted(set(ids))


class TestRecordFrame:
    def test_earliest_confirmation(self):
        cfg = TrackerConfig(Mc=3, Nc=5)
        trk = run_history([1, 1, 1], cfg)
        assert trk.status is TrackStatus.CONFIRMED
        assert trk.age == 3

    def test_window_expiry(self):
        cfg = TrackerConfig(Mc=3, Nc=5)
        trk = run_history([1, 1, 0, 0, 0], cfg)
        assert trk.status is TrackStatus.DEAD

    def test_matches_enumeration_oracle(self):
        cfg = TrackerConfig(Mc=3, Nc=5)
        for hits in itertools.product([0, 1], repeat=5):
            trk = run_history(list(hits), cfg)
            status, _ = lifecycle_oracle(list(hits), 3, 5)
            assert trk.status.value == status, hits


class TestShouldDelete:
    def confirmed_track(self, history, cfg):
        trk = initialize_track(
            (LidarMeasurement(0, 0), CameraMeasurement(0, 0, 0, ObjectClass.CAR)), cfg, 0
        )
        trk.status = TrackStatus.CONFIRMED
        for h in history:
            trk.hit_history.append(bool(h))
            trk.age += 1
        window = max(cfg.Nc, cfg.Ne)
        trk.hit_history = trk.hit_history[-window:]
        return trk

    def test_no_hits_for_window(self):
        cfg = TrackerConfig(Me=1, Ne=4)
        trk = self.confirmed_track([0, 0, 0, 0], cfg)
        assert should_delete(trk, cfg)

    def test_recent_hit_keeps_track(self):
        cfg = TrackerConfig(Me=1, Ne=4)
        trk = self.confirmed_track([0, 1, 0, 0], cfg)
        assert not should_delete(trk, cfg)

    def test_matches_counting_oracle(self):
        cfg = TrackerConfig(Me=2, Ne=6, Mc=1, Nc=1)
        for hits in itertools.product([0, 1], repeat=6):
            trk = self.confirmed_track(list(hits), cfg)
            assert should_delete(trk, cfg) == (sum(hits[-6:]) < 2)


class TestStepTracker:
    def test_empty_world_noop(self):
        mot = MultiObjectTracker(TrackerConfig())
        decisions, _ = mot.step([], [], EgoMotion(0, 0, 0))
        assert not decisions.created and not decisions.deleted and not mot.tracks

    def test_single_agent_lifecycle(self):
        cfg = TrackerConfig()
        mot = MultiObjectTracker(cfg)
        ego = EgoMotion(0, 0, 0)
        for k in range(cfg.Nc + 2):
            lidar = [LidarMeasurement(5.0, 1.0)]
            camera = [CameraMeasurement(5.0, 1.0, 0.2, ObjectClass.CYCLIST)]
            mot.step(lidar, camera, ego)
        assert len(mot.tracks) == 1
        trk = mot.tracks[0]
        assert trk.status is TrackStatus.CONFIRMED
        assert trk.class_id is ObjectClass.CYCLIST

    def test_agent_leaves_fov_deleted(self):
        cfg = TrackerConfig()
        mot = MultiObjectTracker(cfg)
        ego = EgoMotion(0, 0, 0)
        for _ in range(5):
            mot.step(
                [LidarMeasurement(5.0, 1.0)],
                [CameraMeasurement(5.0, 1.0, 0.0, ObjectClass.CAR)],
                ego,
            )
        assert mot.tracks[0].status is TrackStatus.CONFIRMED
        tid = mot.tracks[0].id
        deleted = set()
        for _ in range(cfg.Ne + 1):
            decisions, _ = mot.step([], [], ego)
            deleted |= decisions.deleted
        assert tid in deleted
        assert not mot.tracks

    def test_lidar_camera_only_never_creates_in_fusion_mode(self):
        mot = MultiObjectTracker(TrackerConfig())
        ego = EgoMotion(0, 0, 0)
        decisions, _ = mot.step([LidarMeasurement(1, 1)], [], ego)
        assert not decisions.created
        decisions, _ = mot.step([], [CameraMeasurement(1, 1, 0, ObjectClass.CAR)], ego)
        assert not decisions.created

    def test_single_modality_init_fallback(self):
        ego = EgoMotion(0, 0, 0)
        mot_l = MultiObjectTracker(TrackerConfig(), modality="lidar")
        decisions, _ = mot_l.step([LidarMeasurement(3, 0)], [], ego)
        assert len(decisions.created) == 1
        assert mot_l.tracks[0].class_id is ObjectClass.OTHER
        mot_c = MultiObjectTracker(TrackerConfig(), modality="camera")
        decisions, _ = mot_c.step([], [CameraMeasurement(3, 0, 0.5, ObjectClass.CAR)], ego)
        assert len(decisions.created) == 1
        assert mot_c.tracks[0].class_id is ObjectClass.CAR

    def test_class_fixed_after_initialization(self):
        cfg = TrackerConfig()
        mot = MultiObjectTracker(cfg)
        ego = EgoMotion(0, 0, 0)
        mot.step(
            [LidarMeasurement(5, 0)], [CameraMeasurement(5, 0, 0, ObjectClass.CAR)], ego
        )
        for _ in range(3):
            mot.step(
                [LidarMeasurement(5, 0)],
                [CameraMeasurement(5, 0, 0, ObjectClass.PEDESTRIAN)],
                ego,
            )
        trk = mot.tracks[0]
        assert trk.class_id is ObjectClass.CAR
        assert trk.class_disagreements == 3

    def test_tentative_excluded_from_published_snapshots(self):
        mot = MultiObjectTracker(TrackerConfig())
        ego = EgoMotion(0, 0, 0)
        mot.step([LidarMeasurement(5, 0)], [CameraMeasurement(5, 0, 0, ObjectClass.CAR)], ego)
        assert mot.snapshots(confirmed_only=True) == []
        assert len(mot.snapshots(confirmed_only=False)) == 1

    def test_measurement_permutation_invariance(self):
        cfg = TrackerConfig()
        ego = EgoMotion(0, 0, 0)
        rng = np.random.default_rng(61)
        lidar = [LidarMeasurement(5, 0), LidarMeasurement(-5, 2), LidarMeasurement(0, 8)]
        camera = [
            CameraMeasurement(5.1, 0, 0.1, ObjectClass.CAR),
            CameraMeasurement(-5.1, 2, 0.2, ObjectClass.PEDESTRIAN),
            CameraMeasurement(0, 8.1, 0.3, ObjectClass.CYCLIST),
        ]

        def run(lidar_order, camera_order):
            mot = MultiObjectTracker(cfg)
            for _ in range(6):
                mot.step(list(lidar_order), list(camera_order), ego)
            return sorted(
                (t.class_id.value, tuple(np.round(t.filter.state.as_array(), 9)))
                for t in mot.tracks
            )

        base = run(lidar, camera)
        for _ in range(5):
            lp = [lidar[i] for i in rng.permutation(3)]
            cp = [camera[i] for i in rng.permutation(3)]
            assert run(lp, cp) == base

    def test_no_correction_outside_outcome(self):
        # a far-away measurement must not perturb an existing track
        cfg = TrackerConfig()
        mot = MultiObjectTracker(cfg)
        ego = EgoMotion(0, 0, 0)
        for _ in range(4):
            mot.step(
                [LidarMeasurement(5, 0)], [CameraMeasurement(5, 0, 0, ObjectClass.CAR)], ego
            )
        state_before = mot.tracks[0].filter.state.as_array().copy()
        mot.step([LidarMeasurement(500, 0)], [], ego)
        # predicted-only step: position barely moves (v estimate ~ 0)
        assert np.linalg.norm(mot.tracks[0].filter.state.as_array()[:2] - state_before[:2]) < 1.0
