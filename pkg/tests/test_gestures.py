import math

import numpy as np
import pytest

from gesturesynth.exceptions import EmptyFrame, MaskClippedWarning, SingularTransform
from gesturesynth.gestures import (GestureSpec, GestureSynthesizer, Pose2D,
                                   make_trajectory, nearest_set_pixel,
                                   pose_to_affine, synthesize_mask_sequence,
                                   transform_point, warp_mask)
from gesturesynth.toydata import ground_truth_hand

from oracles import (random_blob_mask, random_rigid_transform,
                     transform_point_oracle, warp_mask_oracle)


class TestTrajectory:
    def test_up_gesture_decreases_y(self):
        spec = GestureSpec(kind="up", n_frames=5, step=4)
        poses = make_trajectory(spec, (100.0, 100.0))
        assert [p.position[1] for p in poses] == [100, 96, 92, 88, 84]
        assert all(p.position[0] == 100 for p in poses)

    def test_circle_four_points(self):
        spec = GestureSpec(kind="circle", n_frames=4, center=(128, 128),
                           radius=40, start_angle=0)
        poses = make_trajectory(spec, (0.0, 0.0))
        got = [(round(p.position[0], 6), round(p.position[1], 6)) for p in poses]
        assert got == [(168, 128), (128, 168), (88, 128), (128, 88)]

    def test_single_frame_stays_at_start(self):
        for kind in ("up", "down", "left", "right"):
            poses = make_trajectory(GestureSpec(kind=kind, n_frames=1, step=9),
                                    (10.0, 20.0))
            assert len(poses) == 1
            assert poses[0].position == (10.0, 20.0)

    def test_circle_points_at_exact_radius(self):
        spec = GestureSpec(kind="circle", n_frames=16, center=(50, 60), radius=21.5)
        for pose in make_trajectory(spec, (0, 0)):
            d = math.hypot(pose.position[0] - 50, pose.position[1] - 60)
            assert d == pytest.approx(21.5, abs=1e-9)

    def test_orientation_normalized(self):
        spec = GestureSpec(kind="circle", n_frames=8, center=(0, 0), radius=5,
                           start_angle=3.0)
        for pose in make_trajectory(spec, (0, 0)):
            assert -math.pi < pose.orientation <= math.pi


class TestPoseToAffine:
    def test_identity_for_equal_poses(self):
        pose = Pose2D((3.0, 4.0), 0.5)
        t = pose_to_affine(pose, pose, orient_mask=True)
        np.testing.assert_allclose(t, [[1, 0, 0], [0, 1, 0]], atol=1e-12)

    def test_pure_translation(self):
        t = pose_to_affine(Pose2D((1.0, 2.0)), Pose2D((6.0, 2.0)), orient_mask=False)
        np.testing.assert_allclose(t, [[1, 0, 5], [0, 1, 0]], atol=1e-12)

    def test_quarter_turn_y_down(self):
        # rotation by pi/2 about the origin sends (1, 0) to (0, 1)
        t = pose_to_affine(Pose2D((0.0, 0.0), 0.0), Pose2D((0.0, 0.0), math.pi / 2),
                           orient_mask=True)
        np.testing.assert_allclose(transform_point((1, 0), t), (0, 1), atol=1e-12)

    def test_maps_reference_to_target_exactly(self, rng):
        for _ in range(20):
            ref = Pose2D(tuple(rng.uniform(-50, 50, 2)), rng.uniform(-3, 3))
            tgt = Pose2D(tuple(rng.uniform(-50, 50, 2)), rng.uniform(-3, 3))
            for orient in (False, True):
                t = pose_to_affine(ref, tgt, orient)
                np.testing.assert_allclose(transform_point(ref.position, t),
                                           tgt.position, atol=1e-9)


class TestTransformPoint:
    def test_identity(self):
        t = np.array([[1.0, 0, 0], [0, 1, 0]])
        assert transform_point((7, 9), t) == (7, 9)

    def test_translation(self):
        t = np.array([[1.0, 0, 5], [0, 1, 0]])
        assert transform_point((10, 10), t) == (15, 10)

    def test_rotate_then_translate_matches_manual(self):
        angle = math.pi / 3
        c, s = math.cos(angle), math.sin(angle)
        t = np.array([[c, -s, 2.0], [s, c, -1.0]])
        # manual two-step evaluation: rotate (1, 2), then shift by (2, -1)
        rotated = (c * 1 - s * 2, s * 1 + c * 2)
        manual = (rotated[0] + 2.0, rotated[1] - 1.0)
        np.testing.assert_allclose(transform_point((1, 2), t), manual, atol=1e-12)

    def test_matches_homogeneous_oracle(self, rng):
        for _ in range(50):
            t = random_rigid_transform(rng)
            p = tuple(rng.uniform(-30, 30, 2))
            np.testing.assert_allclose(transform_point(p, t),
                                       transform_point_oracle(p, t), atol=1e-9)


class TestWarpMask:
    def test_identity_is_bitwise_equal(self, rng):
        mask = random_blob_mask(rng, 32)
        t = np.array([[1.0, 0, 0], [0, 1, 0]])
        np.testing.assert_array_equal(warp_mask(mask, t), mask)

    def test_integer_shift_matches_loop(self):
        mask = np.zeros((16, 16), dtype=bool)
        mask[5:9, 5:9] = True
        t = np.array([[1.0, 0, 1], [0, 1, 0]])
        out = warp_mask(mask, t)
        for y in range(16):
            for x in range(16):
                assert out[y, x] == (0 <= x - 1 < 16 and mask[y, x - 1])

    def test_fully_clipped_blob_empty(self):
        mask = np.zeros((16, 16), dtype=bool)
        mask[6:9, 6:9] = True
        t = np.array([[1.0, 0, 100], [0, 1, 0]])
        assert not warp_mask(mask, t).any()

    def test_singular_transform_rejected(self):
        mask = np.zeros((8, 8), dtype=bool)
        with pytest.raises(SingularTransform):
            warp_mask(mask, np.array([[1.0, 1.0, 0], [1.0, 1.0, 0]]))

    def test_matches_oracle_on_random_rigid(self, rng):
        for _ in range(15):
            mask = random_blob_mask(rng, 24)
            t = random_rigid_transform(rng, max_shift=5)
            np.testing.assert_array_equal(warp_mask(mask, t),
                                          warp_mask_oracle(mask, t))

    def test_rigid_warp_preserves_area_within_tolerance(self, rng):
        # interior disk, area > 500; rotations about the disk center plus small
        # shifts keep the warped blob at least 5 px from every border
        size = 96
        ys, xs = np.mgrid[0:size, 0:size]
        mask = (xs - 48) ** 2 + (ys - 48) ** 2 <= 22 ** 2
        assert mask.sum() >= 500
        for _ in range(10):
            angle = rng.uniform(-math.pi, math.pi)
            c, s = math.cos(angle), math.sin(angle)
            dx, dy = rng.uniform(-10, 10, 2)
            t = np.array([[c, -s, 48 - c * 48 + s * 48 + dx],
                          [s, c, 48 - s * 48 - c * 48 + dy]])
            area = warp_mask(mask, t).sum()
            assert abs(area - mask.sum()) <= 0.02 * mask.sum()


class TestSynthesizeSequence:
    def test_zero_step_gives_bitwise_identity(self, reference_hand):
        spec = GestureSpec(kind="up", n_frames=3, step=0)
        seq = synthesize_mask_sequence(reference_hand, spec)
        assert len(seq) == 3
        for frame in seq.frames:
            np.testing.assert_array_equal(frame.mask, reference_hand.mask)
            assert frame.fingertip == reference_hand.fingertip

    def test_right_gesture_advances_fingertip(self, reference_hand):
        spec = GestureSpec(kind="right", n_frames=4, step=2)
        seq = synthesize_mask_sequence(reference_hand, spec)
        xs = [f.fingertip[0] for f in seq.frames]
        x0, y0 = reference_hand.fingertip
        assert xs == [x0, x0 + 2, x0 + 4, x0 + 6]
        assert all(f.fingertip[1] == y0 for f in seq.frames)

    def test_circle_fingertips_near_radius(self):
        hand = ground_truth_hand(96, (48, 28))
        spec = GestureSpec(kind="circle", n_frames=8, center=(48, 38), radius=10)
        seq = synthesize_mask_sequence(hand, spec)
        for frame in seq.frames:
            d = math.hypot(frame.fingertip[0] - 48, frame.fingertip[1] - 38)
            assert abs(d - 10) <= 1.0

    def test_frame_labels_consistent(self, reference_hand):
        spec = GestureSpec(kind="circle", n_frames=6, center=(32, 26), radius=7,
                           orient_mask=True)
        seq = synthesize_mask_sequence(reference_hand, spec)
        for frame in seq.frames:
            frame.validate()

    def test_clipping_warns(self, reference_hand):
        spec = GestureSpec(kind="right", n_frames=6, step=7)
        with pytest.warns(MaskClippedWarning):
            synthesize_mask_sequence(reference_hand, spec)

    def test_fully_clipped_frame_raises(self, reference_hand):
        spec = GestureSpec(kind="down", n_frames=4, step=40)
        with pytest.raises(EmptyFrame):
            synthesize_mask_sequence(reference_hand, spec)


def test_nearest_set_pixel_tie_break():
    mask = np.zeros((8, 8), dtype=bool)
    mask[2, 3] = True  # same distance from (3.0, 2.5) as (3, 3)
    mask[3, 3] = True
    assert nearest_set_pixel(mask, (3.0, 2.5)) == (3, 2)


def test_synthesizer_estimator(reference_hand):
    synth = GestureSynthesizer(kind="circle", n_frames=5, center_x=32.0,
                               center_y=26.0, radius=6.0)
    assert synth.get_params()["n_frames"] == 5
    seq = synth.fit().transform(reference_hand)
    assert len(seq) == 5
    assert seq.spec.kind == "circle"
