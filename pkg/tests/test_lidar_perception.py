import math
from dataclasses import replace

import numpy as np
import pytest
from loguru import logger

from app.Model.Arena import empty_arena
from app.Model.Brick import BrickClass, BrickInstance, default_brick_specs
from app.Model.Config import LidarConfig, LidarPerceptionConfig
from app.Model.Geometry import Pose2D
from app.Model.Perception import BrickCandidate, LineSegment2D, StackEstimate, StackModel, class_lengths
from app.Model.Sensors import LidarScan
from app.arena_model.pile import stack_offsets
from app.errors import ConfigurationError, DegenerateFitError, DegenerateLineError, RangeDomainError
from app.lidar_perception import (StackLocator, brick_band, candidate_table, check_consistency, classify_candidates,
                                  detection_range, em_fit, em_fit_stack, em_history_table, iepf_segments,
                                  ransac_major_axis, rays_hitting, red_approach_waypoint, scan_candidates,
                                  slice_cloud)
from app.lidar_perception.iepf import split_runs
from app.sensor_sim.lidar import simulate_lidar

RING_PITCH = math.radians(1.875)


class TestRanges:
    def test_detection_range_for_brick_height(self):
        assert detection_range(0.2, RING_PITCH) == pytest.approx(3.055, abs=1e-3)

    def test_two_rings_hit_at_detection_range(self):
        b = detection_range(0.2, RING_PITCH)
        assert rays_hitting(0.2, b, RING_PITCH) == pytest.approx(2.0, rel=1e-3)

    def test_fewer_rings_further_away(self):
        assert rays_hitting(0.2, 6.0, RING_PITCH) < rays_hitting(0.2, 3.0, RING_PITCH)

    def test_two_rings_exactly_within_detection_range(self):
        # два кольца попадают в грань ровно до d / cos^2(alpha / 2); d - граница с запасом второго порядка
        rng = np.random.default_rng(2)
        for _ in range(1000):
            a = rng.uniform(0.05, 1.0)
            alpha = math.radians(rng.uniform(0.5, 10.0))
            d = detection_range(a, alpha)
            b = rng.uniform(0.6 * a, 3.0 * d)
            rays = rays_hitting(a, b, alpha)
            if b <= d:
                assert rays >= 2.0 - 1e-6
            if b > d / math.cos(0.5 * alpha) ** 2:
                assert rays < 2.0 + 1e-6
            assert rays_hitting(a, d / math.cos(0.5 * alpha) ** 2, alpha) == pytest.approx(2.0, abs=1e-6)

    def test_detection_range_is_linear_in_height(self):
        assert detection_range(0.4, RING_PITCH) == pytest.approx(2.0 * detection_range(0.2, RING_PITCH))

    def test_arccos_domain(self):
        with pytest.raises(RangeDomainError):
            rays_hitting(1.0, 0.2, RING_PITCH)
        with pytest.raises(ValueError):
            detection_range(0.2, 0.0)


class TestSlicing:
    def scan(self, z):
        z = np.asarray(z, dtype=float)
        points = np.column_stack([np.ones_like(z), np.zeros_like(z), z])
        return LidarScan(ring=np.zeros(z.shape[0], dtype=int), azimuth=np.zeros(z.shape[0]), range=np.ones_like(z),
                         points=points, sensor_pose=Pose2D(0.0, 0.0), mount_height=0.6)

    def test_slice_by_height_above_sensor(self):
        upper, lower = slice_cloud(self.scan([0.1, 2.0, 2.2, 3.0]), 1.5)
        assert upper.points[:, 2].tolist() == [2.2, 3.0]
        assert lower.points[:, 2].tolist() == [0.1, 2.0]

    def test_nan_threshold(self):
        with pytest.raises(ValueError):
            slice_cloud(self.scan([0.1]), float('nan'))

    def test_brick_band(self):
        band = brick_band(self.scan([0.0, 0.05, 0.5, 1.2]), (0.05, 1.0))
        assert band.points[:, 2].tolist() == [0.05, 0.5]


class TestIepf:
    def corner_points(self):
        first = [(0.05 * i, 0.0) for i in range(21)]
        second = [(1.0, 0.05 * j) for j in range(1, 21)]
        return np.array(first + second)

    def test_corner_gives_two_segments(self):
        segments = iepf_segments(self.corner_points(), epsilon=0.01)
        assert len(segments) == 2
        assert [s.length for s in segments] == pytest.approx([1.0, 1.0])
        assert segments[0].p1 == pytest.approx([1.0, 0.0], abs=1e-9)
        assert segments[1].p0 == pytest.approx([1.0, 0.0], abs=1e-9)
        assert abs(float(segments[0].direction @ segments[1].direction)) == pytest.approx(0.0, abs=1e-9)

    def test_end_extension_is_opt_in(self):
        segments = iepf_segments(self.corner_points(), epsilon=0.01, end_extension=0.5)
        assert [s.length for s in segments] == pytest.approx([1.05, 1.05])
        with pytest.raises(ValueError):
            iepf_segments(self.corner_points(), end_extension=-1.0)

    def test_collinear_points_give_one_segment(self):
        points = np.column_stack([np.linspace(0.0, 1.9, 20), np.full(20, 3.0)])
        segments = iepf_segments(points)
        assert len(segments) == 1
        assert segments[0].inliers.tolist() == list(range(20))
        assert segments[0].length == pytest.approx(1.9)

    def test_long_runs_are_skipped(self):
        points = np.column_stack([np.linspace(0.0, 5.0, 101), np.zeros(101)])
        assert len(iepf_segments(points)) == 1
        assert iepf_segments(points, max_run=2.6) == []

    def test_jump_splits_runs(self):
        points = np.array([[0.0, 0.0], [0.1, 0.0], [1.0, 0.0], [1.1, 0.0]])
        assert [r.tolist() for r in split_runs(points, 0.3)] == [[0, 1], [2, 3]]

    def test_closed_ring_joins_ends(self):
        points = np.array([[0.0, 0.0], [0.1, 0.0], [1.0, 0.0], [-0.1, 0.0]])
        runs = split_runs(points, 0.3, closed=True)
        assert [r.tolist() for r in runs] == [[3, 0, 1], [2]]

    def test_face_across_ring_seam(self):
        # грань прямо по курсу: первые точки кольца - её левая половина, последние - правая
        face = np.column_stack([np.full(13, 2.0), np.linspace(-0.15, 0.15, 13)])
        ring = np.vstack([face[6:], face[:6]])
        runs = split_runs(ring, 0.3, closed=True)
        assert [r.tolist() for r in runs] == [[7, 8, 9, 10, 11, 12, 0, 1, 2, 3, 4, 5, 6]]
        segments = iepf_segments(ring, closed=True)
        assert len(segments) == 1
        assert segments[0].length == pytest.approx(0.3)
        assert segments[0].midpoint == pytest.approx([2.0, 0.0])

    def test_short_runs_are_dropped(self):
        assert iepf_segments(np.array([[0.0, 0.0], [0.05, 0.0], [0.1, 0.0]]), min_points=4) == []

    def test_epsilon_must_be_positive(self):
        with pytest.raises(ValueError):
            iepf_segments(self.corner_points(), epsilon=0.0)


class TestClassifyCandidates:
    lengths = class_lengths(default_brick_specs())

    def test_length_match_and_center_away_from_sensor(self):
        segment = LineSegment2D(np.array([2.0, -0.3]), np.array([2.0, 0.3]), np.arange(10))
        candidates = classify_candidates([segment], self.lengths, 0.07, sensor_xy=(0.0, 0.0))
        assert len(candidates) == 1
        assert candidates[0].brick_class == BrickClass.GREEN
        assert candidates[0].center == pytest.approx([2.1, 0.0])

    def test_ambiguous_length_is_skipped(self):
        segment = LineSegment2D(np.array([0.0, 0.0]), np.array([0.45, 0.0]), np.arange(10))
        assert classify_candidates([segment], self.lengths, 0.07) == []

    def test_non_separable_classes(self):
        with pytest.raises(ConfigurationError):
            classify_candidates([], {BrickClass.RED: 0.3, BrickClass.GREEN: 0.35}, 0.07)


def stack_candidates(mu, phi, outlier=None):
    """Кандидаты по два на класс; outlier - боковое смещение лишнего красного кандидата от центра"""
    v = np.array([math.cos(phi), math.sin(phi)])
    normal = np.array([-v[1], v[0]])
    result = []
    for brick_class, k in stack_offsets().items():
        for lateral in (-0.05, 0.05):
            center = np.asarray(mu) + k * v + lateral * normal
            result.append(BrickCandidate(brick_class, center, v, len(result),
                                         default_brick_specs()[brick_class].length_m))
    if outlier is not None:
        result.append(BrickCandidate(BrickClass.RED, np.asarray(mu) + outlier * normal, v, len(result), 0.3))
    return result


def noisy_scene(seed, sigma=0.05):
    """Штабель в случайной позе: 14 зашумлённых кандидатов и 6 выбросов по арене 50 x 60 (30%)"""
    rng = np.random.default_rng(seed)
    mu = rng.uniform([10.0, 10.0], [40.0, 50.0])
    phi = rng.uniform(-math.pi, math.pi)
    v = np.array([math.cos(phi), math.sin(phi)])
    normal = np.array([-v[1], v[0]])
    specs = default_brick_specs()
    offsets = stack_offsets()
    candidates = []
    for brick_class, count in [(BrickClass.RED, 4), (BrickClass.GREEN, 4), (BrickClass.BLUE, 3),
                               (BrickClass.ORANGE, 3)]:
        for _ in range(count):
            center = mu + offsets[brick_class] * v + rng.uniform(-0.15, 0.15) * normal + rng.normal(0.0, sigma, 2)
            candidates.append(BrickCandidate(brick_class, center, v, len(candidates), specs[brick_class].length_m))
    classes = list(offsets)
    for _ in range(6):
        brick_class = classes[int(rng.integers(len(classes)))]
        angle = rng.uniform(-math.pi, math.pi)
        candidates.append(BrickCandidate(brick_class, rng.uniform([0.0, 0.0], [50.0, 60.0]),
                                         np.array([math.cos(angle), math.sin(angle)]), len(candidates),
                                         specs[brick_class].length_m))
    return candidates, mu, phi


def non_decreasing(estimate, tolerance=1e-7):
    loglik = [row[4] for row in estimate.history]
    return all(b >= a - tolerance for a, b in zip(loglik, loglik[1:]))


class TestEmFit:
    model = StackModel.isotropic(stack_offsets(), 0.3, 1.0 / 3000.0, 0.3)

    @pytest.mark.parametrize('seed', range(8))
    def test_unguarded_steps_never_decrease(self, seed):
        candidates, mu, phi = noisy_scene(seed)
        estimate = em_fit_stack(candidates, self.model, guard=False)
        assert len(estimate.history) > 1
        assert non_decreasing(estimate)
        shifted = StackEstimate(mu=mu + np.array([0.8, -0.6]), phi=phi + 0.4)
        assert non_decreasing(em_fit_stack(candidates, self.model, shifted, guard=False))

    def test_decrease_is_logged(self, monkeypatch):
        problem = em_fit._Problem(stack_candidates((10.0, 20.0), 0.5), self.model)
        start = np.array([10.2, 20.1])
        values = iter([0.0, -1.0])
        monkeypatch.setattr(em_fit._Problem, 'log_likelihood', lambda *args: next(values))
        messages = []
        handler = logger.add(messages.append, level='WARNING', format='{message}')
        try:
            kept = em_fit._run(problem, start, 0.45, 0.3, 50, 1e-6, guard=True)
            values = iter([0.0, -1.0])
            accepted = em_fit._run(problem, start, 0.45, 0.3, 50, 1e-6, guard=False)
        finally:
            logger.remove(handler)
        assert len(messages) == 2
        assert all('decreased log-likelihood' in m for m in messages)
        assert 'keeping previous parameters' in messages[0]
        assert 'keeping previous parameters' not in messages[1]
        assert kept.iterations == 0 and len(kept.history) == 1
        assert kept.mu == pytest.approx(start)
        assert kept.phi == pytest.approx(0.45)
        assert accepted.iterations == 1 and len(accepted.history) == 2
        assert accepted.log_likelihood == -1.0

    def test_noisy_scene_with_outliers(self):
        candidates, mu, phi = noisy_scene(0)
        estimate = em_fit_stack(candidates, self.model)
        assert np.linalg.norm(estimate.mu - mu) < 0.1
        assert abs(math.remainder(estimate.phi - phi, 2 * math.pi)) < math.radians(5.0)
        assert np.all(estimate.responsibilities[:14] > 0.5)

    @pytest.mark.slow
    def test_hundred_seeded_scenes(self):
        hits = 0
        for seed in range(100):
            candidates, mu, phi = noisy_scene(seed)
            estimate = em_fit_stack(candidates, self.model, guard=False)
            assert non_decreasing(estimate), f'seed {seed}'
            if (np.linalg.norm(estimate.mu - mu) < 0.1
                    and abs(math.remainder(estimate.phi - phi, 2 * math.pi)) < math.radians(5.0)):
                hits += 1
        assert hits >= 80

    def test_recovers_pose_with_outlier(self):
        candidates = stack_candidates((10.0, 20.0), 0.5, outlier=5.0)
        estimate = em_fit_stack(candidates, self.model)
        assert estimate.mu == pytest.approx([10.0, 20.0], abs=1e-3)
        assert estimate.phi == pytest.approx(0.5, abs=1e-3)
        assert np.all(estimate.responsibilities[:-1] > 0.5)
        assert estimate.responsibilities[-1] < 0.5

    def test_log_likelihood_history_non_decreasing(self):
        estimate = em_fit_stack(stack_candidates((5.0, 5.0), -2.0, outlier=-5.0), self.model)
        loglik = [row[4] for row in estimate.history]
        assert all(b >= a - 1e-9 for a, b in zip(loglik, loglik[1:]))
        assert estimate.history[0][0] == 0

    def test_from_initial_estimate(self):
        init = StackEstimate(mu=np.array([10.5, 19.5]), phi=0.45)
        estimate = em_fit_stack(stack_candidates((10.0, 20.0), 0.5), self.model, init)
        assert estimate.phi == pytest.approx(0.5, abs=1e-3)

    def test_single_class_is_degenerate(self):
        candidates = [c for c in stack_candidates((0.0, 0.0), 0.0) if c.brick_class == BrickClass.RED]
        with pytest.raises(DegenerateFitError) as error:
            em_fit_stack(candidates, self.model)
        assert error.value.estimate.mu == pytest.approx([-2.25, 0.0])

    def test_tables(self):
        candidates = stack_candidates((10.0, 20.0), 0.5)
        estimate = em_fit_stack(candidates, self.model)
        table = candidate_table(candidates, estimate)
        assert list(table.columns) == ['frame', 'class', 'x', 'y', 'dir', 'responsibility']
        assert len(table) == len(candidates)
        assert list(em_history_table(estimate).columns) == ['iteration', 'mu_x', 'mu_y', 'phi', 'loglik']


def two_scans(candidates):
    return [replace(c, frame=i % 2) for i, c in enumerate(candidates)]


class TestConsistency:
    config = LidarPerceptionConfig()
    offsets = stack_offsets()

    def estimate(self, mu, phi, count):
        return StackEstimate(mu=np.asarray(mu, dtype=float), phi=phi, responsibilities=np.ones(count))

    def test_stack_from_two_scans_passes(self):
        candidates = two_scans(stack_candidates((10.0, 20.0), 0.5, outlier=5.0))
        estimate = em_fit_stack(candidates, TestEmFit.model)
        assert check_consistency(estimate, candidates, self.offsets, self.config) is None

    def test_single_scan_is_rejected(self):
        candidates = stack_candidates((10.0, 20.0), 0.5)
        estimate = self.estimate((10.0, 20.0), 0.5, len(candidates))
        assert check_consistency(estimate, candidates, self.offsets, self.config) == 'inliers from a single scan'

    def test_cluster_without_spread_is_rejected(self):
        # красные и зелёные кандидаты в одной точке: ложная стенка объяснена смещением центра
        cluster = [(BrickClass.RED, 9.9), (BrickClass.GREEN, 9.95), (BrickClass.RED, 10.0), (BrickClass.GREEN, 10.05),
                   (BrickClass.RED, 10.1), (BrickClass.GREEN, 10.0)]
        candidates = two_scans([BrickCandidate(brick_class, np.array([x, 20.0]), np.array([1.0, 0.0]), i, 0.3)
                                for i, (brick_class, x) in enumerate(cluster)])
        estimate = self.estimate((11.875, 20.0), 0.0, len(candidates))
        assert check_consistency(estimate, candidates, self.offsets, self.config) == \
            'inliers do not span the class groups'

    def test_off_axis_is_rejected(self):
        candidates = two_scans(stack_candidates((10.0, 20.0), 0.5))
        shifted = np.array([10.0, 20.0]) + np.array([-math.sin(0.5), math.cos(0.5)])
        estimate = self.estimate(shifted, 0.5, len(candidates))
        assert check_consistency(estimate, candidates, self.offsets, self.config) == 'inliers off the major axis'

    def test_single_class_is_rejected(self):
        candidates = two_scans([c for c in stack_candidates((10.0, 20.0), 0.5) if c.brick_class == BrickClass.BLUE]
                               * 2)
        estimate = self.estimate((10.0, 20.0), 0.5, len(candidates))
        assert check_consistency(estimate, candidates, self.offsets, self.config) == 'inliers of a single class'

    def test_outliers_only(self):
        candidates = two_scans(stack_candidates((10.0, 20.0), 0.5))
        estimate = StackEstimate(mu=np.array([10.0, 20.0]), phi=0.5, responsibilities=np.zeros(len(candidates)))
        assert check_consistency(estimate, candidates, self.offsets, self.config) == '0 inliers'
        unfitted = StackEstimate(mu=np.array([10.0, 20.0]), phi=0.5)
        assert check_consistency(unfitted, candidates, self.offsets, self.config) == \
            'responsibilities do not match candidates'

    def test_locator_verifies_and_forgets(self):
        locator = StackLocator(default_brick_specs())
        far = BrickCandidate(BrickClass.GREEN, np.array([40.0, 40.0]), np.array([1.0, 0.0]), 8, 0.6)
        locator.candidates = two_scans(stack_candidates((10.0, 20.0), 0.5)) + [far]
        estimate = locator.fit()
        assert len(locator.fitted) == 9
        assert locator.verify(estimate) is None
        assert locator.discard_near(estimate.mu) == 8
        assert locator.candidates == [far]
        assert locator.verify(StackEstimate(mu=estimate.mu, phi=estimate.phi)) == \
            'responsibilities do not match candidates'


class TestRansac:
    def test_major_axis_with_outliers(self):
        x = np.linspace(0.0, 4.0, 20)
        points = np.vstack([np.column_stack([x, 2.0 * x + 1.0]), [[3.0, -2.0], [0.0, 5.0], [4.0, 0.0]]])
        _, direction, inliers = ransac_major_axis(points, seed=1)
        assert direction == pytest.approx(np.array([1.0, 2.0]) / math.sqrt(5.0), abs=1e-6)
        assert inliers == 20

    def test_deterministic(self):
        points = np.random.default_rng(0).normal(size=(30, 2))
        a = ransac_major_axis(points, seed=3)
        b = ransac_major_axis(points, seed=3)
        assert np.array_equal(a[1], b[1]) and a[2] == b[2]

    def test_identical_points(self):
        with pytest.raises(DegenerateLineError):
            ransac_major_axis(np.ones((5, 2)))


class TestWaypoint:
    def test_red_waypoint_left_of_axis(self):
        estimate = StackEstimate(mu=np.array([0.0, 0.0]), phi=0.0)
        waypoint = red_approach_waypoint(estimate, stack_offsets(), standoff=0.7)
        assert (waypoint.x, waypoint.y, waypoint.heading) == pytest.approx((-2.25, 0.7, 0.0))


class TestScanCandidates:
    def scene(self, brick_class, yaw=0.0):
        spec = default_brick_specs()[brick_class]
        arena = empty_arena(bricks=(BrickInstance(0, spec, Pose2D(10.0, 10.0), 0),))
        sensor = Pose2D(10.0, 12.7, -0.5 * math.pi + yaw)
        return arena, sensor, simulate_lidar(arena, sensor, LidarConfig(noise_sigma=0.0))

    @pytest.mark.parametrize('brick_class', [BrickClass.RED, BrickClass.GREEN, BrickClass.BLUE, BrickClass.ORANGE])
    def test_isolated_brick_face(self, brick_class):
        arena, sensor, scan = self.scene(brick_class)
        candidates = scan_candidates(scan, sensor, default_brick_specs(), LidarPerceptionConfig())
        # кольца 2 и 3 попадают в ближнюю грань, кольцо 4 проходит над кирпичом
        assert [c.brick_class for c in candidates] == [brick_class, brick_class]
        for candidate in candidates:
            assert candidate.center == pytest.approx([10.0, 10.0], abs=0.05)

    @pytest.mark.parametrize('yaw', [0.0, 0.3, -0.3])
    def test_red_face_for_any_heading(self, yaw):
        arena, sensor, scan = self.scene(BrickClass.RED, yaw)
        candidates = scan_candidates(scan, sensor, default_brick_specs(), LidarPerceptionConfig())
        assert [c.brick_class for c in candidates] == [BrickClass.RED, BrickClass.RED]

    @pytest.mark.parametrize('position', [(25.0, 30.0, 0.0), (3.0, 30.0, math.pi)])
    def test_boundary_fence_gives_no_candidates(self, position):
        arena = empty_arena(boundary_wall_height=1.0)
        sensor = Pose2D(*position)
        scan = simulate_lidar(arena, sensor, LidarConfig(noise_sigma=0.0))
        assert len(scan) > 0
        assert scan_candidates(scan, sensor, default_brick_specs(), LidarPerceptionConfig()) == []

    def test_brick_next_to_fence(self):
        spec = default_brick_specs()[BrickClass.BLUE]
        arena = empty_arena(bricks=(BrickInstance(0, spec, Pose2D(25.0, 30.0), 0),), boundary_wall_height=1.0)
        sensor = Pose2D(25.0, 32.7, -0.5 * math.pi)
        scan = simulate_lidar(arena, sensor, LidarConfig(noise_sigma=0.0))
        candidates = scan_candidates(scan, sensor, default_brick_specs(), LidarPerceptionConfig())
        assert [c.brick_class for c in candidates] == [BrickClass.BLUE, BrickClass.BLUE]

    def test_far_candidates_are_dropped(self):
        arena, sensor, scan = self.scene(BrickClass.BLUE)
        config = LidarPerceptionConfig(max_candidate_range=2.0)
        assert scan_candidates(scan, sensor, default_brick_specs(), config) == []

    def test_locator_accumulates_frames(self):
        arena, sensor, scan = self.scene(BrickClass.BLUE)
        locator = StackLocator(default_brick_specs())
        locator.add_scan(scan, sensor)
        locator.add_scan(scan, sensor)
        assert locator.frames == 2
        assert [c.frame for c in locator.candidates] == [0, 0, 1, 1]
        assert not locator.ready
