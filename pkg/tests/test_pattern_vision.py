import math

import numpy as np
import pytest

from app.Model.Arena import MAGENTA, YELLOW, PatternGeometry, empty_arena
from app.Model.Geometry import CameraPose, Pose2D, normalize_angle
from app.Model.Perception import GaussianComponent, PixelLabel
from app.Model.Sensors import IlluminationModel, Intrinsics, RgbImage
from app.errors import CameraPoseError, ConfigurationError, SeedPixelError
from app.pattern_vision import (bridging_flood_fill, build_lookup, classify_image, classify_pixel,
                                default_calibration, detect_pattern, detect_pattern_segments, flood_fill,
                                overlay_image)
from app.pattern_vision.detector import EDGE_COLOR, corner_pose_from_center, is_full_pattern, min_area_rectangle
from app.pattern_vision.flood_fill import is_corner
from app.pattern_vision.lookup import grid_from_bytes, grid_to_bytes, mixture_score
from app.sensor_sim.rgbd import GROUND_COLOR, default_intrinsics, render_rgb


@pytest.fixture(scope='module')
def grid():
    return build_lookup(default_calibration())


@pytest.fixture(scope='module')
def pattern_frame():
    arena = empty_arena(pattern=PatternGeometry(Pose2D(10.0, 10.0, 0.0)))
    _, intrinsics = default_intrinsics()
    return render_rgb(arena, CameraPose.downward((12.0, 12.2, 7.0)), intrinsics)


def diagonal_squares() -> np.ndarray:
    labels = np.full((8, 8), PixelLabel.BACKGROUND, dtype=np.uint8)
    labels[0:4, 0:4] = PixelLabel.OBJECT
    labels[4:8, 4:8] = PixelLabel.OBJECT
    return labels


class TestLookup:
    def test_component_center_scores_one(self):
        component = default_calibration()[0]
        assert mixture_score(component.mean, [component])[0] == pytest.approx(1.0)

    @pytest.mark.parametrize('rgb, label', [
        (MAGENTA, PixelLabel.OBJECT),
        ((72, 0, 77), PixelLabel.OBJECT),
        (YELLOW, PixelLabel.BACKGROUND),
        (GROUND_COLOR, PixelLabel.BACKGROUND),
    ])
    def test_default_labels(self, grid, rgb, label):
        assert classify_pixel(grid, rgb) == label

    def test_yellow_tracking(self):
        tracking = build_lookup(default_calibration(track_yellow=True))
        assert classify_pixel(tracking, YELLOW) == PixelLabel.OBJECT
        assert classify_pixel(tracking, MAGENTA) == PixelLabel.OBJECT

    def test_image_labels(self, grid):
        image = np.array([[MAGENTA, YELLOW]], dtype=np.uint8)
        assert classify_image(grid, image).tolist() == [[PixelLabel.OBJECT, PixelLabel.BACKGROUND]]

    def test_blob(self, grid):
        restored = grid_from_bytes(grid_to_bytes(grid))
        assert restored.resolution == 32
        assert restored.threshold == grid.threshold
        np.testing.assert_array_equal(restored.labels, grid.labels)

    @pytest.mark.parametrize('mutate', [
        lambda blob: b'XXXXX' + blob[5:],
        lambda blob: blob[:5] + bytes([9]) + blob[6:],
        lambda blob: blob[:-1],
        lambda blob: blob[:10],
    ])
    def test_bad_blob(self, grid, mutate):
        with pytest.raises(ValueError):
            grid_from_bytes(mutate(grid_to_bytes(grid)))

    def test_invalid_arguments(self):
        with pytest.raises(ConfigurationError):
            build_lookup([])
        with pytest.raises(ConfigurationError):
            build_lookup(default_calibration(), threshold=0.01, background_threshold=0.05)
        with pytest.raises(ConfigurationError):
            build_lookup(default_calibration(), resolution=0)

    def test_component_validation(self):
        with pytest.raises(ConfigurationError):
            GaussianComponent(np.zeros(3), -np.eye(3))


class TestFloodFill:
    def test_plain_fill_stops_at_diagonal(self):
        segment = flood_fill(diagonal_squares(), (0, 0))
        assert segment.size == 16
        assert segment.cell_count == 1

    def test_bridging_fill_joins_diagonal(self):
        segment = bridging_flood_fill(diagonal_squares(), (0, 0), bridge=5)
        assert segment.size == 32
        assert segment.cell_count == 2
        assert segment.bounding_corners.tolist() == [[0, 0], [7, 0], [7, 7], [0, 7]]

    def test_zero_bridge_matches_plain_fill(self):
        labels = diagonal_squares()
        bridged = bridging_flood_fill(labels, (5, 5), bridge=0)
        np.testing.assert_array_equal(bridged.pixels, flood_fill(labels, (5, 5)).pixels)

    def test_seed_must_be_object(self):
        with pytest.raises(SeedPixelError):
            bridging_flood_fill(diagonal_squares(), (0, 7))
        with pytest.raises(SeedPixelError):
            flood_fill(diagonal_squares(), (7, 0))

    @pytest.mark.parametrize('seed', [(-1, -1), (8, 0), (0, 8), (-8, 0)])
    def test_seed_outside_image(self, seed):
        # (-1, -1) без проверки границ указывал бы на объектный пиксель (7, 7)
        with pytest.raises(SeedPixelError):
            flood_fill(diagonal_squares(), seed)
        with pytest.raises(SeedPixelError):
            bridging_flood_fill(diagonal_squares(), seed)

    @pytest.mark.parametrize('inside, expected', [
        ([], True),
        ([5, 6, 7], True),
        ([7, 0, 1], True),
        ([0, 2, 4], False),
        ([0, 1, 4, 7], False),
        (list(range(8)), False),
    ])
    def test_corner(self, inside, expected):
        neighbors = np.full(8, PixelLabel.BACKGROUND, dtype=np.uint8)
        neighbors[inside] = PixelLabel.OBJECT
        assert is_corner(neighbors) == expected


class TestRectangle:
    def test_rotated_strip(self):
        angle = 0.3
        u, v = np.meshgrid(np.linspace(-2.0, 2.0, 41), np.linspace(-0.2, 0.2, 5))
        local = np.column_stack([u.ravel(), v.ravel()])
        rotation = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
        points = local @ rotation.T + np.array([1.0, 2.0])
        center, length, width, axis = min_area_rectangle(points)
        np.testing.assert_allclose(center, [1.0, 2.0], atol=1e-9)
        assert length == pytest.approx(4.0)
        assert width == pytest.approx(0.4)
        assert math.sin(axis - angle) == pytest.approx(0.0, abs=1e-9)

    def test_collinear_points(self):
        points = np.column_stack([np.linspace(0.0, 3.0, 7), np.zeros(7)])
        center, length, width, _ = min_area_rectangle(points)
        np.testing.assert_allclose(center, [1.5, 0.0], atol=1e-9)
        assert length == pytest.approx(3.0)
        assert width == 0.0

    @pytest.mark.parametrize('center, corner', [
        (Pose2D(12.0, 12.2, 0.0), (10.0, 10.0)),
        (Pose2D(0.0, 0.0, 0.5 * math.pi), (2.2, -2.0)),
    ])
    def test_corner_from_center(self, center, corner):
        pose = corner_pose_from_center(center)
        assert (pose.x, pose.y) == pytest.approx(corner)
        assert pose.heading == center.heading


class TestDetector:
    def test_full_pattern_from_above(self, grid, pattern_frame):
        segments = detect_pattern_segments(pattern_frame, None, grid)
        assert len(segments) == 1
        segment = segments[0]
        assert is_full_pattern(segment)
        assert segment.footprint == pytest.approx((4.4, 4.0), abs=0.05)
        assert (segment.pose.x, segment.pose.y) == pytest.approx((12.0, 12.2), abs=0.03)
        assert normalize_angle(segment.pose.heading) == pytest.approx(0.0, abs=0.02)
        corner = corner_pose_from_center(segment.pose)
        assert (corner.x, corner.y) == pytest.approx((10.0, 10.0), abs=0.06)
        assert detect_pattern(pattern_frame, None, grid) == [segment.pose]

    def test_cells_alone_are_rejected(self, grid, pattern_frame):
        assert detect_pattern_segments(pattern_frame, None, grid, bridge=0) == []

    def test_night_frame(self, grid):
        arena = empty_arena(pattern=PatternGeometry(Pose2D(10.0, 10.0, 0.0)))
        _, intrinsics = default_intrinsics()
        rgb = render_rgb(arena, CameraPose.downward((12.0, 12.2, 7.0)), intrinsics, IlluminationModel.preset('night'))
        segments = detect_pattern_segments(rgb, None, grid)
        assert any(is_full_pattern(s) for s in segments)

    def test_missing_pose(self, grid):
        rgb = RgbImage(np.zeros((4, 4, 3), dtype=np.uint8), Intrinsics.from_fov(4, 4, 60.0, 60.0), None)
        with pytest.raises(CameraPoseError):
            detect_pattern_segments(rgb, None, grid)

    def test_overlay_marks_boundary(self, grid):
        labels = diagonal_squares()
        segment = bridging_flood_fill(labels, (0, 0))
        image = overlay_image(np.zeros((8, 8, 3), dtype=np.uint8), [segment])
        assert tuple(image[0, 0]) == EDGE_COLOR
        assert tuple(image[1, 1]) == (0, 0, 0)
        assert tuple(image[0, 7]) == (0, 0, 0)
