import math

import numpy as np
import pytest

from app.Model.Arena import empty_arena
from app.Model.Brick import BrickClass, BrickInstance, default_brick_specs
from app.Model.Geometry import CameraPose, Pose2D
from app.Model.Perception import ClassifiedBrick, DepthSegment, HeightImage
from app.Model.Sensors import DepthImage, IlluminationModel, Intrinsics
from app.depth_vision import (debug_height_image, depth_to_height, extract_corners, in_reach, process_depth_frame,
                              segment_height_image, segment_table, select_target, servo_error)
from app.depth_vision.classify import match_class
from app.depth_vision.height import ground_level
from app.errors import CameraPoseError, DegenerateSegmentError
from app.sensor_sim import simulate_rgbd
from app.sensor_sim.rgbd import default_intrinsics, render_depth


def height_image(height: np.ndarray) -> HeightImage:
    rows, cols = height.shape
    source = DepthImage(np.ones((rows, cols)), Intrinsics.from_fov(cols, rows, 60.0, 60.0),
                        CameraPose.downward((0.0, 0.0, 1.0)))
    return HeightImage(height, source, 1.0)


def rectangle_segment(rows, cols, shape=(20, 20)) -> DepthSegment:
    v, u = np.meshgrid(np.arange(*rows), np.arange(*cols), indexing='ij')
    pixels = np.sort((v * shape[1] + u).ravel())
    return DepthSegment(0, pixels, shape, (float(u.mean()), float(v.mean())), pixels.shape[0], 1.0, 1.0, 0.2, True)


class TestHeight:
    def test_flat_ground_is_zero(self):
        intrinsics, _ = default_intrinsics()
        depth = render_depth(empty_arena(), CameraPose.looking((5.0, 5.0, 1.2), 0.3, math.radians(60.0)), intrinsics)
        height = depth_to_height(depth)
        assert np.nanmax(np.abs(height.height)) == pytest.approx(0.0, abs=1e-6)

    def test_missing_pose(self):
        depth = DepthImage(np.ones((4, 4)), Intrinsics.from_fov(4, 4, 60.0, 60.0), None)
        with pytest.raises(CameraPoseError):
            depth_to_height(depth)

    def test_ground_level_uses_lowest_decile(self):
        values = np.concatenate([np.full(20, -0.05), np.full(180, 0.3)]).reshape(10, 20)
        assert ground_level(values) == pytest.approx(-0.05)


class TestSegmentation:
    def heights(self):
        height = np.zeros((10, 10))
        height[2:5, 2:5] = 0.2
        height[2:5, 5:7] = 0.4
        height[7:10, 6:9] = 0.3
        return height

    def test_step_separates_touching_blocks(self):
        segments = segment_height_image(height_image(self.heights()))
        assert [s.size for s in segments] == [9, 6, 9]
        assert [s.mean_height for s in segments] == pytest.approx([0.2, 0.4, 0.3])

    def test_border_segments_are_not_fully_visible(self):
        segments = segment_height_image(height_image(self.heights()))
        assert [s.fully_visible for s in segments] == [True, True, False]

    def test_min_pixels_and_nan(self):
        height = self.heights()
        height[2, 2] = np.nan
        segments = segment_height_image(height_image(height), min_pixels=7)
        assert [s.size for s in segments] == [8, 9]

    def test_table_columns(self):
        table = segment_table(segment_height_image(height_image(self.heights())), frame=3)
        assert table['frame'].tolist() == [3, 3, 3]
        assert list(table.columns)[:3] == ['frame', 'segment', 'u']


def mask_segment(mask: np.ndarray) -> DepthSegment:
    rows, cols = np.nonzero(mask)
    pixels = np.flatnonzero(mask)
    return DepthSegment(0, pixels, mask.shape, (float(cols.mean()), float(rows.mean())), pixels.shape[0], 1.0, 1.0,
                        0.2, True)


def rotated_rectangle(w, h, theta, cx, cy, shape=(60, 80)):
    """Маска прямоугольника w x h с центром (cx, cy), повёрнутого на theta, и его вершины (u, v)"""
    v, u = np.mgrid[0:shape[0], 0:shape[1]].astype(float)
    c, s = math.cos(theta), math.sin(theta)
    a = (u - cx) * c + (v - cy) * s
    b = -(u - cx) * s + (v - cy) * c
    mask = (np.abs(a) <= 0.5 * w) & (np.abs(b) <= 0.5 * h)
    vertices = [(cx + i * 0.5 * w * c - j * 0.5 * h * s, cy + i * 0.5 * w * s + j * 0.5 * h * c)
                for i in (-1, 1) for j in (-1, 1)]
    return mask, np.array(vertices)


def sweep_rectangle(index):
    """Набор прямоугольников разных размеров и поворотов"""
    theta = (37 * index) % 90 * math.pi / 180.0 + (index % 7) * 0.01
    return rotated_rectangle(12 + (7 * index) % 29, 10 + (11 * index) % 21, theta, 40 + (index % 10) * 0.1,
                             30 + (index % 13) * 0.07)


def exhaustive_corners(segment: DepthSegment) -> np.ndarray:
    """Полный перебор пикселей в порядке индексов; при равенстве остаётся первый"""
    coords = [(float(p % segment.shape[1]), float(p // segment.shape[1])) for p in sorted(segment.pixels.tolist())]

    def farthest(anchors):
        best, chosen = -1.0, None
        for u, v in coords:
            total = 0.0
            for au, av in anchors:
                total += math.sqrt((u - au) * (u - au) + (v - av) * (v - av))
            if total > best:
                best, chosen = total, (u, v)
        return chosen

    c0 = farthest([segment.center])
    c1 = farthest([c0])
    c2 = farthest([c0, c1])
    c3 = farthest([c0, c1, c2])
    return np.array([c0, c1, c2, c3])


def vertex_error(corners: np.ndarray, vertices: np.ndarray) -> float:
    return max(float(np.min(np.linalg.norm(corners - vertex, axis=1))) for vertex in vertices)


class TestCorners:
    def test_rectangle_corners(self):
        corners = extract_corners(rectangle_segment((5, 9), (3, 15)))
        assert sorted(map(tuple, corners.tolist())) == [(3.0, 5.0), (3.0, 8.0), (14.0, 5.0), (14.0, 8.0)]

    def test_line_is_degenerate(self):
        with pytest.raises(DegenerateSegmentError):
            extract_corners(rectangle_segment((5, 6), (3, 15)))

    def test_too_small(self):
        with pytest.raises(DegenerateSegmentError):
            extract_corners(rectangle_segment((5, 6), (3, 6)))

    def test_wide_rectangle_within_one_pixel(self):
        corners = extract_corners(rectangle_segment((10, 30), (20, 60), shape=(60, 80)))
        vertices = np.array([(19.5, 9.5), (59.5, 9.5), (19.5, 29.5), (59.5, 29.5)])
        assert vertex_error(corners, vertices) <= 1.0

    def test_rotated_rectangle_within_two_pixels(self):
        mask, vertices = rotated_rectangle(40, 20, math.radians(30.0), 40.3, 30.7)
        assert vertex_error(extract_corners(mask_segment(mask)), vertices) <= 2.0

    def test_matches_exhaustive_search(self):
        for index in range(200):
            mask, vertices = sweep_rectangle(index)
            segment = mask_segment(mask)
            corners = extract_corners(segment)
            np.testing.assert_array_equal(corners, exhaustive_corners(segment), err_msg=f'rectangle {index}')
            # центры пикселей не доходят до вершины повёрнутого прямоугольника
            assert vertex_error(corners, vertices) <= 2.1, f'rectangle {index}'


class TestClassify:
    def test_match_class(self):
        specs = default_brick_specs()
        assert match_class(0.62, 0.21, specs) == BrickClass.GREEN
        assert match_class(0.45, 0.2, specs) is None
        assert match_class(0.3, 0.4, specs) is None

    def test_red_brick_from_above(self):
        spec = default_brick_specs()[BrickClass.RED]
        arena = empty_arena(bricks=(BrickInstance(0, spec, Pose2D(5.0, 5.0), 0),))
        intrinsics, _ = default_intrinsics()
        depth = render_depth(arena, CameraPose.downward((5.0, 5.0, 1.0), 0.5 * math.pi), intrinsics)
        result = process_depth_frame(depth, default_brick_specs())
        assert len(result.bricks) == 1
        brick = result.bricks[0]
        assert brick.brick_class == BrickClass.RED
        assert brick.length == pytest.approx(0.3, abs=0.02)
        assert brick.width == pytest.approx(0.2, abs=0.02)
        assert brick.center[2] == pytest.approx(0.8, abs=0.01)
        image = debug_height_image(result.height, result.segments, brick)
        assert image.dtype == np.uint8 and image.shape == depth.depth.shape

    @pytest.mark.slow
    def test_classification_ignores_illumination(self):
        specs = default_brick_specs()
        classes = list(specs)
        camera = CameraPose.downward((5.0, 5.0, 1.5))
        for seed in range(50):
            rng = np.random.default_rng(seed)
            pose = Pose2D(5.0 + rng.uniform(-0.2, 0.2), 5.0 + rng.uniform(-0.2, 0.2), rng.uniform(-math.pi, math.pi))
            arena = empty_arena(bricks=(BrickInstance(0, specs[classes[seed % len(classes)]], pose, 0),))
            outputs, images = [], []
            for mode in ('night', 'noon', 'sunset'):
                depth, rgb = simulate_rgbd(arena, camera, illumination=IlluminationModel.preset(mode), seed=seed)
                bricks = process_depth_frame(depth, specs).bricks
                outputs.append([(b.brick_class, np.array([b.length, b.width, b.yaw]).tobytes(), b.center.tobytes())
                                for b in bricks])
                images.append(rgb.rgb)
            assert outputs[0] == outputs[1] == outputs[2], f'seed {seed}'
            assert not np.array_equal(images[0], images[1])


def brick(brick_class, pixel_center, segment_id, fully_visible=True, center=(0.0, 0.0, 0.7)):
    return ClassifiedBrick(brick_class, 0.3, 0.2, np.array(center), 0.0, pixel_center, segment_id, fully_visible)


class TestServo:
    def test_selects_closest_to_bottom_right(self):
        bricks = [brick(BrickClass.RED, (100.0, 100.0), 0), brick(BrickClass.RED, (400.0, 230.0), 1),
                  brick(BrickClass.GREEN, (423.0, 239.0), 2), brick(BrickClass.RED, (420.0, 239.0), 3, False)]
        assert select_target(bricks, BrickClass.RED).segment_id == 1
        assert select_target(bricks, BrickClass.BLUE) is None

    def test_excluded_positions(self):
        bricks = [brick(BrickClass.RED, (100.0, 100.0), 0), brick(BrickClass.RED, (400.0, 230.0), 1)]
        chosen = select_target(bricks, BrickClass.RED, excluded=[(1.0, 1.0)], positions=[(5.0, 5.0), (1.0, 1.05)])
        assert chosen.segment_id == 0

    def test_servo_error(self):
        target = brick(BrickClass.RED, (0.0, 0.0), 0, center=(0.05, 0.01, 0.7))
        base, gripper, base_ok, gripper_ok = servo_error(target)
        assert base == pytest.approx([0.05, 0.01])
        assert base_ok and not gripper_ok

    @pytest.mark.parametrize('point, expected', [((0.0, -0.7), True), ((0.7, 0.0), False), ((0.0, -1.5), False),
                                                 ((0.3, -0.6), True)])
    def test_reach_region(self, point, expected):
        assert in_reach(Pose2D(0.0, 0.0), point) is expected
