"""
detector.py

Описание:
    Поиск шаблона на цветном кадре: пиксели-объекты заливаются с перешагиванием разрывов,
    пиксели сегмента проецируются на плоскость земли, по проекциям строится прямоугольник
    минимальной площади. Сегмент принимается, если его размеры совпадают с одной полосой
    шаблона или со всем L-образным шаблоном.
"""
import math
from dataclasses import replace
from typing import List, Optional, Tuple

import numpy as np
from loguru import logger
from scipy.spatial import ConvexHull, QhullError

from app.Model.Config import PatternConfig
from app.Model.Geometry import CameraPose, Pose2D, normalize_angle
from app.Model.Perception import ColorLookupGrid, PatternSegment, PixelLabel
from app.Model.Sensors import Intrinsics, RgbImage
from app.errors import CameraPoseError
from app.lidar_perception.lines import canonical_direction, fit_line
from app.pattern_vision.flood_fill import bridging_flood_fill
from app.pattern_vision.lookup import classify_image

EDGE_COLOR = (0, 255, 0)
JUNCTION_RADIUS = 0.6


def ground_points(pixels: np.ndarray, shape: Tuple[int, int], intrinsics: Intrinsics,
                  camera_pose: CameraPose) -> np.ndarray:
    """Проекции пикселей на плоскость z = 0 (пиксели выше горизонта отбрасываются)"""
    v, u = np.divmod(pixels, shape[1])
    rays = np.column_stack([(u - intrinsics.cx) / intrinsics.fx, (v - intrinsics.cy) / intrinsics.fy,
                            np.ones(u.shape[0])]) @ camera_pose.matrix.T
    down = rays[:, 2] < -1e-9
    t = -camera_pose.height / rays[down, 2]
    return np.asarray(camera_pose.position)[:2] + rays[down, :2] * t[:, None]


def min_area_rectangle(points: np.ndarray) -> Tuple[np.ndarray, float, float, float]:
    """
    Прямоугольник минимальной площади, содержащий точки.

    :return: (центр, длина, ширина, направление длинной стороны в радианах)
    """
    try:
        hull = points[ConvexHull(points).vertices]
    except (QhullError, ValueError):
        center, direction, _ = fit_line(points)
        along = (points - center) @ direction
        return center + 0.5 * (along.max() + along.min()) * direction, float(np.ptp(along)), 0.0, \
            math.atan2(direction[1], direction[0])
    best = None
    edges = np.roll(hull, -1, axis=0) - hull
    for angle in np.unique(np.round(np.arctan2(edges[:, 1], edges[:, 0]) % (math.pi / 2), 12)):
        c, s = math.cos(angle), math.sin(angle)
        local = hull @ np.array([[c, -s], [s, c]])
        low, high = local.min(axis=0), local.max(axis=0)
        area = float(np.prod(high - low))
        if best is None or area < best[0] - 1e-12:
            best = (area, angle, low, high)
    _, angle, low, high = best
    c, s = math.cos(angle), math.sin(angle)
    axes = np.array([[c, s], [-s, c]])
    center = (0.5 * (low + high)) @ axes
    size = high - low
    if size[0] >= size[1]:
        return center, float(size[0]), float(size[1]), angle
    return center, float(size[1]), float(size[0]), angle + math.pi / 2


def _junction_heading(points: np.ndarray, center: np.ndarray, length: float, width: float, axis: float) -> float:
    """Курс угла L: ось первой полосы. Угол описанного прямоугольника напротив стыка полос пуст"""
    u = np.array([math.cos(axis), math.sin(axis)])
    w = np.array([-u[1], u[0]])
    empty, empty_count = None, None
    for su, sw in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
        corner = center + su * 0.5 * length * u + sw * 0.5 * width * w
        count = int(np.count_nonzero(np.linalg.norm(points - corner, axis=1) <= JUNCTION_RADIUS))
        if empty_count is None or count < empty_count:
            empty, empty_count = (su * u, sw * w), count
    a, b = empty
    if a[0] * b[1] - a[1] * b[0] < 0:
        a, b = b, a
    return math.atan2(a[1], a[0])


def corner_pose_from_center(pose: Pose2D, length: float = 4.0, width: float = 0.4) -> Pose2D:
    """Поза угла L-шаблона по позе центра описанного прямоугольника"""
    corner = pose.position - pose.direction * 0.5 * length - pose.left_normal * 0.5 * (width + length)
    return Pose2D(corner[0], corner[1], pose.heading)


def is_full_pattern(segment: PatternSegment, config: Optional[PatternConfig] = None) -> bool:
    config = config or PatternConfig()
    return segment.footprint[1] > 0.5 * (config.expected_length + config.expected_width)


def _accept(segment: PatternSegment, points: np.ndarray, config: PatternConfig) -> Optional[PatternSegment]:
    center, length, width, axis = min_area_rectangle(points)
    leg = (abs(length - config.expected_length) <= config.length_tolerance
           and abs(width - config.expected_width) <= config.width_tolerance)
    full = (abs(length - (config.expected_length + config.expected_width)) <= config.length_tolerance
            and abs(width - config.expected_length) <= config.length_tolerance)
    if not (leg or full):
        logger.debug(f'Pattern segment rejected: {length:.2f} x {width:.2f} m')
        return None
    if full:
        heading = _junction_heading(points, center, length, width, axis)
    else:
        direction = canonical_direction(np.array([math.cos(axis), math.sin(axis)]))
        heading = math.atan2(direction[1], direction[0])
    pose = Pose2D(center[0], center[1], normalize_angle(heading))
    return replace(segment, footprint=(length, width), pose=pose)


def detect_pattern_segments(rgb: RgbImage, camera_pose: Optional[CameraPose], grid: ColorLookupGrid,
                            config: Optional[PatternConfig] = None,
                            bridge: Optional[int] = None) -> List[PatternSegment]:
    """
    Все принятые сегменты кадра, в порядке построчного обхода начальных пикселей.

    :raises CameraPoseError: Если поза камеры неизвестна.
    """
    config = config or PatternConfig()
    camera_pose = camera_pose or rgb.camera_pose
    if camera_pose is None:
        raise CameraPoseError('Camera pose is required to detect the pattern')
    bridge = config.bridge if bridge is None else bridge
    labels = classify_image(grid, rgb.rgb)
    visited = np.zeros(labels.shape, dtype=bool)
    accepted = []
    for pixel in np.flatnonzero(labels.ravel() == PixelLabel.OBJECT):
        row, col = divmod(int(pixel), labels.shape[1])
        if visited[row, col]:
            continue
        segment = bridging_flood_fill(labels, (row, col), bridge, visited)
        if segment.size < config.min_pixels:
            continue
        points = ground_points(segment.pixels, segment.shape, rgb.intrinsics, camera_pose)
        if points.shape[0] < 3:
            continue
        result = _accept(segment, points, config)
        if result is not None:
            accepted.append(result)
    logger.debug(f'Pattern detector: {len(accepted)} accepted segments')
    return accepted


def detect_pattern(rgb: RgbImage, camera_pose: Optional[CameraPose], grid: ColorLookupGrid,
                   config: Optional[PatternConfig] = None) -> List[Pose2D]:
    """Позы кандидатов шаблона: центр и ось принятых сегментов"""
    return [s.pose for s in detect_pattern_segments(rgb, camera_pose, grid, config)]


def overlay_image(rgb: np.ndarray, segments: List[PatternSegment]) -> np.ndarray:
    """Кадр с границами сегментов, выделенными зелёным"""
    image = np.array(rgb, dtype=np.uint8, copy=True)
    for segment in segments:
        mask = segment.mask()
        interior = mask.copy()
        interior[1:, :] &= mask[:-1, :]
        interior[:-1, :] &= mask[1:, :]
        interior[:, 1:] &= mask[:, :-1]
        interior[:, :-1] &= mask[:, 1:]
        image[mask & ~interior] = EDGE_COLOR
    return image
