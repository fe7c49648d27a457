"""
classify.py

Описание:
    Классификация кирпича по размерам: углы переводятся в 3D в системе камеры,
    длина - среднее двух длинных сторон, ширина - двух коротких. Цвет не используется.
"""
import math
from typing import Dict, Optional

import numpy as np

from app.Model.Brick import BrickClass, BrickSpec, default_brick_specs
from app.Model.Perception import ClassifiedBrick
from app.Model.Sensors import DepthImage, Intrinsics


def corner_depths(corners: np.ndarray, depth: np.ndarray) -> np.ndarray:
    u = np.clip(np.round(corners[:, 0]).astype(int), 0, depth.shape[1] - 1)
    v = np.clip(np.round(corners[:, 1]).astype(int), 0, depth.shape[0] - 1)
    return depth[v, u]


def match_class(length: float, width: float, specs: Dict[BrickClass, BrickSpec], length_tolerance: float = 0.07,
                width_tolerance: float = 0.05) -> Optional[BrickClass]:
    """Единственный класс, совпадающий по длине и ширине; иначе None"""
    matches = [c for c, s in specs.items()
               if abs(length - s.length_m) <= length_tolerance and abs(width - s.width_m) <= width_tolerance]
    return matches[0] if len(matches) == 1 else None


def classify_from_corners(corners: np.ndarray, depth, intrinsics: Intrinsics,
                          specs: Optional[Dict[BrickClass, BrickSpec]] = None, length_tolerance: float = 0.07,
                          width_tolerance: float = 0.05, segment_id: int = -1,
                          fully_visible: bool = True) -> ClassifiedBrick:
    """
    :param corners: Углы c0..c3 в пикселях (u, v).
    :param depth: Изображение глубины (DepthImage или массив H x W).
    :param intrinsics: Параметры камеры.
    :return: Кирпич; brick_class = None, если ни один класс не подходит.
    """
    specs = specs or default_brick_specs()
    depth = depth.depth if isinstance(depth, DepthImage) else np.asarray(depth, dtype=float)
    corners = np.asarray(corners, dtype=float)
    d = corner_depths(corners, depth)
    if np.any(d <= 0):
        # угол без отражения: глубина по остальным углам
        valid = d[d > 0]
        d = np.where(d > 0, d, valid.mean() if valid.size else 0.0)
    points = intrinsics.back_project(corners[:, 0], corners[:, 1], d)
    ring = points[[0, 2, 1, 3]]
    edges = np.linalg.norm(ring - np.roll(ring, -1, axis=0), axis=1)
    first, second = 0.5 * (edges[0] + edges[2]), 0.5 * (edges[1] + edges[3])
    # центры крайних пикселей лежат на полпикселя внутри граней
    pixel = float(np.mean(d)) / intrinsics.fx
    length, width = max(first, second) + pixel, min(first, second) + pixel
    long_edge = (ring[1] - ring[0]) if first >= second else (ring[2] - ring[1])
    yaw = math.atan2(long_edge[1], long_edge[0])
    brick_class = match_class(length, width, specs, length_tolerance, width_tolerance)
    pixel_center = (float(corners[:, 0].mean()), float(corners[:, 1].mean()))
    return ClassifiedBrick(brick_class, length, width, points.mean(axis=0), yaw, pixel_center, segment_id,
                           fully_visible, corners)
