"""
raycast.py

Описание:
    Векторизованная трассировка лучей против плоскости земли и ориентированных параллелепипедов
    методом плит (slab). Границы включаются с допуском EPS.
"""
import math
from typing import List, Tuple

import numpy as np

from app.Model.Geometry import Box

EPS = 1e-9

GROUND = -2
MISS = -1


def intersect_box(origins: np.ndarray, directions: np.ndarray, box: Box) -> np.ndarray:
    """
    Параметр t первого пересечения лучей origin + t * direction с параллелепипедом.

    :return: Массив t (N), inf для лучей без пересечения или начинающихся внутри тела.
    """
    c, s = math.cos(box.pose.heading), math.sin(box.pose.heading)
    rel = origins[:, :2] - box.pose.position
    o_local = np.column_stack([rel[:, 0] * c + rel[:, 1] * s, -rel[:, 0] * s + rel[:, 1] * c,
                               origins[:, 2] - (box.z_bottom + 0.5 * box.height)])
    d_local = np.column_stack([directions[:, 0] * c + directions[:, 1] * s,
                               -directions[:, 0] * s + directions[:, 1] * c, directions[:, 2]])
    half = np.array([0.5 * box.length, 0.5 * box.width, 0.5 * box.height])

    t_near = np.full(origins.shape[0], -np.inf)
    t_far = np.full(origins.shape[0], np.inf)
    with np.errstate(divide='ignore', invalid='ignore'):
        for axis in range(3):
            o, d = o_local[:, axis], d_local[:, axis]
            parallel = np.abs(d) < 1e-15
            t1 = (-half[axis] - o) / d
            t2 = (half[axis] - o) / d
            low, high = np.minimum(t1, t2), np.maximum(t1, t2)
            outside = parallel & (np.abs(o) > half[axis] + EPS)
            low = np.where(parallel, -np.inf, low)
            high = np.where(parallel, np.where(outside, -np.inf, np.inf), high)
            t_near = np.maximum(t_near, low)
            t_far = np.minimum(t_far, high)
    hit = (t_near <= t_far + EPS) & (t_near > EPS)
    return np.where(hit, t_near, np.inf)


def cast_rays(origins, directions, boxes: List[Box], ground: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """
    Ближайшее пересечение каждого луча со сценой.

    :param origins: Начала лучей (N x 3) или одна точка (3,).
    :param directions: Направления лучей (N x 3), нормировка не требуется.
    :param boxes: Твёрдые тела сцены.
    :param ground: Учитывать плоскость z = 0.
    :return: (t, index): t - параметр пересечения (inf - промах), index - номер тела, GROUND или MISS.
    """
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    origins = np.broadcast_to(np.asarray(origins, dtype=float), directions.shape)
    best = np.full(directions.shape[0], np.inf)
    index = np.full(directions.shape[0], MISS, dtype=np.int64)
    if ground:
        with np.errstate(divide='ignore', invalid='ignore'):
            t_ground = np.where(directions[:, 2] < 0, -origins[:, 2] / directions[:, 2], np.inf)
        t_ground = np.where(t_ground > EPS, t_ground, np.inf)
        best, index = t_ground, np.where(np.isfinite(t_ground), GROUND, MISS)
    for k, box in enumerate(boxes):
        t = intersect_box(origins, directions, box)
        closer = t < best
        best = np.where(closer, t, best)
        index = np.where(closer, k, index)
    return best, index
