"""
ransac.py

Описание:
    Базовый метод оценки большой оси штабеля: RANSAC по парам точек с последующим
    уточнением прямой по всем инлаерам.
"""
from typing import Tuple

import numpy as np
from loguru import logger

from app.errors import DegenerateLineError
from app.lidar_perception.lines import canonical_direction, fit_line, point_line_distance
from app.sensor_sim.rng import stream


def ransac_major_axis(points, iterations: int = 200, inlier_eps: float = 0.03,
                      seed: int = 0) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    :param points: Точки (N x 2 или N x 3; используются x, y).
    :param iterations: Число выборок пар точек.
    :param inlier_eps: Порог расстояния инлаера.
    :return: (точка на оси, направление с неотрицательной x-компонентой, число инлаеров)
    :raises DegenerateLineError: Если все точки совпадают.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 2:
        raise DegenerateLineError('RANSAC needs at least two points')
    points = points[:, :2]
    if np.allclose(points, points[0]):
        raise DegenerateLineError('All points coincide')

    rng = stream(seed, 'ransac')
    best, best_key = None, None
    for _ in range(iterations):
        i, j = rng.choice(points.shape[0], size=2, replace=False)
        chord = points[j] - points[i]
        norm = np.linalg.norm(chord)
        if norm == 0:
            continue
        distance = point_line_distance(points, points[i], chord / norm)
        inliers = distance <= inlier_eps
        rms = float(np.sqrt(np.mean(distance[inliers] ** 2)))
        key = (int(inliers.sum()), -rms)
        if best_key is None or key > best_key:
            best, best_key = inliers, key
    if best is None:
        # все выборки попали в совпадающие точки
        first = int(np.flatnonzero(np.any(points != points[0], axis=1))[0])
        best = point_line_distance(points, points[0], (points[first] - points[0])
                                   / np.linalg.norm(points[first] - points[0])) <= inlier_eps

    center, direction, _ = fit_line(points[best]) if best.sum() >= 2 else fit_line(points)
    inliers = np.flatnonzero(point_line_distance(points, center, direction) <= inlier_eps)
    logger.debug(f'RANSAC major axis: {inliers.shape[0]} of {points.shape[0]} inliers')
    return center, canonical_direction(direction), int(inliers.shape[0])
