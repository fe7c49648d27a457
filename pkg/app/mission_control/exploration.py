"""
exploration.py

Описание:
    Маршруты обследования арены. Точки обзора стоят в центрах ячеек сетки с шагом не больше
    r * sqrt(2), поэтому круги радиуса r (дальность восприятия) покрывают всю арену; точки
    обходятся змейкой. Области интереса переносят свои точки в начало маршрута.
    Спираль Архимеда вокруг примерной позиции шаблона используется для его поиска.
"""
import math
from typing import List, Sequence, Tuple

import numpy as np

from app.Model.Geometry import Pose2D
from app.Model.Mission import MissionState

Region = Tuple[float, float, float, float]


def grid_shape(bounds: Tuple[float, float], radius: float) -> Tuple[int, int]:
    if radius <= 0:
        raise ValueError('Perception radius must be positive')
    spacing = radius * math.sqrt(2.0)
    return max(1, math.ceil(bounds[0] / spacing - 1e-9)), max(1, math.ceil(bounds[1] / spacing - 1e-9))


def coverage_waypoints(bounds: Tuple[float, float], radius: float, shift: float = 0.0) -> List[Pose2D]:
    """
    Точки обзора змейкой: столбцы сетки по x, внутри столбца попеременно вверх и вниз по y.

    :param bounds: Размеры арены.
    :param radius: Дальность восприятия.
    :param shift: Сдвиг сетки в долях ячейки (для повторного обхода со смещением).
    """
    nx, ny = grid_shape(bounds, radius)
    cell = np.array([bounds[0] / nx, bounds[1] / ny])
    points = []
    for i in range(nx):
        rows = range(ny) if i % 2 == 0 else range(ny - 1, -1, -1)
        for j in rows:
            offset = (np.array([i, j]) + 0.5 + shift) * cell
            points.append(np.clip(offset, 0.0, bounds))
    result = []
    for k, point in enumerate(points):
        target = points[k + 1] if k + 1 < len(points) else point + (point - points[k - 1] if k else [1.0, 0.0])
        heading = math.atan2(target[1] - point[1], target[0] - point[0])
        result.append(Pose2D(point[0], point[1], heading))
    return result


def in_region(pose: Pose2D, region: Region) -> bool:
    x0, y0, x1, y1 = region
    return min(x0, x1) <= pose.x <= max(x0, x1) and min(y0, y1) <= pose.y <= max(y0, y1)


def prioritize(waypoints: Sequence[Pose2D], regions: Sequence[Region]) -> List[Pose2D]:
    """Устойчивое разбиение: сначала точки внутри областей интереса, затем остальные"""
    inside = [w for w in waypoints if any(in_region(w, r) for r in regions)]
    outside = [w for w in waypoints if not any(in_region(w, r) for r in regions)]
    return inside + outside


def set_priority_areas(state: MissionState, regions: Sequence[Region]) -> List[Pose2D]:
    """Переупорядочивает ещё не посещённые точки; возвращает новый маршрут"""
    state.priority_areas = [tuple(r) for r in regions]
    pending = state.waypoints[state.visited:]
    ordered = prioritize(pending, state.priority_areas)
    state.priority_count = sum(1 for w in pending if any(in_region(w, r) for r in state.priority_areas))
    state.waypoints = state.waypoints[:state.visited] + ordered
    return state.waypoints


def spiral_points(center, spacing: float = 2.0, step: float = 1.0, cap: float = 12.0) -> List[np.ndarray]:
    """
    Точки спирали r = spacing * theta / (2 pi) через равные отрезки дуги step,
    от центра до радиуса cap.
    """
    center = np.asarray(center, dtype=float)
    if spacing <= 0 or step <= 0:
        raise ValueError('Spiral spacing and step must be positive')
    points, theta = [center.copy()], 0.0
    b = spacing / (2.0 * math.pi)
    while True:
        radius = b * theta
        # шаг по углу для дуги длины step
        theta += step / math.sqrt(radius * radius + b * b)
        radius = b * theta
        if radius > cap:
            break
        points.append(center + radius * np.array([math.cos(theta), math.sin(theta)]))
    return points
