"""
iepf.py

Описание:
    Выделение отрезков из точек одного кольца методом итеративного подбора по крайним точкам.
    Точки делятся на непрерывные серии по скачкам расстояния, каждая серия рекурсивно делится
    в точке максимального отклонения от хорды, пока отклонения не станут меньше epsilon.
    Соседние почти коллинеарные части затем сливаются обратно, если СКО остатков общей прямой
    не превышает epsilon (шум дальности иначе дробит длинные грани).
"""
import math
from typing import List, Optional, Tuple

import numpy as np

from app.Model.Perception import LineSegment2D
from app.lidar_perception.lines import fit_line, point_line_distance


def split_runs(points: np.ndarray, jump: float, closed: bool = False) -> List[np.ndarray]:
    """
    Индексы непрерывных серий точек. Замкнутое кольцо сначала поворачивается так, чтобы оно
    начиналось после наибольшего циклического шага: грань на стыке азимутов 0 и 2pi остаётся одной серией.
    """
    n = points.shape[0]
    if n == 0:
        return []
    order = np.arange(n)
    if closed and n > 1:
        cyclic = np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=1)
        order = np.roll(order, -((int(np.argmax(cyclic)) + 1) % n))
    gaps = np.linalg.norm(np.diff(points[order], axis=0), axis=1) > jump
    starts = np.concatenate([[0], np.flatnonzero(gaps) + 1])
    ends = np.concatenate([starts[1:], [n]])
    return [order[s:e] for s, e in zip(starts, ends)]


def run_extent(points: np.ndarray) -> float:
    """Наибольшее удаление точек серии от её крайних точек"""
    if points.shape[0] < 2:
        return 0.0
    return float(max(np.max(np.linalg.norm(points - points[0], axis=1)),
                     np.max(np.linalg.norm(points - points[-1], axis=1))))


def _split(points: np.ndarray, epsilon: float) -> List[Tuple[int, int]]:
    """Деление серии в точках максимального отклонения; возвращает пары (начало, конец) включительно"""
    result, stack = [], [(0, points.shape[0] - 1)]
    while stack:
        first, last = stack.pop()
        if last - first < 2:
            result.append((first, last))
            continue
        chord = points[last] - points[first]
        norm = np.linalg.norm(chord)
        inner = points[first + 1:last]
        if norm == 0:
            deviation = np.linalg.norm(inner - points[first], axis=1)
        else:
            deviation = point_line_distance(inner, points[first], chord / norm)
        k = int(np.argmax(deviation))
        if deviation[k] > epsilon:
            split = first + 1 + k
            stack.append((split, last))
            stack.append((first, split))
        else:
            result.append((first, last))
    return sorted(result)


def _angle(a: np.ndarray, b: np.ndarray) -> float:
    return math.acos(min(1.0, abs(float(np.dot(a, b)))))


def _merge(points: np.ndarray, parts: List[Tuple[int, int]], epsilon: float,
           max_angle: float) -> List[Tuple[int, int]]:
    merged = list(parts)
    changed = True
    while changed and len(merged) > 1:
        changed = False
        for k in range(len(merged) - 1):
            (a0, a1), (b0, b1) = merged[k], merged[k + 1]
            if a1 != b0 or a1 - a0 < 1 or b1 - b0 < 1:
                continue
            da = points[a1] - points[a0]
            db = points[b1] - points[b0]
            if _angle(da / np.linalg.norm(da), db / np.linalg.norm(db)) > max_angle:
                continue
            _, _, residual = fit_line(points[a0:b1 + 1])
            if math.sqrt(float(np.mean(residual ** 2))) <= epsilon:
                merged[k:k + 2] = [(a0, b1)]
                changed = True
                break
    return merged


def _segment(points: np.ndarray, indices: np.ndarray, epsilon: float, ring: int, frame: int,
             end_extension: float = 0.0):
    run = points[indices]
    n = run.shape[0]
    if n == 2 or np.allclose(run, run[0]):
        center, direction = run.mean(axis=0), run[-1] - run[0]
        if np.linalg.norm(direction) == 0:
            return None
        direction = direction / np.linalg.norm(direction)
        residual = point_line_distance(run, center, direction)
    else:
        center, direction, residual = fit_line(run)
        if np.dot(run[-1] - run[0], direction) < 0:
            direction = -direction
    along = (run - center) @ direction
    start, end = along[0], along[-1]
    margin = end_extension * (end - start) / (n - 1)
    p0 = center + (start - margin) * direction
    p1 = center + (end + margin) * direction
    inliers = indices[residual <= epsilon]
    if np.linalg.norm(p1 - p0) <= 0:
        return None
    return LineSegment2D(p0, p1, inliers, ring, frame)


def iepf_segments(points, epsilon: float = 0.03, min_points: int = 4, jump: float = 0.3,
                  closed: bool = False, ring: int = -1, frame: int = 0,
                  merge_angle_deg: float = 10.0, end_extension: float = 0.0,
                  max_run: Optional[float] = None) -> List[LineSegment2D]:
    """
    Отрезки одного кольца.

    :param points: Точки, упорядоченные по азимуту (N x 2 или N x 3; используются x, y).
    :param epsilon: Допустимое отклонение от отрезка.
    :param min_points: Минимальное число точек отрезка.
    :param jump: Порог скачка между соседними точками, разделяющий серии.
    :param closed: Кольцо покрывает полный круг (последняя точка соседствует с первой).
    :param end_extension: Продление концов отрезка в долях среднего шага точек; 0 - концы в крайних точках.
    :param max_run: Серии протяжённее этого значения (стены, ограждение) отбрасываются целиком.
    :return: Отрезки с индексами точек-инлаеров во входном массиве.
    """
    if epsilon <= 0:
        raise ValueError('epsilon must be positive')
    if end_extension < 0:
        raise ValueError('end_extension must be non-negative')
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        return []
    points = points[:, :2]
    segments = []
    for run in split_runs(points, jump, closed):
        if run.shape[0] < min_points:
            continue
        local = points[run]
        if max_run is not None and run_extent(local) > max_run:
            continue
        parts = _merge(local, _split(local, epsilon), epsilon, math.radians(merge_angle_deg))
        for first, last in parts:
            if last - first + 1 < min_points:
                continue
            segment = _segment(points, run[first:last + 1], epsilon, ring, frame, end_extension)
            if segment is not None and segment.inliers.shape[0] >= min_points:
                segments.append(segment)
    return segments
