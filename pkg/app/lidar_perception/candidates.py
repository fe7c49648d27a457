"""
candidates.py

Описание:
    Классификация отрезков по длине. Отрезок, длина которого совпадает с длиной ровно одного
    класса в пределах допуска, становится кандидатом: центр кандидата - середина отрезка,
    сдвинутая на половину ширины кирпича от датчика.
"""
from typing import Dict, Iterable, List, Optional

import numpy as np

from app.Model.Brick import BrickClass
from app.Model.Perception import BrickCandidate, LineSegment2D, check_separable


def classify_candidates(segments: Iterable[LineSegment2D], lengths: Dict[BrickClass, float],
                        tolerance: float = 0.07, widths: Optional[Dict[BrickClass, float]] = None,
                        sensor_xy=None) -> List[BrickCandidate]:
    """
    :param segments: Отрезки IEPF.
    :param lengths: Длины классов.
    :param tolerance: Допуск совпадения длины.
    :param widths: Ширины классов (по умолчанию 0.2 м).
    :param sensor_xy: Положение датчика; нормаль к грани направляется от него.
    :raises ConfigurationError: Если длины классов отличаются не более чем на 2 * tolerance.
    """
    check_separable(lengths, tolerance)
    widths = widths or {c: 0.2 for c in lengths}
    sensor = np.zeros(2) if sensor_xy is None else np.asarray(sensor_xy, dtype=float)[:2]
    result = []
    for k, segment in enumerate(segments):
        matches = [c for c, length in lengths.items() if abs(segment.length - length) <= tolerance]
        if len(matches) != 1:
            continue
        brick_class = matches[0]
        direction = segment.direction
        normal = np.array([-direction[1], direction[0]])
        if np.dot(normal, segment.midpoint - sensor) < 0:
            normal = -normal
        center = segment.midpoint + 0.5 * widths[brick_class] * normal
        result.append(BrickCandidate(brick_class, center, direction, k, segment.length, segment.frame))
    return result
