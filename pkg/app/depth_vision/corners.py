"""
corners.py

Описание:
    Поиск четырёх углов сегмента по пикселям: c0 - самый далёкий от центра пиксель,
    c1 - самый далёкий от c0, c2 - максимум суммы расстояний до c0 и c1,
    c3 - максимум суммы расстояний до c0, c1 и c2. При равенстве берётся пиксель
    с наименьшим индексом.
"""
import numpy as np

from app.Model.Perception import DepthSegment
from app.errors import DegenerateSegmentError

MIN_AREA = 1.0


def polygon_area(corners: np.ndarray) -> float:
    """Площадь четырёхугольника c0, c2, c1, c3 (в пикселях)"""
    ring = corners[[0, 2, 1, 3]]
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def extract_corners(segment: DepthSegment) -> np.ndarray:
    """
    :return: Массив 4 x 2 координат (u, v) углов c0, c1, c2, c3.
    :raises DegenerateSegmentError: Если в сегменте меньше 4 пикселей или углы лежат на одной прямой.
    """
    if segment.size < 4:
        raise DegenerateSegmentError(f'Segment {segment.segment_id} has only {segment.size} pixels')
    order = np.argsort(segment.pixels, kind='stable')
    coords = segment.coords()[order]
    center = np.asarray(segment.center, dtype=float)

    def farthest(*anchors) -> np.ndarray:
        total = np.zeros(coords.shape[0])
        for anchor in anchors:
            total += np.linalg.norm(coords - anchor, axis=1)
        return coords[int(np.argmax(total))]

    c0 = farthest(center)
    c1 = farthest(c0)
    c2 = farthest(c0, c1)
    c3 = farthest(c0, c1, c2)
    corners = np.array([c0, c1, c2, c3])
    if polygon_area(corners) < MIN_AREA:
        raise DegenerateSegmentError(f'Segment {segment.segment_id} is degenerate')
    return corners
