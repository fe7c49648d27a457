"""
flood_fill.py

Описание:
    Заливка пикселей-объектов с перешагиванием через малые разрывы. Обычная заливка идёт
    по 4-соседству; для каждого залитого пикселя накапливаются метки восьми соседей.
    Если пиксель является углом фигуры, окрестность поиска расширяется до квадрата
    радиуса bridge, и найденные в ней пиксели-объекты присоединяются к тому же сегменту.
    Так клетки шахматного шаблона, касающиеся друг друга только углами, выделяются за один проход.
"""
from collections import deque
from typing import Optional, Tuple

import numpy as np
from scipy import ndimage

from app.Model.Perception import PatternSegment, PixelLabel
from app.errors import SeedPixelError

# соседи по кругу, начиная с левого верхнего
RING = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))
FOUR = ((-1, 0), (0, 1), (1, 0), (0, -1))
MIN_OPEN_NEIGHBORS = 5
MAX_SPAN = 3


def neighbor_labels(labels: np.ndarray, row: int, col: int) -> np.ndarray:
    """Метки восьми соседей в порядке RING; за границей изображения - фон"""
    rows, cols = labels.shape
    result = np.full(8, PixelLabel.BACKGROUND, dtype=np.uint8)
    for k, (dr, dc) in enumerate(RING):
        r, c = row + dr, col + dc
        if 0 <= r < rows and 0 <= c < cols:
            result[k] = labels[r, c]
    return result


def is_corner(neighbors: np.ndarray) -> bool:
    """
    Угол: не меньше пяти соседей не являются объектом, а соседи-объекты
    лежат внутри трёх последовательных позиций круга.
    """
    inside = neighbors == PixelLabel.OBJECT
    if np.count_nonzero(~inside) < MIN_OPEN_NEIGHBORS:
        return False
    positions = np.flatnonzero(inside)
    if positions.shape[0] == 0:
        return True
    return any(all((p - start) % 8 < MAX_SPAN for p in positions) for start in range(8))


def _segment(labels: np.ndarray, pixels: np.ndarray, counts: np.ndarray) -> PatternSegment:
    rows, cols = labels.shape
    pixels = np.sort(pixels)
    v, u = np.divmod(pixels, cols)
    corners = np.array([[u.min(), v.min()], [u.max(), v.min()], [u.max(), v.max()], [u.min(), v.max()]], float)
    mask = np.zeros(rows * cols, dtype=bool)
    mask[pixels] = True
    _, pieces = ndimage.label(mask.reshape(rows, cols))
    return PatternSegment(pixels, (rows, cols), corners, int(pieces), counts)


def bridging_flood_fill(labels: np.ndarray, seed: Tuple[int, int], bridge: int = 5,
                        visited: Optional[np.ndarray] = None) -> PatternSegment:
    """
    :param labels: Метки пикселей (H x W).
    :param seed: Начальный пиксель (строка, столбец).
    :param bridge: Радиус расширенной окрестности углов в пикселях (0 - обычная заливка).
    :param visited: Общая маска уже залитых пикселей при обходе всего изображения.
    :raises SeedPixelError: Если начальный пиксель вне изображения или не объект.
    """
    labels = np.asarray(labels)
    rows, cols = labels.shape
    row, col = seed
    if not (0 <= row < rows and 0 <= col < cols) or labels[row, col] != PixelLabel.OBJECT:
        raise SeedPixelError(f'Seed pixel {seed} is not an object pixel')
    visited = np.zeros((rows, cols), dtype=bool) if visited is None else visited
    counts = np.zeros(3, dtype=np.int64)
    queue, filled = deque([(row, col)]), []
    visited[row, col] = True
    while queue:
        r, c = queue.popleft()
        filled.append(r * cols + c)
        neighbors = neighbor_labels(labels, r, c)
        counts += np.bincount(neighbors, minlength=3)[:3]
        for dr, dc in FOUR:
            nr, nc = r + dr, c + dc
            if 0 <= nr < rows and 0 <= nc < cols and not visited[nr, nc] and labels[nr, nc] == PixelLabel.OBJECT:
                visited[nr, nc] = True
                queue.append((nr, nc))
        if bridge > 0 and is_corner(neighbors):
            r0, r1, c0, c1 = max(r - bridge, 0), min(r + bridge + 1, rows), max(c - bridge, 0), min(c + bridge + 1, cols)
            window = (labels[r0:r1, c0:c1] == PixelLabel.OBJECT) & ~visited[r0:r1, c0:c1]
            for wr, wc in zip(*np.nonzero(window)):
                visited[r0 + wr, c0 + wc] = True
                queue.append((r0 + wr, c0 + wc))
    return _segment(labels, np.array(filled, dtype=np.int64), counts)


def flood_fill(labels: np.ndarray, seed: Tuple[int, int]) -> PatternSegment:
    """
    Обычная заливка по 4-соседству (компонента связности, содержащая seed).

    :raises SeedPixelError: Если начальный пиксель вне изображения или не объект.
    """
    labels = np.asarray(labels)
    rows, cols = labels.shape
    row, col = seed
    if not (0 <= row < rows and 0 <= col < cols) or labels[row, col] != PixelLabel.OBJECT:
        raise SeedPixelError(f'Seed pixel {seed} is not an object pixel')
    components, _ = ndimage.label(labels == PixelLabel.OBJECT)
    pixels = np.flatnonzero(components.ravel() == components[row, col])
    counts = np.zeros(3, dtype=np.int64)
    for pixel in pixels:
        r, c = divmod(int(pixel), labels.shape[1])
        counts += np.bincount(neighbor_labels(labels, r, c), minlength=3)[:3]
    return _segment(labels, pixels, counts)
