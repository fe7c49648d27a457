from typing import Tuple

import numpy as np
from sklearn.decomposition import PCA


def fit_line(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Прямая по методу наименьших квадратов (главная компонента точек).

    :return: (точка на прямой, единичное направление, расстояния точек до прямой)
    """
    points = np.asarray(points, dtype=float)
    pca = PCA(n_components=2).fit(points)
    center = pca.mean_
    direction = pca.components_[0] / np.linalg.norm(pca.components_[0])
    return center, direction, point_line_distance(points, center, direction)


def point_line_distance(points: np.ndarray, origin: np.ndarray, direction: np.ndarray) -> np.ndarray:
    rel = np.asarray(points, dtype=float) - origin
    return np.abs(rel[:, 0] * direction[1] - rel[:, 1] * direction[0])


def canonical_direction(direction: np.ndarray) -> np.ndarray:
    """Направление с неотрицательной x-компонентой (при x = 0 - с положительной y)"""
    direction = np.asarray(direction, dtype=float)
    if direction[0] < 0 or (direction[0] == 0 and direction[1] < 0):
        return -direction
    return direction
