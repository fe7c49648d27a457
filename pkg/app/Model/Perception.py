"""
Perception.py

Описание:
    Результаты восприятия: отрезки и кандидаты LiDAR, модель и оценка штабеля,
    изображение высот и сегменты глубины, классифицированные кирпичи, сетка цветов
    и сегменты шаблона.
"""
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, Optional, Tuple

import numpy as np

from app.Model.Brick import BrickClass, BrickSpec
from app.Model.Geometry import Pose2D, normalize_angle
from app.Model.Sensors import DepthImage
from app.errors import ConfigurationError


@dataclass(frozen=True, eq=False)
class LineSegment2D:
    p0: np.ndarray
    p1: np.ndarray
    inliers: np.ndarray
    ring: int = -1
    frame: int = 0

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError('Segment length must be positive')

    @property
    def length(self) -> float:
        return float(np.linalg.norm(np.asarray(self.p1) - np.asarray(self.p0)))

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.p0) + np.asarray(self.p1))

    @property
    def direction(self) -> np.ndarray:
        return (np.asarray(self.p1) - np.asarray(self.p0)) / self.length


@dataclass(frozen=True, eq=False)
class BrickCandidate:
    brick_class: BrickClass
    center: np.ndarray
    direction: np.ndarray
    segment_id: int
    length: float
    frame: int = 0


@dataclass(frozen=True, eq=False)
class StackModel:
    """
    Модель штабеля: центр класса m находится в mu + k_m * v, разброс задан ковариацией
    в системе штабеля (ось x вдоль v), выбросы равномерно распределены с плотностью outlier_density.
    """
    offsets: Dict[BrickClass, float]
    covariances: Dict[BrickClass, np.ndarray]
    outlier_density: float
    outlier_prior: float = 0.3

    def __post_init__(self):
        if set(self.offsets) != set(self.covariances):
            raise ConfigurationError('Stack model needs one offset and one covariance per class')
        for brick_class, cov in self.covariances.items():
            cov = np.asarray(cov, dtype=float)
            if cov.shape != (2, 2) or not np.allclose(cov, cov.T) or np.any(np.linalg.eigvalsh(cov) <= 0):
                raise ConfigurationError(f'Covariance of {brick_class.value} is not symmetric positive definite')
        if self.outlier_density <= 0:
            raise ConfigurationError('Outlier density must be positive')
        if not 0.0 <= self.outlier_prior < 1.0:
            raise ConfigurationError('Outlier prior must be in [0, 1)')

    @staticmethod
    def isotropic(offsets: Dict[BrickClass, float], sigma: float, outlier_density: float,
                  outlier_prior: float = 0.3) -> 'StackModel':
        return StackModel(dict(offsets), {c: np.eye(2) * sigma ** 2 for c in offsets}, outlier_density,
                          outlier_prior)

    def world_covariance(self, brick_class: BrickClass, phi: float) -> np.ndarray:
        c, s = math.cos(phi), math.sin(phi)
        rotation = np.array([[c, -s], [s, c]])
        return rotation @ np.asarray(self.covariances[brick_class]) @ rotation.T


@dataclass(frozen=True, eq=False)
class StackEstimate:
    mu: np.ndarray
    phi: float
    log_likelihood: float = -math.inf
    responsibilities: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    history: Tuple[Tuple[int, float, float, float, float], ...] = ()
    outlier_weight: float = 0.0
    converged: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'mu', np.asarray(self.mu, dtype=float))
        object.__setattr__(self, 'phi', normalize_angle(self.phi))

    @property
    def direction(self) -> np.ndarray:
        return np.array([math.cos(self.phi), math.sin(self.phi)])

    @property
    def pose(self) -> Pose2D:
        return Pose2D(self.mu[0], self.mu[1], self.phi)


@dataclass(frozen=True, eq=False)
class HeightImage:
    """Высота над оценённым уровнем земли; недействительные пиксели - nan"""
    height: np.ndarray
    source: DepthImage
    camera_height: float

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.height)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height.shape


@dataclass(frozen=True, eq=False)
class DepthSegment:
    """
    Сегмент изображения высот. Пиксели заданы плоскими индексами row * width + col,
    центр - в координатах (u, v) = (столбец, строка).
    """
    segment_id: int
    pixels: np.ndarray
    shape: Tuple[int, int]
    center: Tuple[float, float]
    size: int
    eccentricity: float
    mean_distance: float
    mean_height: float
    fully_visible: bool
    corners: Optional[np.ndarray] = None

    def coords(self) -> np.ndarray:
        """Координаты (u, v) всех пикселей сегмента (N x 2)"""
        rows, cols = np.divmod(self.pixels, self.shape[1])
        return np.column_stack([cols, rows]).astype(float)


@dataclass(frozen=True, eq=False)
class ClassifiedBrick:
    brick_class: Optional[BrickClass]
    length: float
    width: float
    center: np.ndarray
    yaw: float
    pixel_center: Tuple[float, float]
    segment_id: int = -1
    fully_visible: bool = True
    corners: Optional[np.ndarray] = None

    @property
    def classified(self) -> bool:
        return self.brick_class is not None


class PixelLabel(IntEnum):
    BACKGROUND = 0
    OBJECT = 1
    UNKNOWN = 2


@dataclass(frozen=True, eq=False)
class GaussianComponent:
    """Компонента смеси в пространстве HSV (все каналы в [0, 1])"""
    mean: np.ndarray
    covariance: np.ndarray
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'mean', np.asarray(self.mean, dtype=float))
        object.__setattr__(self, 'covariance', np.asarray(self.covariance, dtype=float))
        cov = self.covariance
        if self.mean.shape != (3,) or cov.shape != (3, 3):
            raise ConfigurationError('Gaussian component must be 3-dimensional')
        if not np.allclose(cov, cov.T) or np.any(np.linalg.eigvalsh(cov) <= 0):
            raise ConfigurationError('Gaussian covariance is not symmetric positive definite')
        if self.weight <= 0:
            raise ConfigurationError('Component weight must be positive')

    def to_dict(self) -> dict:
        return {'mean': self.mean.tolist(), 'covariance': self.covariance.tolist(), 'weight': self.weight}

    @staticmethod
    def from_dict(data: dict) -> 'GaussianComponent':
        return GaussianComponent(data['mean'], data['covariance'], data.get('weight', 1.0))


@dataclass(frozen=True, eq=False)
class ColorLookupGrid:
    """Трёхмерная таблица меток, индексируемая квантованным RGB"""
    labels: np.ndarray
    threshold: float
    background_threshold: float
    components: Tuple[GaussianComponent, ...] = ()

    @property
    def resolution(self) -> int:
        return int(self.labels.shape[0])

    def cell_index(self, rgb) -> np.ndarray:
        rgb = np.asarray(rgb, dtype=np.int64)
        return (rgb * self.resolution) // 256

    def classify(self, rgb) -> np.ndarray:
        index = self.cell_index(rgb)
        return self.labels[index[..., 0], index[..., 1], index[..., 2]]


@dataclass(frozen=True, eq=False)
class PatternSegment:
    pixels: np.ndarray
    shape: Tuple[int, int]
    bounding_corners: np.ndarray
    cell_count: int
    label_counts: np.ndarray
    footprint: Tuple[float, float] = (0.0, 0.0)
    pose: Optional[Pose2D] = None

    @property
    def size(self) -> int:
        return int(self.pixels.shape[0])

    def mask(self) -> np.ndarray:
        result = np.zeros(self.shape[0] * self.shape[1], dtype=bool)
        result[self.pixels] = True
        return result.reshape(self.shape)


def class_lengths(specs: Dict[BrickClass, BrickSpec]) -> Dict[BrickClass, float]:
    return {c: s.length_m for c, s in specs.items()}


def check_separable(lengths: Dict[BrickClass, float], tolerance: float) -> None:
    """
    Проверяет, что классы различимы по длине: соседние длины отличаются больше чем на 2 * tolerance.

    :raises ConfigurationError: Если таблица классов неразделима.
    """
    values = sorted(lengths.items(), key=lambda item: item[1])
    for (first, a), (second, b) in zip(values, values[1:]):
        if b - a <= 2 * tolerance:
            raise ConfigurationError(
                f'Brick classes {first.value} and {second.value} are not separable with tolerance {tolerance}')
