"""
Sensors.py

Описание:
    Кадры синтетических датчиков: скан LiDAR, изображения глубины и цвета, модель освещения,
    внутренние параметры камеры и поза захвата.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np

from app.Model.Geometry import CameraPose, Pose2D
from app.errors import ConfigurationError

MAX_DEPTH_SIZE = (1280, 720)
MAX_RGB_SIZE = (1920, 1080)


@dataclass(frozen=True, eq=False)
class LidarScan:
    """
    Скан многолучевого LiDAR. Точки хранятся в системе датчика: x вперёд, y влево,
    z - высота над землёй. Точки упорядочены по кольцу, затем по азимуту.
    """
    ring: np.ndarray
    azimuth: np.ndarray
    range: np.ndarray
    points: np.ndarray
    sensor_pose: Pose2D
    mount_height: float
    timestamp: float = 0.0
    rings: int = 16
    azimuth_step: float = math.radians(0.5)

    def __len__(self) -> int:
        return int(self.range.shape[0])

    def world_points(self, pose: Pose2D = None) -> np.ndarray:
        """Точки в системе арены (или одометрии, если передана поза из одометрии)"""
        pose = pose or self.sensor_pose
        if len(self) == 0:
            return np.zeros((0, 3))
        xy = pose.to_world(self.points[:, :2])
        return np.column_stack([xy, self.points[:, 2]])

    def ring_points(self, ring: int) -> np.ndarray:
        """Точки одного кольца в плоскости датчика, упорядоченные по азимуту"""
        mask = self.ring == ring
        order = np.argsort(self.azimuth[mask], kind='stable')
        return self.points[mask][order]


@dataclass(frozen=True)
class Intrinsics:
    """Параметры камеры-обскуры в пикселях"""
    width: int
    height: int
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0 or self.fx <= 0 or self.fy <= 0:
            raise ConfigurationError('Invalid camera intrinsics')

    @staticmethod
    def from_fov(width: int, height: int, hfov_deg: float, vfov_deg: float) -> 'Intrinsics':
        fx = 0.5 * width / math.tan(math.radians(hfov_deg) / 2)
        fy = 0.5 * height / math.tan(math.radians(vfov_deg) / 2)
        return Intrinsics(width, height, fx, fy, 0.5 * (width - 1), 0.5 * (height - 1))

    @property
    def ifov(self) -> float:
        """Угловой размер пикселя в радианах"""
        return 1.0 / self.fx

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    def pixel_rays(self) -> np.ndarray:
        """Лучи всех пикселей в системе камеры с z = 1 (H x W x 3)"""
        v, u = np.mgrid[0:self.height, 0:self.width].astype(float)
        return np.dstack([(u - self.cx) / self.fx, (v - self.cy) / self.fy, np.ones_like(u)])

    def back_project(self, u, v, depth) -> np.ndarray:
        """Пиксели и глубины вдоль оптической оси в точки системы камеры (N x 3)"""
        u, v, depth = (np.asarray(a, dtype=float) for a in (u, v, depth))
        return np.column_stack([(u - self.cx) / self.fx * depth, (v - self.cy) / self.fy * depth, depth])

    def project(self, points) -> np.ndarray:
        """Точки системы камеры в пиксели (N x 2); точки за камерой дают nan"""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        z = np.where(points[:, 2] > 1e-9, points[:, 2], np.nan)
        return np.column_stack([points[:, 0] / z * self.fx + self.cx, points[:, 1] / z * self.fy + self.cy])

    def to_dict(self) -> dict:
        return {'width': self.width, 'height': self.height, 'fx': self.fx, 'fy': self.fy,
                'cx': self.cx, 'cy': self.cy}


@dataclass(frozen=True, eq=False)
class DepthImage:
    """Изображение глубины в метрах вдоль оптической оси, 0 - нет отражения"""
    depth: np.ndarray
    intrinsics: Intrinsics
    camera_pose: CameraPose

    def __post_init__(self):
        if self.width > MAX_DEPTH_SIZE[0] or self.height > MAX_DEPTH_SIZE[1]:
            raise ConfigurationError(f'Depth image larger than {MAX_DEPTH_SIZE}')
        if np.any(self.depth < 0):
            raise ValueError('Depth must be non-negative')

    @property
    def width(self) -> int:
        return int(self.depth.shape[1])

    @property
    def height(self) -> int:
        return int(self.depth.shape[0])


@dataclass(frozen=True, eq=False)
class RgbImage:
    rgb: np.ndarray
    intrinsics: Intrinsics
    camera_pose: CameraPose

    def __post_init__(self):
        if self.width > MAX_RGB_SIZE[0] or self.height > MAX_RGB_SIZE[1]:
            raise ConfigurationError(f'RGB image larger than {MAX_RGB_SIZE}')

    @property
    def width(self) -> int:
        return int(self.rgb.shape[1])

    @property
    def height(self) -> int:
        return int(self.rgb.shape[0])


class IlluminationMode(Enum):
    NIGHT = 'night'
    NOON = 'noon'
    SUNSET = 'sunset'


@dataclass(frozen=True)
class IlluminationModel:
    """Освещение влияет только на цвет: общий коэффициент, оттенок по каналам и шум"""
    mode: IlluminationMode = IlluminationMode.NOON
    gain: float = 1.0
    tint: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    noise_sigma: float = 2.0

    @staticmethod
    def preset(mode) -> 'IlluminationModel':
        mode = IlluminationMode(mode)
        presets = {
            IlluminationMode.NOON: IlluminationModel(mode, 1.0, (1.0, 1.0, 1.0), 2.0),
            IlluminationMode.NIGHT: IlluminationModel(mode, 0.35, (0.9, 0.95, 1.1), 5.0),
            IlluminationMode.SUNSET: IlluminationModel(mode, 0.8, (1.15, 0.9, 0.7), 3.0),
        }
        return presets[mode]

    def apply(self, rgb: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Освещённое изображение uint8 из «истинных» цветов сцены"""
        lit = rgb.astype(float) * self.gain * np.asarray(self.tint)
        if self.noise_sigma > 0:
            lit = lit + rng.normal(0.0, self.noise_sigma, size=lit.shape)
        return np.clip(np.rint(lit), 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class GripperPose:
    """Поза захвата: поза на плоскости (ось x вдоль линии магнитов) и высота нижней грани"""
    pose: Pose2D
    z: float

    def magnet_positions(self, pitch: float) -> np.ndarray:
        return self.pose.to_world([[0.5 * pitch, 0.0], [-0.5 * pitch, 0.0]])


@dataclass(frozen=True)
class Twist:
    """Команда скорости: линейная v (м/с) и угловая omega (рад/с)"""
    v: float = 0.0
    omega: float = 0.0


@dataclass(frozen=True)
class OdometryState:
    true_pose: Pose2D
    reported_pose: Pose2D
    distance: float = 0.0
    step: int = field(default=0)
