import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy.spatial.transform import Rotation

Color = Tuple[int, int, int]


def normalize_angle(angle: float) -> float:
    """Приводит угол к интервалу (-pi, pi]"""
    if not math.isfinite(angle):
        raise ValueError('Angle must be finite')
    if -math.pi < angle <= math.pi:
        return float(angle)
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return float(wrapped - math.pi)


def rotation_2d(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class Pose2D:
    """
    Поза на плоскости арены: x, y в метрах, курс в радианах против часовой стрелки от +x.
    Начало координат в углу арены.
    """
    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError('Pose must be finite')
        object.__setattr__(self, 'x', float(self.x))
        object.__setattr__(self, 'y', float(self.y))
        object.__setattr__(self, 'heading', normalize_angle(self.heading))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @property
    def direction(self) -> np.ndarray:
        return np.array([math.cos(self.heading), math.sin(self.heading)])

    @property
    def left_normal(self) -> np.ndarray:
        return np.array([-math.sin(self.heading), math.cos(self.heading)])

    def to_world(self, points) -> np.ndarray:
        """Переводит точки (N x 2) из локальной системы позы в систему арены"""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return points @ rotation_2d(self.heading).T + self.position

    def to_local(self, points) -> np.ndarray:
        """Переводит точки (N x 2) из системы арены в локальную систему позы"""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return (points - self.position) @ rotation_2d(self.heading)

    def compose(self, other: 'Pose2D') -> 'Pose2D':
        """Поза other, заданная в системе self, в системе арены"""
        x, y = self.to_world([other.x, other.y])[0]
        return Pose2D(x, y, self.heading + other.heading)

    def relative_to(self, other: 'Pose2D') -> 'Pose2D':
        """Поза self в локальной системе other"""
        x, y = other.to_local([self.x, self.y])[0]
        return Pose2D(x, y, self.heading - other.heading)

    def transformed(self, rotation: float, translation=(0.0, 0.0)) -> 'Pose2D':
        """Жёсткое преобразование позы: поворот вокруг начала координат и сдвиг"""
        x, y = rotation_2d(rotation) @ self.position + np.asarray(translation, dtype=float)
        return Pose2D(x, y, self.heading + rotation)

    def distance_to(self, other: 'Pose2D') -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def to_dict(self) -> dict:
        return {'x': self.x, 'y': self.y, 'heading': self.heading}

    @staticmethod
    def from_dict(data: dict) -> 'Pose2D':
        return Pose2D(data['x'], data['y'], data.get('heading', 0.0))


@dataclass(frozen=True)
class Box:
    """
    Прямоугольный параллелепипед, ориентированный по курсу своей позы.

    length - размер вдоль курса, width - поперёк, z_bottom и height - по вертикали.
    """
    pose: Pose2D
    length: float
    width: float
    height: float
    z_bottom: float = 0.0
    color: Color = (128, 128, 128)
    label: str = 'obstacle'

    def __post_init__(self):
        if self.length <= 0 or self.width <= 0 or self.height <= 0:
            raise ValueError('Box dimensions must be positive')

    @property
    def z_top(self) -> float:
        return self.z_bottom + self.height

    @property
    def radius(self) -> float:
        """Радиус описанной окружности основания"""
        return 0.5 * math.hypot(self.length, self.width)

    def corners(self) -> np.ndarray:
        half_l, half_w = 0.5 * self.length, 0.5 * self.width
        local = np.array([[half_l, half_w], [-half_l, half_w], [-half_l, -half_w], [half_l, -half_w]])
        return self.pose.to_world(local)

    def contains_xy(self, points, margin: float = 0.0) -> np.ndarray:
        local = self.pose.to_local(points)
        return ((np.abs(local[:, 0]) <= 0.5 * self.length + margin) &
                (np.abs(local[:, 1]) <= 0.5 * self.width + margin))

    def to_dict(self) -> dict:
        return {'pose': self.pose.to_dict(), 'length': self.length, 'width': self.width,
                'height': self.height, 'z_bottom': self.z_bottom, 'color': list(self.color),
                'label': self.label}

    @staticmethod
    def from_dict(data: dict) -> 'Box':
        return Box(pose=Pose2D.from_dict(data['pose']), length=data['length'], width=data['width'],
                   height=data['height'], z_bottom=data.get('z_bottom', 0.0),
                   color=tuple(data.get('color', (128, 128, 128))), label=data.get('label', 'obstacle'))


@dataclass(frozen=True)
class CameraPose:
    """
    6-DOF поза камеры. Система камеры: x вправо, y вниз по изображению, z вдоль оптической оси.
    rotation хранит кватернион (x, y, z, w) поворота из системы камеры в систему арены.
    """
    position: Tuple[float, float, float]
    rotation: Tuple[float, float, float, float] = field(default=(0.0, 0.0, 0.0, 1.0))

    @property
    def matrix(self) -> np.ndarray:
        return Rotation.from_quat(self.rotation).as_matrix()

    @property
    def height(self) -> float:
        return float(self.position[2])

    @property
    def optical_axis(self) -> np.ndarray:
        return self.matrix[:, 2]

    @staticmethod
    def from_axes(position, x_axis, y_axis, z_axis) -> 'CameraPose':
        matrix = np.column_stack([x_axis, y_axis, z_axis]).astype(float)
        quat = Rotation.from_matrix(matrix).as_quat()
        return CameraPose(tuple(float(v) for v in position), tuple(float(q) for q in quat))

    @staticmethod
    def downward(position, yaw: float = 0.0) -> 'CameraPose':
        """Камера смотрит вертикально вниз; верх изображения направлен по курсу yaw"""
        c, s = math.cos(yaw), math.sin(yaw)
        y_axis = np.array([-c, -s, 0.0])
        z_axis = np.array([0.0, 0.0, -1.0])
        x_axis = np.cross(y_axis, z_axis)
        return CameraPose.from_axes(position, x_axis, y_axis, z_axis)

    @staticmethod
    def look_at(position, target) -> 'CameraPose':
        """Камера в position направлена на target, горизонт изображения параллелен земле"""
        position = np.asarray(position, dtype=float)
        forward = np.asarray(target, dtype=float) - position
        norm = np.linalg.norm(forward)
        if norm == 0:
            raise ValueError('Camera target coincides with camera position')
        forward = forward / norm
        right = np.cross(forward, [0.0, 0.0, 1.0])
        if np.linalg.norm(right) < 1e-9:
            return CameraPose.downward(position, 0.0)
        right = right / np.linalg.norm(right)
        down = np.cross(forward, right)
        return CameraPose.from_axes(position, right, down, forward)

    @staticmethod
    def looking(position, yaw: float, pitch_down: float) -> 'CameraPose':
        """Камера с курсом yaw, наклонённая вниз на pitch_down радиан"""
        direction = np.array([math.cos(yaw) * math.cos(pitch_down),
                              math.sin(yaw) * math.cos(pitch_down),
                              -math.sin(pitch_down)])
        return CameraPose.look_at(position, np.asarray(position, dtype=float) + direction)

    def to_dict(self) -> dict:
        return {'position': list(self.position), 'rotation': list(self.rotation)}

    @staticmethod
    def from_dict(data: dict) -> 'CameraPose':
        return CameraPose(tuple(data['position']), tuple(data['rotation']))
