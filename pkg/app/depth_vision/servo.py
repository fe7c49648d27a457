"""
servo.py

Описание:
    Выбор цели захвата и ошибки наведения. Из целиком видимых кирпичей нужного класса
    выбирается ближайший к правому нижнему углу изображения.
"""
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from app.Model.Brick import BrickClass
from app.Model.Config import DepthConfig
from app.Model.Geometry import CameraPose, Pose2D
from app.Model.Perception import ClassifiedBrick


def select_target(bricks: Sequence[ClassifiedBrick], requested: BrickClass,
                  image_size: Tuple[int, int] = (424, 240), excluded=(),
                  exclusion_radius: float = 0.1, positions=None) -> Optional[ClassifiedBrick]:
    """
    :param bricks: Классифицированные кирпичи кадра.
    :param requested: Нужный класс.
    :param image_size: (ширина, высота) изображения.
    :param excluded: Позиции кирпичей, помеченных недоступными.
    :param positions: Позиции кирпичей на плоскости для проверки excluded (в порядке bricks).
    """
    corner = np.array([image_size[0] - 1, image_size[1] - 1], dtype=float)
    best, best_key = None, None
    for k, brick in enumerate(bricks):
        if brick.brick_class != requested or not brick.fully_visible:
            continue
        if positions is not None and any(np.linalg.norm(np.asarray(positions[k])[:2] - np.asarray(p)[:2])
                                         <= exclusion_radius for p in excluded):
            continue
        key = (float(np.linalg.norm(np.asarray(brick.pixel_center) - corner)), brick.segment_id)
        if best_key is None or key < best_key:
            best, best_key = brick, key
    return best


def servo_error(target: ClassifiedBrick, gripper_xy=(0.0, 0.0), home_xy=None, base_tolerance: float = 0.08,
                gripper_tolerance: float = 0.02) -> Tuple[np.ndarray, np.ndarray, bool, bool]:
    """
    Ошибки в системе захвата (оси камеры, смотрящей вниз).

    :param gripper_xy: Текущее положение захвата.
    :param home_xy: Исходное положение захвата, относительно которого выравнивается база.
    :return: (ошибка базы, ошибка захвата, база выровнена, захват выровнен)
    """
    center = np.asarray(target.center, dtype=float)[:2]
    gripper = np.asarray(gripper_xy, dtype=float)
    home = gripper if home_xy is None else np.asarray(home_xy, dtype=float)
    base_error = center - home
    gripper_error = center - gripper
    return (base_error, gripper_error, bool(np.max(np.abs(base_error)) <= base_tolerance),
            bool(np.max(np.abs(gripper_error)) <= gripper_tolerance))


def world_position(brick: ClassifiedBrick, camera_pose: CameraPose) -> np.ndarray:
    """Центр кирпича в системе арены"""
    return camera_pose.matrix @ np.asarray(brick.center, dtype=float) + np.asarray(camera_pose.position)


def in_reach(robot: Pose2D, point, config: Optional[DepthConfig] = None) -> bool:
    """Точка в зоне досягаемости манипулятора: сектор кольца справа от робота"""
    config = config or DepthConfig()
    local = robot.to_local(np.asarray(point, dtype=float)[:2].reshape(1, 2))[0]
    radius = float(np.linalg.norm(local))
    angle = math.degrees(math.atan2(local[1], local[0]))
    return config.reach_min <= radius <= config.reach_max and abs(angle + 90.0) <= config.reach_half_angle_deg
