"""
height.py

Описание:
    Перевод изображения глубины в высоты над землёй. Каждый пиксель с отражением
    проецируется обратно в систему камеры, переводится в систему арены по позе камеры
    (из положения манипулятора), высота - координата z точки.
"""
from typing import Optional

import numpy as np
from loguru import logger

from app.Model.Geometry import CameraPose
from app.Model.Perception import HeightImage
from app.Model.Sensors import DepthImage
from app.errors import CameraPoseError

GROUND_DECILE = 0.1


def ground_level(height: np.ndarray) -> float:
    """Уровень земли: медиана нижнего дециля действительных высот"""
    values = np.sort(height[np.isfinite(height)])
    if values.shape[0] == 0:
        return 0.0
    count = max(1, int(values.shape[0] * GROUND_DECILE))
    return float(np.median(values[:count]))


def depth_to_height(depth: DepthImage, camera_pose: Optional[CameraPose] = None,
                    robust_ground: bool = False) -> HeightImage:
    """
    :param depth: Изображение глубины.
    :param camera_pose: Поза камеры; по умолчанию берётся из кадра.
    :param robust_ground: Уточнить высоту камеры по нижнему децилю высот (при неточной позе).
    :raises CameraPoseError: Если поза камеры неизвестна.
    """
    pose = camera_pose or depth.camera_pose
    if pose is None:
        raise CameraPoseError('Camera pose is required to compute heights')
    rays = depth.intrinsics.pixel_rays()
    points = rays * depth.depth[..., None]
    # z мировой точки: высота камеры плюс проекция луча на вертикаль
    vertical = pose.matrix[2]
    height = pose.height + points @ vertical
    height = np.where(depth.depth > 0, height, np.nan)
    camera_height = pose.height
    if robust_ground:
        offset = ground_level(height)
        height = height - offset
        camera_height -= offset
        logger.debug(f'Ground level correction {offset:.4f} m')
    return HeightImage(height, depth, camera_height)
