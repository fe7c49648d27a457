"""
lidar.py

Описание:
    Синтез скана 16-лучевого LiDAR. Кольцо r имеет угол места -15° + r * 1.875°,
    азимуты покрывают полный круг с заданным шагом. Шум дальности гауссов,
    пропуски отражений задаются отдельной вероятностью.
"""
import math
from typing import Optional

import numpy as np
from loguru import logger

from app.Model.Arena import Arena
from app.Model.Config import LidarConfig
from app.Model.Geometry import Pose2D
from app.Model.Sensors import LidarScan
from app.errors import ConfigurationError
from app.sensor_sim.raycast import cast_rays
from app.sensor_sim.rng import stream


def ring_elevations(config: LidarConfig) -> np.ndarray:
    """Углы места колец в радианах: -fov/2 + r * fov/rings"""
    pitch = config.vertical_fov_deg / config.rings
    return np.radians(-0.5 * config.vertical_fov_deg + np.arange(config.rings) * pitch)


def azimuth_count(step_deg: float) -> int:
    """
    Число лучей в кольце.

    :raises ConfigurationError: Если шаг не делит полный круг.
    """
    if step_deg <= 0:
        raise ConfigurationError('Azimuth step must be positive')
    count = int(round(360.0 / step_deg))
    if abs(count * step_deg - 360.0) > 1e-9:
        raise ConfigurationError(f'Azimuth step {step_deg} deg does not divide the full circle')
    return count


def simulate_lidar(arena: Arena, sensor_pose: Pose2D, config: Optional[LidarConfig] = None, seed: int = 0,
                   timestamp: float = 0.0, frame: int = 0) -> LidarScan:
    """
    Скан из позы sensor_pose.

    :param arena: Сцена.
    :param sensor_pose: Истинная поза датчика на плоскости.
    :param config: Параметры датчика (высота установки, шаг по азимуту, шум).
    :param seed: Зерно шума.
    :param frame: Номер кадра, входит в ключ потока шума.
    """
    config = config or LidarConfig()
    if config.mount_height <= 0:
        raise ConfigurationError('LiDAR mount height must be positive')
    count = azimuth_count(config.azimuth_step_deg)
    step = 2.0 * math.pi / count
    elevations = ring_elevations(config)

    ring = np.repeat(np.arange(config.rings), count)
    azimuth = np.tile(np.arange(count) * step, config.rings)
    elevation = elevations[ring]
    local = np.column_stack([np.cos(elevation) * np.cos(azimuth), np.cos(elevation) * np.sin(azimuth),
                             np.sin(elevation)])
    c, s = math.cos(sensor_pose.heading), math.sin(sensor_pose.heading)
    world = np.column_stack([local[:, 0] * c - local[:, 1] * s, local[:, 0] * s + local[:, 1] * c, local[:, 2]])
    origin = np.array([sensor_pose.x, sensor_pose.y, config.mount_height])

    distance, _ = cast_rays(origin, world, arena.boxes())

    rng = stream(seed, 'lidar', frame)
    noise = rng.normal(0.0, config.noise_sigma, size=distance.shape) if config.noise_sigma > 0 else 0.0
    dropped = rng.random(distance.shape) < config.dropout if config.dropout > 0 else np.zeros(distance.shape, bool)
    measured = distance + noise
    keep = np.isfinite(distance) & (distance <= config.max_range) & ~dropped & (measured > 0)

    measured = measured[keep]
    points = local[keep] * measured[:, None]
    points[:, 2] += config.mount_height
    logger.debug(f'LiDAR frame {frame}: {int(keep.sum())} returns of {keep.size}')
    return LidarScan(ring=ring[keep], azimuth=azimuth[keep], range=measured, points=points,
                     sensor_pose=sensor_pose, mount_height=config.mount_height, timestamp=timestamp,
                     rings=config.rings, azimuth_step=step)
