"""
odometry.py

Описание:
    Идеализированная модель движения с ошибкой колёсной одометрии. Робот выполняет команду точно,
    а отчётное перемещение повёрнуто на угол смещения beta = drift_rate * payload_factor
    (боковая ошибка растёт с пройденным путём), к курсу добавляется смещение на метр пути.
    Коэффициент нагрузки лежит в [1, 2] и растёт с числом кирпичей в отсеке и выдвинутой рукой.
"""
import math
from dataclasses import replace
from typing import Optional

import numpy as np

from app.Model.Config import OdometryConfig
from app.Model.Geometry import Pose2D, rotation_2d
from app.Model.Sensors import OdometryState, Twist
from app.sensor_sim.rng import stream


def payload_factor(loaded: int, arm_extended: bool = False, capacity: int = 7, max_factor: float = 2.0) -> float:
    """Коэффициент смещения центра масс: 1 без груза, max_factor при полном отсеке и выдвинутой руке"""
    share = 0.8 * min(1.0, max(0, loaded) / capacity) + (0.2 if arm_extended else 0.0)
    return 1.0 + (max_factor - 1.0) * share


def motion_from_twist(twist: Twist, dt: float) -> Pose2D:
    """Перемещение в системе робота при постоянной команде скорости за время dt"""
    angle = twist.omega * dt
    if abs(twist.omega) < 1e-12:
        return Pose2D(twist.v * dt, 0.0, 0.0)
    radius = twist.v / twist.omega
    return Pose2D(radius * math.sin(angle), radius * (1.0 - math.cos(angle)), angle)


def apply_motion(state: OdometryState, motion: Pose2D, factor: float = 1.0,
                 config: Optional[OdometryConfig] = None, seed: int = 0) -> OdometryState:
    """
    Выполняет перемещение motion (в системе робота) и обновляет отчётную позу.
    """
    config = config or OdometryConfig()
    factor = min(max(factor, 1.0), config.max_payload_factor)
    true_pose = state.true_pose.compose(motion)
    ds = math.hypot(motion.x, motion.y)
    if ds == 0.0 and motion.heading == 0.0:
        return replace(state, true_pose=true_pose, step=state.step + 1)
    beta = config.drift_rate * factor
    dx, dy = rotation_2d(beta) @ np.array([motion.x, motion.y])
    dtheta = motion.heading + config.heading_rate_bias * factor * ds
    if config.noise_sigma > 0 and ds > 0:
        rng = stream(seed, 'odometry', state.step)
        dx, dy = np.array([dx, dy]) + rng.normal(0.0, config.noise_sigma * ds, size=2)
    reported = state.reported_pose.compose(Pose2D(dx, dy, dtheta))
    return OdometryState(true_pose, reported, state.distance + ds, state.step + 1)


def step_odometry(state: OdometryState, twist: Twist, dt: float, factor: float = 1.0,
                  config: Optional[OdometryConfig] = None, seed: int = 0) -> OdometryState:
    """
    Один шаг одометрии по команде скорости.

    :raises ValueError: Если dt <= 0.
    """
    if dt <= 0:
        raise ValueError('dt must be positive')
    return apply_motion(state, motion_from_twist(twist, dt), factor, config, seed)


def command_to(state: OdometryState, goal: Pose2D, factor: float = 1.0,
               config: Optional[OdometryConfig] = None) -> Pose2D:
    """
    Команда перемещения, после которой отчётная поза (без шума) совпадёт с goal.
    """
    config = config or OdometryConfig()
    factor = min(max(factor, 1.0), config.max_payload_factor)
    local = goal.relative_to(state.reported_pose)
    beta = config.drift_rate * factor
    mx, my = rotation_2d(-beta) @ np.array([local.x, local.y])
    ds = math.hypot(mx, my)
    return Pose2D(mx, my, local.heading - config.heading_rate_bias * factor * ds)
