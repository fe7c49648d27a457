"""
hall.py

Описание:
    Датчик Холла захвата: два магнита на расстоянии 130 мм. Магнит срабатывает, если он находится
    над стальной пластиной кирпича не выше порога срабатывания и внутри её контура.
"""
from typing import Optional, Tuple

import numpy as np

from app.Model.Arena import Arena
from app.Model.Config import HallConfig
from app.Model.Sensors import GripperPose


def simulate_hall(gripper: GripperPose, arena: Arena, config: Optional[HallConfig] = None) -> Tuple[bool, bool]:
    """
    :param gripper: Поза захвата; z - высота нижней грани магнитов.
    :return: Срабатывание левого и правого магнита.
    """
    config = config or HallConfig()
    magnets = gripper.magnet_positions(config.magnet_pitch)
    triggered = np.zeros(2, dtype=bool)
    for brick in arena.bricks:
        if not brick.has_ferrous_plate:
            continue
        gap = gripper.z - brick.z_top
        if gap < -1e-9 or gap > config.trigger_distance:
            continue
        triggered |= brick.box.contains_xy(magnets)
    return bool(triggered[0]), bool(triggered[1])


def plate_under(gripper: GripperPose, arena: Arena, config: Optional[HallConfig] = None):
    """Кирпич, над пластиной которого находятся оба магнита, или None"""
    config = config or HallConfig()
    magnets = gripper.magnet_positions(config.magnet_pitch)
    for brick in arena.bricks:
        gap = gripper.z - brick.z_top
        if brick.has_ferrous_plate and -1e-9 <= gap <= config.trigger_distance and bool(
                np.all(brick.box.contains_xy(magnets))):
            return brick
    return None
