"""
slicing.py

Описание:
    Разделение облака точек по высоте относительно датчика. Верхний срез предназначен для
    локализации, нижний (в полосе высот кирпичей) - для поиска штабеля.
"""
from dataclasses import replace
from typing import Tuple

import numpy as np

from app.Model.Sensors import LidarScan


def _subset(scan: LidarScan, mask: np.ndarray) -> LidarScan:
    return replace(scan, ring=scan.ring[mask], azimuth=scan.azimuth[mask], range=scan.range[mask],
                   points=scan.points[mask])


def slice_cloud(scan: LidarScan, z_threshold: float = 1.5) -> Tuple[LidarScan, LidarScan]:
    """
    :param z_threshold: Порог высоты над датчиком.
    :return: (верхний срез, нижний срез); точки выше порога попадают в верхний.
    """
    if np.isnan(z_threshold):
        raise ValueError('Slicing threshold must not be NaN')
    upper = scan.points[:, 2] - scan.mount_height > z_threshold
    return _subset(scan, upper), _subset(scan, ~upper)


def brick_band(scan: LidarScan, band: Tuple[float, float] = (0.05, 1.0)) -> LidarScan:
    """Точки с высотой над землёй внутри полосы band"""
    z = scan.points[:, 2]
    return _subset(scan, (z >= band[0]) & (z <= band[1]))
