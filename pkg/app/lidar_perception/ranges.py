"""
ranges.py

Описание:
    Оценки дальности обнаружения кирпича многолучевым LiDAR: сколько колец попадает в грань
    высоты a на расстоянии b и на каком расстоянии в грань попадают не менее двух колец.
"""
import math

from app.errors import RangeDomainError


def rays_hitting(a: float, b: float, alpha: float) -> float:
    """
    Число колец с шагом alpha, попадающих в грань высоты a на расстоянии b:
    arccos(1 - a^2 / (2 b^2)) / alpha.

    :raises RangeDomainError: Если аргумент arccos вне [-1, 1].
    """
    if alpha <= 0:
        raise ValueError('Ring pitch must be positive')
    if b <= 0:
        raise RangeDomainError('Distance must be positive')
    argument = 1.0 - a * a / (2.0 * b * b)
    if not -1.0 <= argument <= 1.0:
        raise RangeDomainError(f'arccos argument {argument} is outside [-1, 1]')
    return math.acos(argument) / alpha


def detection_range(a: float, alpha: float) -> float:
    """Максимальная дальность, на которой в грань высоты a попадают два кольца: (a / 4) / tan(alpha / 2)"""
    if a <= 0 or not 0 < alpha < math.pi:
        raise ValueError('Expected a > 0 and 0 < alpha < pi')
    return (a / 4.0) / math.tan(alpha / 2.0)
