"""
pattern.py

Описание:
    Разбиение L-образного шаблона на клетки шахматной раскраски.
"""
from dataclasses import dataclass
from typing import List

import numpy as np

from app.Model.Arena import PatternGeometry
from app.errors import ConfigurationError

YELLOW = 'yellow'
MAGENTA = 'magenta'


@dataclass(frozen=True, eq=False)
class PatternCell:
    leg: int
    i: int
    j: int
    corners: np.ndarray
    color: str


def _cells_per(length: float, square: float) -> int:
    ratio = length / square
    count = int(round(ratio))
    if count < 1 or abs(ratio - count) > 1e-9:
        raise ConfigurationError(f'Square size {square} does not divide {length}')
    return count


def pattern_cells(pattern: PatternGeometry) -> List[PatternCell]:
    """
    Клетки обеих полос шаблона в системе арены.

    :raises ConfigurationError: Если размер клетки не делит ширину или длину полосы.
    """
    s = pattern.square_size_m
    across = _cells_per(pattern.segment_width_m, s)
    along = _cells_per(pattern.segment_length_m, s)
    cells = []
    # первая полоса вдоль x, вторая вдоль y над первой
    legs = [(0, range(along), range(across)), (1, range(across), range(across, across + along))]
    for leg, columns, rows in legs:
        for i in columns:
            for j in rows:
                local = np.array([[i * s, j * s], [(i + 1) * s, j * s], [(i + 1) * s, (j + 1) * s], [i * s, (j + 1) * s]])
                color = YELLOW if (i + j) % 2 == 0 else MAGENTA
                cells.append(PatternCell(leg, i, j, pattern.corner_pose.to_world(local), color))
    return cells
