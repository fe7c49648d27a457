"""
Arena.py

Описание:
    Истинное состояние мира: границы арены, штабель кирпичей UGV, шахматный L-образный шаблон
    для строительства и препятствия (объекты задания UAV). Арена неизменяема, все изменения
    (снятие или укладка кирпича) создают новый объект.
"""
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from app.Model.Brick import BrickClass, BrickInstance, BrickSpec, default_brick_specs
from app.Model.Geometry import Box, Color, Pose2D

FORMAT_VERSION = 1

YELLOW: Color = (240, 230, 20)
MAGENTA: Color = (230, 0, 200)

# Толщина забора по периметру арены
WALL_THICKNESS = 0.2


@dataclass(frozen=True)
class PatternGeometry:
    """
    L-образный шаблон на земле.

    В локальной системе угла первая полоса занимает x ∈ [0, L], y ∈ [0, W],
    вторая x ∈ [0, W], y ∈ [W, W + L]. Клетки раскрашены по общей шахматной сетке:
    клетка (i, j) жёлтая при чётном i + j и пурпурная иначе.
    """
    corner_pose: Pose2D
    segment_length_m: float = 4.0
    segment_width_m: float = 0.4
    square_size_m: float = 0.2
    colors: Tuple[Color, Color] = (YELLOW, MAGENTA)

    @property
    def extent(self) -> Tuple[float, float]:
        """Размеры описанного прямоугольника L в локальной системе"""
        return self.segment_length_m, self.segment_width_m + self.segment_length_m

    @property
    def center(self) -> np.ndarray:
        ex, ey = self.extent
        return self.corner_pose.to_world([0.5 * ex, 0.5 * ey])[0]

    @property
    def radius(self) -> float:
        return 0.5 * math.hypot(*self.extent)

    def leg_rectangles(self) -> List[Box]:
        length, width = self.segment_length_m, self.segment_width_m
        first = self.corner_pose.compose(Pose2D(0.5 * length, 0.5 * width, 0.0))
        second = self.corner_pose.compose(Pose2D(0.5 * width, width + 0.5 * length, 0.5 * math.pi))
        return [Box(first, length, width, 1e-3, label='pattern:0'),
                Box(second, length, width, 1e-3, label='pattern:1')]

    def anchor_points(self) -> np.ndarray:
        """Центр описанного прямоугольника и центры обеих полос (3 x 2)"""
        legs = self.leg_rectangles()
        return np.vstack([self.center, legs[0].pose.position, legs[1].pose.position])

    def color_index(self, points) -> np.ndarray:
        """
        Цвет шаблона в точках земли: -1 вне шаблона, 0 жёлтый, 1 пурпурный.

        :param points: Точки арены (N x 2).
        """
        local = self.corner_pose.to_local(points)
        x, y = local[:, 0], local[:, 1]
        length, width = self.segment_length_m, self.segment_width_m
        first = (x >= 0) & (x <= length) & (y >= 0) & (y <= width)
        second = (x >= 0) & (x <= width) & (y > width) & (y <= width + length)
        i = np.floor(np.clip(x, 0, None) / self.square_size_m).astype(np.int64)
        j = np.floor(np.clip(y, 0, None) / self.square_size_m).astype(np.int64)
        result = ((i + j) % 2).astype(np.int64)
        result[~(first | second)] = -1
        return result

    def to_dict(self) -> dict:
        return {'corner_pose': self.corner_pose.to_dict(), 'segment_length_m': self.segment_length_m,
                'segment_width_m': self.segment_width_m, 'square_size_m': self.square_size_m,
                'colors': [list(c) for c in self.colors]}

    @staticmethod
    def from_dict(data: dict) -> 'PatternGeometry':
        return PatternGeometry(corner_pose=Pose2D.from_dict(data['corner_pose']),
                               segment_length_m=data.get('segment_length_m', 4.0),
                               segment_width_m=data.get('segment_width_m', 0.4),
                               square_size_m=data.get('square_size_m', 0.2),
                               colors=tuple(tuple(c) for c in data.get('colors', (YELLOW, MAGENTA))))


@dataclass(frozen=True)
class Arena:
    bounds: Tuple[float, float]
    ugv_stack: Tuple[BrickInstance, ...]
    pattern: PatternGeometry
    stack_pose: Pose2D
    obstacles: Tuple[Box, ...] = ()
    rng_seed: int = 0
    boundary_wall_height: float = 0.0
    placed: Tuple[BrickInstance, ...] = field(default=())

    @property
    def bricks(self) -> Tuple[BrickInstance, ...]:
        return self.ugv_stack + self.placed

    @property
    def area(self) -> float:
        return self.bounds[0] * self.bounds[1]

    def brick(self, brick_id: int) -> BrickInstance:
        for item in self.bricks:
            if item.brick_id == brick_id:
                return item
        raise KeyError(f'No brick with id {brick_id}')

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.bounds[0] and 0.0 <= y <= self.bounds[1]

    def without(self, brick_ids: Iterable[int]) -> 'Arena':
        """Арена после снятия кирпичей со штабеля"""
        removed = set(brick_ids)
        return replace(self, ugv_stack=tuple(b for b in self.ugv_stack if b.brick_id not in removed))

    def with_placed(self, brick: BrickInstance) -> 'Arena':
        return replace(self, placed=self.placed + (brick,))

    def wall_boxes(self) -> List[Box]:
        if self.boundary_wall_height <= 0:
            return []
        width, height = self.bounds
        half = 0.5 * WALL_THICKNESS
        walls = [(Pose2D(0.5 * width, -half), width + 2 * WALL_THICKNESS),
                 (Pose2D(0.5 * width, height + half), width + 2 * WALL_THICKNESS),
                 (Pose2D(-half, 0.5 * height, 0.5 * math.pi), height),
                 (Pose2D(width + half, 0.5 * height, 0.5 * math.pi), height)]
        return [Box(pose, length, WALL_THICKNESS, self.boundary_wall_height, color=(90, 90, 90), label='wall')
                for pose, length in walls]

    def boxes(self, include_walls: bool = True) -> List[Box]:
        """Все твёрдые тела арены для трассировки лучей"""
        result = [b.box for b in self.bricks] + list(self.obstacles)
        if include_walls:
            result += self.wall_boxes()
        return result

    def specs(self) -> Dict[BrickClass, BrickSpec]:
        table = default_brick_specs()
        for item in self.bricks:
            table[item.brick_class] = item.spec
        return table

    def to_dict(self) -> dict:
        return {
            'format_version': FORMAT_VERSION,
            'bounds': list(self.bounds),
            'rng_seed': self.rng_seed,
            'boundary_wall_height': self.boundary_wall_height,
            'stack_pose': self.stack_pose.to_dict(),
            'brick_specs': {c.value: s.to_dict() for c, s in self.specs().items()},
            'ugv_stack': [b.to_dict() for b in self.ugv_stack],
            'placed': [b.to_dict() for b in self.placed],
            'pattern': self.pattern.to_dict(),
            'obstacles': [o.to_dict() for o in self.obstacles],
        }

    @staticmethod
    def from_dict(data: dict) -> 'Arena':
        version = data.get('format_version')
        if version != FORMAT_VERSION:
            raise ValueError(f'Unsupported arena format version: {version}')
        specs = {BrickClass.parse(name): BrickSpec.from_dict(BrickClass.parse(name), value)
                 for name, value in data['brick_specs'].items()}

        def brick(item: dict) -> BrickInstance:
            return BrickInstance(brick_id=item['brick_id'], spec=specs[BrickClass.parse(item['class'])],
                                 pose=Pose2D.from_dict(item['pose']), layer=item['layer'],
                                 has_ferrous_plate=item.get('has_ferrous_plate', True))

        return Arena(bounds=tuple(data['bounds']),
                     ugv_stack=tuple(brick(b) for b in data['ugv_stack']),
                     pattern=PatternGeometry.from_dict(data['pattern']),
                     stack_pose=Pose2D.from_dict(data['stack_pose']),
                     obstacles=tuple(Box.from_dict(o) for o in data.get('obstacles', [])),
                     rng_seed=data.get('rng_seed', 0),
                     boundary_wall_height=data.get('boundary_wall_height', 0.0),
                     placed=tuple(brick(b) for b in data.get('placed', [])))


def empty_arena(bounds=(50.0, 60.0), pattern: Optional[PatternGeometry] = None,
                bricks: Tuple[BrickInstance, ...] = (), obstacles: Tuple[Box, ...] = (),
                boundary_wall_height: float = 0.0) -> Arena:
    """Арена с заданными объектами без случайного размещения (для тестов и отладочных сцен)"""
    if pattern is None:
        pattern = PatternGeometry(Pose2D(-100.0, -100.0, 0.0))
    return Arena(bounds=tuple(bounds), ugv_stack=tuple(bricks), pattern=pattern,
                 stack_pose=Pose2D(0.0, 0.0, 0.0), obstacles=tuple(obstacles),
                 boundary_wall_height=boundary_wall_height)
