from dataclasses import dataclass
from enum import Enum
from typing import Dict

from app.Model.Geometry import Box, Color, Pose2D

BRICK_HEIGHT = 0.20


class BrickClass(Enum):
    RED = 'red'
    GREEN = 'green'
    BLUE = 'blue'
    ORANGE = 'orange'

    @staticmethod
    def parse(value: str) -> 'BrickClass':
        try:
            return BrickClass(value.lower())
        except ValueError as e:
            raise ValueError(f'Unknown brick class: {value}') from e


# Порядок классов по длине кирпича
CLASS_ORDER = (BrickClass.RED, BrickClass.GREEN, BrickClass.BLUE, BrickClass.ORANGE)


@dataclass(frozen=True)
class BrickSpec:
    """Размеры и счётчики класса кирпича"""
    brick_class: BrickClass
    length_m: float
    width_m: float
    height_m: float
    per_wall_layer_count: int
    cargo_capacity: int
    color: Color

    def to_dict(self) -> dict:
        return {'length_m': self.length_m, 'width_m': self.width_m, 'height_m': self.height_m,
                'per_wall_layer_count': self.per_wall_layer_count, 'cargo_capacity': self.cargo_capacity,
                'color': list(self.color)}

    @staticmethod
    def from_dict(brick_class: BrickClass, data: dict) -> 'BrickSpec':
        return BrickSpec(brick_class=brick_class, length_m=data['length_m'], width_m=data['width_m'],
                         height_m=data.get('height_m', BRICK_HEIGHT),
                         per_wall_layer_count=data['per_wall_layer_count'],
                         cargo_capacity=data['cargo_capacity'], color=tuple(data['color']))


def default_brick_specs() -> Dict[BrickClass, BrickSpec]:
    """
    Размеры кирпичей по умолчанию. Известна только высота 0.2 м, длины выбраны так,
    чтобы классы различались по длине.
    """
    return {
        BrickClass.RED: BrickSpec(BrickClass.RED, 0.30, 0.20, BRICK_HEIGHT, 4, 4, (200, 30, 30)),
        BrickClass.GREEN: BrickSpec(BrickClass.GREEN, 0.60, 0.20, BRICK_HEIGHT, 2, 2, (30, 160, 60)),
        BrickClass.BLUE: BrickSpec(BrickClass.BLUE, 1.20, 0.20, BRICK_HEIGHT, 1, 1, (30, 60, 200)),
        BrickClass.ORANGE: BrickSpec(BrickClass.ORANGE, 1.80, 0.20, BRICK_HEIGHT, 2, 0, (240, 120, 20)),
    }


@dataclass(frozen=True)
class BrickInstance:
    """Кирпич в арене. Нижняя грань находится на высоте layer * height"""
    brick_id: int
    spec: BrickSpec
    pose: Pose2D
    layer: int
    has_ferrous_plate: bool = True

    def __post_init__(self):
        if self.layer < 0:
            raise ValueError('Layer must be non-negative')

    @property
    def brick_class(self) -> BrickClass:
        return self.spec.brick_class

    @property
    def z_bottom(self) -> float:
        return self.layer * self.spec.height_m

    @property
    def z_top(self) -> float:
        return self.z_bottom + self.spec.height_m

    @property
    def box(self) -> Box:
        return Box(pose=self.pose, length=self.spec.length_m, width=self.spec.width_m,
                   height=self.spec.height_m, z_bottom=self.z_bottom, color=self.spec.color,
                   label=f'brick:{self.brick_id}')

    def to_dict(self) -> dict:
        return {'brick_id': self.brick_id, 'class': self.brick_class.value, 'pose': self.pose.to_dict(),
                'layer': self.layer, 'has_ferrous_plate': self.has_ferrous_plate}
