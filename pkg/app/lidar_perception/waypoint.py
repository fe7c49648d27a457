import numpy as np

from app.Model.Brick import BrickClass
from app.Model.Geometry import Pose2D
from app.Model.Perception import StackEstimate


def class_waypoint(estimate: StackEstimate, offsets, brick_class: BrickClass, standoff: float = 0.7) -> Pose2D:
    """Поза напротив группы класса: на расстоянии standoff слева от оси штабеля, курс вдоль оси"""
    v = estimate.direction
    normal = np.array([-v[1], v[0]])
    target = estimate.mu + offsets[brick_class] * v + standoff * normal
    return Pose2D(float(target[0]), float(target[1]), estimate.phi)


def red_approach_waypoint(estimate: StackEstimate, offsets, standoff: float = 0.7) -> Pose2D:
    """
    Точка подъезда к красным кирпичам: кирпичи оказываются справа от робота.
    """
    return class_waypoint(estimate, offsets, BrickClass.RED, standoff)
