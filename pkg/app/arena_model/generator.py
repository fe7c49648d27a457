"""
generator.py

Описание:
    Процедурная генерация арены. Штабель UGV, шаблон и объекты задания UAV размещаются
    равномерно случайно внутри границ с отступом от края; между описанными окружностями объектов
    выдерживается минимальный зазор. Результат - чистая функция (seed, config).
"""
import math
from typing import List, Tuple

import numpy as np
from loguru import logger

from app.Model.Arena import Arena, PatternGeometry
from app.Model.Config import ScenarioConfig
from app.Model.Geometry import Box, Pose2D
from app.arena_model.pattern import pattern_cells
from app.arena_model.pile import default_stack_layout
from app.errors import PlacementError
from app.sensor_sim.rng import stream


def _pile_radius(config: ScenarioConfig) -> float:
    bricks = default_stack_layout(config.brick_specs(), config.pile)
    corners = np.vstack([b.box.corners() for b in bricks])
    return float(np.max(np.linalg.norm(corners, axis=1)))


def _sample_center(rng: np.random.Generator, radius: float, config: ScenarioConfig,
                   placed: List[Tuple[np.ndarray, float]], name: str) -> np.ndarray:
    width, height = config.bounds
    low = config.margin + radius
    high_x, high_y = width - low, height - low
    if high_x < low or high_y < low:
        raise PlacementError(f'{name} (radius {radius:.2f} m) does not fit into the arena with margin {config.margin} m')
    for _ in range(config.max_placement_attempts):
        center = np.array([rng.uniform(low, high_x), rng.uniform(low, high_y)])
        if all(np.linalg.norm(center - other) >= radius + other_radius + config.clearance
               for other, other_radius in placed):
            return center
    raise PlacementError(f'Could not place {name} with clearance {config.clearance} m '
                         f'after {config.max_placement_attempts} attempts')


def generate_arena(seed: int, config: ScenarioConfig = None) -> Arena:
    """
    Генерирует арену.

    :param seed: Зерно генерации.
    :param config: Параметры сценария.
    :raises PlacementError: Если объекты невозможно разместить с заданными зазорами.
    """
    config = config or ScenarioConfig()
    rng = stream(seed, 'arena')
    specs = config.brick_specs()

    template = PatternGeometry(Pose2D(0.0, 0.0), config.segment_length, config.segment_width, config.square_size)
    pattern_cells(template)

    placed: List[Tuple[np.ndarray, float]] = []
    for item in config.distractors:
        box = Box.from_dict(item)
        placed.append((box.pose.position, box.radius))

    stack_center = _sample_center(rng, _pile_radius(config), config, placed, 'brick stack')
    stack_pose = Pose2D(stack_center[0], stack_center[1], rng.uniform(-math.pi, math.pi))
    placed.append((stack_center, _pile_radius(config)))

    pattern_center = _sample_center(rng, template.radius, config, placed, 'pattern')
    pattern_heading = rng.uniform(-math.pi, math.pi)
    extent_x, extent_y = template.extent
    corner = Pose2D(pattern_center[0], pattern_center[1], pattern_heading).compose(
        Pose2D(-0.5 * extent_x, -0.5 * extent_y, 0.0))
    pattern = PatternGeometry(corner, config.segment_length, config.segment_width, config.square_size)
    placed.append((pattern_center, template.radius))

    obstacles = [Box.from_dict(item) for item in config.distractors]
    if config.include_uav_objects:
        for name, size, height, color in (('uav_pile', config.uav_pile_size, 0.2, (170, 120, 60)),
                                          ('platform', config.platform_size, config.platform_height, (120, 120, 120))):
            radius = 0.5 * math.hypot(*size)
            center = _sample_center(rng, radius, config, placed, name)
            pose = Pose2D(center[0], center[1], rng.uniform(-math.pi, math.pi))
            obstacles.append(Box(pose, size[0], size[1], height, color=color, label=name))
            placed.append((center, radius))

    bricks = default_stack_layout(specs, config.pile, stack_pose)
    arena = Arena(bounds=tuple(config.bounds), ugv_stack=tuple(bricks), pattern=pattern, stack_pose=stack_pose,
                  obstacles=tuple(obstacles), rng_seed=seed, boundary_wall_height=config.boundary_wall_height)
    logger.debug(f'Arena seed={seed}: stack at ({stack_pose.x:.2f}, {stack_pose.y:.2f}), '
                 f'pattern at ({pattern_center[0]:.2f}, {pattern_center[1]:.2f})')
    return arena
