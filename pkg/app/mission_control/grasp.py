"""
grasp.py

Описание:
    Цикл захвата кирпича. Камера над зоной досягаемости справа от робота снимает кадр глубины,
    выбирается цель нужного класса, база подъезжает, пока цель не окажется под захватом
    с допуском 8 см, затем захват наводится с допуском 2 см и опускается. Исход определяется
    геометрией: оба магнита над стальной пластиной - кирпич загружен; касание без пластины -
    промах по пластине; нет касания - захват опустился ниже ожидаемого.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from loguru import logger
from scipy.stats import truncnorm

from app.Model.Arena import Arena
from app.Model.Brick import BRICK_HEIGHT, BrickClass, BrickInstance
from app.Model.Config import SimulationConfig
from app.Model.Geometry import CameraPose, Pose2D
from app.Model.Mission import GraspOutcome, GraspResult
from app.Model.Perception import ClassifiedBrick
from app.Model.Sensors import DepthImage, GripperPose
from app.depth_vision.pipeline import DepthFrameResult, process_depth_frame
from app.depth_vision.servo import select_target, servo_error, world_position
from app.sensor_sim.hall import simulate_hall
from app.sensor_sim.rgbd import default_intrinsics, render_depth
from app.sensor_sim.rng import stream

PAD_SIZE = (0.2, 0.1)
TRUNCATION = 3.0


@dataclass
class GraspMemory:
    """
    Счётчики неудачных попыток по позициям целей, позиции недоступных кирпичей (система одометрии)
    и последний кадр глубины с результатом обработки (для отладочного вывода).
    """
    attempts: Dict[Tuple[int, int], int] = field(default_factory=dict)
    invalid_positions: List[Tuple[float, float]] = field(default_factory=list)
    last_frame: Optional[Tuple[DepthImage, DepthFrameResult, int]] = None

    @staticmethod
    def key(position) -> Tuple[int, int]:
        return int(round(position[0] * 10)), int(round(position[1] * 10))


def reach_center(robot: Pose2D, config: SimulationConfig) -> np.ndarray:
    radius = 0.5 * (config.depth.reach_min + config.depth.reach_max)
    return robot.to_world([0.0, -radius])[0]


def grasp_camera_pose(robot: Pose2D, brick_class: BrickClass, config: SimulationConfig,
                      lateral: float = 0.0) -> CameraPose:
    """
    Камера смотрит вниз над центром зоны досягаемости; ось x изображения направлена по курсу,
    низ изображения - вправо от робота. Высота выбирается так, чтобы кирпич целиком помещался в кадр.
    """
    specs = config.scenario.brick_specs()
    layers = config.scenario.pile.layers.get(brick_class.value, 1)
    top = layers * BRICK_HEIGHT
    half_fov = math.radians(config.camera.depth_fov_deg[0]) / 2
    clearance = max(config.camera.grasp_camera_clearance, (specs[brick_class].length_m + 0.3) / (2 * math.tan(half_fov)))
    center = reach_center(robot, config) - lateral * robot.left_normal
    return CameraPose.downward((center[0], center[1], top + clearance), robot.heading + math.pi / 2)


def _noise(rng: np.random.Generator, sigma: float, size: int = 2) -> np.ndarray:
    if sigma <= 0:
        return np.zeros(size)
    return truncnorm.rvs(-TRUNCATION, TRUNCATION, loc=0.0, scale=sigma, size=size, random_state=rng)


def _pad_points(pose: Pose2D) -> np.ndarray:
    xs = np.linspace(-0.5 * PAD_SIZE[0], 0.5 * PAD_SIZE[0], 5)
    ys = np.linspace(-0.5 * PAD_SIZE[1], 0.5 * PAD_SIZE[1], 3)
    gx, gy = np.meshgrid(xs, ys)
    return pose.to_world(np.column_stack([gx.ravel(), gy.ravel()]))


def contact_brick(arena: Arena, pose: Pose2D) -> Optional[BrickInstance]:
    """Самый высокий кирпич под площадкой захвата"""
    pad = _pad_points(pose)
    touching = [b for b in arena.bricks if np.any(b.box.contains_xy(pad))]
    return max(touching, key=lambda b: (b.z_top, -b.brick_id)) if touching else None


def _detect(arena: Arena, robot_true: Pose2D, robot_reported: Pose2D, requested: BrickClass,
            config: SimulationConfig, seed: int, frame: int, lateral: float, memory: GraspMemory):
    intrinsics, _ = default_intrinsics(config.camera)
    true_camera = grasp_camera_pose(robot_true, requested, config, lateral)
    depth = render_depth(arena, true_camera, intrinsics, seed, config.camera.depth_noise_sigma, frame=frame)
    result = process_depth_frame(depth, config.scenario.brick_specs(), config.depth)
    memory.last_frame = (depth, result, frame)
    believed_camera = grasp_camera_pose(robot_reported, requested, config, lateral)
    return result, believed_camera, true_camera


def _track(bricks: List[ClassifiedBrick], requested: BrickClass, camera: CameraPose,
           position: np.ndarray) -> Optional[ClassifiedBrick]:
    candidates = [b for b in bricks if b.brick_class == requested and b.fully_visible]
    if not candidates:
        return None
    distance = [np.linalg.norm(world_position(b, camera)[:2] - position) for b in candidates]
    return candidates[int(np.argmin(distance))]


def grasp_cycle(arena: Arena, robot_true: Pose2D, robot_reported: Pose2D, requested: BrickClass,
                config: SimulationConfig, memory: GraspMemory, seed: int = 0, tick: int = 0,
                injected_offset=(0.0, 0.0)) -> Tuple[GraspResult, Optional[BrickInstance], Pose2D]:
    """
    Одна попытка захвата.

    :param arena: Истинное состояние арены.
    :param robot_true: Истинная поза робота.
    :param robot_reported: Поза по одометрии.
    :param requested: Нужный класс.
    :param memory: Счётчики попыток и недоступные позиции (изменяются).
    :param injected_offset: Дополнительное смещение захвата в системе камеры (для проверок).
    :return: (результат, снятый кирпич или None, перемещение базы в системе робота)
    """
    mission = config.mission
    rng = stream(seed, 'grasp', tick)
    frame = tick * 100
    lateral = 0.0
    result, believed_camera, true_camera = _detect(arena, robot_true, robot_reported, requested, config, seed,
                                                   frame, lateral, memory)
    positions = [world_position(b, believed_camera) if b.classified else np.full(3, np.nan)
                 for b in result.bricks]
    target = select_target(result.bricks, requested, config.camera.depth_size,
                           memory.invalid_positions, 0.1, positions)
    if target is None:
        logger.debug(f'No {requested.value} target in view')
        return GraspResult(GraspOutcome.RETRY, 'no_target', brick_class=requested,
                           duration=mission.failed_grasp_time), None, Pose2D(0.0, 0.0, 0.0)

    duration = 0.0
    target_world = world_position(target, believed_camera)[:2]
    motion = Pose2D(0.0, 0.0, 0.0)
    for _ in range(mission.max_base_adjustments):
        base_error, _, aligned_base, _ = servo_error(target, (0.0, 0.0), None, config.depth.base_tolerance,
                                                     config.depth.gripper_tolerance)
        if aligned_base:
            break
        # x камеры - вдоль курса, y - вправо от робота; поперечную ошибку выбирает рука
        step = Pose2D(float(base_error[0]) + float(_noise(rng, mission.actuator_sigma, 1)[0]), 0.0, 0.0)
        lateral += float(base_error[1])
        motion = motion.compose(step)
        robot_true = robot_true.compose(step)
        robot_reported = robot_reported.compose(Pose2D(float(base_error[0]), 0.0, 0.0))
        duration += mission.base_adjust_time
        frame += 1
        result, believed_camera, true_camera = _detect(arena, robot_true, robot_reported, requested, config, seed,
                                                       frame, lateral, memory)
        tracked = _track(result.bricks, requested, believed_camera, target_world)
        if tracked is None:
            return GraspResult(GraspOutcome.RETRY, 'target_lost', brick_class=requested,
                               duration=duration + mission.failed_grasp_time), None, motion
        target = tracked

    gripper_believed = np.zeros(2)
    gripper_true = np.zeros(2)
    for _ in range(mission.max_servo_steps):
        _, gripper_error, _, aligned = servo_error(target, gripper_believed, np.zeros(2),
                                                   config.depth.base_tolerance, config.depth.gripper_tolerance)
        if aligned:
            break
        gripper_believed = gripper_believed + gripper_error
        gripper_true = gripper_true + gripper_error + _noise(rng, mission.actuator_sigma)
        duration += mission.servo_step_time
    gripper_true = gripper_true + _noise(rng, mission.descent_sigma) + np.asarray(injected_offset, dtype=float)

    camera_origin = np.asarray(true_camera.position, dtype=float)
    axes = true_camera.matrix
    world_xy = camera_origin[:2] + axes[:2, 0] * gripper_true[0] + axes[:2, 1] * gripper_true[1]
    axis = axes[:2, 0] * math.cos(target.yaw) + axes[:2, 1] * math.sin(target.yaw)
    yaw = math.atan2(axis[1], axis[0])
    pad_pose = Pose2D(float(world_xy[0]), float(world_xy[1]), yaw)
    error = float(np.linalg.norm(gripper_true - np.asarray(target.center)[:2]))

    contact = contact_brick(arena, pad_pose)
    picked, hall = None, (False, False)
    if contact is None:
        outcome_reason = 'miss'
    else:
        error = float(np.linalg.norm(pad_pose.position - contact.pose.position))
        hall = simulate_hall(GripperPose(pad_pose, contact.z_top), arena, config.hall)
        if not all(hall):
            outcome_reason = 'plate_miss'
        elif contact.brick_class != requested:
            outcome_reason = 'wrong_class'
        elif rng.random() < mission.slip_probability:
            outcome_reason = 'slip'
        else:
            outcome_reason = 'loaded'
            picked = contact

    if picked is not None:
        memory.attempts.pop(GraspMemory.key(target_world), None)
        logger.info(f'Loaded {requested.value} brick {picked.brick_id} (alignment error {error:.3f} m)')
        return GraspResult(GraspOutcome.LOADED, outcome_reason, picked.brick_id, requested, error, hall,
                           duration + mission.load_time, (float(target_world[0]), float(target_world[1]))), \
            picked, motion

    key = GraspMemory.key(target_world)
    memory.attempts[key] = memory.attempts.get(key, 0) + 1
    duration += mission.failed_grasp_time
    if memory.attempts[key] >= mission.max_grasp_attempts:
        memory.invalid_positions.append((float(target_world[0]), float(target_world[1])))
        outcome = GraspOutcome.MARKED_INVALID
        logger.warning(f'{requested.value} brick at ({target_world[0]:.2f}, {target_world[1]:.2f}) marked invalid')
    else:
        outcome = GraspOutcome.RETRY
        logger.info(f'Grasp failed ({outcome_reason}), retrying')
    return GraspResult(outcome, outcome_reason, contact.brick_id if contact else None, requested, error, hall,
                       duration, (float(target_world[0]), float(target_world[1]))), None, motion
