"""
rgbd.py

Описание:
    Синтез кадров RGBD-камеры: глубина вдоль оптической оси и цвет. Цвет задаётся классом
    объекта, верхние грани кирпичей окрашены в белый (стальная пластина), клетки шаблона -
    жёлтым и пурпурным. Если пиксель на земле больше клетки шаблона, цвет клетки смешивается
    со средним цветом шаблона. Освещение меняет только цвет.
"""
from typing import Optional, Tuple

import numpy as np

from app.Model.Arena import Arena
from app.Model.Config import CameraConfig
from app.Model.Geometry import CameraPose
from app.Model.Sensors import DepthImage, IlluminationModel, Intrinsics, RgbImage
from app.errors import CameraPoseError
from app.sensor_sim.raycast import GROUND, MISS, cast_rays
from app.sensor_sim.rng import stream

GROUND_COLOR = (110, 100, 85)
SKY_COLOR = (150, 180, 220)
PLATE_COLOR = (235, 235, 235)


def default_intrinsics(config: Optional[CameraConfig] = None) -> Tuple[Intrinsics, Intrinsics]:
    """Параметры камер глубины и цвета по конфигурации"""
    config = config or CameraConfig()
    depth = Intrinsics.from_fov(config.depth_size[0], config.depth_size[1], *config.depth_fov_deg)
    rgb = Intrinsics.from_fov(config.rgb_size[0], config.rgb_size[1], *config.rgb_fov_deg)
    return depth, rgb


def _check_pose(camera_pose: CameraPose):
    if camera_pose is None:
        raise CameraPoseError('Camera pose is missing')
    if camera_pose.height <= 0:
        raise CameraPoseError(f'Camera is below ground (z = {camera_pose.height})')


def _cast(arena: Arena, camera_pose: CameraPose, intrinsics: Intrinsics):
    rays = intrinsics.pixel_rays().reshape(-1, 3)
    world = rays @ camera_pose.matrix.T
    boxes = arena.boxes()
    t, index = cast_rays(np.asarray(camera_pose.position, dtype=float), world, boxes)
    return world, t, index, boxes


def render_depth(arena: Arena, camera_pose: CameraPose, intrinsics: Intrinsics, seed: int = 0,
                 noise_sigma: float = 0.0, max_range: float = 50.0, frame: int = 0) -> DepthImage:
    _check_pose(camera_pose)
    _, t, _, _ = _cast(arena, camera_pose, intrinsics)
    # лучи имеют z = 1 в системе камеры, поэтому t равно глубине вдоль оптической оси
    depth = np.where(np.isfinite(t) & (t <= max_range), t, 0.0)
    if noise_sigma > 0:
        rng = stream(seed, 'depth', frame)
        noise = rng.normal(0.0, noise_sigma, size=depth.shape)
        depth = np.where(depth > 0, np.maximum(depth + noise, 1e-3), 0.0)
    return DepthImage(depth.reshape(intrinsics.shape), intrinsics, camera_pose)


def _pattern_colors(arena: Arena, points: np.ndarray, footprint: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Цвета земли с учётом шаблона; контраст падает, когда пиксель больше клетки"""
    pattern = arena.pattern
    index = pattern.color_index(points[:, :2])
    colors = np.asarray(pattern.colors, dtype=float)
    mean = colors.mean(axis=0)
    contrast = np.clip(2.0 - 2.0 * footprint / pattern.square_size_m, 0.0, 1.0)
    cell = colors[np.clip(index, 0, 1)]
    blended = mean + contrast[:, None] * (cell - mean)
    return index >= 0, blended


def render_rgb(arena: Arena, camera_pose: CameraPose, intrinsics: Intrinsics,
               illumination: Optional[IlluminationModel] = None, seed: int = 0,
               max_render_range: float = 20.0, frame: int = 0) -> RgbImage:
    _check_pose(camera_pose)
    illumination = illumination or IlluminationModel()
    world, t, index, boxes = _cast(arena, camera_pose, intrinsics)
    origin = np.asarray(camera_pose.position, dtype=float)
    colors = np.tile(np.asarray(SKY_COLOR, dtype=float), (t.shape[0], 1))

    hit = index != MISS
    points = origin + world * np.where(hit, t, 0.0)[:, None]

    ground = index == GROUND
    colors[ground] = GROUND_COLOR
    norm = np.linalg.norm(world, axis=1)
    slant = t * norm
    near = ground & (slant <= max_render_range)
    if np.any(near):
        grazing = np.abs(world[near, 2]) / norm[near]
        footprint = slant[near] * intrinsics.ifov / np.maximum(grazing, 1e-3)
        inside, blended = _pattern_colors(arena, points[near], footprint)
        rows = np.flatnonzero(near)
        colors[rows[inside]] = blended[inside]

    for k, box in enumerate(boxes):
        mask = index == k
        if not np.any(mask):
            continue
        colors[mask] = box.color
        if box.label.startswith('brick:'):
            top = mask & (points[:, 2] >= box.z_top - 1e-6)
            colors[top] = PLATE_COLOR

    rng = stream(seed, 'rgb', frame, illumination.mode.value)
    rgb = illumination.apply(colors.reshape(intrinsics.height, intrinsics.width, 3), rng)
    return RgbImage(rgb, intrinsics, camera_pose)


def simulate_rgbd(arena: Arena, camera_pose: CameraPose, intrinsics: Optional[Intrinsics] = None,
                  illumination: Optional[IlluminationModel] = None, seed: int = 0,
                  config: Optional[CameraConfig] = None, rgb_intrinsics: Optional[Intrinsics] = None,
                  frame: int = 0) -> Tuple[DepthImage, RgbImage]:
    """
    Пара кадров глубины и цвета из одной позы камеры.

    :raises CameraPoseError: Если поза отсутствует или камера ниже земли.
    """
    config = config or CameraConfig()
    default_depth, default_rgb = default_intrinsics(config)
    depth = render_depth(arena, camera_pose, intrinsics or default_depth, seed, config.depth_noise_sigma,
                         frame=frame)
    rgb = render_rgb(arena, camera_pose, rgb_intrinsics or default_rgb, illumination, seed,
                     config.max_render_range, frame)
    return depth, rgb
