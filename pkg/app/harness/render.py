"""
render.py

Описание:
    Кадры сверху по артефактам прогона: арена (штабель, шаблон, препятствия), точки обзора
    с кругами восприятия, кандидаты LiDAR, итерации EM, уложенные кирпичи и поза робота.
    Кадр k соответствует k-й записи журнала событий. Рисование через Pillow, без сглаживания,
    поэтому повторная отрисовка даёт те же байты.
"""
import os.path
from typing import List, Optional, Sequence

import numpy as np
from PIL import Image, ImageDraw

from app.Model.Brick import BrickClass
from app.Model.Geometry import Pose2D
from app.Reader.Reader import Reader
from app.Reader.Writer import Writer
from app.arena_model.pattern import MAGENTA, pattern_cells
from app.errors import ArtifactError
from app.mission_control.exploration import coverage_waypoints

SCALE = 10.0
BORDER = 10
BACKGROUND = (110, 120, 100)
WAYPOINT_COLOR = (255, 255, 255)
CIRCLE_COLOR = (200, 200, 200)
EM_COLOR = (255, 60, 60)
ROBOT_COLOR = (20, 20, 20)


class TopDownCanvas:
    """Холст в масштабе SCALE пикселей на метр; ось y арены направлена вверх"""

    def __init__(self, bounds, scale: float = SCALE):
        self.bounds = bounds
        self.scale = scale
        self.size = (int(round(bounds[0] * scale)) + 2 * BORDER, int(round(bounds[1] * scale)) + 2 * BORDER)
        self.image = Image.new('RGB', self.size, BACKGROUND)
        self.draw = ImageDraw.Draw(self.image)

    def pixel(self, points) -> List[tuple]:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        u = np.round(BORDER + points[:, 0] * self.scale).astype(int)
        v = np.round(self.size[1] - BORDER - points[:, 1] * self.scale).astype(int)
        return [(int(a), int(b)) for a, b in zip(u, v)]

    def polygon(self, corners, fill=None, outline=None):
        self.draw.polygon(self.pixel(corners), fill=fill, outline=outline)

    def circle(self, center, radius: float, outline, fill=None):
        (u, v), = self.pixel(center)
        r = int(round(radius * self.scale))
        self.draw.ellipse([u - r, v - r, u + r, v + r], outline=outline, fill=fill)

    def robot(self, pose: Pose2D):
        local = np.array([[0.6, 0.0], [-0.4, 0.35], [-0.4, -0.35]])
        self.polygon(pose.to_world(local), fill=ROBOT_COLOR, outline=WAYPOINT_COLOR)

    def array(self) -> np.ndarray:
        return np.asarray(self.image, dtype=np.uint8)


def render_frame(run: dict, frame: int, scale: float = SCALE) -> np.ndarray:
    """
    Кадр прогона.

    :param run: Артефакты прогона (Reader.read_run).
    :param frame: Номер записи журнала событий.
    :raises ArtifactError: Если такой записи нет.
    """
    events = run['events']
    if frame < 0 or frame >= len(events):
        raise ArtifactError(f'Frame {frame} is outside the event log (0..{len(events) - 1})')
    arena, config = run['arena'], run['config']
    event = events.iloc[frame]
    history = events.iloc[:frame + 1]
    canvas = TopDownCanvas(arena.bounds, scale)
    yellow, magenta = arena.pattern.colors

    for cell in pattern_cells(arena.pattern):
        canvas.polygon(cell.corners, fill=tuple(magenta if cell.color == MAGENTA else yellow))
    for box in arena.obstacles:
        canvas.polygon(box.corners(), fill=tuple(box.color))
    for brick in arena.ugv_stack:
        canvas.polygon(brick.box.corners(), fill=brick.spec.color, outline=ROBOT_COLOR)

    radius = config.mission.pattern_scan_radius
    for waypoint in coverage_waypoints(arena.bounds, radius):
        canvas.circle(waypoint.position, radius, CIRCLE_COLOR)
        canvas.circle(waypoint.position, 0.3, WAYPOINT_COLOR, WAYPOINT_COLOR)

    candidates = run.get('candidates')
    scans = int((history['event'] == 'lidar_scan').sum())
    if candidates is not None and scans > 0:
        specs = config.scenario.brick_specs()
        seen = candidates[candidates['frame'] < scans]
        for x, y, name in zip(seen['x'], seen['y'], seen['class']):
            canvas.circle((x, y), 0.15, specs[BrickClass.parse(name)].color)

    em = run.get('em')
    if em is not None and len(em) and (history['event'] == 'stack_estimate').any():
        points = em[['mu_x', 'mu_y']].to_numpy()
        canvas.draw.line(canvas.pixel(points), fill=EM_COLOR, width=2)
        canvas.circle(points[-1], 0.4, EM_COLOR)

    for placed in run['report'].get('placed', []):
        if placed['clock'] <= event['clock']:
            pose = Pose2D.from_dict(placed['pose'])
            spec = arena.specs()[BrickClass.parse(placed['class'])]
            local = 0.5 * np.array([[spec.length_m, spec.width_m], [-spec.length_m, spec.width_m],
                                    [-spec.length_m, -spec.width_m], [spec.length_m, -spec.width_m]])
            canvas.polygon(pose.to_world(local), fill=spec.color, outline=ROBOT_COLOR)

    canvas.robot(Pose2D(float(event['x']), float(event['y']), float(event['heading'])))
    return canvas.array()


def parse_frames(text: Optional[str], count: int) -> Sequence[int]:
    """'3' - один кадр, '0:10' - полуинтервал, None - все кадры"""
    if not text:
        return range(count)
    if ':' in text:
        start, stop = text.split(':', 1)
        return range(int(start or 0), int(stop) if stop else count)
    return [int(text)]


def render_run(run_dir: str, frames: Optional[str] = None, scale: float = SCALE) -> List[str]:
    """
    Записывает кадры в run_dir/render/frame_NNNN.ppm.

    :return: Пути записанных файлов.
    :raises ArtifactError: Если артефакты или кадры отсутствуют.
    """
    run = Reader.read_run(run_dir)
    paths = []
    for frame in parse_frames(frames, len(run['events'])):
        path = os.path.join(run_dir, 'render', f'frame_{frame:04d}.ppm')
        Writer.write_ppm(path, render_frame(run, frame, scale))
        paths.append(path)
    return paths
