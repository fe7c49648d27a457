"""
pipeline.py

Описание:
    Обработка одного кадра глубины: высоты, сегменты, углы, классы. Отладочное изображение
    высот с отмеченными углами и целью.
"""
from dataclasses import dataclass, replace
from typing import Dict, List, Optional

import numpy as np
from loguru import logger

from app.Model.Brick import BrickClass, BrickSpec
from app.Model.Config import DepthConfig
from app.Model.Geometry import CameraPose
from app.Model.Perception import ClassifiedBrick, DepthSegment, HeightImage
from app.Model.Sensors import DepthImage
from app.depth_vision.classify import classify_from_corners
from app.depth_vision.corners import extract_corners
from app.depth_vision.height import depth_to_height
from app.depth_vision.segmentation import segment_height_image, top_surface
from app.errors import DegenerateSegmentError

MAX_DEBUG_HEIGHT = 1.0


@dataclass(frozen=True, eq=False)
class DepthFrameResult:
    height: HeightImage
    segments: List[DepthSegment]
    bricks: List[ClassifiedBrick]


def process_depth_frame(depth: DepthImage, specs: Dict[BrickClass, BrickSpec],
                        config: Optional[DepthConfig] = None,
                        camera_pose: Optional[CameraPose] = None) -> DepthFrameResult:
    """Кирпичи кадра; углы ищутся только у целиком видимых сегментов"""
    config = config or DepthConfig()
    height = depth_to_height(depth, camera_pose)
    segments = segment_height_image(height, config.min_height, config.step_threshold, config.min_segment_pixels)
    bricks, result_segments = [], []
    for segment in segments:
        if not segment.fully_visible:
            result_segments.append(segment)
            bricks.append(ClassifiedBrick(None, 0.0, 0.0, np.zeros(3), 0.0, segment.center, segment.segment_id,
                                          False))
            continue
        segment = top_surface(segment, height, 0.5 * config.step_threshold)
        try:
            corners = extract_corners(segment)
        except DegenerateSegmentError as e:
            logger.debug(str(e))
            result_segments.append(segment)
            continue
        result_segments.append(replace(segment, corners=corners))
        bricks.append(classify_from_corners(corners, depth, depth.intrinsics, specs, config.length_tolerance,
                                            config.width_tolerance, segment.segment_id))
    logger.debug(f'Depth frame: {len(segments)} segments, '
                 f'{sum(1 for b in bricks if b.classified)} classified bricks')
    return DepthFrameResult(height, result_segments, bricks)


def debug_height_image(height: HeightImage, segments: List[DepthSegment],
                       target: Optional[ClassifiedBrick] = None) -> np.ndarray:
    """Изображение высот 8 бит: углы сегментов - 255, углы цели - крест 255 на чёрном квадрате"""
    image = np.nan_to_num(np.clip(height.height / MAX_DEBUG_HEIGHT, 0.0, 1.0) * 200.0).astype(np.uint8)
    rows, cols = image.shape
    for segment in segments:
        if segment.corners is None:
            continue
        for u, v in np.round(segment.corners).astype(int):
            image[max(v - 1, 0):v + 2, max(u - 1, 0):u + 2] = 255
    if target is not None:
        u, v = (int(round(c)) for c in target.pixel_center)
        image[max(v - 3, 0):min(v + 4, rows), max(u - 3, 0):min(u + 4, cols)] = 0
        image[v, max(u - 3, 0):min(u + 4, cols)] = 255
        image[max(v - 3, 0):min(v + 4, rows), u] = 255
    return image
