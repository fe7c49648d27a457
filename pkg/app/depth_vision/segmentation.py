"""
segmentation.py

Описание:
    Выделение сегментов на изображении высот. Пиксели выше min_height объединяются заливкой
    по 4-соседству, если разница высот соседей не больше step; статистика сегментов
    (центр, размер, эксцентриситет, расстояние, видимость целиком) считается за один проход.
"""
from typing import List

import numpy as np
import pandas as pd
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from app.Model.Perception import DepthSegment, HeightImage


def _edges(height: np.ndarray, mask: np.ndarray, step: float):
    rows, cols = height.shape
    index = np.arange(rows * cols).reshape(rows, cols)
    sources, targets = [], []
    for a, b, ha, hb, ma, mb in (
            (index[:, :-1], index[:, 1:], height[:, :-1], height[:, 1:], mask[:, :-1], mask[:, 1:]),
            (index[:-1, :], index[1:, :], height[:-1, :], height[1:, :], mask[:-1, :], mask[1:, :])):
        with np.errstate(invalid='ignore'):
            linked = ma & mb & (np.abs(ha - hb) <= step)
        sources.append(a[linked])
        targets.append(b[linked])
    return np.concatenate(sources), np.concatenate(targets)


def label_segments(height: np.ndarray, min_height: float = 0.1, step: float = 0.06) -> np.ndarray:
    """
    Метки сегментов (-1 - фон). Сегменты пронумерованы по возрастанию наименьшего
    плоского индекса пикселя.
    """
    with np.errstate(invalid='ignore'):
        mask = np.isfinite(height) & (height >= min_height)
    size = height.size
    sources, targets = _edges(height, mask, step)
    graph = coo_matrix((np.ones(sources.shape[0], dtype=np.int8), (sources, targets)), shape=(size, size))
    _, components = connected_components(graph, directed=False)
    flat_mask = mask.ravel()
    labels = np.full(size, -1, dtype=np.int64)
    if not np.any(flat_mask):
        return labels.reshape(height.shape)
    foreground = components[flat_mask]
    _, first = np.unique(foreground, return_index=True)
    order = np.argsort(np.flatnonzero(flat_mask)[first], kind='stable')
    remap = np.empty(components.max() + 1, dtype=np.int64)
    remap[np.unique(foreground)[order]] = np.arange(order.shape[0])
    labels[flat_mask] = remap[foreground]
    return labels.reshape(height.shape)


def segment_height_image(image: HeightImage, min_height: float = 0.1, step: float = 0.06,
                         min_pixels: int = 1) -> List[DepthSegment]:
    """
    :param image: Изображение высот.
    :param min_height: Данные ниже этой высоты отбрасываются.
    :param step: Наибольшая разница высот соседних пикселей одного сегмента.
    :param min_pixels: Сегменты меньшего размера отбрасываются.
    """
    labels = label_segments(image.height, min_height, step)
    flat = labels.ravel()
    count = int(flat.max()) + 1 if flat.size else 0
    if count <= 0:
        return []
    rows, cols = image.shape
    foreground = np.flatnonzero(flat >= 0)
    label = flat[foreground]
    v, u = np.divmod(foreground, cols)
    u, v = u.astype(float), v.astype(float)

    size = np.bincount(label, minlength=count).astype(float)
    mean_u = np.bincount(label, u, count) / size
    mean_v = np.bincount(label, v, count) / size
    du, dv = u - mean_u[label], v - mean_v[label]
    suu = np.bincount(label, du * du, count) / size
    svv = np.bincount(label, dv * dv, count) / size
    suv = np.bincount(label, du * dv, count) / size
    depth = image.source.depth.ravel()[foreground]
    mean_depth = np.bincount(label, depth, count) / size
    mean_height = np.bincount(label, image.height.ravel()[foreground], count) / size
    border = (u == 0) | (v == 0) | (u == cols - 1) | (v == rows - 1)
    on_border = np.bincount(label, border.astype(float), count)

    order = np.argsort(label, kind='stable')
    split = np.cumsum(size.astype(np.int64))[:-1]
    pixel_groups = np.split(foreground[order], split)

    segments = []
    for k in range(count):
        if size[k] < min_pixels:
            continue
        trace, det = suu[k] + svv[k], suu[k] * svv[k] - suv[k] ** 2
        root = np.sqrt(max(trace * trace / 4 - det, 0.0))
        major, minor = trace / 2 + root, trace / 2 - root
        eccentricity = float(np.sqrt(major / minor)) if minor > 1e-12 else float('inf')
        segments.append(DepthSegment(
            segment_id=k, pixels=pixel_groups[k], shape=(rows, cols), center=(float(mean_u[k]), float(mean_v[k])),
            size=int(size[k]), eccentricity=eccentricity, mean_distance=float(mean_depth[k]),
            mean_height=float(mean_height[k]), fully_visible=bool(on_border[k] == 0)))
    return segments


def segment_table(segments: List[DepthSegment], frame: int = 0) -> pd.DataFrame:
    """Статистика сегментов одного кадра"""
    return pd.DataFrame([{
        'frame': frame, 'segment': s.segment_id, 'u': s.center[0], 'v': s.center[1], 'size': s.size,
        'eccentricity': s.eccentricity, 'distance': s.mean_distance, 'height': s.mean_height,
        'fully_visible': s.fully_visible,
    } for s in segments], columns=['frame', 'segment', 'u', 'v', 'size', 'eccentricity', 'distance', 'height',
                                   'fully_visible'])


def top_surface(segment: DepthSegment, image: HeightImage, tolerance: float = 0.03,
                percentile: float = 90.0) -> DepthSegment:
    """
    Верхняя грань сегмента: пиксели не ниже уровня грани минус tolerance. Боковые грани кирпича,
    видимые под углом, меняют высоту плавно и попадают в сегмент при заливке.
    """
    heights = image.height.ravel()[segment.pixels]
    level = float(np.percentile(heights, percentile))
    keep = heights >= level - tolerance
    if np.all(keep):
        return segment
    pixels = segment.pixels[keep]
    v, u = np.divmod(pixels, segment.shape[1])
    return DepthSegment(segment_id=segment.segment_id, pixels=pixels, shape=segment.shape,
                        center=(float(u.mean()), float(v.mean())), size=int(pixels.shape[0]),
                        eccentricity=segment.eccentricity, mean_distance=segment.mean_distance,
                        mean_height=float(heights[keep].mean()), fully_visible=segment.fully_visible)
