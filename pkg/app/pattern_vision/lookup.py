"""
lookup.py

Описание:
    Трёхмерная таблица классификации цветов. При калибровке для центра каждой ячейки RGB
    вычисляется оценка смеси гауссовых компонент в пространстве HSV (оттенок циклический);
    при работе метка пикселя - одно обращение к массиву.
"""
import struct
from typing import Iterable, List, Sequence

import numpy as np
from matplotlib.colors import rgb_to_hsv
from scipy.stats import multivariate_normal

from app.Model.Perception import ColorLookupGrid, GaussianComponent, PixelLabel
from app.errors import ConfigurationError

MAGIC = b'BBLUT'
BLOB_VERSION = 1
_HEADER = struct.Struct('<5sBHdd')


def _component(mean, std, weight=1.0) -> GaussianComponent:
    return GaussianComponent(np.asarray(mean, dtype=float), np.diag(np.asarray(std, dtype=float) ** 2), weight)


def default_calibration(track_yellow: bool = False) -> List[GaussianComponent]:
    """Пурпурные клетки днём, на закате и ночью; при track_yellow - также жёлтые"""
    components = [
        _component((0.855, 1.0, 0.9), (0.035, 0.15, 0.25)),
        _component((0.91, 1.0, 0.8), (0.035, 0.15, 0.25)),
        _component((0.85, 1.0, 0.32), (0.04, 0.2, 0.12)),
    ]
    if track_yellow:
        components += [
            _component((0.16, 0.92, 0.9), (0.03, 0.15, 0.25)),
            _component((0.16, 0.92, 0.32), (0.035, 0.2, 0.12)),
        ]
    return components


def mixture_score(hsv: np.ndarray, components: Sequence[GaussianComponent]) -> np.ndarray:
    """
    Оценка принадлежности в [0, 1]: наибольшая из плотностей компонент, нормированных
    на значение в их центре и умноженных на относительный вес компоненты.
    """
    hsv = np.atleast_2d(hsv)
    top = max(c.weight for c in components)
    total = np.zeros(hsv.shape[0])
    for component in components:
        density = multivariate_normal(mean=component.mean, cov=component.covariance)
        peak = density.logpdf(component.mean)
        best = np.full(hsv.shape[0], -np.inf)
        for shift in (-1.0, 0.0, 1.0):
            shifted = hsv + np.array([shift, 0.0, 0.0])
            best = np.maximum(best, density.logpdf(shifted) - peak)
        total = np.maximum(total, component.weight / top * np.exp(best))
    return total


def cell_centers(resolution: int) -> np.ndarray:
    """Центры ячеек таблицы в RGB (resolution^3 x 3), порядок - по осям R, G, B"""
    values = (np.arange(resolution) + 0.5) * 256.0 / resolution
    r, g, b = np.meshgrid(values, values, values, indexing='ij')
    return np.column_stack([r.ravel(), g.ravel(), b.ravel()])


def build_lookup(components: Iterable[GaussianComponent], threshold: float = 0.3, resolution: int = 32,
                 background_threshold: float = 0.05) -> ColorLookupGrid:
    """
    :param components: Компоненты смеси в HSV.
    :param threshold: Порог метки «объект».
    :param resolution: Число ячеек на канал.
    :param background_threshold: Оценка ниже порога - фон, между порогами - неизвестно.
    :raises ConfigurationError: Если нет компонент или пороги некорректны.
    """
    components = tuple(components)
    if not components:
        raise ConfigurationError('Lookup grid needs at least one Gaussian component')
    if not 0 < background_threshold <= threshold:
        raise ConfigurationError('Thresholds must satisfy 0 < background <= object')
    if not 1 <= resolution <= 256:
        raise ConfigurationError('Grid resolution must be in [1, 256]')
    hsv = rgb_to_hsv(np.clip(cell_centers(resolution) / 255.0, 0.0, 1.0))
    score = mixture_score(hsv, components)
    labels = np.full(score.shape, PixelLabel.UNKNOWN, dtype=np.uint8)
    labels[score >= threshold] = PixelLabel.OBJECT
    labels[score < background_threshold] = PixelLabel.BACKGROUND
    return ColorLookupGrid(labels.reshape(resolution, resolution, resolution), threshold, background_threshold,
                           components)


def classify_pixel(grid: ColorLookupGrid, rgb) -> PixelLabel:
    return PixelLabel(int(grid.classify(np.asarray(rgb))))


def classify_image(grid: ColorLookupGrid, image: np.ndarray) -> np.ndarray:
    """Метки всех пикселей изображения H x W x 3 (uint8)"""
    return grid.classify(image)


def grid_to_bytes(grid: ColorLookupGrid) -> bytes:
    header = _HEADER.pack(MAGIC, BLOB_VERSION, grid.resolution, grid.threshold, grid.background_threshold)
    return header + np.ascontiguousarray(grid.labels, dtype=np.uint8).tobytes()


def grid_from_bytes(data: bytes) -> ColorLookupGrid:
    """
    :raises ValueError: Если данные не являются таблицей или версия не поддерживается.
    """
    if len(data) < _HEADER.size:
        raise ValueError('Lookup blob is truncated')
    magic, version, resolution, threshold, background = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError('Not a lookup grid blob')
    if version != BLOB_VERSION:
        raise ValueError(f'Unsupported lookup grid version {version}')
    cube = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size)
    if cube.shape[0] != resolution ** 3:
        raise ValueError('Lookup blob size does not match its resolution')
    return ColorLookupGrid(cube.reshape(resolution, resolution, resolution).copy(), threshold, background)
