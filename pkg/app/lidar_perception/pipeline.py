"""
pipeline.py

Описание:
    Поиск штабеля по сканам LiDAR: нижний срез и полоса высот кирпичей, перевод точек
    в систему одометрии, IEPF по каждому кольцу, классификация отрезков по длине,
    накопление кандидатов по кадрам и EM-оценка позы штабеля.
"""
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from loguru import logger

from app.Model.Brick import BrickClass, BrickSpec
from app.Model.Config import LidarPerceptionConfig, PileLayout
from app.Model.Geometry import Pose2D
from app.Model.Perception import BrickCandidate, StackEstimate, StackModel, class_lengths
from app.Model.Sensors import LidarScan
from app.arena_model.pile import stack_offsets
from app.lidar_perception.candidates import classify_candidates
from app.lidar_perception.em_fit import em_fit_stack
from app.lidar_perception.iepf import iepf_segments
from app.lidar_perception.slicing import brick_band, slice_cloud


def default_stack_model(specs: Dict[BrickClass, BrickSpec], config: LidarPerceptionConfig,
                        arena_area: float, layout: Optional[PileLayout] = None) -> StackModel:
    """Модель штабеля раскладки по умолчанию с изотропными ковариациями class_sigma^2"""
    density = config.outlier_density if config.outlier_density is not None else 1.0 / arena_area
    return StackModel.isotropic(stack_offsets(specs, layout), config.class_sigma, density, config.outlier_prior)


def scan_candidates(scan: LidarScan, pose: Pose2D, specs: Dict[BrickClass, BrickSpec],
                    config: LidarPerceptionConfig, frame: int = 0) -> List[BrickCandidate]:
    """
    Кандидаты одного скана в системе позы pose (как правило, позы по одометрии).
    Серии длиннее max_run_length (ограждение, стенки препятствий) и кандидаты дальше
    max_candidate_range, где шаг точек сравним с допуском длины, отбрасываются.

    :param scan: Скан в системе датчика.
    :param pose: Поза датчика, в систему которой переводятся точки.
    """
    _, lower = slice_cloud(scan, config.slice_threshold)
    band = brick_band(lower, config.band)
    lengths = class_lengths(specs)
    widths = {c: s.width_m for c, s in specs.items()}
    result = []
    for ring in np.unique(band.ring):
        local = band.ring_points(int(ring))
        points = pose.to_world(local[:, :2])
        segments = iepf_segments(points, config.iepf_epsilon, config.min_points, config.jump_threshold,
                                 closed=True, ring=int(ring), frame=frame, merge_angle_deg=config.merge_angle_deg,
                                 end_extension=config.end_extension, max_run=config.max_run_length)
        found = classify_candidates(segments, lengths, config.class_tolerance, widths, pose.position)
        result += [c for c in found if np.linalg.norm(c.center - pose.position) <= config.max_candidate_range]
    return result


def check_consistency(estimate: StackEstimate, candidates: List[BrickCandidate],
                      offsets: Dict[BrickClass, float], config: LidarPerceptionConfig) -> Optional[str]:
    """
    Проверка оценки штабеля перед подъездом к нему.

    :param estimate: Оценка EM по кандидатам candidates.
    :return: Причина отказа или None, если оценка согласована с раскладкой.
    """
    weights = estimate.responsibilities
    if weights.shape[0] != len(candidates):
        return 'responsibilities do not match candidates'
    inliers = [c for c, w in zip(candidates, weights) if w > 0.5]
    if len(inliers) < config.min_candidates:
        return f'{len(inliers)} inliers'
    if len({c.frame for c in inliers}) < config.min_scans:
        return 'inliers from a single scan'
    classes = {c.brick_class for c in inliers}
    if len(classes) < 2:
        return 'inliers of a single class'
    x = np.array([c.center for c in inliers]) - estimate.mu
    along = x @ estimate.direction
    lateral = x @ np.array([-estimate.direction[1], estimate.direction[0]])
    if float(np.median(np.abs(lateral))) > config.max_lateral:
        return 'inliers off the major axis'
    expected = max(offsets[c] for c in classes) - min(offsets[c] for c in classes)
    if float(np.ptp(along)) < config.min_spread * expected:
        return 'inliers do not span the class groups'
    return None


class StackLocator:
    """Накопитель кандидатов по нескольким сканам и оценка позы штабеля"""

    def __init__(self, specs: Dict[BrickClass, BrickSpec], config: Optional[LidarPerceptionConfig] = None,
                 arena_area: float = 3000.0, layout: Optional[PileLayout] = None):
        self.specs = specs
        self.config = config or LidarPerceptionConfig()
        self.model = default_stack_model(specs, self.config, arena_area, layout)
        self.candidates: List[BrickCandidate] = []
        self.fitted: List[BrickCandidate] = []
        self.frames = 0

    def add_scan(self, scan: LidarScan, pose: Pose2D) -> List[BrickCandidate]:
        found = scan_candidates(scan, pose, self.specs, self.config, self.frames)
        self.frames += 1
        self.candidates += found
        logger.debug(f'LiDAR frame {self.frames - 1}: {len(found)} brick candidates')
        return found

    @property
    def ready(self) -> bool:
        """Достаточно ли кандидатов разных классов для оценки"""
        classes = {c.brick_class for c in self.candidates}
        return len(self.candidates) >= self.config.min_candidates and len(classes) >= 2

    def near(self, center, radius: Optional[float] = None) -> List[BrickCandidate]:
        radius = self.config.stack_radius if radius is None else radius
        center = np.asarray(center, dtype=float)
        return [c for c in self.candidates if np.linalg.norm(c.center - center) <= radius]

    def discard_near(self, center, radius: Optional[float] = None) -> int:
        """Удаляет кандидатов около отвергнутой оценки; возвращает их число"""
        rejected = {id(c) for c in self.near(center, radius)}
        self.candidates = [c for c in self.candidates if id(c) not in rejected]
        return len(rejected)

    def fit(self, init: Optional[StackEstimate] = None, sign_rule: bool = True) -> StackEstimate:
        """
        EM-оценка по всем накопленным кандидатам; при наличии init используются только кандидаты
        в радиусе stack_radius от её центра. Использованные кандидаты сохраняются в fitted.

        :raises DegenerateFitError: Если кандидаты не определяют ориентацию.
        """
        candidates = self.candidates
        if init is not None:
            candidates = self.near(init.mu, 2 * self.config.stack_radius) or candidates
        estimate = em_fit_stack(candidates, self.model, init, self.config.em_max_iter, self.config.em_tol, sign_rule)
        self.fitted = list(candidates)
        logger.info(f'Stack estimate from {len(candidates)} candidates: mu=({estimate.mu[0]:.2f}, '
                    f'{estimate.mu[1]:.2f}), phi={np.degrees(estimate.phi):.1f} deg')
        return estimate

    def verify(self, estimate: StackEstimate) -> Optional[str]:
        """Проверка последней оценки fit; см. check_consistency"""
        return check_consistency(estimate, self.fitted, self.model.offsets, self.config)


def candidate_table(candidates: List[BrickCandidate], estimate: Optional[StackEstimate] = None) -> pd.DataFrame:
    """Таблица кандидатов (frame, class, x, y, dir, responsibility)"""
    if estimate is not None and estimate.responsibilities.shape[0] == len(candidates):
        weights = estimate.responsibilities
    else:
        weights = np.full(len(candidates), np.nan)
    return pd.DataFrame({
        'frame': [c.frame for c in candidates],
        'class': [c.brick_class.value for c in candidates],
        'x': [float(c.center[0]) for c in candidates],
        'y': [float(c.center[1]) for c in candidates],
        'dir': [float(np.arctan2(c.direction[1], c.direction[0])) for c in candidates],
        'responsibility': weights,
    }, columns=['frame', 'class', 'x', 'y', 'dir', 'responsibility'])


def em_history_table(estimate: StackEstimate) -> pd.DataFrame:
    """Таблица итераций EM (iteration, mu_x, mu_y, phi, loglik)"""
    return pd.DataFrame(list(estimate.history), columns=['iteration', 'mu_x', 'mu_y', 'phi', 'loglik'])
