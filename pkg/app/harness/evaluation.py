"""
evaluation.py

Описание:
    Пакетные оценки по набору зёрен. Точность классификации кандидатов LiDAR считается как в
    таблице «цвет, верно, неверно, доля успеха»: кандидат верен, если рядом с его центром лежит
    кирпич того же класса. Прогоны раскидываются по процессам (multiprocessing.Pool), результаты
    сортируются по зерну, поэтому таблица не зависит от порядка выполнения.
"""
import math
import multiprocessing as mp
from dataclasses import replace
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.metrics import precision_score

from app.Model.Arena import Arena, empty_arena
from app.Model.Brick import BrickClass, BrickInstance
from app.Model.Config import ScenarioConfig, SimulationConfig
from app.Model.Geometry import Pose2D
from app.arena_model.generator import generate_arena
from app.lidar_perception.pipeline import scan_candidates
from app.mission_control.mission import run_mission
from app.sensor_sim.lidar import simulate_lidar
from app.sensor_sim.rng import stream

CLASS_ORDER = [BrickClass.RED, BrickClass.GREEN, BrickClass.BLUE, BrickClass.ORANGE]
TABLE_COLUMNS = ['Brick color', 'Correct', 'Incorrect', 'Success rate [%]']
NONE_LABEL = 'none'
MATCH_RADIUS = 0.3
VIEW_DISTANCE = (3.0, 6.0)
ISOLATED_DISTANCE = 2.7


def _scene(seed: int, scenario: ScenarioConfig, isolated: bool) -> Tuple[Arena, Pose2D, np.ndarray]:
    """Арена, поза датчика и центр области, где учитываются кандидаты"""
    rng = stream(seed, 'classification')
    if isolated:
        specs = scenario.brick_specs()
        brick_class = CLASS_ORDER[seed % len(CLASS_ORDER)]
        pose = Pose2D(10.0, 10.0, rng.uniform(-math.pi, math.pi))
        arena = empty_arena(scenario.bounds, bricks=(BrickInstance(0, specs[brick_class], pose, 0),))
        sensor = pose.position + ISOLATED_DISTANCE * pose.left_normal
        return arena, Pose2D(sensor[0], sensor[1], pose.heading - 0.5 * math.pi), pose.position
    arena = generate_arena(seed, scenario)
    angle = rng.uniform(-math.pi, math.pi)
    distance = rng.uniform(*VIEW_DISTANCE)
    sensor = arena.stack_pose.position + distance * np.array([math.cos(angle), math.sin(angle)])
    return arena, Pose2D(sensor[0], sensor[1], angle + math.pi), arena.stack_pose.position


def classification_trial(seed: int, sigma: float, config: Optional[SimulationConfig] = None,
                         isolated: bool = False) -> List[Tuple[int, float, str, str]]:
    """
    Один скан сцены и разметка его кандидатов.

    :param sigma: СКО шума дальности, м.
    :param isolated: Одиночный кирпич вместо штабеля.
    :return: Записи (seed, sigma, истинный класс или 'none', предсказанный класс).
    """
    config = config or SimulationConfig()
    arena, sensor, center = _scene(seed, config.scenario, isolated)
    lidar = replace(config.lidar, noise_sigma=sigma)
    scan = simulate_lidar(arena, sensor, lidar, seed)
    candidates = scan_candidates(scan, sensor, config.scenario.brick_specs(), config.lidar_perception)
    radius = 2.0 * config.lidar_perception.stack_radius
    records = []
    for candidate in candidates:
        if np.linalg.norm(candidate.center - center) > radius:
            continue
        same = [b for b in arena.bricks if b.brick_class == candidate.brick_class
                and np.linalg.norm(b.pose.position - candidate.center) <= MATCH_RADIUS]
        truth = candidate.brick_class.value if same else NONE_LABEL
        records.append((seed, sigma, truth, candidate.brick_class.value))
    return records


def classification_table(records: Sequence[Tuple[int, float, str, str]]) -> pd.DataFrame:
    """Таблица по классам: верно, неверно, доля успеха (точность) в процентах"""
    labels = [c.value for c in CLASS_ORDER]
    y_true = [r[2] for r in records]
    y_pred = [r[3] for r in records]
    if records:
        precision = precision_score(y_true, y_pred, labels=labels, average=None, zero_division=0)
    else:
        precision = np.zeros(len(labels))
    rows = []
    for label, rate in zip(labels, precision):
        predicted = [t for t, p in zip(y_true, y_pred) if p == label]
        correct = sum(1 for t in predicted if t == label)
        rows.append((label.capitalize(), correct, len(predicted) - correct, round(100.0 * float(rate), 2)))
    return pd.DataFrame(rows, columns=TABLE_COLUMNS)


def _classification_task(task) -> List[Tuple[int, float, str, str]]:
    seed, sigma, config, isolated = task
    return classification_trial(seed, sigma, config, isolated)


def _map(function, tasks: list, jobs: int) -> list:
    if jobs <= 1:
        return list(map(function, tasks))
    with mp.Pool(jobs) as pool:
        return pool.map(function, tasks)


def evaluate_classification(seeds: Iterable[int], sigmas: Sequence[float] = (0.0, 0.02, 0.05, 0.10),
                            config: Optional[SimulationConfig] = None, isolated: bool = False,
                            jobs: int = 1) -> pd.DataFrame:
    """
    Таблицы классификации для каждого уровня шума.

    :return: Столбцы 'Noise [cm]' и столбцы таблицы; строки по шуму, затем по классу.
    """
    config = config or SimulationConfig()
    seeds = sorted(seeds)
    tasks = [(seed, sigma, config, isolated) for sigma in sigmas for seed in seeds]
    results = _map(_classification_task, tasks, jobs)
    tables = []
    for sigma in sigmas:
        records = sorted((r for batch in results for r in batch if r[1] == sigma), key=lambda r: r[0])
        table = classification_table(records)
        table.insert(0, 'Noise [cm]', round(100.0 * sigma, 3))
        tables.append(table)
    return pd.concat(tables, ignore_index=True)


def _mission_task(task) -> dict:
    seed, config = task
    arena = generate_arena(seed, config.scenario)
    report = run_mission(arena, config, seed)
    return {'seed': seed, 'placed': report.placed_count, 'clock': report.clock,
            'pattern_search_time': report.pattern_search_time,
            'grasp_success_rate': report.grasp_success_rate, 'final_phase': report.final_phase}


def mission_batch(seeds: Iterable[int], config: Optional[SimulationConfig] = None, jobs: int = 1) -> pd.DataFrame:
    """Прогоны миссии по зёрнам (арена генерируется из того же зерна), отсортированные по зерну"""
    config = config or SimulationConfig()
    rows = _map(_mission_task, [(seed, config) for seed in sorted(seeds)], jobs)
    return pd.DataFrame(sorted(rows, key=lambda r: r['seed']),
                        columns=['seed', 'placed', 'clock', 'pattern_search_time', 'grasp_success_rate',
                                 'final_phase'])
