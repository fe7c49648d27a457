"""
em_fit.py

Описание:
    Оценка центра mu и ориентации phi штабеля по кандидатам методом EM. Кандидат класса m
    распределён как (1 - eps) N(x; mu + k_m v, Sigma_m) + eps * u, где v = (cos phi, sin phi),
    Sigma_m задана в системе штабеля, u - равномерная плотность выбросов по арене.

    E-шаг: вероятность того, что кандидат не выброс. M-шаг: eps - средняя доля выбросов,
    mu - взвешенное среднее x_i - k_i v, v - нормированная взвешенная сумма k_i (x_i - mu).
    Если шаг уменьшает правдоподобие, это записывается в журнал как предупреждение; с guard=True
    сохраняются прежние параметры и итерации прекращаются.

    Без начальной оценки EM запускается из центроида всех кандидатов и из центров, восстановленных
    по отдельным кандидатам (x_i - k_i v), и выбирается решение с наибольшим правдоподобием.
"""
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.stats import multivariate_normal

from app.Model.Brick import BrickClass
from app.Model.Perception import BrickCandidate, StackEstimate, StackModel
from app.errors import DegenerateFitError

MIN_OUTLIER = 1e-6
MAX_OUTLIER = 0.999
MAX_LOCAL_STARTS = 12


class _Problem:
    def __init__(self, candidates: Sequence[BrickCandidate], model: StackModel):
        self.model = model
        self.x = np.array([c.center for c in candidates], dtype=float).reshape(-1, 2)
        self.classes = [c.brick_class for c in candidates]
        self.k = np.array([model.offsets[c] for c in self.classes], dtype=float)
        self.log_u = math.log(model.outlier_density)

    def log_normal(self, mu: np.ndarray, v: np.ndarray, phi: float) -> np.ndarray:
        residual = self.x - (mu + self.k[:, None] * v)
        result = np.empty(self.x.shape[0])
        for brick_class in set(self.classes):
            mask = np.array([c == brick_class for c in self.classes])
            cov = self.model.world_covariance(brick_class, phi)
            result[mask] = multivariate_normal(mean=np.zeros(2), cov=cov).logpdf(residual[mask])
        return result

    def precision(self, phi: float) -> np.ndarray:
        return np.array([np.linalg.inv(self.model.world_covariance(c, phi)) for c in self.classes])

    def variance(self, phi: float) -> np.ndarray:
        """Средняя дисперсия по осям для каждого кандидата"""
        return np.array([np.trace(self.model.world_covariance(c, phi)) / 2 for c in self.classes])

    def log_likelihood(self, mu, phi, eps) -> float:
        v = np.array([math.cos(phi), math.sin(phi)])
        inlier = math.log(1.0 - eps) + self.log_normal(mu, v, phi)
        return float(np.sum(np.logaddexp(inlier, math.log(eps) + self.log_u)))

    def responsibilities(self, mu, phi, eps) -> np.ndarray:
        v = np.array([math.cos(phi), math.sin(phi)])
        inlier = math.log(1.0 - eps) + self.log_normal(mu, v, phi)
        return np.exp(inlier - np.logaddexp(inlier, math.log(eps) + self.log_u))


def _identifiable(problem: _Problem) -> bool:
    return problem.x.shape[0] >= 2 and np.unique(np.round(problem.k, 9)).shape[0] >= 2


def _run(problem: _Problem, mu: np.ndarray, phi: float, eps: float, max_iter: int, tol: float,
         guard: bool = True) -> StackEstimate:
    loglik = problem.log_likelihood(mu, phi, eps)
    history = [(0, float(mu[0]), float(mu[1]), float(phi), loglik)]
    iterations, converged = 0, False
    for iteration in range(1, max_iter + 1):
        r = problem.responsibilities(mu, phi, eps)
        new_eps = float(np.clip(np.mean(1.0 - r), MIN_OUTLIER, MAX_OUTLIER))
        v = np.array([math.cos(phi), math.sin(phi)])
        precision = problem.precision(phi) * r[:, None, None]
        total = precision.sum(axis=0)
        if np.linalg.det(total) <= 0:
            break
        target = problem.x - problem.k[:, None] * v
        new_mu = np.linalg.solve(total, np.einsum('nij,nj->i', precision, target))
        weights = r / problem.variance(phi)
        direction = np.sum((weights * problem.k)[:, None] * (problem.x - new_mu), axis=0)
        norm = np.linalg.norm(direction)
        if norm < 1e-12:
            break
        new_phi = math.atan2(direction[1], direction[0])
        new_loglik = problem.log_likelihood(new_mu, new_phi, new_eps)
        if new_loglik < loglik - 1e-9:
            logger.warning(f'EM step {iteration} decreased log-likelihood by {loglik - new_loglik:.3g}'
                           + (', keeping previous parameters' if guard else ''))
            if guard:
                converged = True
                break
        improvement = new_loglik - loglik
        mu, phi, eps, loglik = new_mu, new_phi, new_eps, new_loglik
        iterations = iteration
        history.append((iteration, float(mu[0]), float(mu[1]), float(phi), loglik))
        if improvement < tol:
            converged = True
            break
    return StackEstimate(mu=mu, phi=phi, log_likelihood=loglik,
                         responsibilities=problem.responsibilities(mu, phi, eps), iterations=iterations,
                         history=tuple(history), outlier_weight=eps, converged=converged)


def _heading_order(candidates: Sequence[BrickCandidate]) -> List[int]:
    longest = max(range(len(candidates)), key=lambda i: (candidates[i].length, -i))
    brick_class = candidates[longest].brick_class
    return [longest] + [i for i, c in enumerate(candidates) if c.brick_class == brick_class and i != longest]


def initial_headings(candidates: Sequence[BrickCandidate]) -> List[float]:
    """
    Начальные ориентации: направление самого длинного кандидата, затем направления остальных
    кандидатов того же класса; каждое вместе с поворотом на pi.
    """
    headings = []
    for i in _heading_order(candidates):
        base = math.atan2(candidates[i].direction[1], candidates[i].direction[0])
        headings += [base, base + math.pi]
    return headings


def local_starts(candidates: Sequence[BrickCandidate], offsets: Dict[BrickClass, float],
                 limit: int = MAX_LOCAL_STARTS) -> List[Tuple[np.ndarray, float]]:
    """
    Начальные (mu, phi) по отдельным кандидатам, от самых длинных:
    центр штабеля при условии, что кандидат верен.
    """
    order = sorted(range(len(candidates)), key=lambda i: (-candidates[i].length, i))
    starts = []
    for i in order[:limit]:
        candidate = candidates[i]
        base = math.atan2(candidate.direction[1], candidate.direction[0])
        for phi in (base, base + math.pi):
            v = np.array([math.cos(phi), math.sin(phi)])
            starts.append((candidate.center - offsets[candidate.brick_class] * v, phi))
    return starts


def _red_contradicts(problem: _Problem, estimate: StackEstimate) -> bool:
    red = np.array([c == BrickClass.RED for c in problem.classes])
    if not np.any(red):
        return False
    weights = estimate.responsibilities[red]
    if weights.sum() <= 0:
        return False
    along = (problem.x[red] - estimate.mu) @ estimate.direction
    return float(np.average(along, weights=weights)) > 0


def em_fit_stack(candidates: Sequence[BrickCandidate], model: StackModel, init: Optional[StackEstimate] = None,
                 max_iter: int = 50, tol: float = 1e-6, sign_rule: bool = True,
                 guard: bool = True) -> StackEstimate:
    """
    Оценка позы штабеля.

    :param candidates: Кандидаты кирпичей.
    :param model: Смещения k_m, ковариации и плотность выбросов.
    :param init: Начальная оценка; по умолчанию центроид кандидатов и несколько начальных ориентаций.
    :param sign_rule: Требовать, чтобы красные кандидаты лежали при отрицательном k вдоль v.
    :param guard: Прекращать итерации при уменьшении правдоподобия.
    :raises DegenerateFitError: Если кандидатов меньше двух или все они имеют одинаковое k.
    """
    problem = _Problem(candidates, model)
    if not _identifiable(problem):
        centroid = problem.x.mean(axis=0) if problem.x.shape[0] else np.zeros(2)
        raise DegenerateFitError('Stack orientation is not identifiable from the candidates',
                                 estimate=StackEstimate(mu=centroid, phi=0.0))
    eps = float(np.clip(model.outlier_prior, MIN_OUTLIER, MAX_OUTLIER))
    if init is not None:
        starts = [(np.asarray(init.mu, dtype=float), init.phi)]
    else:
        centroid = problem.x.mean(axis=0)
        starts = [(centroid, phi) for phi in initial_headings(candidates)]
        starts += local_starts(candidates, model.offsets)

    best = None
    for mu, phi in starts:
        estimate = _run(problem, mu, phi, eps, max_iter, tol, guard)
        if best is None or estimate.log_likelihood > best.log_likelihood + 1e-9:
            best = estimate
    if sign_rule and _red_contradicts(problem, best):
        flipped = _run(problem, best.mu, best.phi + math.pi, eps, max_iter, tol, guard)
        if not _red_contradicts(problem, flipped):
            best = flipped
    logger.debug(f'EM fit: mu=({best.mu[0]:.3f}, {best.mu[1]:.3f}), phi={best.phi:.3f}, '
                 f'loglik={best.log_likelihood:.3f}, iterations={best.iterations}')
    return best
