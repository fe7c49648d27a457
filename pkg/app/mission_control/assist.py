"""
assist.py

Описание:
    Канал сообщений от UAV. Сообщения с обнаружением шаблона поступают в упорядоченную очередь
    и забираются миссией один раз за такт. Источники: имитация UAV (задержка, период, шум позиции),
    эмуляция (одна заранее известная оценка) и воспроизведение из файла NDJSON.
"""
from collections import deque
from typing import Iterable, List, Optional, Tuple

from loguru import logger

from app.Model.Arena import PatternGeometry
from app.Model.Config import MissionConfig
from app.Model.Geometry import Pose2D
from app.Model.Mission import AssistMessage, MissionState, Phase
from app.sensor_sim.rng import stream


class AssistChannel:
    """Очередь сообщений, упорядоченная по времени"""

    def __init__(self, messages: Iterable[AssistMessage] = ()):
        self._queue = deque(sorted(messages, key=lambda m: m.timestamp))

    def poll(self, clock: float) -> List[AssistMessage]:
        """Все сообщения с отметкой времени не позже clock"""
        result = []
        while self._queue and self._queue[0].timestamp <= clock:
            result.append(self._queue.popleft())
        return result

    def __len__(self) -> int:
        return len(self._queue)


def simulated_assist(pattern: PatternGeometry, config: MissionConfig, seed: int,
                     horizon: Optional[float] = None) -> AssistChannel:
    """Имитация UAV: первое обнаружение через assist_delay, затем каждые assist_period секунд"""
    horizon = config.time_limit if horizon is None else horizon
    rng = stream(seed, 'assist')
    messages, timestamp = [], config.assist_delay
    while timestamp <= horizon:
        noise = rng.normal(0.0, config.assist_sigma, size=2)
        center = pattern.center + noise
        messages.append(AssistMessage('uav-1', Pose2D(center[0], center[1], pattern.corner_pose.heading),
                                      config.assist_confidence, float(timestamp)))
        timestamp += config.assist_period
    return AssistChannel(messages)


def emulated_assist(pattern: PatternGeometry, config: MissionConfig, seed: int) -> AssistChannel:
    """Одна заранее известная оценка, доступная с начала миссии"""
    rng = stream(seed, 'assist', 'emulated')
    center = pattern.center + rng.normal(0.0, config.assist_sigma, size=2)
    return AssistChannel([AssistMessage('emulated', Pose2D(center[0], center[1], pattern.corner_pose.heading),
                                        1.0, 0.0)])


def ingest_assist(state: MissionState, message: AssistMessage, bounds: Tuple[float, float]) -> MissionState:
    """
    Обновляет оценку шаблона, если уверенность не ниже текущей. Сообщения с позой вне арены
    отбрасываются. Во время исследования с грузом миссия сразу едет к шаблону.
    """
    pose = message.pose
    if not (0.0 <= pose.x <= bounds[0] and 0.0 <= pose.y <= bounds[1]):
        logger.warning(f'Assist message from {message.source_id} outside the arena dropped')
        return state
    if message.confidence >= state.pattern_confidence:
        state.pattern_estimate = pose
        state.pattern_confidence = message.confidence
        state.log('assist', f'{message.source_id} ({pose.x:.2f}, {pose.y:.2f}) conf {message.confidence:.2f}')
    if state.phase == Phase.EXPLORE and state.cargo_count > 0 and not state.pattern_detected:
        state.transition(Phase.NAVIGATE_TO_PATTERN, 'assist')
    return state

