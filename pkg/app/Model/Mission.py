"""
Mission.py

Описание:
    Состояние миссии: фаза конечного автомата, часы, журнал событий, оценки штабеля и шаблона,
    счётчики попыток захвата. Переходы между фазами разрешены только по заданным рёбрам.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.Model.Brick import BrickClass
from app.Model.Geometry import Pose2D
from app.Model.Inventory import Inventory, LoadingPlan
from app.Model.Perception import StackEstimate

ASSIST_SCHEMA = 1


class Phase(Enum):
    EXPLORE = 'Explore'
    APPROACH_STACK = 'ApproachStack'
    ALIGN_STACK = 'AlignStack'
    LOAD = 'Load'
    NAVIGATE_TO_PATTERN = 'NavigateToPattern'
    SPIRAL_SEARCH = 'SpiralSearch'
    ALIGN_PATTERN = 'AlignPattern'
    UNLOAD = 'Unload'
    EMERGENCY = 'Emergency'
    DONE = 'Done'


TRANSITIONS: Dict[Phase, Tuple[Phase, ...]] = {
    Phase.EMERGENCY: (Phase.EXPLORE,),
    Phase.EXPLORE: (Phase.APPROACH_STACK, Phase.NAVIGATE_TO_PATTERN),
    Phase.APPROACH_STACK: (Phase.ALIGN_STACK, Phase.EXPLORE),
    Phase.ALIGN_STACK: (Phase.LOAD, Phase.EXPLORE, Phase.NAVIGATE_TO_PATTERN),
    Phase.LOAD: (Phase.ALIGN_STACK, Phase.NAVIGATE_TO_PATTERN, Phase.EXPLORE),
    Phase.NAVIGATE_TO_PATTERN: (Phase.SPIRAL_SEARCH, Phase.ALIGN_PATTERN, Phase.EXPLORE),
    Phase.SPIRAL_SEARCH: (Phase.ALIGN_PATTERN, Phase.EXPLORE),
    Phase.ALIGN_PATTERN: (Phase.UNLOAD, Phase.SPIRAL_SEARCH),
    Phase.UNLOAD: (Phase.EXPLORE, Phase.APPROACH_STACK),
    Phase.DONE: (),
}


class GraspOutcome(Enum):
    LOADED = 'Loaded'
    RETRY = 'Retry'
    MARKED_INVALID = 'MarkedInvalid'


@dataclass(frozen=True)
class GraspResult:
    outcome: GraspOutcome
    reason: str
    brick_id: Optional[int] = None
    brick_class: Optional[BrickClass] = None
    alignment_error: float = float('nan')
    hall: Tuple[bool, bool] = (False, False)
    duration: float = 0.0
    target_position: Optional[Tuple[float, float]] = None


@dataclass(frozen=True)
class AssistMessage:
    """Обнаружение шаблона, присланное UAV"""
    source_id: str
    pose: Pose2D
    confidence: float
    timestamp: float

    def to_dict(self) -> dict:
        return {'schema': ASSIST_SCHEMA, 'source_id': self.source_id, 'pose': self.pose.to_dict(),
                'confidence': self.confidence, 'timestamp': self.timestamp}

    @staticmethod
    def from_dict(data: dict) -> 'AssistMessage':
        if data.get('schema') != ASSIST_SCHEMA:
            raise ValueError(f'Unsupported assist schema: {data.get("schema")}')
        return AssistMessage(str(data['source_id']), Pose2D.from_dict(data['pose']),
                             float(data['confidence']), float(data['timestamp']))


@dataclass(frozen=True)
class Event:
    tick: int
    phase: str
    event: str
    x: float
    y: float
    heading: float
    clock: float
    detail: str = ''


@dataclass(frozen=True)
class PlacedBrick:
    brick_id: int
    brick_class: BrickClass
    entry: int
    pose: Pose2D
    error: float
    clock: float

    def to_dict(self) -> dict:
        return {'brick_id': self.brick_id, 'class': self.brick_class.value, 'entry': self.entry,
                'pose': self.pose.to_dict(), 'error': self.error, 'clock': self.clock}


@dataclass
class MissionState:
    """Изменяемое состояние одного прогона миссии"""
    phase: Phase
    true_pose: Pose2D
    reported_pose: Pose2D
    inventory: Inventory
    time_limit: float = 1800.0
    clock: float = 0.0
    tick: int = 0
    events: List[Event] = field(default_factory=list)
    waypoints: List[Pose2D] = field(default_factory=list)
    visited: int = 0
    priority_areas: List[Tuple[float, float, float, float]] = field(default_factory=list)
    priority_count: int = 0
    stack_estimate: Optional[StackEstimate] = None
    pattern_estimate: Optional[Pose2D] = None
    pattern_confidence: float = -1.0
    pattern_detected: bool = False
    attempts: Dict[Tuple[int, int], int] = field(default_factory=dict)
    invalid_positions: List[Tuple[float, float]] = field(default_factory=list)
    plan: Optional[LoadingPlan] = None
    trip: int = 0
    loaded: List[Tuple[int, int, BrickClass]] = field(default_factory=list)
    carried: Optional[Tuple[int, int, BrickClass]] = None
    placed: List[PlacedBrick] = field(default_factory=list)
    phase_durations: Dict[str, float] = field(default_factory=dict)
    pattern_search_time: float = 0.0
    distance: float = 0.0
    grasp_results: List[GraspResult] = field(default_factory=list)
    failed: bool = False

    @property
    def remaining(self) -> float:
        return self.time_limit - self.clock

    @property
    def cargo_count(self) -> int:
        return len(self.loaded) + (1 if self.carried else 0)

    def log(self, event: str, detail: str = ''):
        pose = self.reported_pose
        self.events.append(Event(self.tick, self.phase.value, event, pose.x, pose.y, pose.heading,
                                 self.clock, detail))
        self.tick += 1

    def transition(self, phase: Phase, detail: str = ''):
        if phase != Phase.DONE and phase not in TRANSITIONS[self.phase]:
            raise RuntimeError(f'Transition {self.phase.value} -> {phase.value} is not allowed')
        self.phase = phase
        self.log('enter', detail)

    def spend(self, seconds: float) -> bool:
        """
        Продвигает часы миссии. Если действие не укладывается в лимит времени,
        часы не меняются и возвращается False.
        """
        if seconds < 0:
            raise ValueError('Duration must be non-negative')
        if self.clock + seconds > self.time_limit:
            return False
        self.clock += seconds
        key = self.phase.value
        self.phase_durations[key] = self.phase_durations.get(key, 0.0) + seconds
        if self.phase == Phase.SPIRAL_SEARCH or (self.phase == Phase.EXPLORE and self.cargo_count > 0):
            self.pattern_search_time += seconds
        return True


@dataclass
class MissionReport:
    placed: List[PlacedBrick]
    phase_durations: Dict[str, float]
    events: List[Event]
    clock: float
    final_phase: str
    pattern_search_time: float
    grasp_results: List[GraspResult]
    stack_error: Optional[Tuple[float, float]] = None
    distance: float = 0.0
    manifest: dict = field(default_factory=dict)

    @property
    def placed_count(self) -> int:
        return len(self.placed)

    @property
    def grasp_success_rate(self) -> float:
        if not self.grasp_results:
            return 0.0
        return float(np.mean([r.outcome == GraspOutcome.LOADED for r in self.grasp_results]))

    def to_dict(self) -> dict:
        return {
            'format_version': 1,
            'manifest': self.manifest,
            'placed_count': self.placed_count,
            'placed': [p.to_dict() for p in self.placed],
            'phase_durations': {k: round(v, 6) for k, v in sorted(self.phase_durations.items())},
            'pattern_search_time': round(self.pattern_search_time, 6),
            'clock': round(self.clock, 6),
            'final_phase': self.final_phase,
            'distance': round(self.distance, 6),
            'stack_error': list(self.stack_error) if self.stack_error else None,
            'grasps': [{'outcome': r.outcome.value, 'reason': r.reason, 'brick_id': r.brick_id,
                        'class': r.brick_class.value if r.brick_class else None,
                        'alignment_error': None if np.isnan(r.alignment_error) else round(r.alignment_error, 6),
                        'hall': list(r.hall)} for r in self.grasp_results],
            'event_count': len(self.events),
        }
