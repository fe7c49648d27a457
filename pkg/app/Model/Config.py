"""
Config.py

Описание:
    Конфигурация симулятора. Все параметры собраны в dataclass-ах со значениями по умолчанию
    и переводятся в словари (и JSON) и обратно.
"""
import dataclasses
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from app.Model.Brick import BrickClass, BrickSpec, default_brick_specs
from app.errors import ConfigurationError


class ConfigMixin:
    """Перевод dataclass-конфигурации в словарь и обратно"""
    _nested: Dict[str, type] = {}

    def to_dict(self) -> dict:
        result = {}
        for item in dataclasses.fields(self):
            value = getattr(self, item.name)
            if isinstance(value, ConfigMixin):
                value = value.to_dict()
            elif isinstance(value, tuple):
                value = list(value)
            result[item.name] = value
        return result

    @classmethod
    def from_dict(cls, data: Optional[dict]):
        data = data or {}
        names = {item.name: item for item in dataclasses.fields(cls)}
        unknown = set(data) - set(names)
        if unknown:
            raise ConfigurationError(f'Unknown keys for {cls.__name__}: {sorted(unknown)}')
        kwargs = {}
        for key, value in data.items():
            if key in cls._nested:
                value = cls._nested[key].from_dict(value)
            elif isinstance(_default_of(names[key]), tuple) and isinstance(value, list):
                value = tuple(value)
            kwargs[key] = value
        try:
            return cls(**kwargs)
        except TypeError as e:
            raise ConfigurationError(f'Invalid {cls.__name__}: {e}') from e


def _default_of(item: dataclasses.Field):
    if item.default is not dataclasses.MISSING:
        return item.default
    if item.default_factory is not dataclasses.MISSING:
        return item.default_factory()
    return None


@dataclass
class PileLayout(ConfigMixin):
    """Раскладка штабеля: столбцы кирпичей рядом друг с другом и число слоёв для каждого класса"""
    columns: Dict[str, int] = field(default_factory=lambda: {'red': 2, 'green': 2, 'blue': 1, 'orange': 1})
    layers: Dict[str, int] = field(default_factory=lambda: {'red': 3, 'green': 2, 'blue': 2, 'orange': 4})
    brick_gap: float = 0.05
    row_gap: float = 0.30


@dataclass
class ScenarioConfig(ConfigMixin):
    bounds: Tuple[float, float] = (50.0, 60.0)
    margin: float = 3.0
    clearance: float = 3.0
    brick_dims: Dict[str, dict] = field(default_factory=dict)
    pile: PileLayout = field(default_factory=PileLayout)
    square_size: float = 0.2
    segment_length: float = 4.0
    segment_width: float = 0.4
    include_uav_objects: bool = True
    platform_height: float = 1.7
    platform_size: Tuple[float, float] = (4.0, 1.0)
    uav_pile_size: Tuple[float, float] = (3.0, 2.0)
    boundary_wall_height: float = 1.0
    distractors: List[dict] = field(default_factory=list)
    max_placement_attempts: int = 2000
    seed: int = 7

    _nested = {'pile': PileLayout}

    def __post_init__(self):
        if self.bounds[0] <= 0 or self.bounds[1] <= 0:
            raise ConfigurationError('Arena bounds must be positive')
        if self.margin < 0 or self.clearance < 0:
            raise ConfigurationError('Margin and clearance must be non-negative')
        if self.square_size <= 0:
            raise ConfigurationError('Square size must be positive')

    def brick_specs(self) -> Dict[BrickClass, BrickSpec]:
        """Таблица классов с учётом переопределённых размеров"""
        specs = default_brick_specs()
        for name, overrides in self.brick_dims.items():
            brick_class = BrickClass.parse(name)
            merged = specs[brick_class].to_dict()
            unknown = set(overrides) - set(merged)
            if unknown:
                raise ConfigurationError(f'Unknown brick dimension keys: {sorted(unknown)}')
            merged.update(overrides)
            specs[brick_class] = BrickSpec.from_dict(brick_class, merged)
        return specs


@dataclass
class LidarConfig(ConfigMixin):
    mount_height: float = 0.6
    rings: int = 16
    vertical_fov_deg: float = 30.0
    max_range: float = 50.0
    azimuth_step_deg: float = 0.5
    noise_sigma: float = 0.02
    dropout: float = 0.0


@dataclass
class CameraConfig(ConfigMixin):
    depth_size: Tuple[int, int] = (424, 240)
    rgb_size: Tuple[int, int] = (848, 480)
    depth_fov_deg: Tuple[float, float] = (87.0, 58.0)
    rgb_fov_deg: Tuple[float, float] = (69.0, 42.0)
    depth_noise_sigma: float = 0.002
    max_render_range: float = 20.0
    grasp_camera_clearance: float = 0.8
    elevated_camera_height: float = 2.0
    elevated_pitches_deg: Tuple[float, ...] = (20.0, 50.0)
    elevated_headings: int = 8
    folded_camera_height: float = 0.9
    folded_pitch_deg: float = 20.0
    camera_offset: Tuple[float, float] = (0.0, 0.0)


@dataclass
class OdometryConfig(ConfigMixin):
    drift_rate: float = 0.01
    heading_rate_bias: float = 0.0
    noise_sigma: float = 0.002
    max_payload_factor: float = 2.0


@dataclass
class HallConfig(ConfigMixin):
    magnet_pitch: float = 0.13
    trigger_distance: float = 0.01


@dataclass
class LidarPerceptionConfig(ConfigMixin):
    slice_threshold: float = 1.5
    band: Tuple[float, float] = (0.05, 1.0)
    iepf_epsilon: float = 0.03
    min_points: int = 4
    jump_threshold: float = 0.3
    merge_angle_deg: float = 10.0
    class_tolerance: float = 0.07
    class_sigma: float = 0.3
    outlier_prior: float = 0.3
    outlier_density: Optional[float] = None
    em_max_iter: int = 50
    em_tol: float = 1e-6
    ransac_iterations: int = 200
    ransac_eps: float = 0.03
    standoff: float = 0.7
    stack_radius: float = 3.5
    min_candidates: int = 4
    end_extension: float = 0.5
    max_run_length: float = 2.6
    max_candidate_range: float = 8.0
    min_scans: int = 2
    max_lateral: float = 0.4
    min_spread: float = 0.5


@dataclass
class DepthConfig(ConfigMixin):
    min_height: float = 0.1
    step_threshold: float = 0.06
    length_tolerance: float = 0.07
    width_tolerance: float = 0.05
    base_tolerance: float = 0.08
    gripper_tolerance: float = 0.02
    reach_min: float = 0.45
    reach_max: float = 0.95
    reach_half_angle_deg: float = 60.0
    min_segment_pixels: int = 20


@dataclass
class PatternConfig(ConfigMixin):
    resolution: int = 32
    threshold: float = 0.3
    background_threshold: float = 0.05
    bridge: int = 5
    expected_length: float = 4.0
    expected_width: float = 0.4
    length_tolerance: float = 0.6
    width_tolerance: float = 0.25
    min_pixels: int = 30
    track_yellow: bool = False


@dataclass
class MissionConfig(ConfigMixin):
    time_limit: float = 1800.0
    drive_speed: float = 1.0
    turn_speed: float = 1.0
    lidar_scan_time: float = 1.0
    elevated_scan_time: float = 45.0
    parallel_park_time: float = 20.0
    parallel_park_accuracy: float = 0.03
    max_parking_attempts: int = 3
    load_time: float = 30.0
    failed_grasp_time: float = 20.0
    servo_step_time: float = 2.0
    base_adjust_time: float = 5.0
    unload_time: float = 25.0
    pattern_scan_radius: float = 10.0
    lidar_explore_radius: float = 0.0
    spiral_spacing: float = 2.0
    spiral_step: float = 1.0
    spiral_cap: float = 12.0
    pattern_standoff: float = 6.0
    spiral_look_time: float = 6.0
    assist: bool = True
    emulated_assist: bool = False
    assist_delay: float = 240.0
    assist_period: float = 60.0
    assist_sigma: float = 1.0
    assist_confidence: float = 0.8
    emergency: bool = False
    orange_trips: bool = False
    abort_on_invalid: bool = True
    max_grasp_attempts: int = 2
    slip_probability: float = 0.02
    actuator_sigma: float = 0.005
    descent_sigma: float = 0.004
    max_servo_steps: int = 6
    max_base_adjustments: int = 4
    start_pose: Tuple[float, float, float] = (2.0, 2.0, 0.0)
    blueprint: List[str] = field(default_factory=list)
    priority_areas: List[List[float]] = field(default_factory=list)
    illumination: str = 'noon'


@dataclass
class SimulationConfig(ConfigMixin):
    """Полная конфигурация запуска"""
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    lidar: LidarConfig = field(default_factory=LidarConfig)
    camera: CameraConfig = field(default_factory=CameraConfig)
    odometry: OdometryConfig = field(default_factory=OdometryConfig)
    hall: HallConfig = field(default_factory=HallConfig)
    lidar_perception: LidarPerceptionConfig = field(default_factory=LidarPerceptionConfig)
    depth: DepthConfig = field(default_factory=DepthConfig)
    pattern: PatternConfig = field(default_factory=PatternConfig)
    mission: MissionConfig = field(default_factory=MissionConfig)

    _nested = {'scenario': ScenarioConfig, 'lidar': LidarConfig, 'camera': CameraConfig,
               'odometry': OdometryConfig, 'hall': HallConfig, 'lidar_perception': LidarPerceptionConfig,
               'depth': DepthConfig, 'pattern': PatternConfig, 'mission': MissionConfig}


def apply_overrides(config: SimulationConfig, overrides: Dict[str, object]) -> SimulationConfig:
    """
    Применяет переопределения вида {'mission.drive_speed': 0.8} и возвращает новую конфигурацию.

    :raises ConfigurationError: Если ключ не существует.
    """
    data = config.to_dict()
    for key, value in overrides.items():
        parts = key.split('.')
        node = data
        for part in parts[:-1]:
            if not isinstance(node, dict) or part not in node:
                raise ConfigurationError(f'Unknown config key: {key}')
            node = node[part]
        if not isinstance(node, dict) or parts[-1] not in node:
            raise ConfigurationError(f'Unknown config key: {key}')
        node[parts[-1]] = value
    return SimulationConfig.from_dict(data)


@dataclass
class RunManifest(ConfigMixin):
    """Описание запуска, встраиваемое в каждый артефакт"""
    scenario: str = 'default'
    seed: int = 7
    overrides: Dict[str, object] = field(default_factory=dict)
    output_dir: str = 'out'
    tool_version: str = ''
    command: str = 'run'
