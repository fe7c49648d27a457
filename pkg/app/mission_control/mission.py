"""
mission.py

Описание:
    Конечный автомат миссии UGV. Каждая фаза - обработчик, который выполняет одно действие
    (переезд, скан, попытку захвата, укладку), тратит время миссии и при необходимости
    переключает фазу. Навигация ведётся по одометрии, восприятие работает в её системе,
    а истинные позы используются только для синтеза показаний датчиков и подсчёта ошибок.

    Время миссии продвигается только через spend; действие, которое не укладывается в лимит,
    завершает миссию. После каждого действия миссия забирает сообщения UAV.
"""
import math
from dataclasses import replace
from typing import Dict, List, Optional

import numpy as np
from loguru import logger
from scipy.stats import truncnorm

from app.Model.Arena import Arena
from app.Model.Brick import BrickClass, BrickInstance
from app.Model.Config import SimulationConfig
from app.Model.Geometry import CameraPose, Pose2D, normalize_angle
from app.Model.Inventory import DEFAULT_ORDER, Blueprint, Inventory, Trip
from app.Model.Mission import GraspOutcome, MissionReport, MissionState, Phase, PlacedBrick
from app.Model.Perception import PatternSegment, StackEstimate
from app.Model.Sensors import IlluminationModel, Intrinsics, OdometryState
from app.arena_model.pile import stack_offsets
from app.errors import ConfigurationError, DegenerateFitError, DegenerateLineError
from app.lidar_perception.pipeline import StackLocator
from app.lidar_perception.ranges import detection_range
from app.lidar_perception.ransac import ransac_major_axis
from app.lidar_perception.slicing import brick_band, slice_cloud
from app.lidar_perception.waypoint import class_waypoint
from app.mission_control.assist import AssistChannel, emulated_assist, ingest_assist, simulated_assist
from app.mission_control.exploration import coverage_waypoints, prioritize, set_priority_areas, spiral_points
from app.mission_control.grasp import GraspMemory, grasp_cycle
from app.mission_control.inventory import plan_loading, replan_on_failure
from app.pattern_vision.detector import corner_pose_from_center, detect_pattern_segments, is_full_pattern
from app.pattern_vision.lookup import build_lookup, default_calibration
from app.sensor_sim.lidar import simulate_lidar
from app.sensor_sim.odometry import apply_motion, command_to, payload_factor
from app.sensor_sim.rgbd import default_intrinsics, render_rgb
from app.sensor_sim.rng import stream

# Ошибка остановки при грубом следовании по маршруту
COARSE_SIGMA = 0.1
RESCAN_DISTANCE = 4.0
MAX_RESCANS = 2
MAX_ALIGN_FAILURES = 3
MAX_NO_TARGET = 2
MAX_IDLE_STEPS = 50


class MissionTimeout(Exception):
    """Следующее действие не укладывается в лимит времени"""


class Mission:
    """
    Один прогон миссии.

    :param arena: Истинная арена (копия изменяется по ходу миссии).
    :param config: Конфигурация.
    :param seed: Зерно всех случайных потоков прогона.
    :param assist: Канал сообщений UAV; по умолчанию строится по конфигурации.
    """

    def __init__(self, arena: Arena, config: SimulationConfig, seed: int = 0,
                 assist: Optional[AssistChannel] = None):
        self.arena = arena
        self.config = config
        self.seed = seed
        mission = config.mission
        self.specs = config.scenario.brick_specs()
        self.offsets = stack_offsets(self.specs, config.scenario.pile)
        self.blueprint = self._blueprint()
        self.trips = self._plan_trips()

        start = Pose2D(*mission.start_pose)
        phase = Phase.EMERGENCY if mission.emergency else Phase.EXPLORE
        self.state = MissionState(phase, start, start, Inventory.default(), time_limit=mission.time_limit,
                                  priority_areas=[tuple(r) for r in mission.priority_areas])
        self.odometry = OdometryState(start, start)
        self.memory = GraspMemory(self.state.attempts, self.state.invalid_positions)
        self.assist = assist if assist is not None else self._assist_channel()

        self.locator = StackLocator(self.specs, config.lidar_perception, arena.area, config.scenario.pile)
        self.last_scan = None
        self.last_rgb = None
        self.grid = build_lookup(default_calibration(config.pattern.track_yellow), config.pattern.threshold,
                                 config.pattern.resolution, config.pattern.background_threshold)
        _, self.rgb_intrinsics = default_intrinsics(config.camera)
        self.illumination = IlluminationModel.preset(mission.illumination)

        self.trip_index = -1
        self.pickups: List[tuple] = []
        self.unload_entries: List[int] = []
        self.cargo: Dict[int, BrickInstance] = {}
        self.parked_class: Optional[BrickClass] = None
        self.axis_refined = False
        self.stack_confirmed = False
        self.no_target = 0
        self.rescans = 0
        self.sweeps = 0
        self.pattern_sites: List[Pose2D] = []
        self.site_index = 0
        self.pattern_sweeps = 0
        self.pattern_corner: Optional[Pose2D] = None
        self.align_failures = 0
        self.frame = 0
        self.grasp_tick = 0

        self.handlers = {
            Phase.EMERGENCY: self.emergency,
            Phase.EXPLORE: self.explore,
            Phase.APPROACH_STACK: self.approach_stack,
            Phase.ALIGN_STACK: self.align_stack,
            Phase.LOAD: self.load,
            Phase.NAVIGATE_TO_PATTERN: self.navigate_to_pattern,
            Phase.SPIRAL_SEARCH: self.spiral_search,
            Phase.ALIGN_PATTERN: self.align_pattern,
            Phase.UNLOAD: self.unload,
        }

    def _blueprint(self) -> Blueprint:
        mission = self.config.mission
        if mission.emergency:
            classes = [BrickClass.RED]
        elif mission.blueprint:
            classes = [BrickClass.parse(name) for name in mission.blueprint]
        else:
            classes = list(DEFAULT_ORDER)
        return Blueprint.from_classes(classes, self.specs)

    def _plan_trips(self, entries: Optional[List[int]] = None) -> List[Trip]:
        """Рейсы для записей плана entries (по умолчанию всех)"""
        entries = list(range(len(self.blueprint))) if entries is None else entries
        orange = [k for k in entries if self.blueprint.entries[k].brick_class == BrickClass.ORANGE]
        if orange and not self.config.mission.orange_trips:
            raise ConfigurationError('Orange bricks require orange_trips to be enabled')
        regular = [k for k in entries if k not in orange]
        trips = list(plan_loading(self.blueprint, Inventory.default(), regular).trips) if regular else []
        # оранжевый кирпич везут в захвате по одному, ячейка -1
        trips += [Trip((k,), {k: -1}, (-1,), (-1,)) for k in orange]
        return trips

    def _assist_channel(self) -> AssistChannel:
        mission = self.config.mission
        if mission.emergency or mission.emulated_assist:
            return emulated_assist(self.arena.pattern, mission, self.seed)
        if mission.assist:
            return simulated_assist(self.arena.pattern, mission, self.seed)
        return AssistChannel()

    # Время и движение

    def spend(self, seconds: float):
        if not self.state.spend(seconds):
            raise MissionTimeout(f'{seconds:.1f} s does not fit into the remaining {self.state.remaining:.1f} s')
        self.poll_assist()

    def poll_assist(self):
        for message in self.assist.poll(self.state.clock):
            ingest_assist(self.state, message, self.arena.bounds)

    def _factor(self, arm_extended: bool = False) -> float:
        return payload_factor(self.state.cargo_count, arm_extended, len(self.state.inventory.slots),
                              self.config.odometry.max_payload_factor)

    def _move(self, motion: Pose2D, arm_extended: bool = False):
        self.odometry = apply_motion(self.odometry, motion, self._factor(arm_extended), self.config.odometry,
                                     self.seed)
        self.state.true_pose = self.odometry.true_pose
        self.state.reported_pose = self.odometry.reported_pose
        self.state.distance += math.hypot(motion.x, motion.y)

    def _noise(self, sigma: float, size: int) -> np.ndarray:
        rng = stream(self.seed, 'motion', self.odometry.step)
        return truncnorm.rvs(-3.0, 3.0, loc=0.0, scale=sigma, size=size, random_state=rng)

    def drive(self, goal: Pose2D, coarse: bool = True):
        """Поворот к цели, проезд по прямой и поворот на курс цели; поза цели в системе одометрии"""
        mission = self.config.mission
        local = goal.relative_to(self.state.reported_pose)
        distance = math.hypot(local.x, local.y)
        if distance > 1e-6:
            bearing = math.atan2(local.y, local.x)
            turns = abs(bearing) + abs(normalize_angle(local.heading - bearing))
        else:
            turns = abs(local.heading)
        self.spend(distance / mission.drive_speed + turns / mission.turn_speed)
        motion = command_to(self.odometry, goal, self._factor(), self.config.odometry)
        if coarse and distance > 1.0:
            dx, dy = self._noise(COARSE_SIGMA, 2)
            motion = Pose2D(motion.x + dx, motion.y + dy, motion.heading)
        self._move(motion)

    def park(self, goal: Pose2D):
        """Подъезд к позе с точностью parallel_park_accuracy серией параллельных парковок"""
        mission = self.config.mission
        if self.state.reported_pose.distance_to(goal) > 1.0:
            self.drive(goal)
        for _ in range(mission.max_parking_attempts):
            local = goal.relative_to(self.state.reported_pose)
            if math.hypot(local.x, local.y) <= mission.parallel_park_accuracy and abs(local.heading) <= 0.02:
                return
            self.spend(mission.parallel_park_time)
            motion = command_to(self.odometry, goal, self._factor(), self.config.odometry)
            dx, dy = self._noise(0.5 * mission.parallel_park_accuracy, 2)
            self._move(Pose2D(motion.x + dx, motion.y + dy, motion.heading))

    # Восприятие

    def lidar_scan(self):
        self.spend(self.config.mission.lidar_scan_time)
        scan = simulate_lidar(self.arena, self.state.true_pose, self.config.lidar, self.seed, self.state.clock,
                              self.locator.frames)
        found = self.locator.add_scan(scan, self.state.reported_pose)
        self.last_scan = (scan, self.state.reported_pose)
        self.state.log('lidar_scan', f'{len(found)} candidates')
        return found

    def explore_radius(self) -> float:
        """
        Радиус сетки обследования: дальность обнаружения самой высокой группы штабеля,
        но не дальше, чем принимаются кандидаты.
        """
        mission, lidar = self.config.mission, self.config.lidar
        if mission.lidar_explore_radius > 0:
            return mission.lidar_explore_radius
        pile = self.config.scenario.pile
        height = max(pile.layers.values()) * max(s.height_m for s in self.specs.values())
        spacing = math.radians(lidar.vertical_fov_deg) / max(1, lidar.rings - 1)
        return min(detection_range(height, spacing), self.config.lidar_perception.max_candidate_range)

    def fit_stack(self) -> Optional[StackEstimate]:
        """Оценка по всем кандидатам без проверки согласованности"""
        if not self.locator.ready:
            return None
        try:
            return self.locator.fit()
        except DegenerateFitError:
            return None

    def accept(self, estimate: Optional[StackEstimate]) -> bool:
        if estimate is None:
            return False
        reason = self.locator.verify(estimate)
        if reason is not None:
            logger.debug(f'Stack estimate rejected: {reason}')
            return False
        return True

    def try_fit(self) -> Optional[StackEstimate]:
        """Оценка штабеля, прошедшая проверку согласованности, или None"""
        estimate = self.fit_stack()
        return estimate if self.accept(estimate) else None

    def forget_stack(self, reason: str):
        """Сброс оценки штабеля и кандидатов вокруг неё; штабель ищется заново"""
        estimate = self.state.stack_estimate
        if estimate is not None:
            dropped = self.locator.discard_near(estimate.mu, 2 * self.config.lidar_perception.stack_radius)
            logger.warning(f'Stack estimate ({estimate.mu[0]:.2f}, {estimate.mu[1]:.2f}) dropped: {reason}, '
                           f'{dropped} candidates discarded')
        self.state.stack_estimate = None
        self.stack_confirmed = False
        self.parked_class = None
        self.state.log('stack_lost', reason)

    def view_again(self, estimate: Optional[StackEstimate], found: List):
        """
        Переезд к точке на расстоянии RESCAN_DISTANCE от предполагаемого штабеля, со сдвигом
        на 45° по окружности (поочерёдно в разные стороны).
        """
        state = self.state
        position = state.reported_pose.position
        reach = self.explore_radius() + self.config.lidar_perception.stack_radius
        if estimate is not None and np.linalg.norm(estimate.mu - position) <= reach:
            target = estimate.mu
        else:
            target = np.mean([c.center for c in found], axis=0)
        away = position - target
        base = math.atan2(away[1], away[0]) if np.linalg.norm(away) > 1e-6 else state.reported_pose.heading
        angle = base + (0.25 if self.rescans % 2 else -0.25) * math.pi
        point = target + RESCAN_DISTANCE * np.array([math.cos(angle), math.sin(angle)])
        point = np.clip(point, 0.5, np.asarray(self.arena.bounds, dtype=float) - 0.5)
        self.drive(Pose2D(point[0], point[1], math.atan2(target[1] - point[1], target[0] - point[0])))

    def camera(self, pose: Pose2D, yaw: float, pitch_deg: float, height: float) -> CameraPose:
        x, y = pose.to_world(self.config.camera.camera_offset)[0]
        return CameraPose.looking((x, y, height), pose.heading + yaw, math.radians(pitch_deg))

    def pattern_in_view(self, camera: CameraPose, intrinsics: Intrinsics) -> bool:
        """Попадает ли в кадр хотя бы одна опорная точка или угол шаблона"""
        pattern = self.arena.pattern
        points = np.vstack([pattern.anchor_points()] + [leg.corners() for leg in pattern.leg_rectangles()])
        origin = np.asarray(camera.position, dtype=float)
        if np.min(np.linalg.norm(points - origin[:2], axis=1)) > self.config.camera.max_render_range:
            return False
        local = (np.column_stack([points, np.zeros(points.shape[0])]) - origin) @ camera.matrix
        uv = intrinsics.project(local)
        inside = (uv[:, 0] >= 0) & (uv[:, 0] < intrinsics.width) & (uv[:, 1] >= 0) & (uv[:, 1] < intrinsics.height)
        return bool(np.any(inside))

    def look(self, yaw: float, pitch_deg: float, height: Optional[float] = None) -> List[PatternSegment]:
        """Кадр RGB с камеры на руке; сегменты шаблона в системе одометрии"""
        height = self.config.camera.elevated_camera_height if height is None else height
        true_camera = self.camera(self.state.true_pose, yaw, pitch_deg, height)
        if not self.pattern_in_view(true_camera, self.rgb_intrinsics):
            return []
        believed = self.camera(self.state.reported_pose, yaw, pitch_deg, height)
        self.frame += 1
        rgb = render_rgb(self.arena, true_camera, self.rgb_intrinsics, self.illumination, self.seed,
                         self.config.camera.max_render_range, self.frame)
        segments = detect_pattern_segments(rgb, believed, self.grid, self.config.pattern)
        self.last_rgb = (rgb, segments)
        return segments

    def record_pattern(self, segments: List[PatternSegment]) -> bool:
        """Запоминает обнаружение; True, если виден весь L-шаблон"""
        full = [s for s in segments if is_full_pattern(s, self.config.pattern)]
        chosen = full[0] if full else max(segments, key=lambda s: s.size)
        self.state.pattern_estimate = chosen.pose
        self.state.pattern_confidence = math.inf
        self.state.pattern_detected = True
        if full:
            scenario = self.config.scenario
            self.pattern_corner = corner_pose_from_center(chosen.pose, scenario.segment_length,
                                                          scenario.segment_width)
        self.state.log('pattern_detected', 'full' if full else 'segment')
        logger.info(f'Pattern {"L" if full else "segment"} detected at ({chosen.pose.x:.2f}, {chosen.pose.y:.2f})')
        return bool(full)

    def look_at(self, target) -> bool:
        """Взгляд на точку с расстояния pattern_standoff с поднятой камерой"""
        mission = self.config.mission
        target = np.asarray(target, dtype=float)
        offset = target - self.state.reported_pose.position
        norm = np.linalg.norm(offset)
        direction = offset / norm if norm > 1e-6 else self.state.reported_pose.direction
        stand = target - mission.pattern_standoff * direction
        self.drive(Pose2D(stand[0], stand[1], math.atan2(direction[1], direction[0])))
        self.spend(mission.spiral_look_time)
        segments = self.look(0.0, self.config.camera.elevated_pitches_deg[0])
        if segments:
            self.record_pattern(segments)
        return bool(segments)

    # Рейсы

    def begin_trip(self) -> bool:
        self.trip_index += 1
        if self.trip_index >= len(self.trips):
            return False
        trip = self.trips[self.trip_index]
        entry_by_slot = {slot: entry for entry, slot in trip.assignment.items()}
        self.pickups = [(entry_by_slot[slot], slot) for slot in trip.pickup_slots]
        self.unload_entries = list(trip.entries)
        self.state.trip = self.trip_index
        self.parked_class = None
        self.state.log('trip', f'{self.trip_index}: {len(self.pickups)} bricks')
        return True

    def _slot_class(self, slot: int) -> BrickClass:
        return BrickClass.ORANGE if slot < 0 else self.state.inventory.slots[slot].brick_class

    def requeue(self) -> List[int]:
        """
        Недоставленные записи плана, которых нет в грузе, планируются заново после текущего рейса.

        :return: Перепланированные записи.
        """
        done = {placed.entry for placed in self.state.placed} | set(self.cargo)
        remaining = [k for k in range(len(self.blueprint)) if k not in done]
        self.trips = self.trips[:self.trip_index + 1] + (self._plan_trips(remaining) if remaining else [])
        self.state.log('replan', f'{len(remaining)} entries in {len(self.trips) - self.trip_index - 1} trips')
        return remaining

    def abort_trip(self, reason: str, stack_suspect: bool = False):
        """
        Отмена оставшихся подборов рейса. Загруженные кирпичи везутся к шаблону, остальные записи
        плана ставятся в новые рейсы. Без груза миссия продолжает исследование.

        :param stack_suspect: Цель не найдена ни разу; неподтверждённая оценка штабеля сбрасывается.
        """
        logger.warning(f'Loading aborted: {reason}')
        self.state.log('abort_loading', reason)
        self.pickups = []
        self.requeue()
        trip = replan_on_failure(self.state, self.state.inventory)
        if trip is not None:
            self.unload_entries = list(trip.entries)
            return
        if stack_suspect and not self.stack_confirmed:
            self.forget_stack(reason)
        if not self.begin_trip():
            self.state.transition(Phase.DONE, 'blueprint complete')

    # Обработчики фаз

    def emergency(self):
        self.state.log('emergency', 'single brick delivery')
        self.state.transition(Phase.EXPLORE)

    def explore(self):
        state = self.state
        if state.cargo_count > 0:
            self.pattern_sweep()
        elif state.stack_estimate is not None:
            state.transition(Phase.APPROACH_STACK, 'stack known')
        else:
            self.stack_sweep()

    def stack_sweep(self):
        """Следующая точка обзора LiDAR; при уверенной оценке штабеля - подъезд к нему"""
        state = self.state
        if state.visited >= len(state.waypoints):
            shift = 0.5 * (self.sweeps % 2)
            self.sweeps += 1
            state.waypoints = coverage_waypoints(self.arena.bounds, self.explore_radius(), shift)
            state.visited = 0
            set_priority_areas(state, state.priority_areas)
        goal = state.waypoints[state.visited]
        state.visited += 1
        self.drive(goal)
        state.log('waypoint', f'{state.visited}/{len(state.waypoints)}')
        found = self.lidar_scan()
        estimate = self.fit_stack()
        accepted = self.accept(estimate)
        self.rescans = 0
        while not accepted and found and self.rescans < MAX_RESCANS:
            # оценка не подтверждена: второй скан ближе и с другой стороны
            self.rescans += 1
            self.view_again(estimate, found)
            found = self.lidar_scan()
            estimate = self.fit_stack()
            accepted = self.accept(estimate)
        if accepted:
            state.stack_estimate = estimate
            state.log('stack_estimate', f'({estimate.mu[0]:.2f}, {estimate.mu[1]:.2f}) {estimate.phi:.3f}')
            state.transition(Phase.APPROACH_STACK)

    def pattern_sweep(self):
        """Обзор с поднятой камерой в узлах сетки, пока шаблон не найден"""
        state = self.state
        if state.pattern_estimate is not None:
            state.transition(Phase.NAVIGATE_TO_PATTERN, 'pattern estimate known')
            return
        if self.site_index >= len(self.pattern_sites):
            shift = 0.5 * (self.pattern_sweeps % 2)
            self.pattern_sweeps += 1
            self.pattern_sites = prioritize(coverage_waypoints(self.arena.bounds, self.config.mission.pattern_scan_radius,
                                                               shift), state.priority_areas)
            self.site_index = 0
        goal = self.pattern_sites[self.site_index]
        self.site_index += 1
        self.drive(goal)
        if state.phase != Phase.EXPLORE:
            return
        self.spend(self.config.mission.elevated_scan_time)
        if state.phase != Phase.EXPLORE:
            return
        state.log('elevated_scan', f'site {self.site_index}/{len(self.pattern_sites)}')
        camera = self.config.camera
        for pitch in camera.elevated_pitches_deg:
            for k in range(camera.elevated_headings):
                segments = self.look(2.0 * math.pi * k / camera.elevated_headings, pitch)
                if segments:
                    self.record_pattern(segments)
                    state.transition(Phase.NAVIGATE_TO_PATTERN, 'pattern seen')
                    return

    def approach_stack(self):
        """
        Подъезд к красной группе с запасом и уточнение оценки по скану вблизи. Неподтверждённая
        оценка, которую не поддерживает скан с точки подъезда, сбрасывается.
        """
        state = self.state
        lp = self.config.lidar_perception
        goal = class_waypoint(state.stack_estimate, self.offsets, BrickClass.RED, lp.standoff + 1.5)
        self.drive(goal)
        found = self.lidar_scan()
        try:
            estimate = self.locator.fit(init=state.stack_estimate)
        except DegenerateFitError:
            self.forget_stack('refit is degenerate')
            state.transition(Phase.EXPLORE, 'stack estimate lost')
            return
        reason = self.locator.verify(estimate)
        seen = [c for c in found if np.linalg.norm(c.center - estimate.mu) <= lp.stack_radius]
        if reason is None and len(seen) < 2:
            reason = 'stack not seen from the approach point'
        if reason is None:
            state.stack_estimate = estimate
        elif self.stack_confirmed:
            logger.info(f'Keeping confirmed stack estimate: {reason}')
        else:
            self.forget_stack(reason)
            state.transition(Phase.EXPLORE, 'stack estimate rejected')
            return
        self.axis_refined = False
        self.parked_class = None
        state.transition(Phase.ALIGN_STACK)

    def refine_axis(self):
        """Уточнение курса штабеля по самой длинной прямой нижнего среза (RANSAC)"""
        state, lp = self.state, self.config.lidar_perception
        self.axis_refined = True
        if self.last_scan is None:
            return
        scan, pose = self.last_scan
        points = brick_band(slice_cloud(scan, lp.slice_threshold)[1], lp.band).world_points(pose)[:, :2]
        estimate = state.stack_estimate
        points = points[np.linalg.norm(points - estimate.mu, axis=1) <= lp.stack_radius]
        try:
            _, direction, inliers = ransac_major_axis(points, lp.ransac_iterations, lp.ransac_eps, self.seed)
        except DegenerateLineError:
            return
        if direction @ estimate.direction < 0:
            direction = -direction
        phi = math.atan2(direction[1], direction[0])
        if abs(normalize_angle(phi - estimate.phi)) < math.radians(20.0):
            state.stack_estimate = replace(estimate, phi=phi)
            state.log('stack_axis', f'{inliers} inliers, phi {phi:.3f}')

    def align_stack(self):
        state = self.state
        if not self.pickups:
            if state.cargo_count == 0:
                if not self.begin_trip():
                    state.transition(Phase.DONE, 'no trips left')
                return
            target = Phase.NAVIGATE_TO_PATTERN if state.pattern_estimate is not None else Phase.EXPLORE
            state.transition(target, 'trip loaded')
            return
        if not self.axis_refined:
            self.refine_axis()
        _, slot = self.pickups[0]
        brick_class = self._slot_class(slot)
        if brick_class != self.parked_class:
            goal = class_waypoint(state.stack_estimate, self.offsets, brick_class,
                                  self.config.lidar_perception.standoff)
            self.park(goal)
            self.parked_class = brick_class
        state.transition(Phase.LOAD, brick_class.value)

    def load(self):
        state = self.state
        entry, slot = self.pickups[0]
        brick_class = self._slot_class(slot)
        result, picked, motion = grasp_cycle(self.arena, state.true_pose, state.reported_pose, brick_class,
                                             self.config, self.memory, self.seed, self.grasp_tick)
        self.grasp_tick += 1
        state.grasp_results.append(result)
        self._move(motion, arm_extended=True)
        self.spend(result.duration)
        state.log('grasp', f'{result.outcome.value}: {result.reason}')

        if result.outcome == GraspOutcome.LOADED:
            self.arena = self.arena.without([picked.brick_id])
            self.cargo[entry] = picked
            if slot >= 0:
                state.inventory = state.inventory.load(slot, picked.brick_id)
                state.loaded.append((entry, slot, brick_class))
            else:
                state.carried = (entry, slot, brick_class)
            self.pickups.pop(0)
            self.no_target = 0
            self.stack_confirmed = True
            state.transition(Phase.ALIGN_STACK, f'loaded {brick_class.value}')
            return
        if result.reason in ('no_target', 'target_lost'):
            self.no_target += 1
            if self.no_target >= MAX_NO_TARGET:
                self.no_target = 0
                self.abort_trip(f'no {brick_class.value} bricks in reach',
                                stack_suspect=result.reason == 'no_target')
            return
        if result.outcome == GraspOutcome.MARKED_INVALID and self.config.mission.abort_on_invalid:
            self.abort_trip(f'{brick_class.value} brick marked invalid')

    def navigate_to_pattern(self):
        state = self.state
        if self.pattern_corner is not None:
            state.transition(Phase.ALIGN_PATTERN, 'corner known')
            return
        if state.pattern_estimate is None:
            state.transition(Phase.EXPLORE, 'no pattern estimate')
            return
        if self.look_at(state.pattern_estimate.position):
            state.transition(Phase.ALIGN_PATTERN)
        else:
            state.transition(Phase.SPIRAL_SEARCH)

    def spiral_search(self) -> List[Pose2D]:
        """
        Взгляды вокруг оценки шаблона по спирали. Найден шаблон - выравнивание,
        спираль исчерпана - снова исследование.

        :return: Позы, из которых робот смотрел на точки спирали.
        """
        state, mission = self.state, self.config.mission
        center = state.pattern_estimate.position
        trajectory = []
        for point in spiral_points(center, mission.spiral_spacing, mission.spiral_step, mission.spiral_cap)[1:]:
            found = self.look_at(point)
            trajectory.append(state.reported_pose)
            if found:
                state.transition(Phase.ALIGN_PATTERN, f'spiral look {len(trajectory)}')
                return trajectory
        state.pattern_estimate = None
        state.pattern_confidence = -1.0
        state.pattern_detected = False
        state.transition(Phase.EXPLORE, 'spiral exhausted')
        return trajectory

    def close_look(self) -> bool:
        """Осмотр шаблона с близкого расстояния, пока не виден весь L"""
        state, camera, mission = self.state, self.config.camera, self.config.mission
        target = state.pattern_estimate.position
        offset = target - state.reported_pose.position
        norm = np.linalg.norm(offset)
        direction = offset / norm if norm > 1e-6 else state.reported_pose.direction
        stand = target - (mission.pattern_standoff - 1.0) * direction
        self.drive(Pose2D(stand[0], stand[1], math.atan2(direction[1], direction[0])))
        self.spend(mission.spiral_look_time)
        views = [(0.0, camera.folded_pitch_deg, camera.folded_camera_height)]
        views += [(yaw, pitch, None) for pitch in camera.elevated_pitches_deg for yaw in (0.0, -0.5, 0.5)]
        for k, (yaw, pitch, height) in enumerate(views):
            if k == 1:
                self.spend(mission.spiral_look_time)
            segments = self.look(yaw, pitch, height)
            if segments and self.record_pattern(segments):
                return True
        return False

    def align_pattern(self):
        state = self.state
        if self.pattern_corner is None and not self.close_look():
            self.align_failures += 1
            if self.align_failures < MAX_ALIGN_FAILURES:
                state.transition(Phase.SPIRAL_SEARCH, 'L not confirmed')
                return
            # угол по одной полосе: считается, что видна первая полоса
            leg = state.pattern_estimate
            width = self.config.scenario.segment_width
            corner = leg.position - leg.direction * 0.5 * self.config.scenario.segment_length \
                - leg.left_normal * 0.5 * width
            self.pattern_corner = Pose2D(corner[0], corner[1], leg.heading)
            state.log('pattern_corner', 'from single segment')
        self.align_failures = 0
        state.transition(Phase.UNLOAD)

    def place(self, entry: int, slot: int):
        state, mission = self.state, self.config.mission
        brick = self.cargo.pop(entry)
        item = self.blueprint.entries[entry]
        corner = self.pattern_corner
        target = corner.to_world([item.position, 0.5 * self.config.scenario.segment_width])[0]
        goal_xy = target + self.config.lidar_perception.standoff * corner.left_normal
        self.park(Pose2D(goal_xy[0], goal_xy[1], corner.heading))
        self.spend(mission.unload_time)

        local = state.reported_pose.to_local([target])[0]
        rng = stream(self.seed, 'place', entry, self.trip_index)
        noise = truncnorm.rvs(-3.0, 3.0, loc=0.0, scale=max(mission.descent_sigma, 1e-12), size=2,
                              random_state=rng)
        xy = state.true_pose.to_world([local])[0] + noise
        heading = corner.heading + state.true_pose.heading - state.reported_pose.heading
        pose = Pose2D(xy[0], xy[1], heading)
        truth = self.arena.pattern
        intended = truth.corner_pose.to_world([item.position, 0.5 * truth.segment_width_m])[0]
        error = float(np.linalg.norm(xy - intended))

        if slot >= 0:
            state.inventory = state.inventory.unload(slot)
            state.loaded = [l for l in state.loaded if l[0] != entry]
        else:
            state.carried = None
        self.arena = self.arena.with_placed(BrickInstance(brick.brick_id, brick.spec, pose, 0,
                                                          brick.has_ferrous_plate))
        state.placed.append(PlacedBrick(brick.brick_id, brick.brick_class, entry, pose, error, state.clock))
        state.log('placed', f'{brick.brick_class.value} entry {entry} error {error:.3f}')
        logger.info(f'Placed {brick.brick_class.value} brick {brick.brick_id} (error {error:.3f} m)')

    def unload(self):
        state = self.state
        slots = {entry: slot for entry, slot, _ in state.loaded}
        if state.carried is not None:
            slots[state.carried[0]] = state.carried[1]
        for entry in self.unload_entries:
            if entry in slots:
                self.place(entry, slots[entry])
        self.unload_entries = []
        if not self.begin_trip():
            state.transition(Phase.DONE, 'blueprint complete')
        elif state.stack_estimate is not None:
            state.transition(Phase.APPROACH_STACK, f'trip {self.trip_index}')
        else:
            state.transition(Phase.EXPLORE, f'trip {self.trip_index}')

    # Запуск

    def run(self) -> MissionReport:
        state = self.state
        state.log('start', f'seed {self.seed}')
        logger.info(f'Mission started: {len(self.blueprint)} bricks in {len(self.trips)} trips')
        idle, clock = 0, state.clock
        try:
            self.poll_assist()
            if not self.begin_trip():
                state.transition(Phase.DONE, 'empty blueprint')
            while state.phase != Phase.DONE:
                self.handlers[state.phase]()
                idle = idle + 1 if state.clock == clock else 0
                clock = state.clock
                if idle > MAX_IDLE_STEPS:
                    logger.error(f'Mission stalled in {state.phase.value}')
                    state.failed = True
                    state.transition(Phase.DONE, 'stalled')
        except MissionTimeout as e:
            logger.info(f'Time limit reached: {e}')
            state.log('timeout')
            state.transition(Phase.DONE, 'time limit')
        return self.report()

    def report(self) -> MissionReport:
        state = self.state
        stack_error = None
        if state.stack_estimate is not None:
            truth = self.arena.stack_pose
            stack_error = (float(np.linalg.norm(state.stack_estimate.mu - truth.position)),
                           float(abs(normalize_angle(state.stack_estimate.phi - truth.heading))))
        logger.info(f'Mission finished at {state.clock:.0f} s: {len(state.placed)} bricks placed')
        return MissionReport(placed=list(state.placed), phase_durations=dict(state.phase_durations),
                             events=list(state.events), clock=state.clock, final_phase=state.phase.value,
                             pattern_search_time=state.pattern_search_time,
                             grasp_results=list(state.grasp_results), stack_error=stack_error,
                             distance=state.distance)


def run_mission(arena: Arena, config: SimulationConfig, seed: int = 0,
                assist: Optional[AssistChannel] = None) -> MissionReport:
    """Полный прогон миссии; результат детерминирован для (arena, config, seed)"""
    return Mission(arena, config, seed, assist).run()


def spiral_search(mission: Mission) -> List[Pose2D]:
    """Поиск шаблона по спирали вокруг текущей оценки"""
    if mission.state.pattern_estimate is None:
        raise ValueError('Spiral search needs a pattern estimate')
    return mission.spiral_search()
