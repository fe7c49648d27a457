"""
Brick-Builder: симулятор наземного робота для постройки стены из кирпичей.

Usage:
  brickbuild run [--scenario=<name>] [--seed=<n>] [--set=<kv>]... [--emergency] [--assist | --no-assist]
                 [--illumination=<preset>] [--dump-frames] [--out=<dir>] [--verbose]
  brickbuild replay-assist <assist_file> [--scenario=<name>] [--seed=<n>] [--set=<kv>]... [--dump-frames]
                 [--out=<dir>] [--verbose]
  brickbuild eval-classification [--scenario=<name>] [--seeds=<range>] [--noise=<list>] [--isolated]
                 [--jobs=<n>] [--set=<kv>]... [--out=<dir>] [--verbose]
  brickbuild render <run_dir> [--frames=<range>] [--verbose]
  brickbuild gen-arena [--scenario=<name>] [--seed=<n>] [--set=<kv>]... [--out=<dir>] [--verbose]
  brickbuild (-h | --help)
  brickbuild --version

Options:
  --scenario=<name>         Встроенный сценарий (default, emergency) или путь к JSON [default: default].
  --seed=<n>                Зерно прогона; по умолчанию scenario.seed.
  --set=<kv>                Переопределение параметра, например mission.drive_speed=0.8.
  --emergency               Аварийный режим: один красный кирпич по эмулированной подсказке UAV.
  --assist                  Включить подсказки UAV.
  --no-assist               Выключить подсказки UAV.
  --illumination=<preset>   Освещение камеры (noon, night, sunset).
  --dump-frames             Сохранить последние кадры датчиков и отладочные изображения.
  --out=<dir>               Корневой каталог вывода; по умолчанию $BRICKBUILD_OUT или out.
  --seeds=<range>           Зёрна: 0:20 или 1,2,3 [default: 0:20].
  --noise=<list>            СКО шума дальности, м [default: 0,0.02,0.05,0.1].
  --isolated                Сцены с одиночным кирпичом.
  --jobs=<n>                Число процессов [default: 1].
  --frames=<range>          Кадры: 3 или 0:10; по умолчанию все.
  --verbose                 Отладочный журнал.
  -h --help                 Показать справку.
  --version                 Показать версию.

Коды завершения: 0 успех, 2 ошибка конфигурации, 3 ошибка выполнения.
"""
import dataclasses
import json
import os
import os.path
import sys
from typing import Dict, List, Optional, Tuple

import pandas as pd
from docopt import DocoptExit, docopt
from loguru import logger

from app import __version__
from app.Model.Config import RunManifest, SimulationConfig, apply_overrides
from app.Model.Mission import MissionReport
from app.Reader.Reader import Reader
from app.Reader.Writer import Writer
from app.arena_model.generator import generate_arena
from app.depth_vision import debug_height_image, segment_table
from app.harness.evaluation import evaluate_classification
from app.harness.render import render_run
from app.lidar_perception.pipeline import candidate_table, em_history_table
from app.mission_control.assist import AssistChannel
from app.mission_control.mission import Mission
from app.pattern_vision import overlay_image

EVENT_COLUMNS = ['tick', 'phase', 'event', 'x', 'y', 'heading', 'clock', 'detail']
LOG_FORMAT = '{time:HH:mm:ss.SSS} | {level: <8} | {name}:{line} - {message}'


def parse_overrides(items: List[str]) -> Dict[str, object]:
    """'key=value' -> {key: value}; значение читается как JSON, иначе остаётся строкой"""
    result = {}
    for item in items:
        key, sep, text = item.partition('=')
        if not sep or not key:
            raise ValueError(f'Override must look like key=value: {item!r}')
        try:
            result[key] = json.loads(text)
        except json.JSONDecodeError:
            result[key] = text
    return result


def parse_seeds(text: str) -> List[int]:
    if ':' in text:
        start, stop = text.split(':', 1)
        return list(range(int(start or 0), int(stop)))
    return [int(item) for item in text.split(',') if item.strip()]


def scenario_name(name_or_path: str) -> str:
    return os.path.splitext(os.path.basename(name_or_path))[0]


def output_root(args: dict) -> str:
    return args['--out'] or os.environ.get('BRICKBUILD_OUT', 'out')


def configure_logging(verbose: bool):
    logger.remove()
    logger.add(sys.stderr, level='DEBUG' if verbose else 'INFO', format=LOG_FORMAT)


def load_config(args: dict) -> Tuple[SimulationConfig, Dict[str, object]]:
    """Сценарий с учётом флагов и --set; флаги записываются в переопределения манифеста"""
    overrides = parse_overrides(args['--set'])
    if args.get('--emergency'):
        overrides.update({'mission.emergency': True, 'mission.emulated_assist': True})
    if args.get('--assist'):
        overrides['mission.assist'] = True
    if args.get('--no-assist'):
        overrides['mission.assist'] = False
    if args.get('--illumination'):
        overrides['mission.illumination'] = args['--illumination']
    config = apply_overrides(Reader.read_scenario(args['--scenario']), overrides)
    return config, overrides


def write_run(run_dir: str, mission: Mission, arena, report: MissionReport, manifest: RunManifest,
              dump_frames: bool):
    header = manifest.to_dict()
    Writer.write_json(os.path.join(run_dir, 'manifest.json'), header)
    Writer.write_json(os.path.join(run_dir, 'config.json'), mission.config.to_dict())
    Writer.write_json(os.path.join(run_dir, 'arena.json'), arena.to_dict())
    report.manifest = header
    Writer.write_json(os.path.join(run_dir, 'report.json'), report.to_dict())

    events = pd.DataFrame([dataclasses.asdict(e) for e in report.events], columns=EVENT_COLUMNS)
    Writer.write_table(os.path.join(run_dir, 'events.csv'), 'events', events, header)
    estimate = mission.state.stack_estimate
    Writer.write_table(os.path.join(run_dir, 'candidates.csv'), 'candidates',
                       candidate_table(mission.locator.candidates, estimate), header)
    if estimate is not None:
        Writer.write_table(os.path.join(run_dir, 'em.csv'), 'em', em_history_table(estimate), header)

    if dump_frames:
        write_frames(os.path.join(run_dir, 'frames'), mission, header)


def write_frames(frames_dir: str, mission: Mission, header: dict):
    """Последние кадры каждого датчика и отладочные изображения конвейеров восприятия"""
    if mission.last_scan is not None:
        scan, pose = mission.last_scan
        Writer.write_ply(os.path.join(frames_dir, 'last_scan.ply'), scan, pose)
    if mission.memory.last_frame is not None:
        depth, result, frame = mission.memory.last_frame
        Writer.write_depth_pgm(os.path.join(frames_dir, 'last_depth.pgm'), depth)
        Writer.write_gray_pgm(os.path.join(frames_dir, 'last_height.pgm'),
                              debug_height_image(result.height, result.segments))
        Writer.write_table(os.path.join(frames_dir, 'segments.csv'), 'segments',
                           segment_table(result.segments, frame), header)
    if mission.last_rgb is not None:
        rgb, segments = mission.last_rgb
        Writer.write_ppm(os.path.join(frames_dir, 'last_rgb.ppm'), rgb.rgb)
        Writer.write_ppm(os.path.join(frames_dir, 'last_pattern.ppm'), overlay_image(rgb.rgb, segments))
    Writer.write_lookup(os.path.join(frames_dir, 'lookup.bblut'), mission.grid)


def cmd_run(args: dict, assist: Optional[AssistChannel] = None, command: str = 'run') -> MissionReport:
    """
    Прогон миссии и запись артефактов в <out>/<сценарий>-seed<зерно>/.

    :return: Отчёт миссии.
    """
    config, overrides = load_config(args)
    seed = int(args['--seed']) if args['--seed'] is not None else config.scenario.seed
    run_dir = os.path.join(output_root(args), f'{scenario_name(args["--scenario"])}-seed{seed}')
    os.makedirs(run_dir, exist_ok=True)
    manifest = RunManifest(scenario=args['--scenario'], seed=seed, overrides=overrides, output_dir=run_dir,
                           tool_version=__version__, command=command)

    sink = logger.add(os.path.join(run_dir, 'run.log'), level='DEBUG', format=LOG_FORMAT, mode='w')
    try:
        arena = generate_arena(seed, config.scenario)
        mission = Mission(arena, config, seed, assist)
        report = mission.run()
        write_run(run_dir, mission, arena, report, manifest, args.get('--dump-frames', False))
    finally:
        logger.remove(sink)
    print(f'{run_dir}: {report.placed_count} bricks placed in {report.clock:.1f} s ({report.final_phase})')
    return report


def cmd_replay_assist(args: dict) -> MissionReport:
    channel = AssistChannel(Reader.read_assist(args['<assist_file>']))
    logger.info(f'Replaying {len(channel)} assist messages')
    return cmd_run(args, channel, command='replay-assist')


def cmd_eval_classification(args: dict) -> pd.DataFrame:
    """Таблица точности классификации кандидатов по уровням шума"""
    config, overrides = load_config(args)
    seeds = parse_seeds(args['--seeds'])
    sigmas = [float(item) for item in args['--noise'].split(',') if item.strip()]
    table = evaluate_classification(seeds, sigmas, config, args['--isolated'], int(args['--jobs']))
    manifest = RunManifest(scenario=args['--scenario'], seed=seeds[0] if seeds else 0, overrides=overrides,
                           output_dir=output_root(args), tool_version=__version__,
                           command='eval-classification')
    kind = 'classification_isolated' if args['--isolated'] else 'classification'
    path = os.path.join(output_root(args), f'{kind}.csv')
    Writer.write_table(path, kind, table, manifest.to_dict())
    print(table.to_string(index=False))
    logger.info(f'Classification table written to {path}')
    return table


def cmd_render(args: dict) -> List[str]:
    paths = render_run(args['<run_dir>'], args['--frames'])
    logger.info(f'Rendered {len(paths)} frames into {os.path.join(args["<run_dir>"], "render")}')
    return paths


def cmd_gen_arena(args: dict) -> str:
    config, _ = load_config(args)
    seed = int(args['--seed']) if args['--seed'] is not None else config.scenario.seed
    path = os.path.join(output_root(args), f'arena-{scenario_name(args["--scenario"])}-seed{seed}.json')
    Writer.write_json(path, generate_arena(seed, config.scenario).to_dict())
    print(path)
    return path


COMMANDS = {
    'run': cmd_run,
    'replay-assist': cmd_replay_assist,
    'eval-classification': cmd_eval_classification,
    'render': cmd_render,
    'gen-arena': cmd_gen_arena,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = docopt(__doc__, argv=argv, version=f'Brick-Builder {__version__}')
    except DocoptExit as e:
        print(e, file=sys.stderr)
        return 2
    except SystemExit:
        return 0
    configure_logging(args['--verbose'])
    command = next(name for name in COMMANDS if args.get(name))
    try:
        COMMANDS[command](args)
    except ValueError as e:
        logger.error(f'Configuration error: {e}')
        return 2
    except Exception as e:
        logger.exception(f'{command} failed: {e}')
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
