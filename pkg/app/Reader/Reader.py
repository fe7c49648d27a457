import json
import os.path
from typing import List, Optional, Tuple

import pandas as pd

from app.Model.Arena import Arena
from app.Model.Config import SimulationConfig
from app.Model.Mission import AssistMessage
from app.Model.Perception import ColorLookupGrid
from app.errors import ArtifactError, ConfigurationError
from app.pattern_vision.lookup import grid_from_bytes


class Reader:
    """
    Статический класс Reader.

    Назначение:
        Чтение сценариев, дампов арены, сообщений UAV и артефактов прогона.
        Встроенные сценарии 'default' и 'emergency' лежат в каталоге data_scenario.

    Методы:
        - read_json(file_path): Читает JSON-файл.
        - read_scenario(name_or_path): Конфигурация сценария.
        - read_arena(file_path): Арена из дампа.
        - read_assist(file_path): Сообщения UAV из NDJSON.
        - read_table(file_path): CSV-таблица с заголовком-комментарием.
        - read_lookup(file_path): Таблица цветов.
        - read_run(run_dir): Все артефакты прогона.
    """
    _dir_path_scenarios = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', '..', 'data_scenario')
    _list_builtin_scenarios = ['default', 'emergency']
    SCENARIO_FORMAT = 1

    @staticmethod
    def read_text_file(file_path: str) -> str:
        if not os.path.isfile(file_path):
            raise ArtifactError(f'File not found: {file_path}')
        with open(file_path, 'r', encoding='utf-8') as file:
            return file.read()

    @staticmethod
    def read_json(file_path: str) -> dict:
        text = Reader.read_text_file(file_path)
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f'Invalid JSON in {file_path}: {e}') from e

    @staticmethod
    def scenario_path(name_or_path: str) -> str:
        if name_or_path in Reader._list_builtin_scenarios:
            return os.path.normpath(os.path.join(Reader._dir_path_scenarios, f'{name_or_path}.json'))
        return name_or_path

    @staticmethod
    def read_scenario(name_or_path: str = 'default') -> SimulationConfig:
        """
        Конфигурация сценария: {"format_version": 1, "name": ..., "config": {...}}.

        :raises ConfigurationError: Неверная версия или неизвестные ключи.
        :raises ArtifactError: Файл не найден.
        """
        data = Reader.read_json(Reader.scenario_path(name_or_path))
        if data.get('format_version') != Reader.SCENARIO_FORMAT:
            raise ConfigurationError(f'Unsupported scenario format version: {data.get("format_version")}')
        return SimulationConfig.from_dict(data.get('config', {}))

    @staticmethod
    def read_arena(file_path: str) -> Arena:
        data = Reader.read_json(file_path)
        try:
            return Arena.from_dict(data)
        except (KeyError, TypeError) as e:
            raise ConfigurationError(f'Invalid arena dump {file_path}: {e}') from e

    @staticmethod
    def read_assist(file_path: str) -> List[AssistMessage]:
        """Сообщения UAV, по одной записи JSON в строке; пустые строки пропускаются"""
        messages = []
        for number, line in enumerate(Reader.read_text_file(file_path).splitlines(), start=1):
            if not line.strip():
                continue
            try:
                messages.append(AssistMessage.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as e:
                raise ConfigurationError(f'Invalid assist record at {file_path}:{number}: {e}') from e
        return messages

    @staticmethod
    def read_table(file_path: str) -> Tuple[str, dict, pd.DataFrame]:
        """
        :return: (вид таблицы, манифест, данные)
        """
        if not os.path.isfile(file_path):
            raise ArtifactError(f'Table not found: {file_path}')
        with open(file_path, 'r', encoding='utf-8') as file:
            header = file.readline().rstrip('\n')
            parts = header.split(' ', 3)
            if len(parts) < 3 or parts[0] != '#' or parts[2] != 'v1':
                raise ArtifactError(f'Table {file_path} has no version header')
            manifest = json.loads(parts[3]) if len(parts) == 4 else {}
            frame = pd.read_csv(file)
        return parts[1], manifest, frame

    @staticmethod
    def read_lookup(file_path: str) -> ColorLookupGrid:
        if not os.path.isfile(file_path):
            raise ArtifactError(f'Lookup grid not found: {file_path}')
        with open(file_path, 'rb') as file:
            return grid_from_bytes(file.read())

    @staticmethod
    def read_run(run_dir: str, tables: Optional[List[str]] = None) -> dict:
        """
        Артефакты прогона: manifest, report, config, arena и таблицы (events, candidates, em).

        :raises ArtifactError: Если каталог или обязательный файл отсутствует.
        """
        if not os.path.isdir(run_dir):
            raise ArtifactError(f'Run directory not found: {run_dir}')
        result = {'manifest': Reader.read_json(os.path.join(run_dir, 'manifest.json')),
                  'report': Reader.read_json(os.path.join(run_dir, 'report.json')),
                  'config': SimulationConfig.from_dict(Reader.read_json(os.path.join(run_dir, 'config.json'))),
                  'arena': Reader.read_arena(os.path.join(run_dir, 'arena.json'))}
        for name in tables or ['events', 'candidates', 'em']:
            path = os.path.join(run_dir, f'{name}.csv')
            result[name] = Reader.read_table(path)[2] if os.path.isfile(path) else None
        if result['events'] is None:
            raise ArtifactError(f'Event log missing in {run_dir}')
        return result
