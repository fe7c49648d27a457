import json

import numpy as np
import pandas as pd
import pytest

from app.Model.Arena import empty_arena
from app.Model.Config import SimulationConfig
from app.Model.Geometry import Pose2D
from app.Model.Mission import AssistMessage
from app.Reader.Reader import Reader
from app.Reader.Writer import Writer
from app.arena_model import generate_arena
from app.errors import ArtifactError, ConfigurationError
from app.pattern_vision.lookup import build_lookup, default_calibration
from app.sensor_sim.lidar import simulate_lidar


def write_run_files(run_dir, with_events=True):
    Writer.write_json(str(run_dir / 'manifest.json'), {'seed': 3})
    Writer.write_json(str(run_dir / 'report.json'), {'format_version': 1, 'placed_count': 0})
    Writer.write_json(str(run_dir / 'config.json'), SimulationConfig().to_dict())
    Writer.write_json(str(run_dir / 'arena.json'), generate_arena(3).to_dict())
    if with_events:
        events = pd.DataFrame({'tick': [0, 1], 'phase': ['Explore', 'Explore'], 'event': ['start', 'enter']})
        Writer.write_table(str(run_dir / 'events.csv'), 'events', events, {'seed': 3})


class TestJson:
    def test_sorted_and_readable(self, tmp_path):
        path = tmp_path / 'nested' / 'data.json'
        Writer.write_json(str(path), {'b': 1, 'a': [1.5, 2]})
        text = path.read_text(encoding='utf-8')
        assert text.index('"a"') < text.index('"b"')
        assert Reader.read_json(str(path)) == {'a': [1.5, 2], 'b': 1}

    def test_missing_file(self, tmp_path):
        with pytest.raises(ArtifactError):
            Reader.read_json(str(tmp_path / 'absent.json'))

    def test_invalid_json(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"a": ', encoding='utf-8')
        with pytest.raises(ConfigurationError):
            Reader.read_json(str(path))


class TestScenario:
    @pytest.mark.parametrize('name', ['default', 'emergency'])
    def test_builtin(self, name):
        config = Reader.read_scenario(name)
        assert isinstance(config, SimulationConfig)
        assert config.mission.emergency == (name == 'emergency')

    def test_version_is_checked(self, tmp_path):
        path = tmp_path / 'future.json'
        path.write_text(json.dumps({'format_version': 2, 'config': {}}), encoding='utf-8')
        with pytest.raises(ConfigurationError):
            Reader.read_scenario(str(path))

    def test_unknown_key(self, tmp_path):
        path = tmp_path / 'typo.json'
        path.write_text(json.dumps({'format_version': 1, 'config': {'mission': {'tme_limit': 5}}}), encoding='utf-8')
        with pytest.raises(ConfigurationError):
            Reader.read_scenario(str(path))

    def test_missing_scenario(self):
        with pytest.raises(ArtifactError):
            Reader.read_scenario('no-such-scenario.json')


class TestTables:
    def test_header_and_values(self, tmp_path):
        path = tmp_path / 'table.csv'
        frame = pd.DataFrame({'sigma': [0.0, 0.05], 'rate': [1.0, 0.123456789], 'count': [3, 4]})
        Writer.write_table(str(path), 'classification', frame, {'seeds': [0, 1]})
        assert path.read_text(encoding='utf-8').splitlines()[0] == '# classification v1 {"seeds":[0,1]}'
        kind, manifest, restored = Reader.read_table(str(path))
        assert kind == 'classification'
        assert manifest == {'seeds': [0, 1]}
        assert restored['count'].tolist() == [3, 4]
        assert restored['rate'].tolist() == pytest.approx([1.0, 0.123457])

    def test_missing_header(self, tmp_path):
        path = tmp_path / 'plain.csv'
        path.write_text('a,b\n1,2\n', encoding='utf-8')
        with pytest.raises(ArtifactError):
            Reader.read_table(str(path))


class TestAssistFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / 'assist.ndjson'
        messages = [AssistMessage('uav-1', Pose2D(10.0, 12.0, 0.5), 0.8, 240.0),
                    AssistMessage('uav-1', Pose2D(10.5, 11.5, 0.5), 0.8, 300.0)]
        Writer.write_assist(str(path), messages)
        assert Reader.read_assist(str(path)) == messages

    def test_blank_lines_are_skipped(self, tmp_path):
        path = tmp_path / 'assist.ndjson'
        record = AssistMessage('uav-1', Pose2D(1.0, 2.0), 0.5, 1.0).to_dict()
        path.write_text('\n' + json.dumps(record) + '\n\n', encoding='utf-8')
        assert len(Reader.read_assist(str(path))) == 1

    def test_bad_line_reports_position(self, tmp_path):
        path = tmp_path / 'assist.ndjson'
        record = AssistMessage('uav-1', Pose2D(1.0, 2.0), 0.5, 1.0).to_dict()
        path.write_text(json.dumps(record) + '\n{oops\n', encoding='utf-8')
        with pytest.raises(ConfigurationError, match=':2'):
            Reader.read_assist(str(path))

    def test_schema_is_checked(self, tmp_path):
        path = tmp_path / 'assist.ndjson'
        record = AssistMessage('uav-1', Pose2D(1.0, 2.0), 0.5, 1.0).to_dict()
        record['schema'] = 7
        path.write_text(json.dumps(record) + '\n', encoding='utf-8')
        with pytest.raises(ValueError):
            Reader.read_assist(str(path))


class TestBinaryArtifacts:
    def test_lookup_file(self, tmp_path):
        path = tmp_path / 'lookup.bblut'
        grid = build_lookup(default_calibration(), resolution=16)
        Writer.write_lookup(str(path), grid)
        restored = Reader.read_lookup(str(path))
        np.testing.assert_array_equal(restored.labels, grid.labels)
        with pytest.raises(ArtifactError):
            Reader.read_lookup(str(tmp_path / 'absent.bblut'))

    def test_ply(self, tmp_path):
        path = tmp_path / 'scan.ply'
        scan = simulate_lidar(empty_arena(), Pose2D(5.0, 5.0, 0.0), timestamp=2.0)
        Writer.write_ply(str(path), scan)
        lines = path.read_text(encoding='utf-8').splitlines()
        assert lines[0] == 'ply'
        assert 'comment format_version 1' in lines
        assert f'element vertex {len(scan)}' in lines
        body = lines[lines.index('end_header') + 1:]
        assert len(body) == len(scan)
        assert len(body[0].split()) == 6

    def test_images(self, tmp_path):
        path = tmp_path / 'frame.ppm'
        Writer.write_ppm(str(path), np.zeros((4, 6, 3), dtype=np.uint8))
        assert path.read_bytes().startswith(b'P6')
        gray = tmp_path / 'height.pgm'
        Writer.write_gray_pgm(str(gray), np.full((4, 6), 128, dtype=np.uint8))
        assert gray.read_bytes().startswith(b'P5')


class TestRunDirectory:
    def test_read_run(self, tmp_path):
        write_run_files(tmp_path)
        run = Reader.read_run(str(tmp_path))
        assert run['manifest'] == {'seed': 3}
        assert isinstance(run['config'], SimulationConfig)
        assert run['events']['event'].tolist() == ['start', 'enter']
        assert run['candidates'] is None

    def test_events_are_required(self, tmp_path):
        write_run_files(tmp_path, with_events=False)
        with pytest.raises(ArtifactError):
            Reader.read_run(str(tmp_path))

    def test_missing_directory(self, tmp_path):
        with pytest.raises(ArtifactError):
            Reader.read_run(str(tmp_path / 'absent'))
