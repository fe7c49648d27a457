import json

import pytest

from app.Model.Geometry import Pose2D
from app.Model.Mission import AssistMessage
from app.Reader.Reader import Reader
from app.Reader.Writer import Writer
from app.main import main, parse_overrides, parse_seeds, scenario_name


class TestArguments:
    def test_overrides(self):
        assert parse_overrides(['mission.drive_speed=0.8', 'mission.illumination=night', 'mission.blueprint=["red"]']) \
            == {'mission.drive_speed': 0.8, 'mission.illumination': 'night', 'mission.blueprint': ['red']}

    def test_override_without_value(self):
        with pytest.raises(ValueError):
            parse_overrides(['mission.drive_speed'])

    @pytest.mark.parametrize('text, seeds', [('0:3', [0, 1, 2]), ('4,7', [4, 7]), (':2', [0, 1])])
    def test_seeds(self, text, seeds):
        assert parse_seeds(text) == seeds

    def test_scenario_name(self):
        assert scenario_name('default') == 'default'
        assert scenario_name('/tmp/scenarios/night.json') == 'night'


class TestExitCodes:
    def test_version(self):
        assert main(['--version']) == 0

    def test_unknown_command(self):
        assert main(['fly']) == 2

    def test_bad_override(self, tmp_path):
        assert main(['gen-arena', '--set=mission.no_such_key=1', '--out', str(tmp_path)]) == 2
        assert main(['gen-arena', '--set=mission.time_limit', '--out', str(tmp_path)]) == 2

    def test_missing_scenario(self, tmp_path):
        assert main(['gen-arena', '--scenario', str(tmp_path / 'absent.json'), '--out', str(tmp_path)]) == 3

    def test_missing_run_directory(self, tmp_path):
        assert main(['render', str(tmp_path / 'absent')]) == 3


class TestCommands:
    def test_gen_arena(self, tmp_path):
        assert main(['gen-arena', '--seed=3', '--out', str(tmp_path)]) == 0
        arena = Reader.read_arena(str(tmp_path / 'arena-default-seed3.json'))
        assert arena.bounds == (50.0, 60.0)
        assert len(arena.ugv_stack) == 16

    def test_gen_arena_is_deterministic(self, tmp_path):
        main(['gen-arena', '--seed=5', '--out', str(tmp_path / 'a')])
        main(['gen-arena', '--seed=5', '--out', str(tmp_path / 'b')])
        first = (tmp_path / 'a' / 'arena-default-seed5.json').read_text(encoding='utf-8')
        assert first == (tmp_path / 'b' / 'arena-default-seed5.json').read_text(encoding='utf-8')

    def test_output_root_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv('BRICKBUILD_OUT', str(tmp_path))
        assert main(['gen-arena', '--seed=1']) == 0
        assert (tmp_path / 'arena-default-seed1.json').is_file()

    def test_eval_classification(self, tmp_path):
        assert main(['eval-classification', '--isolated', '--seeds=1,2', '--noise=0', '--out', str(tmp_path)]) == 0
        kind, manifest, table = Reader.read_table(str(tmp_path / 'classification_isolated.csv'))
        assert kind == 'classification_isolated'
        assert manifest['command'] == 'eval-classification'
        assert len(table) == 4

    @pytest.mark.slow
    def test_short_run(self, tmp_path):
        args = ['run', '--seed=1', '--set=mission.time_limit=20', '--dump-frames', '--out', str(tmp_path)]
        assert main(args) == 0
        run_dir = tmp_path / 'default-seed1'
        for name in ('manifest.json', 'config.json', 'arena.json', 'report.json', 'events.csv', 'run.log',
                     'frames/lookup.bblut'):
            assert (run_dir / name).is_file()
        report = json.loads((run_dir / 'report.json').read_text(encoding='utf-8'))
        assert report['manifest']['seed'] == 1
        assert report['manifest']['overrides'] == {'mission.time_limit': 20}
        assert report['clock'] <= 20.0
        run = Reader.read_run(str(run_dir))
        assert run['events']['event'].iloc[0] == 'start'

    @pytest.mark.slow
    def test_replay_assist(self, tmp_path):
        assist = tmp_path / 'assist.ndjson'
        Writer.write_assist(str(assist), [AssistMessage('uav-1', Pose2D(20.0, 20.0), 0.9, 0.0)])
        args = ['replay-assist', str(assist), '--seed=2', '--set=mission.time_limit=20', '--out', str(tmp_path)]
        assert main(args) == 0
        manifest = Reader.read_json(str(tmp_path / 'default-seed2' / 'manifest.json'))
        assert manifest['command'] == 'replay-assist'
