import numpy as np
import pandas as pd
import pytest

from app.Model.Config import SimulationConfig
from app.Reader.Writer import Writer
from app.arena_model import generate_arena
from app.errors import ArtifactError
from app.harness import classification_table, evaluate_classification, mission_batch, render_frame, render_run
from app.harness.evaluation import TABLE_COLUMNS
from app.harness.render import parse_frames

EVENT_COLUMNS = ['tick', 'phase', 'event', 'x', 'y', 'heading', 'clock', 'detail']


def events() -> pd.DataFrame:
    return pd.DataFrame([(0, 'Explore', 'start', 2.0, 2.0, 0.0, 0.0, 'seed 0'),
                         (1, 'Explore', 'waypoint', 6.25, 6.0, 1.57, 9.0, '1/20')], columns=EVENT_COLUMNS)


def run_dict() -> dict:
    return {'arena': generate_arena(0), 'config': SimulationConfig(), 'events': events(),
            'report': {'placed': []}, 'candidates': None, 'em': None}


class TestClassificationTable:
    def test_counts_and_rates(self):
        records = [(0, 0.0, 'red', 'red'), (0, 0.0, 'none', 'red'), (1, 0.0, 'green', 'green')]
        table = classification_table(records)
        assert list(table.columns) == TABLE_COLUMNS
        assert table['Brick color'].tolist() == ['Red', 'Green', 'Blue', 'Orange']
        assert table['Correct'].tolist() == [1, 1, 0, 0]
        assert table['Incorrect'].tolist() == [1, 0, 0, 0]
        assert table['Success rate [%]'].tolist() == [50.0, 100.0, 0.0, 0.0]

    def test_empty(self):
        table = classification_table([])
        assert table['Success rate [%]'].tolist() == [0.0] * 4

    def test_isolated_bricks_without_noise(self):
        table = evaluate_classification([1, 2, 3], sigmas=(0.0,), isolated=True)
        assert list(table.columns) == ['Noise [cm]'] + TABLE_COLUMNS
        assert len(table) == 4
        assert table['Incorrect'].sum() == 0
        by_color = dict(zip(table['Brick color'], table['Correct']))
        assert by_color['Green'] > 0 and by_color['Blue'] > 0 and by_color['Orange'] > 0

    @pytest.mark.slow
    def test_pile_table_shape(self):
        table = evaluate_classification(range(4), sigmas=(0.0, 0.05))
        assert table['Noise [cm]'].tolist() == [0.0] * 4 + [5.0] * 4
        assert table['Success rate [%]'].between(0.0, 100.0).all()

    @pytest.mark.slow
    def test_pile_precision_floors(self):
        table = evaluate_classification(range(100), sigmas=(0.0, 0.02))
        rates = {(row['Noise [cm]'], row['Brick color']): row['Success rate [%]'] for _, row in table.iterrows()}
        for color, floor in [('Red', 71.0), ('Green', 75.0), ('Blue', 28.0), ('Orange', 62.0)]:
            assert rates[(2.0, color)] >= floor, color
            assert rates[(0.0, color)] >= 95.0, color


class TestRender:
    def test_frame_is_deterministic(self):
        run = run_dict()
        image = render_frame(run, 1)
        assert image.shape == (620, 520, 3)
        assert image.dtype == np.uint8
        np.testing.assert_array_equal(image, render_frame(run, 1))

    def test_frame_out_of_range(self):
        with pytest.raises(ArtifactError):
            render_frame(run_dict(), 2)

    @pytest.mark.parametrize('text, count, expected', [
        (None, 3, [0, 1, 2]),
        ('1', 3, [1]),
        ('1:3', 5, [1, 2]),
        (':2', 5, [0, 1]),
        ('3:', 5, [3, 4]),
    ])
    def test_parse_frames(self, text, count, expected):
        assert list(parse_frames(text, count)) == expected

    def test_render_run(self, tmp_path):
        Writer.write_json(str(tmp_path / 'manifest.json'), {'seed': 0})
        Writer.write_json(str(tmp_path / 'report.json'), {'placed': []})
        Writer.write_json(str(tmp_path / 'config.json'), SimulationConfig().to_dict())
        Writer.write_json(str(tmp_path / 'arena.json'), generate_arena(0).to_dict())
        Writer.write_table(str(tmp_path / 'events.csv'), 'events', events())
        paths = render_run(str(tmp_path))
        assert [p.rsplit('/', 1)[-1] for p in paths] == ['frame_0000.ppm', 'frame_0001.ppm']
        with open(paths[0], 'rb') as file:
            assert file.read(2) == b'P6'
        assert len(render_run(str(tmp_path), '1')) == 1


class TestMissionBatch:
    @pytest.mark.slow
    def test_sorted_by_seed(self):
        config = SimulationConfig()
        config.mission.time_limit = 30.0
        table = mission_batch([1, 0], config)
        assert table['seed'].tolist() == [0, 1]
        assert (table['clock'] <= 30.0).all()
        assert (table['final_phase'] == 'Done').all()
