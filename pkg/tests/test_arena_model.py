import numpy as np
import pytest

from app.Model.Arena import PatternGeometry
from app.Model.Brick import BrickClass
from app.Model.Config import PileLayout, ScenarioConfig
from app.Model.Geometry import Pose2D
from app.arena_model import default_stack_layout, generate_arena, pattern_cells, stack_offsets, wall_layer_recipe
from app.arena_model.pattern import MAGENTA, YELLOW
from app.errors import ConfigurationError, PlacementError


class TestStackLayout:
    def test_default_offsets(self):
        offsets = stack_offsets()
        assert offsets[BrickClass.RED] == pytest.approx(-2.25)
        assert offsets[BrickClass.GREEN] == pytest.approx(-1.5)
        assert offsets[BrickClass.BLUE] == pytest.approx(-0.3)
        assert offsets[BrickClass.ORANGE] == pytest.approx(1.5)

    def test_brick_count_and_layers(self):
        bricks = default_stack_layout()
        assert len(bricks) == 16
        assert sorted({b.brick_id for b in bricks}) == list(range(16))
        reds = [b for b in bricks if b.brick_class == BrickClass.RED]
        assert max(b.layer for b in reds) == 2

    def test_layout_follows_pose(self):
        pose = Pose2D(10.0, 20.0, 0.4)
        local = default_stack_layout()
        moved = default_stack_layout(pose=pose)
        for a, b in zip(local, moved):
            assert np.allclose(pose.to_world(a.pose.position)[0], b.pose.position)

    def test_missing_class_is_error(self):
        layout = PileLayout(columns={'red': 2, 'green': 2, 'blue': 1})
        with pytest.raises(ConfigurationError):
            default_stack_layout(layout=layout)

    def test_wall_layer_recipe(self):
        assert wall_layer_recipe() == {BrickClass.RED: 4, BrickClass.GREEN: 2, BrickClass.BLUE: 1,
                                       BrickClass.ORANGE: 2}


class TestPatternCells:
    def test_cell_count_and_checkerboard(self):
        cells = pattern_cells(PatternGeometry(Pose2D(0.0, 0.0)))
        assert len(cells) == 2 * 20 * 2
        first = [c for c in cells if c.leg == 0 and c.j == 0]
        colors = [c.color for c in sorted(first, key=lambda c: c.i)]
        assert colors[:4] == [YELLOW, MAGENTA, YELLOW, MAGENTA]

    def test_cells_agree_with_color_index(self):
        pattern = PatternGeometry(Pose2D(3.0, 4.0, 0.9))
        cells = pattern_cells(pattern)
        centers = np.array([c.corners.mean(axis=0) for c in cells])
        index = pattern.color_index(centers)
        assert index.tolist() == [0 if c.color == YELLOW else 1 for c in cells]

    def test_square_must_divide_legs(self):
        with pytest.raises(ConfigurationError):
            pattern_cells(PatternGeometry(Pose2D(0.0, 0.0), square_size_m=0.3))


class TestGenerateArena:
    def test_same_seed_same_arena(self):
        assert generate_arena(5).to_dict() == generate_arena(5).to_dict()

    def test_different_seed_moves_objects(self):
        assert generate_arena(5).stack_pose != generate_arena(6).stack_pose

    @pytest.mark.parametrize('seed', range(10))
    def test_objects_inside_margin_and_apart(self, seed):
        config = ScenarioConfig()
        arena = generate_arena(seed, config)
        width, height = config.bounds
        for x, y in [arena.stack_pose.position, arena.pattern.center]:
            assert config.margin <= x <= width - config.margin
            assert config.margin <= y <= height - config.margin
        distance = np.linalg.norm(arena.stack_pose.position - arena.pattern.center)
        assert distance >= arena.pattern.radius + config.clearance
        assert {o.label for o in arena.obstacles} == {'uav_pile', 'platform'}

    def test_without_uav_objects(self):
        arena = generate_arena(1, ScenarioConfig(include_uav_objects=False))
        assert arena.obstacles == ()

    def test_arena_too_small(self):
        with pytest.raises(PlacementError):
            generate_arena(0, ScenarioConfig(bounds=(8.0, 8.0)))
