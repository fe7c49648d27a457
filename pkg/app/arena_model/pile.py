"""
pile.py

Описание:
    Раскладка штабеля кирпичей UGV. Группы классов стоят друг за другом вдоль главной оси
    штабеля в порядке красный, зелёный, синий, оранжевый; длинные стороны кирпичей параллельны оси.
    Внутри группы столбцы стоят рядом поперёк оси, каждый столбец - стопка из нескольких слоёв.
"""
from typing import Dict, List, Optional

from app.Model.Brick import CLASS_ORDER, BrickClass, BrickInstance, BrickSpec, default_brick_specs
from app.Model.Config import PileLayout
from app.Model.Geometry import Pose2D
from app.errors import ConfigurationError


def _check_layout(layout: PileLayout):
    for brick_class in CLASS_ORDER:
        if layout.columns.get(brick_class.value, 0) < 1 or layout.layers.get(brick_class.value, 0) < 1:
            raise ConfigurationError(f'Pile layout needs columns and layers for {brick_class.value}')
    if layout.brick_gap < 0 or layout.row_gap < 0:
        raise ConfigurationError('Pile gaps must be non-negative')


def stack_offsets(specs: Optional[Dict[BrickClass, BrickSpec]] = None,
                  layout: Optional[PileLayout] = None) -> Dict[BrickClass, float]:
    """
    Смещения центров групп вдоль главной оси относительно центра штабеля (k_m).

    Для раскладки по умолчанию: красный -2.25, зелёный -1.5, синий -0.3, оранжевый 1.5.
    """
    specs = specs or default_brick_specs()
    layout = layout or PileLayout()
    total = sum(specs[c].length_m for c in CLASS_ORDER) + layout.row_gap * (len(CLASS_ORDER) - 1)
    offsets, cursor = {}, -0.5 * total
    for brick_class in CLASS_ORDER:
        length = specs[brick_class].length_m
        offsets[brick_class] = cursor + 0.5 * length
        cursor += length + layout.row_gap
    return offsets


def default_stack_layout(specs: Optional[Dict[BrickClass, BrickSpec]] = None,
                         layout: Optional[PileLayout] = None,
                         pose: Pose2D = Pose2D(0.0, 0.0, 0.0),
                         first_id: int = 0) -> List[BrickInstance]:
    """
    Кирпичи штабеля с центром и главной осью, заданными pose.

    :param specs: Таблица классов.
    :param layout: Число столбцов и слоёв для каждого класса, зазоры.
    :param pose: Центр штабеля и направление главной оси.
    :param first_id: Номер первого кирпича.
    :return: Список кирпичей: по классам, затем по слоям снизу вверх, затем по столбцам.
    """
    specs = specs or default_brick_specs()
    layout = layout or PileLayout()
    _check_layout(layout)
    offsets = stack_offsets(specs, layout)
    bricks, brick_id = [], first_id
    for brick_class in CLASS_ORDER:
        spec = specs[brick_class]
        columns = layout.columns[brick_class.value]
        span = columns * spec.width_m + (columns - 1) * layout.brick_gap
        for layer in range(layout.layers[brick_class.value]):
            for column in range(columns):
                lateral = -0.5 * span + 0.5 * spec.width_m + column * (spec.width_m + layout.brick_gap)
                local = Pose2D(offsets[brick_class], lateral, 0.0)
                bricks.append(BrickInstance(brick_id, spec, pose.compose(local), layer))
                brick_id += 1
    return bricks


def wall_layer_recipe() -> Dict[BrickClass, int]:
    """Состав одного слоя стены: 2 оранжевых, 1 синий, 2 зелёных и 4 красных"""
    return {c: s.per_wall_layer_count for c, s in default_brick_specs().items()}
