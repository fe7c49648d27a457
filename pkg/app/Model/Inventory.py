"""
Inventory.py

Описание:
    Грузовой отсек UGV и план стены. Отсек содержит 7 ячеек в три слоя: кирпич доступен,
    только если на нём не лежит другой кирпич. Отношение «лежит на» задаётся графом без циклов.
"""
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from app.Model.Brick import BrickClass, BrickSpec
from app.errors import ConfigurationError


@dataclass(frozen=True)
class Slot:
    index: int
    brick_class: BrickClass
    layer: int
    occupied: bool = False
    brick_id: Optional[int] = None


@dataclass(frozen=True)
class Inventory:
    """
    slots - ячейки отсека, on_top_of[s] - ячейки, на которых лежит ячейка s.
    """
    slots: Tuple[Slot, ...]
    on_top_of: Dict[int, FrozenSet[int]] = field(default_factory=dict)

    def __post_init__(self):
        indices = [s.index for s in self.slots]
        if indices != list(range(len(self.slots))):
            raise ConfigurationError('Slot indices must be 0..n-1 in order')
        for upper, lowers in self.on_top_of.items():
            if upper not in indices or any(lower not in indices for lower in lowers):
                raise ConfigurationError('Slot graph references unknown slots')
        self._check_acyclic()

    def _check_acyclic(self):
        state = {}

        def visit(node):
            if state.get(node) == 1:
                raise ConfigurationError('Slot graph contains a cycle')
            if state.get(node) == 2:
                return
            state[node] = 1
            for lower in self.on_top_of.get(node, ()):
                visit(lower)
            state[node] = 2

        for slot in self.slots:
            visit(slot.index)

    @staticmethod
    def default() -> 'Inventory':
        """Четыре красных внизу, два зелёных над парами красных, синий над зелёными"""
        slots = tuple([Slot(i, BrickClass.RED, 0) for i in range(4)] +
                      [Slot(4, BrickClass.GREEN, 1), Slot(5, BrickClass.GREEN, 1), Slot(6, BrickClass.BLUE, 2)])
        graph = {4: frozenset({0, 1}), 5: frozenset({2, 3}), 6: frozenset({4, 5})}
        return Inventory(slots, graph)

    def capacity(self) -> Dict[BrickClass, int]:
        result: Dict[BrickClass, int] = {}
        for slot in self.slots:
            result[slot.brick_class] = result.get(slot.brick_class, 0) + 1
        return result

    def above(self, index: int) -> List[int]:
        """Ячейки, которые лежат непосредственно на ячейке index"""
        return sorted(upper for upper, lowers in self.on_top_of.items() if index in lowers)

    def covering(self, index: int) -> List[int]:
        """Все ячейки, лежащие над ячейкой index (непосредственно или через другие ячейки)"""
        result, stack = set(), self.above(index)
        while stack:
            upper = stack.pop()
            if upper not in result:
                result.add(upper)
                stack += self.above(upper)
        return sorted(result)

    def is_reachable(self, index: int) -> bool:
        return not any(self.slots[upper].occupied for upper in self.covering(index))

    def can_fill(self, index: int) -> bool:
        """В ячейку можно положить кирпич, если она свободна и над ней нет занятых ячеек"""
        return not self.slots[index].occupied and self.is_reachable(index)

    def occupied(self) -> List[Slot]:
        return [s for s in self.slots if s.occupied]

    def count(self, brick_class: BrickClass) -> int:
        return sum(1 for s in self.slots if s.occupied and s.brick_class == brick_class)

    def load(self, index: int, brick_id: int) -> 'Inventory':
        if not self.can_fill(index):
            raise ValueError(f'Slot {index} cannot be filled')
        return self._set(index, True, brick_id)

    def unload(self, index: int) -> 'Inventory':
        slot = self.slots[index]
        if not slot.occupied:
            raise ValueError(f'Slot {index} is empty')
        if not self.is_reachable(index):
            raise ValueError(f'Slot {index} is covered by another brick')
        return self._set(index, False, None)

    def _set(self, index: int, occupied: bool, brick_id: Optional[int]) -> 'Inventory':
        slots = list(self.slots)
        slots[index] = replace(slots[index], occupied=occupied, brick_id=brick_id)
        return replace(self, slots=tuple(slots))

    def to_dict(self) -> dict:
        return {'slots': [{'index': s.index, 'class': s.brick_class.value, 'layer': s.layer,
                           'occupied': s.occupied, 'brick_id': s.brick_id} for s in self.slots],
                'on_top_of': {str(k): sorted(v) for k, v in self.on_top_of.items()}}


@dataclass(frozen=True)
class BlueprintEntry:
    position: float
    brick_class: BrickClass


@dataclass(frozen=True)
class Blueprint:
    """Упорядоченный список кирпичей участка стены UGV; порядок задан заранее"""
    entries: Tuple[BlueprintEntry, ...]

    @staticmethod
    def from_classes(classes: Sequence[BrickClass], specs: Dict[BrickClass, BrickSpec],
                     gap: float = 0.05) -> 'Blueprint':
        """Кирпичи укладываются от угла шаблона вдоль первой полосы в порядке списка"""
        entries, cursor = [], 0.0
        for brick_class in classes:
            length = specs[brick_class].length_m
            entries.append(BlueprintEntry(cursor + 0.5 * length, brick_class))
            cursor += length + gap
        return Blueprint(tuple(entries))

    @property
    def classes(self) -> List[BrickClass]:
        return [e.brick_class for e in self.entries]

    def counts(self) -> Dict[BrickClass, int]:
        result: Dict[BrickClass, int] = {}
        for entry in self.entries:
            result[entry.brick_class] = result.get(entry.brick_class, 0) + 1
        return result

    def __len__(self) -> int:
        return len(self.entries)


# Порядок укладки по умолчанию: синий, зелёный, два красных, зелёный, два красных
DEFAULT_ORDER = (BrickClass.BLUE, BrickClass.GREEN, BrickClass.RED, BrickClass.RED,
                 BrickClass.GREEN, BrickClass.RED, BrickClass.RED)


@dataclass(frozen=True)
class Trip:
    """
    Один рейс: порядок подбора (ячейки), порядок выгрузки и соответствие
    «номер записи плана стены → ячейка».
    """
    entries: Tuple[int, ...]
    assignment: Dict[int, int]
    pickup_slots: Tuple[int, ...]
    unload_slots: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class LoadingPlan:
    trips: Tuple[Trip, ...]

    def pickup_order(self, inventory: Inventory) -> List[List[BrickClass]]:
        return [[inventory.slots[s].brick_class for s in trip.pickup_slots] for trip in self.trips]
