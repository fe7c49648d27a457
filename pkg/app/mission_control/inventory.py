"""
inventory.py

Описание:
    Планирование загрузки отсека. План стены делится на рейсы; в каждом рейсе записи плана
    сопоставляются ячейкам так, чтобы выгрузка в порядке плана не требовала перекладывания
    (ячейка выгружается только после всех ячеек над ней). Загрузка идёт снизу вверх.
"""
from itertools import permutations
from typing import Dict, List, Optional, Sequence, Tuple

from loguru import logger

from app.Model.Brick import BrickClass
from app.Model.Inventory import Blueprint, Inventory, LoadingPlan, Slot, Trip
from app.Model.Mission import MissionState, Phase
from app.errors import ConfigurationError


def unload_order_valid(inventory: Inventory, unload_slots: Sequence[int]) -> bool:
    """Порядок выгрузки является топологическим: над каждой ячейкой нет ещё не выгруженных кирпичей"""
    pending = set(unload_slots)
    for slot in unload_slots:
        if any(upper in pending for upper in inventory.covering(slot)):
            return False
        pending.discard(slot)
    return True


def _assign(inventory: Inventory, classes: Sequence[BrickClass]) -> Optional[Tuple[int, ...]]:
    """Ячейки для записей в порядке выгрузки; перебор с выбором первого допустимого варианта"""
    by_class: Dict[BrickClass, List[int]] = {}
    for slot in inventory.slots:
        by_class.setdefault(slot.brick_class, []).append(slot.index)
    needed: Dict[BrickClass, List[int]] = {}
    for k, brick_class in enumerate(classes):
        needed.setdefault(brick_class, []).append(k)
    if any(len(entries) > len(by_class.get(c, [])) for c, entries in needed.items()):
        return None

    groups = list(needed.items())

    def search(level: int, chosen: Dict[int, int]) -> Optional[Tuple[int, ...]]:
        if level == len(groups):
            order = tuple(chosen[k] for k in range(len(classes)))
            return order if unload_order_valid(inventory, order) else None
        brick_class, entries = groups[level]
        for slots in permutations(by_class[brick_class], len(entries)):
            chosen.update(zip(entries, slots))
            found = search(level + 1, chosen)
            if found is not None:
                return found
        for k in entries:
            chosen.pop(k, None)
        return None

    return search(0, {})


def _trip(inventory: Inventory, entries: Sequence[int], slots: Sequence[int]) -> Trip:
    pickup = tuple(sorted(slots, key=lambda s: (inventory.slots[s].layer, s)))
    return Trip(tuple(entries), dict(zip(entries, slots)), pickup, tuple(slots))


def plan_loading(blueprint: Blueprint, inventory: Inventory,
                 entries: Optional[Sequence[int]] = None) -> LoadingPlan:
    """
    :param blueprint: План стены.
    :param inventory: Отсек (пустой).
    :param entries: Номера записей плана, которые нужно перевезти (по умолчанию все).
    :return: Рейсы; записи плана разбиваются на последовательные части, если не помещаются в отсек.
    :raises ConfigurationError: Если класс записи не помещается в отсек.
    """
    capacity = inventory.capacity()
    entries = list(range(len(blueprint))) if entries is None else list(entries)
    for k in entries:
        if capacity.get(blueprint.entries[k].brick_class, 0) == 0:
            raise ConfigurationError(f'Cargo bay has no slot for {blueprint.entries[k].brick_class.value} bricks')
    trips, current, slots = [], [], None
    for k in entries:
        candidate = current + [k]
        found = _assign(inventory, [blueprint.entries[e].brick_class for e in candidate])
        if found is None:
            trips.append(_trip(inventory, current, slots))
            current = [k]
            slots = _assign(inventory, [blueprint.entries[k].brick_class])
        else:
            current, slots = candidate, found
    if current:
        trips.append(_trip(inventory, current, slots))
    logger.debug(f'Loading plan: {[len(t.entries) for t in trips]} bricks per trip')
    return LoadingPlan(tuple(trips))


def next_reachable(inventory: Inventory, wanted: BrickClass) -> Optional[Slot]:
    """Занятая ячейка нужного класса, над которой нет занятых ячеек"""
    for slot in inventory.slots:
        if slot.occupied and slot.brick_class == wanted and inventory.is_reachable(slot.index):
            return slot
    return None


def replan_on_failure(state: MissionState, inventory: Inventory) -> Optional[Trip]:
    """
    После неудачи загрузки оставшиеся подборы отменяются, выгружаются только загруженные кирпичи
    в порядке плана стены. Без груза робот возвращается к исследованию.
    """
    if not state.loaded:
        state.transition(Phase.EXPLORE, 'replan: empty cargo')
        return None
    loaded = sorted(state.loaded, key=lambda item: item[0])
    entries = [entry for entry, _, _ in loaded]
    slots = [slot for _, slot, _ in loaded]
    if not unload_order_valid(inventory, slots):
        raise RuntimeError('Loaded bricks cannot be unloaded in blueprint order')
    trip = _trip(inventory, entries, slots)
    state.transition(Phase.NAVIGATE_TO_PATTERN, f'replan: unload {len(entries)} bricks')
    return trip
