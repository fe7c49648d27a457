"""
errors.py

Описание:
    Иерархия исключений симулятора. Каждое исключение наследуется от встроенного
    исключения подходящей природы, поэтому вызывающий код может ловить и его.
"""


class ConfigurationError(ValueError):
    """Некорректная конфигурация сценария или модуля"""


class PlacementError(RuntimeError):
    """Объекты арены невозможно разместить с заданными отступами"""


class CameraPoseError(ValueError):
    """Поза камеры отсутствует или камера находится ниже уровня земли"""


class RangeDomainError(ValueError):
    """Аргумент arccos вне интервала [-1, 1]"""


class DegenerateFitError(RuntimeError):
    """
    Данные для EM не позволяют определить ориентацию штабеля.

    :param message: Текст ошибки.
    :param estimate: Оценка, содержащая только центр штабеля.
    """

    def __init__(self, message: str, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class DegenerateLineError(RuntimeError):
    """RANSAC получил только совпадающие точки"""


class DegenerateSegmentError(ValueError):
    """Сегмент слишком мал или вырожден для поиска углов"""


class SeedPixelError(ValueError):
    """Начальный пиксель заливки не классифицирован как объект"""


class ArtifactError(FileNotFoundError):
    """Отсутствуют артефакты запуска или кадры"""
