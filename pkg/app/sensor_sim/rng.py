"""
rng.py

Описание:
    Независимые потоки случайных чисел на основе счётчикового генератора Philox.
    Поток определяется зерном и набором ключей, поэтому шум не зависит от порядка вычислений.
"""
import zlib

import numpy as np

_MASK_64 = (1 << 64) - 1


def _key(value) -> int:
    if isinstance(value, str):
        return zlib.crc32(value.encode('utf-8'))
    return int(value) & _MASK_64


def stream(seed: int, *keys) -> np.random.Generator:
    """Генератор для пары (seed, keys); одинаковые аргументы дают одинаковую последовательность"""
    entropy = [_key(seed)] + [_key(k) for k in keys]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
