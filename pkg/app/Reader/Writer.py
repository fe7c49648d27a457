import json
import os.path
from typing import Iterable, Optional

import numpy as np
import pandas as pd
from PIL import Image

from app.Model.Mission import AssistMessage
from app.Model.Perception import ColorLookupGrid
from app.Model.Sensors import DepthImage, LidarScan
from app.pattern_vision.lookup import grid_to_bytes

TABLE_VERSION = 'v1'


class Writer:
    """
    Статический класс Writer.

    Назначение:
        Запись артефактов прогона. Все текстовые форматы версионированы: таблицы начинаются
        строкой '# <вид> v1 <манифест>', JSON содержит format_version, PLY - комментарий с версией.
        Вывод детерминирован: ключи JSON отсортированы, числа в CSV записаны с фиксированной точностью.
    """

    @staticmethod
    def _prepare(file_path: str):
        directory = os.path.dirname(file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)

    @staticmethod
    def write_json(file_path: str, data: dict):
        Writer._prepare(file_path)
        with open(file_path, 'w', encoding='utf-8') as file:
            json.dump(data, file, indent=2, sort_keys=True)
            file.write('\n')

    @staticmethod
    def table_header(kind: str, manifest: Optional[dict] = None) -> str:
        return f'# {kind} {TABLE_VERSION} {json.dumps(manifest or {}, sort_keys=True, separators=(",", ":"))}\n'

    @staticmethod
    def write_table(file_path: str, kind: str, frame: pd.DataFrame, manifest: Optional[dict] = None):
        Writer._prepare(file_path)
        with open(file_path, 'w', encoding='utf-8', newline='') as file:
            file.write(Writer.table_header(kind, manifest))
            frame.to_csv(file, index=False, float_format='%.6f', lineterminator='\n')

    @staticmethod
    def write_ply(file_path: str, scan: LidarScan, pose=None):
        """ASCII PLY: x y z (система арены или переданной позы), ring, azimuth, range"""
        Writer._prepare(file_path)
        points = scan.world_points(pose)
        lines = ['ply', 'format ascii 1.0', 'comment format_version 1',
                 f'comment timestamp {scan.timestamp:.6f}', f'element vertex {len(scan)}',
                 'property float x', 'property float y', 'property float z', 'property int ring',
                 'property float azimuth', 'property float range', 'end_header']
        for point, ring, azimuth, distance in zip(points, scan.ring, scan.azimuth, scan.range):
            lines.append(f'{point[0]:.6f} {point[1]:.6f} {point[2]:.6f} {int(ring)} {azimuth:.6f} {distance:.6f}')
        with open(file_path, 'w', encoding='utf-8', newline='\n') as file:
            file.write('\n'.join(lines) + '\n')

    @staticmethod
    def write_depth_pgm(file_path: str, depth: DepthImage):
        """16-битный PGM, глубина в миллиметрах"""
        Writer._prepare(file_path)
        millimetres = np.clip(np.round(depth.depth * 1000.0), 0, 65535).astype(np.int32)
        Image.fromarray(millimetres).save(file_path, format='PPM')

    @staticmethod
    def write_gray_pgm(file_path: str, image: np.ndarray):
        Writer._prepare(file_path)
        Image.fromarray(np.asarray(image, dtype=np.uint8)).save(file_path, format='PPM')

    @staticmethod
    def write_ppm(file_path: str, rgb: np.ndarray):
        Writer._prepare(file_path)
        Image.fromarray(np.asarray(rgb, dtype=np.uint8)).save(file_path, format='PPM')

    @staticmethod
    def write_lookup(file_path: str, grid: ColorLookupGrid):
        Writer._prepare(file_path)
        with open(file_path, 'wb') as file:
            file.write(grid_to_bytes(grid))

    @staticmethod
    def write_assist(file_path: str, messages: Iterable[AssistMessage]):
        Writer._prepare(file_path)
        with open(file_path, 'w', encoding='utf-8', newline='\n') as file:
            for message in messages:
                file.write(json.dumps(message.to_dict(), sort_keys=True) + '\n')
