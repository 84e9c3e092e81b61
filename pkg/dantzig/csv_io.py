"""
Чтение и запись матриц/векторов в CSV без заголовка (17 значащих цифр)
"""
from pathlib import Path

import numpy as np

from shared.errors import InvalidDatasetError

FLOAT_FORMAT = "%.17g"


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    try:
        matrix = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except (OSError, ValueError) as e:
        raise InvalidDatasetError(f"Не удалось прочитать матрицу {path}: {e}") from e
    if matrix.size == 0:
        raise InvalidDatasetError(f"Пустой файл: {path}")
    return matrix


def read_vector(path) -> np.ndarray:
    """Вектор из CSV с одним столбцом"""
    matrix = read_matrix(path)
    if matrix.shape[1] != 1:
        raise InvalidDatasetError(f"{path}: ожидается один столбец, получено {matrix.shape[1]}")
    return matrix[:, 0].copy()


def write_matrix(path, matrix: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.atleast_2d(np.asarray(matrix, dtype=np.float64)), delimiter=",", fmt=FLOAT_FORMAT)
    return path


def write_vector(path, vector: np.ndarray) -> Path:
    return write_matrix(path, np.asarray(vector, dtype=np.float64).reshape(-1, 1))
