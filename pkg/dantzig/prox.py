"""
Проксимальные операторы в замкнутой форме
"""
from typing import Optional

import numpy as np

from shared.errors import DimensionMismatchError


def soft_threshold(u: np.ndarray, t: float, out: Optional[np.ndarray] = None) -> np.ndarray:
    """
    prox of t*||.||_1: sign(u) * max(|u| - t, 0)

    sign(0) = 0; результат в нуле всё равно 0.
    """
    if t < 0:
        raise ValueError(f"Порог должен быть неотрицательным: {t}")
    u = np.asarray(u, dtype=np.float64)
    return np.multiply(np.sign(u), np.maximum(np.abs(u) - t, 0.0), out=out)


def _check_pair(v: np.ndarray, b: np.ndarray):
    v = np.asarray(v, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if v.shape != b.shape:
        raise DimensionMismatchError(f"v {v.shape} и b {b.shape}")
    return v, b


def project_cube(v: np.ndarray, b: np.ndarray, delta: float) -> np.ndarray:
    """Проекция на C = {x : ||x - b||_inf <= delta}"""
    v, b = _check_pair(v, b)
    return b + np.clip(v - b, -delta, delta)


def residual_prox(v: np.ndarray, b: np.ndarray, delta: float) -> np.ndarray:
    """(I - P_C)(v) = soft_threshold(v - b, delta)"""
    v, b = _check_pair(v, b)
    return soft_threshold(v - b, delta)


def project_ball(v: np.ndarray, delta: float) -> np.ndarray:
    """Проекция на {x : ||x||_inf <= delta}"""
    return np.clip(v, -delta, delta)
