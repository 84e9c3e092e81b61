"""
Общие фикстуры тестов
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# Добавляем корневую директорию в путь Python
sys.path.insert(0, str(Path(__file__).parent.parent))

from dantzig.bench import oracle_instance
from dantzig.core import unit_scaled


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))


@pytest.fixture
def identity_problem():
    """X = I_4, y = e_1, delta = 0.5: решение (0.5, 0, 0, 0)"""
    return unit_scaled(np.eye(4), np.array([1.0, 0.0, 0.0, 0.0]), 0.5)


@pytest.fixture
def small_problems():
    """Маленькие задачи (n, p) = (12, 8) для сверки с LP-оракулом"""
    return [oracle_instance(12, 8, 0.2, 0.05, seed) for seed in range(5)]


@pytest.fixture
def db_url(tmp_path):
    return f"sqlite:///{tmp_path / 'results.db'}"
