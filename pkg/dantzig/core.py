"""
Построение задачи и проверка параметров, общие для всех решателей
"""
import numpy as np

from shared.errors import DimensionMismatchError, StepSizeTooLargeError, ZeroColumnError
from shared.schemas import ProblemInstance, SolverConfig


def column_norms(X: np.ndarray) -> np.ndarray:
    """l2-нормы столбцов"""
    return np.sqrt(np.einsum("ij,ij->j", X, X))


def from_design(X, y, delta: float) -> ProblemInstance:
    """
    Задача с D = diag(||X[:, j]||_2)

    Нулевой столбец делает D вырожденной, поэтому запрещён.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatchError(f"X должна быть матрицей, получено ndim={X.ndim}")
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise DimensionMismatchError(f"len(y) = {y.shape}, строк X = {X.shape[0]}")

    norms = column_norms(X)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ZeroColumnError(int(zero[0]))

    return ProblemInstance(X=X, y=y, D=norms, delta=delta)


def unit_scaled(X, y, delta: float) -> ProblemInstance:
    """Задача с D = I (для уже нормированных столбцов)"""
    X = np.asarray(X, dtype=np.float64)
    return ProblemInstance(X=X, y=y, D=np.ones(X.shape[1] if X.ndim == 2 else 0), delta=delta)


def step_ratio_bound(norm_estimate: float) -> float:
    """Верхняя граница для lambda/alpha: 1/||A||^2"""
    return 1.0 / norm_estimate ** 2


def resolve_lambda(cfg: SolverConfig, norm_estimate: float, safety: float = 0.999) -> float:
    """lambda из конфигурации или 0.999 * alpha / ||A||^2"""
    if cfg.lam is not None:
        return cfg.lam
    return safety * cfg.alpha / norm_estimate ** 2


def validate_config(cfg: SolverConfig, norm_estimate: float, lam: float = None) -> None:
    """Проверка условия сходимости lambda/alpha < 1/||A||^2"""
    if not norm_estimate > 0:
        raise ValueError(f"Оценка нормы должна быть положительной: {norm_estimate}")

    if lam is None:
        lam = resolve_lambda(cfg, norm_estimate)
    ratio = lam / cfg.alpha
    # сравнение в форме ratio * ||A||^2 < 1 без деления
    if not ratio * norm_estimate ** 2 < 1.0:
        raise StepSizeTooLargeError(ratio, step_ratio_bound(norm_estimate))
