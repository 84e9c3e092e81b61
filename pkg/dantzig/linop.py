"""
Неявный оператор A = D^{-1} X^T X и его транспонированный

Матрица A (p x p) никогда не формируется: каждое применение стоит
два прямоугольных умножения на X и одно масштабирование O(p).
"""
from typing import Optional

import numpy as np

from config import POWER_ITERATION_CONFIG
from shared.errors import ConvergenceFailureError, DimensionMismatchError
from shared.logs import get_logger
from shared.schemas import ProblemInstance

logger = get_logger(__name__)


def _matvec(X: np.ndarray, v: np.ndarray) -> np.ndarray:
    return X @ v


def _rmatvec(X: np.ndarray, w: np.ndarray) -> np.ndarray:
    return X.T @ w


def rng_for(seed: int) -> np.random.Generator:
    """Генератор Philox (counter-based) для воспроизводимых запусков"""
    return np.random.Generator(np.random.Philox(seed))


class DantzigOperator:
    """A = D^{-1} X^T X, b = D^{-1} X^T y и оценка ||A||_2"""

    __slots__ = ("_problem", "_d_inv", "_b", "_norm_estimate")

    def __init__(
            self,
            problem: ProblemInstance,
            norm_estimate: Optional[float] = None,
            power_iters: int = POWER_ITERATION_CONFIG["max_iters"],
            rel_tol: float = POWER_ITERATION_CONFIG["rel_tol"],
            seed: int = POWER_ITERATION_CONFIG["seed"],
    ):
        self._problem = problem
        d_inv = 1.0 / problem.D
        d_inv.setflags(write=False)
        self._d_inv = d_inv

        b = d_inv * _rmatvec(problem.X, problem.y)
        b.setflags(write=False)
        self._b = b

        self._norm_estimate = None
        if norm_estimate is None:
            try:
                norm_estimate = estimate_spectral_norm(self, power_iters, rel_tol, seed)
            except ConvergenceFailureError as e:
                logger.warning("Степенной метод не сошёлся, используется лучшая оценка",
                               estimate=e.estimate, iterations=e.iterations)
                norm_estimate = e.estimate
        self._norm_estimate = float(norm_estimate)

    @property
    def problem(self) -> ProblemInstance:
        return self._problem

    @property
    def b(self) -> np.ndarray:
        return self._b

    @property
    def d_inv(self) -> np.ndarray:
        return self._d_inv

    @property
    def norm_estimate(self) -> float:
        return self._norm_estimate

    @property
    def p(self) -> int:
        return self._problem.p

    def apply_A(self, beta: np.ndarray) -> np.ndarray:
        return apply_A(self, beta)

    def apply_At(self, tau: np.ndarray) -> np.ndarray:
        return apply_At(self, tau)


def _check_length(op: DantzigOperator, v: np.ndarray, name: str):
    if v.shape != (op.p,):
        raise DimensionMismatchError(f"len({name}) = {v.shape}, p = {op.p}")


def apply_A(op: DantzigOperator, beta: np.ndarray) -> np.ndarray:
    """D^{-1}(X^T(X beta))"""
    _check_length(op, beta, "beta")
    X = op.problem.X
    return op.d_inv * _rmatvec(X, _matvec(X, beta))


def apply_At(op: DantzigOperator, tau: np.ndarray) -> np.ndarray:
    """X^T(X(D^{-1} tau))"""
    _check_length(op, tau, "tau")
    X = op.problem.X
    return _rmatvec(X, _matvec(X, op.d_inv * tau))


def estimate_spectral_norm(
        op: DantzigOperator,
        max_iters: int = POWER_ITERATION_CONFIG["max_iters"],
        rel_tol: float = POWER_ITERATION_CONFIG["rel_tol"],
        seed: int = POWER_ITERATION_CONFIG["seed"],
) -> float:
    """
    Степенной метод для A^T A

    Возвращает sqrt отношения Рэлея после того, как его относительное
    изменение стало меньше rel_tol. Старт детерминирован по seed.
    """
    if max_iters < 1:
        raise ValueError(f"max_iters должен быть >= 1: {max_iters}")

    v = rng_for(seed).standard_normal(op.p)
    v /= np.linalg.norm(v)

    quotient = 0.0
    previous = None
    for k in range(1, max_iters + 1):
        w = apply_A(op, v)
        quotient = float(w @ w)
        if previous is not None and abs(quotient - previous) <= rel_tol * quotient:
            logger.debug("Оценка ||A||_2 получена", iterations=k, estimate=quotient ** 0.5)
            return quotient ** 0.5

        z = apply_At(op, w)
        z_norm = np.linalg.norm(z)
        if z_norm == 0.0:
            raise ConvergenceFailureError(quotient ** 0.5, k, "Степенной метод попал в ядро оператора")
        v = z / z_norm
        previous = quotient

    raise ConvergenceFailureError(quotient ** 0.5, max_iters)
