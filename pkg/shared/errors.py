"""
Иерархия ошибок решателя
"""
from typing import Optional


class DantzigError(Exception):
    """Базовая ошибка библиотеки"""


class UsageError(DantzigError):
    """Ошибка входных данных или параметров (CLI: код выхода 2)"""


class NumericalError(DantzigError):
    """Численный сбой (CLI: код выхода 1)"""


class DimensionMismatchError(UsageError):
    def __init__(self, message: str):
        super().__init__(f"Несовпадение размерностей: {message}")


class ZeroColumnError(UsageError):
    def __init__(self, column: int):
        self.column = column
        super().__init__(f"Нулевой столбец матрицы X: {column}")


class StepSizeTooLargeError(UsageError):
    def __init__(self, ratio: float, bound: float):
        self.ratio = ratio
        self.bound = bound
        super().__init__(
            f"Шаг слишком велик: lambda/alpha = {ratio:.17g}, требуется < 1/||A||^2 = {bound:.17g}"
        )


class EllTooSmallError(UsageError):
    def __init__(self, ell: float, bound: float):
        self.ell = ell
        self.bound = bound
        super().__init__(f"Параметр ell = {ell:.17g} должен быть > 2||X^T X||^2 = {bound:.17g}")


class RequiresUnitScalingError(UsageError):
    def __init__(self, max_deviation: float):
        self.max_deviation = max_deviation
        super().__init__(
            f"Метод требует D = I (единичные нормы столбцов), отклонение {max_deviation:.3g}"
        )


class SizeLimitError(UsageError):
    def __init__(self, n: int, p: int, max_n: int, max_p: int):
        super().__init__(f"LP-оракул ограничен n <= {max_n}, p <= {max_p}; получено n={n}, p={p}")


class NTooLargeError(UsageError):
    def __init__(self, n_top: int, n_columns: int):
        super().__init__(f"N = {n_top} превышает число признаков {n_columns}")


class InvalidDatasetError(UsageError):
    """Некорректный набор данных (метки, размерности, формат CSV)"""


class EmptySupportError(NumericalError):
    def __init__(self, tol: float):
        self.tol = tol
        super().__init__(f"Пустой носитель: ни одна компонента не превышает tol = {tol:.3g}")


class ConvergenceFailureError(NumericalError):
    def __init__(self, estimate: float, iterations: int, message: Optional[str] = None):
        self.estimate = estimate
        self.iterations = iterations
        super().__init__(
            message or f"Степенной метод не сошёлся за {iterations} итераций (оценка {estimate:.17g})"
        )


class InfeasibleError(NumericalError):
    """Допустимое множество пусто"""


class DegenerateDenominatorError(NumericalError):
    def __init__(self):
        super().__init__("Знаменатель rho равен нулю (beta = 0 и sigma = 0)")


class FeasibilityNotReachedError(NumericalError):
    def __init__(self, violation: float, limit: float, iterations: int):
        self.violation = violation
        self.limit = limit
        self.iterations = iterations
        super().__init__(
            f"Нарушение ограничения {violation:.3g} превышает {limit:.3g} после {iterations} итераций"
        )
