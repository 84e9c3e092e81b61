"""
Точный эталонный решатель для маленьких задач (LP + симплекс-метод)

min 1^T(u + w)  при  -delta <= A(u - w) - b <= delta,  u, w >= 0,
где A = D^{-1} X^T X, b = D^{-1} X^T y. Двухфазный табличный симплекс
с правилом Бленда.
"""
from typing import List, Tuple

import numpy as np

from config import ORACLE_CONFIG
from shared.errors import DimensionMismatchError, InfeasibleError, NumericalError, SizeLimitError
from shared.logs import get_logger
from shared.schemas import ProblemInstance

logger = get_logger(__name__)


def feasibility_violation(problem: ProblemInstance, beta: np.ndarray) -> float:
    """max(0, ||D^{-1} X^T (X beta - y)||_inf - delta)"""
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (problem.p,):
        raise DimensionMismatchError(f"len(beta) = {beta.shape}, p = {problem.p}")
    residual = (problem.X.T @ (problem.X @ beta - problem.y)) / problem.D
    return max(0.0, float(np.max(np.abs(residual))) - problem.delta)


class _Tableau:
    """Симплекс-таблица: строки ограничений + строка приведённых стоимостей"""

    def __init__(self, M: np.ndarray, rhs: np.ndarray, basis: List[int], tol: float):
        rows, cols = M.shape
        self.T = np.zeros((rows + 1, cols + 1))
        self.T[:rows, :cols] = M
        self.T[:rows, -1] = rhs
        self.basis = list(basis)
        self.tol = tol
        self.pivots = 0

    @property
    def rows(self) -> int:
        return self.T.shape[0] - 1

    def pivot(self, row: int, col: int):
        T = self.T
        T[row] /= T[row, col]
        for i in range(T.shape[0]):
            if i != row and T[i, col] != 0.0:
                T[i] -= T[i, col] * T[row]
        self.basis[row] = col
        self.pivots += 1

    def set_objective(self, costs: np.ndarray):
        """Приведённые стоимости c - c_B B^{-1} M для текущего базиса"""
        T = self.T
        T[-1, :] = 0.0
        T[-1, :len(costs)] = costs
        for i, j in enumerate(self.basis):
            if costs[j] != 0.0:
                T[-1] -= costs[j] * T[i]

    def run(self, allowed: int, max_pivots: int):
        """Итерации с правилом Бленда по столбцам [0, allowed)"""
        T = self.T
        tol = self.tol
        while True:
            entering = np.flatnonzero(T[-1, :allowed] < -tol)
            if entering.size == 0:
                return
            col = int(entering[0])

            column = T[:-1, col]
            candidates = np.flatnonzero(column > tol)
            if candidates.size == 0:
                raise NumericalError("Неограниченная LP-задача")
            ratios = T[candidates, -1] / column[candidates]
            best = ratios.min()
            ties = candidates[ratios <= best + tol]
            row = int(min(ties, key=lambda r: self.basis[r]))

            self.pivot(row, col)
            if self.pivots > max_pivots:
                raise NumericalError(f"Симплекс-метод превысил {max_pivots} шагов (зацикливание)")


def _lp_data(problem: ProblemInstance) -> Tuple[np.ndarray, np.ndarray]:
    A = (problem.X.T @ problem.X) / problem.D[:, None]
    b = (problem.X.T @ problem.y) / problem.D
    return A, b


def lp_reference_solve(problem: ProblemInstance) -> Tuple[np.ndarray, float]:
    """
    Решение LP-формулировки симплекс-методом

    Возвращает (beta, ||beta||_1). При ||b||_inf <= delta ноль оптимален
    и возвращается без запуска симплекса.
    """
    n, p = problem.X.shape
    if n > ORACLE_CONFIG["max_n"] or p > ORACLE_CONFIG["max_p"]:
        raise SizeLimitError(n, p, ORACLE_CONFIG["max_n"], ORACLE_CONFIG["max_p"])

    A, b = _lp_data(problem)
    delta = problem.delta
    if np.max(np.abs(b)) <= delta:
        return np.zeros(p), 0.0

    # МНК-решение удовлетворяет X^T(X beta - y) = 0, т.е. множество непусто
    beta_ls = np.linalg.lstsq(problem.X, problem.y, rcond=None)[0]
    if feasibility_violation(problem, beta_ls) > 1e-8 * (1.0 + np.max(np.abs(b))):
        raise InfeasibleError("МНК-решение недопустимо: ограничение не выполнимо численно")

    # переменные: u (p), w (p), слаки (2p), искусственные
    n_real = 4 * p
    M = np.zeros((2 * p, n_real))
    M[:p, :p] = A
    M[:p, p:2 * p] = -A
    M[p:, :p] = -A
    M[p:, p:2 * p] = A
    M[:, 2 * p:] = np.eye(2 * p)
    rhs = np.concatenate([delta + b, delta - b])

    negative = np.flatnonzero(rhs < 0)
    M[negative] *= -1.0
    rhs[negative] *= -1.0

    artificial = np.zeros((2 * p, negative.size))
    artificial[negative, np.arange(negative.size)] = 1.0
    M_full = np.hstack([M, artificial])
    n_total = M_full.shape[1]

    basis = [2 * p + i for i in range(2 * p)]
    for k, row in enumerate(negative):
        basis[row] = n_real + k

    tol = ORACLE_CONFIG["pivot_tol"]
    max_pivots = 10 * n_total
    tableau = _Tableau(M_full, rhs, basis, tol)

    # Фаза I: минимизация суммы искусственных переменных
    phase1_costs = np.zeros(n_total)
    phase1_costs[n_real:] = 1.0
    tableau.set_objective(phase1_costs)
    tableau.run(n_total, max_pivots)
    if -tableau.T[-1, -1] > 1e-9 * (1.0 + np.max(np.abs(rhs))):
        raise InfeasibleError(f"Фаза I завершилась с остатком {-tableau.T[-1, -1]:.3g}")

    # вывод искусственных переменных из базиса, вырожденные строки удаляются
    redundant = []
    for row, var in enumerate(tableau.basis):
        if var < n_real:
            continue
        nonzero = np.flatnonzero(np.abs(tableau.T[row, :n_real]) > tol)
        if nonzero.size:
            tableau.pivot(row, int(nonzero[0]))
        else:
            redundant.append(row)
    keep = [r for r in range(tableau.rows) if r not in redundant]

    # Фаза II: исходная цель 1^T(u + w)
    phase2_costs = np.zeros(n_total)
    phase2_costs[:2 * p] = 1.0
    tableau.set_objective(phase2_costs)
    tableau.run(n_real, max_pivots)

    basis_cols = [tableau.basis[r] for r in keep]
    # уточнение базисного решения по исходной матрице
    B = M_full[np.ix_(keep, basis_cols)]
    try:
        x_basic = np.linalg.solve(B, rhs[keep])
    except np.linalg.LinAlgError:
        x_basic = tableau.T[keep, -1]

    x = np.zeros(n_total)
    x[basis_cols] = x_basic
    beta = x[:p] - x[p:2 * p]
    objective = float(np.abs(beta).sum())

    logger.debug("LP-оракул решил задачу", pivots=tableau.pivots, objective=objective)
    return beta, objective
