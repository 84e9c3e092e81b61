"""
Двухэтапный алгоритм неподвижной точки

Stage-I: связанные итерации по beta и tau (две схемы порядка обновления),
Stage-II: МНК на оценённом носителе (debiasing).
"""
import hashlib
import time
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import qr, solve_triangular

from config import SOLVER_CONFIG
from dantzig.core import resolve_lambda, validate_config
from dantzig.linop import DantzigOperator, apply_A, apply_At
from dantzig.oracle import feasibility_violation
from dantzig.prox import residual_prox, soft_threshold
from shared.errors import EmptySupportError
from shared.logs import get_logger
from shared.schemas import Method, ProblemInstance, Scheme, SolveResult, SolverConfig, Termination

logger = get_logger(__name__)


def support_fingerprint(beta: np.ndarray) -> bytes:
    """Хеш множества ненулевых индексов"""
    indices = np.flatnonzero(beta).astype(np.int64)
    return hashlib.blake2b(indices.tobytes(), digest_size=16).digest()


def relative_change(new: np.ndarray, old: np.ndarray) -> float:
    """||new - old|| / ||old||, при ||old|| = 0 абсолютное изменение"""
    change = float(np.linalg.norm(new - old))
    base = float(np.linalg.norm(old))
    return change / base if base > 0 else change


def iterate_change(beta_new: np.ndarray, beta: np.ndarray, tau_new: np.ndarray, tau: np.ndarray) -> float:
    """Относительное изменение пары (beta, tau): максимум по компонентам"""
    return max(relative_change(beta_new, beta), relative_change(tau_new, tau))


class IterationTrace:
    """История Stage-I: относительные изменения пары (beta, tau) и отпечатки носителя"""

    def __init__(self):
        self.rel_changes: List[float] = []
        self.supports: List[bytes] = []
        self.termination: Optional[Termination] = None

    def record(self, rel_change: float, fingerprint: bytes):
        self.rel_changes.append(rel_change)
        self.supports.append(fingerprint)

    def __len__(self) -> int:
        return len(self.rel_changes)


def check_stop(trace: IterationTrace, cfg: SolverConfig) -> Optional[Termination]:
    """
    Критерии остановки (объединены по ИЛИ)

    REL_CHANGE проверяется первым; None означает продолжение.
    """
    if not len(trace):
        raise ValueError("Пустая история итераций")

    if trace.rel_changes[-1] < cfg.epsilon:
        return Termination.REL_CHANGE

    window = cfg.eta + 1
    if len(trace.supports) >= window:
        last = trace.supports[-window:]
        if all(s == last[0] for s in last):
            return Termination.SUPPORT_STATIONARY

    return None


def effective_norm(op: DantzigOperator) -> float:
    """Оценка ||A||_2 с запасом (1 + norm_guard) против недооценки"""
    return op.norm_estimate * (1.0 + SOLVER_CONFIG["norm_guard"])


def stage1(op: DantzigOperator, cfg: SolverConfig) -> Tuple[np.ndarray, np.ndarray, IterationTrace]:
    """
    Stage-I: итерации до срабатывания критерия остановки или max_iters

    Старт tau = 0, beta = 0. Пока beta остаётся нулевым, а tau ещё
    движется, критерии не проверяются: нулевой beta в этот момент не
    является неподвижной точкой.
    """
    norm = effective_norm(op)
    lam = resolve_lambda(cfg, norm, SOLVER_CONFIG["step_safety"])
    validate_config(cfg, norm, lam)

    step = lam / cfg.alpha
    shrink = 1.0 / cfg.alpha
    delta = op.problem.delta
    b = op.b

    beta = np.zeros(op.p)
    beta_prev = np.zeros(op.p)
    tau = np.zeros(op.p)
    tau_prev = np.zeros(op.p)
    trace = IterationTrace()

    for _ in range(cfg.max_iters):
        if cfg.scheme is Scheme.TAU_FIRST:
            tau_new = residual_prox(apply_A(op, 2.0 * beta - beta_prev) + tau, b, delta)
            beta_new = soft_threshold(beta - step * apply_At(op, tau_new), shrink)
        else:
            beta_new = soft_threshold(beta - step * apply_At(op, 2.0 * tau - tau_prev), shrink)
            tau_new = residual_prox(apply_A(op, beta_new) + tau, b, delta)

        trace.record(iterate_change(beta_new, beta, tau_new, tau), support_fingerprint(beta_new))
        warming_up = not beta_new.any() and not np.array_equal(tau_new, tau)

        beta_prev, beta = beta, beta_new
        tau_prev, tau = tau, tau_new

        if not warming_up:
            reason = check_stop(trace, cfg)
            if reason is not None:
                trace.termination = reason
                break
    else:
        trace.termination = Termination.MAX_ITERS

    logger.debug("Stage-I завершён", iterations=len(trace), termination=trace.termination.value,
                 scheme=cfg.scheme.value)
    return beta, tau, trace


def estimate_support(beta_inf: np.ndarray, tol: float) -> np.ndarray:
    """
    Lambda = {j : |beta_inf[j]| > tol}, строгое неравенство
    """
    if tol < 0:
        raise ValueError(f"tol должен быть неотрицательным: {tol}")
    support = np.flatnonzero(np.abs(beta_inf) > tol)
    if support.size == 0:
        raise EmptySupportError(tol)
    return support


def lstsq_min_norm(A: np.ndarray, y: np.ndarray, rank_rtol: float = SOLVER_CONFIG["lstsq_rank_rtol"]) -> np.ndarray:
    """
    argmin ||A v - y||_2 через QR с выбором ведущего столбца

    Ранг определяется по |R_ii| > rank_rtol * |R_00|; при неполном ранге
    полное ортогональное разложение даёт решение минимальной нормы.
    """
    k = A.shape[1]
    Q, R, piv = qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return np.zeros(k)

    rank = int(np.count_nonzero(diag > rank_rtol * diag[0]))
    qty = Q[:, :rank].T @ y
    R1 = R[:rank, :]

    if rank == k:
        z = solve_triangular(R1, qty)
    else:
        # A P = Q_r R1 = Q_r T^T Z^T
        Z, T = qr(R1.T, mode="economic")
        z = Z @ solve_triangular(T, qty, trans="T")

    v = np.empty(k)
    v[piv] = z
    return v


def stage2(problem: ProblemInstance, beta_inf: np.ndarray, tol: float) -> np.ndarray:
    """Stage-II: МНК на носителе, вне носителя ровно 0"""
    support = estimate_support(beta_inf, tol)
    beta_hat = np.zeros(problem.p)
    beta_hat[support] = lstsq_min_norm(problem.X[:, support], problem.y)
    return beta_hat


def solve(
        problem: ProblemInstance,
        cfg: SolverConfig,
        op: Optional[DantzigOperator] = None,
        seed: Optional[int] = None,
) -> SolveResult:
    """Полный двухэтапный алгоритм"""
    started = time.perf_counter()
    if op is None:
        op = DantzigOperator(problem) if seed is None else DantzigOperator(problem, seed=seed)

    beta_inf, tau_inf, trace = stage1(op, cfg)

    empty = False
    if cfg.postprocess:
        try:
            beta_hat = stage2(problem, beta_inf, cfg.tol)
        except EmptySupportError as e:
            logger.warning("Stage-II пропущен: пустой носитель, beta_hat = 0", tol=e.tol)
            beta_hat = np.zeros(problem.p)
            empty = True
    else:
        beta_hat = beta_inf.copy()

    support = np.flatnonzero(np.abs(beta_inf) > cfg.tol)
    elapsed = time.perf_counter() - started

    result = SolveResult(
        method=Method.FP,
        beta_raw=beta_inf,
        tau=tau_inf,
        beta_hat=beta_hat,
        support=support.tolist(),
        iterations=len(trace),
        wall_seconds=elapsed,
        termination=trace.termination,
        feasibility_violation=feasibility_violation(problem, beta_hat),
        empty_support=empty,
        norm_estimate=op.norm_estimate,
    )
    logger.info("Решение получено", iterations=result.iterations, termination=result.termination.value,
                seconds=round(elapsed, 6), support_size=support.size)
    return result
