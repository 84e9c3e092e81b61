"""
Базовые методы для сравнения: ADM и линеаризованный ADM (LADM)

Оба работают с переформулировкой при D = I:
    min ||beta||_1  при  X^T(X beta - y) = tau,  ||tau||_inf <= delta.
Произведения с X^T X всегда выполняются как два умножения на X.
"""
import time
from collections import deque
from typing import NamedTuple, Optional, Tuple

import numpy as np

from config import LADM_CONFIG, SOLVER_CONFIG
from dantzig.fpsolver import stage2
from dantzig.linop import DantzigOperator
from dantzig.oracle import feasibility_violation
from dantzig.prox import project_ball, soft_threshold
from shared.errors import EllTooSmallError, EmptySupportError, RequiresUnitScalingError
from shared.logs import get_logger
from shared.schemas import AdmConfig, LadmConfig, Method, ProblemInstance, SolveResult, Termination

logger = get_logger(__name__)


class AdmState(NamedTuple):
    beta: np.ndarray
    tau: np.ndarray
    gamma: np.ndarray
    gram_beta: np.ndarray  # X^T X beta


class InnerResult(NamedTuple):
    beta: np.ndarray
    gram_beta: np.ndarray
    iterations: int


def _gram(X: np.ndarray, v: np.ndarray) -> np.ndarray:
    return X.T @ (X @ v)


def require_unit_scaling(problem: ProblemInstance):
    deviation = float(np.max(np.abs(problem.D - 1.0)))
    if deviation > 1e-12:
        raise RequiresUnitScalingError(deviation)


def initial_state(p: int) -> AdmState:
    zeros = np.zeros(p)
    return AdmState(beta=zeros, tau=zeros, gamma=zeros, gram_beta=zeros)


def nonmonotone_prox_gradient(
        X: np.ndarray,
        h: np.ndarray,
        c: float,
        beta: np.ndarray,
        gram_beta: np.ndarray,
        cfg: AdmConfig,
) -> InnerResult:
    """
    argmin ||beta||_1 + (c/2)||X^T X beta - h||^2

    Проксимальный градиент с шагом Барзилаи–Борвейна и немонотонным
    правилом принятия шага по последним nonmonotone_memory значениям цели.
    """
    residual = gram_beta - h
    grad = c * _gram(X, residual)
    objective = np.abs(beta).sum() + 0.5 * c * residual @ residual
    history = deque([objective], maxlen=cfg.nonmonotone_memory)
    curvature = 1.0

    iterations = 0
    while iterations < cfg.inner_max_iters:
        stationarity = np.max(np.abs(beta - soft_threshold(beta - grad, 1.0)))
        if stationarity <= cfg.inner_tol:
            break

        curvature = min(max(curvature, cfg.bb_min), cfg.bb_max)
        reference = max(history)
        while True:
            candidate = soft_threshold(beta - grad / curvature, 1.0 / curvature)
            step = candidate - beta
            gram_candidate = _gram(X, candidate)
            residual_candidate = gram_candidate - h
            objective_candidate = np.abs(candidate).sum() + 0.5 * c * residual_candidate @ residual_candidate
            decrease = 0.5 * cfg.sufficient_decrease * curvature * (step @ step)
            if objective_candidate <= reference - decrease or curvature >= cfg.bb_max:
                break
            curvature *= 2.0

        grad_candidate = c * _gram(X, residual_candidate)
        s_dot_s = step @ step
        s_dot_y = step @ (grad_candidate - grad)
        curvature = s_dot_y / s_dot_s if s_dot_s > 0 and s_dot_y > 0 else cfg.bb_max

        beta, gram_beta, grad = candidate, gram_candidate, grad_candidate
        history.append(objective_candidate)
        iterations += 1

    return InnerResult(beta=beta, gram_beta=gram_beta, iterations=iterations)


def adm_step(problem: ProblemInstance, state: AdmState, cfg: AdmConfig, xty: np.ndarray) -> Tuple[AdmState, int]:
    """Одна внешняя итерация ADM: tau, затем beta, затем множитель gamma"""
    c = cfg.c
    residual = state.gram_beta - xty
    tau = project_ball(residual + state.gamma / c, problem.delta)

    h = xty + tau - state.gamma / c
    inner = nonmonotone_prox_gradient(problem.X, h, c, state.beta, state.gram_beta, cfg)

    residual_new = inner.gram_beta - xty
    gamma = state.gamma + c * (residual_new - tau)
    return AdmState(beta=inner.beta, tau=tau, gamma=gamma, gram_beta=inner.gram_beta), inner.iterations


def ladm_step(problem: ProblemInstance, state: AdmState, c: float, ell: float, xty: np.ndarray) -> AdmState:
    """Одна итерация LADM: линеаризованный шаг по beta, затем tau и gamma"""
    residual = state.gram_beta - xty
    v = _gram(problem.X, residual - state.tau + state.gamma / c)
    beta = soft_threshold(state.beta - (c / ell) * v, 1.0 / ell)

    gram_beta = _gram(problem.X, beta)
    residual_new = gram_beta - xty
    tau = project_ball(residual_new + state.gamma / c, problem.delta)
    gamma = state.gamma + c * (residual_new - tau)
    return AdmState(beta=beta, tau=tau, gamma=gamma, gram_beta=gram_beta)


def _relative(new: np.ndarray, old: np.ndarray) -> float:
    return float(np.linalg.norm(new - old)) / max(1.0, float(np.linalg.norm(old)))


def outer_converged(new: AdmState, old: AdmState, xty: np.ndarray, tol: float) -> bool:
    """
    Критерий внешнего цикла: малы изменения beta и tau и невязка
    ограничения X^T X beta - X^T y = tau (от неё зависит шаг по gamma)
    """
    primal = float(np.linalg.norm(new.gram_beta - xty - new.tau)) / max(1.0, float(np.linalg.norm(xty)))
    return max(_relative(new.beta, old.beta), _relative(new.tau, old.tau), primal) < tol


def _finish(
        problem: ProblemInstance,
        method: Method,
        state: AdmState,
        iterations: int,
        termination: Termination,
        started: float,
        support_tol: float,
        postprocess: bool,
        norm_estimate: Optional[float] = None,
) -> SolveResult:
    empty = False
    if postprocess:
        try:
            beta_hat = stage2(problem, state.beta, support_tol)
        except EmptySupportError:
            logger.warning("Постобработка пропущена: пустой носитель", method=method.value)
            beta_hat = np.zeros(problem.p)
            empty = True
    else:
        beta_hat = state.beta.copy()

    elapsed = time.perf_counter() - started
    result = SolveResult(
        method=method,
        beta_raw=state.beta,
        tau=state.tau,
        beta_hat=beta_hat,
        support=np.flatnonzero(np.abs(state.beta) > support_tol).tolist(),
        iterations=iterations,
        wall_seconds=elapsed,
        termination=termination,
        feasibility_violation=feasibility_violation(problem, beta_hat),
        empty_support=empty,
        norm_estimate=norm_estimate,
    )
    logger.info("Базовый метод завершён", method=method.value, iterations=iterations,
                termination=termination.value, seconds=round(elapsed, 6))
    return result


def adm_solve(problem: ProblemInstance, cfg: AdmConfig = AdmConfig()) -> SolveResult:
    """
    ADM с внутренним немонотонным градиентным циклом

    Число итераций в результате: суммарное число внутренних итераций.
    """
    require_unit_scaling(problem)
    started = time.perf_counter()

    xty = problem.X.T @ problem.y
    state = initial_state(problem.p)
    total_inner = 0
    termination = Termination.MAX_ITERS

    for _ in range(cfg.outer_max_iters):
        new_state, inner = adm_step(problem, state, cfg, xty)
        total_inner += inner
        converged = outer_converged(new_state, state, xty, cfg.outer_tol)
        state = new_state
        if converged:
            termination = Termination.REL_CHANGE
            break

    return _finish(problem, Method.ADM, state, total_inner, termination, started,
                   cfg.support_tol, cfg.postprocess)


def resolve_ell(cfg: LadmConfig, gram_norm: float) -> float:
    """ell из конфигурации или 2.001 * ||X^T X||^2; проверка ell > 2||X^T X||^2"""
    bound = 2.0 * gram_norm ** 2
    ell = cfg.ell if cfg.ell is not None else LADM_CONFIG["ell_factor"] * gram_norm ** 2
    if not ell > bound:
        raise EllTooSmallError(ell, bound)
    return ell


def ladm_solve(problem: ProblemInstance, cfg: LadmConfig = LadmConfig(), seed: Optional[int] = None) -> SolveResult:
    """LADM: все подзадачи решаются в замкнутой форме"""
    require_unit_scaling(problem)
    started = time.perf_counter()

    # при D = I оператор A совпадает с X^T X
    op = DantzigOperator(problem) if seed is None else DantzigOperator(problem, seed=seed)
    gram_norm = op.norm_estimate * (1.0 + SOLVER_CONFIG["norm_guard"])
    ell = resolve_ell(cfg, gram_norm)

    xty = problem.X.T @ problem.y
    state = initial_state(problem.p)
    iterations = 0
    termination = Termination.MAX_ITERS

    for _ in range(cfg.max_iters):
        new_state = ladm_step(problem, state, cfg.c, ell, xty)
        iterations += 1
        converged = outer_converged(new_state, state, xty, cfg.tol)
        state = new_state
        if converged:
            termination = Termination.REL_CHANGE
            break

    return _finish(problem, Method.LADM, state, iterations, termination, started,
                   cfg.support_tol, cfg.postprocess, norm_estimate=op.norm_estimate)
