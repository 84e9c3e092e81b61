"""
Синтетические данные и бенчмарк-прогон (m, sigma, повтор, метод)

Каждая ячейка получает собственный seed, выведенный из
(base_seed, m, индекс sigma, повтор), поэтому все методы одного
повтора видят одни и те же X, beta, y.
"""
import math
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import pandas as pd

from config import ORACLE_CONFIG, SOLVER_CONFIG
from dantzig.baselines import adm_solve, ladm_solve
from dantzig.core import column_norms, unit_scaled
from dantzig.fpsolver import solve
from dantzig.linop import DantzigOperator, rng_for
from dantzig.oracle import feasibility_violation, lp_reference_solve
from shared.errors import (
    DegenerateDenominatorError,
    DimensionMismatchError,
    InvalidDatasetError,
    SizeLimitError,
    UsageError,
)
from shared.logs import get_logger
from shared.schemas import (
    AdmConfig,
    AggregateRow,
    BenchRecord,
    LadmConfig,
    Method,
    ProblemInstance,
    Scheme,
    SolveResult,
    SolverConfig,
    SweepConfig,
)

logger = get_logger(__name__)

Seed = Union[int, np.random.SeedSequence]

RECORD_COLUMNS = [
    "method", "m", "sigma", "replicate", "rho_raw", "rho_post",
    "iterations", "wall_seconds", "feas_violation", "termination",
]
AGGREGATE_COLUMNS = ["method", "m", "sigma", "metric", "mean", "std"]
METRICS = ["rho_raw", "rho_post", "iterations", "wall_seconds"]
FLOAT_FORMAT = "%.17g"


# Генерация данных

def gen_design(n: int, p: int, seed: Seed) -> np.ndarray:
    """Гауссова матрица n x p с единичными нормами столбцов"""
    if n < 1 or p < 1:
        raise ValueError(f"n и p должны быть >= 1: n={n}, p={p}")
    X = rng_for(seed).standard_normal((n, p))
    X /= column_norms(X)
    return X


def gen_sparse_beta(p: int, s: int, seed: Seed) -> Tuple[np.ndarray, np.ndarray]:
    """
    s-разреженный beta: beta[S_i] = eps_i * (1 + |a_i|)

    S выбирается равномерно без повторов, eps_i равновероятно +-1,
    a_i ~ N(0, 1). Возвращает (beta, отсортированный носитель).
    """
    if not 1 <= s <= p:
        raise ValueError(f"Требуется 1 <= s <= p: s={s}, p={p}")
    rng = rng_for(seed)
    support = np.sort(rng.choice(p, size=s, replace=False))
    signs = rng.choice(np.array([-1.0, 1.0]), size=s)
    magnitudes = 1.0 + np.abs(rng.standard_normal(s))

    beta = np.zeros(p)
    beta[support] = signs * magnitudes
    return beta, support


def gen_observations(X: np.ndarray, beta: np.ndarray, sigma: float, seed: Seed) -> np.ndarray:
    """y = X beta + z, z ~ N(0, sigma^2)"""
    if sigma < 0:
        raise ValueError(f"sigma должна быть неотрицательной: {sigma}")
    if X.ndim != 2 or beta.shape != (X.shape[1],):
        raise DimensionMismatchError(f"X {X.shape}, beta {beta.shape}")
    signal = X @ beta
    if sigma == 0:
        return signal
    return signal + sigma * rng_for(seed).standard_normal(X.shape[0])


# Метрики и параметры

def accuracy_rho(beta_true: np.ndarray, beta_hat: np.ndarray, sigma: float) -> float:
    """rho = sqrt(||beta - beta_hat||^2 / sum_j min(beta_j^2, sigma^2))"""
    beta_true = np.asarray(beta_true, dtype=np.float64)
    beta_hat = np.asarray(beta_hat, dtype=np.float64)
    if beta_true.shape != beta_hat.shape:
        raise DimensionMismatchError(f"beta {beta_true.shape}, beta_hat {beta_hat.shape}")

    denominator = float(np.minimum(beta_true ** 2, sigma ** 2).sum())
    if denominator == 0.0:
        raise DegenerateDenominatorError()
    error = beta_true - beta_hat
    return math.sqrt(float(error @ error) / denominator)


def universal_delta(sigma: float, p: int) -> float:
    """delta = sigma * sqrt(2 ln p)"""
    return sigma * math.sqrt(2.0 * math.log(p))


def stationarity_window(alpha: float, sigma: float, max_iters: int) -> int:
    """eta = max(ceil(4 ln(alpha) ln(sigma) + 2 alpha), 5), не больше max_iters / 10"""
    eta = max(math.ceil(4.0 * math.log(alpha) * math.log(sigma) + 2.0 * alpha), 5)
    return min(eta, max(1, max_iters // 10))


def default_solver_params(
        sigma: float,
        p: int,
        norm_estimate: float,
        max_iters: int = SOLVER_CONFIG["max_iters"],
) -> Tuple[SolverConfig, float]:
    """
    Параметры синтетического эксперимента

    tol = 2 sigma, alpha = 0.2 ||A||^2, lambda = 0.999 alpha / ||A||^2,
    epsilon = 1e-4. Возвращает (конфигурация, delta).
    """
    if not sigma > 0:
        raise ValueError(f"sigma должна быть положительной: {sigma}")
    if p < 2:
        raise ValueError(f"p должно быть >= 2: {p}")

    alpha = SOLVER_CONFIG["alpha_factor"] * norm_estimate ** 2
    cfg = SolverConfig(
        alpha=alpha,
        lam=SOLVER_CONFIG["step_safety"] * alpha / norm_estimate ** 2,
        tol=2.0 * sigma,
        epsilon=SOLVER_CONFIG["epsilon"],
        eta=stationarity_window(alpha, sigma, max_iters),
        max_iters=max_iters,
    )
    return cfg, universal_delta(sigma, p)


# Прогон

def cell_seed(base_seed: int, m: int, sigma_index: int, replicate: int) -> np.random.SeedSequence:
    """Seed ячейки; sigma входит индексом, а не значением"""
    return np.random.SeedSequence([base_seed, m, sigma_index, replicate])


def cell_instance(
        cfg: SweepConfig, m: int, sigma_index: int, replicate: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(X, beta, y) для одной ячейки прогона"""
    design_seed, beta_seed, noise_seed = cell_seed(cfg.base_seed, m, sigma_index, replicate).spawn(3)
    n, p, s = cfg.n_per_m * m, cfg.p_per_m * m, cfg.s_per_m * m
    X = gen_design(n, p, design_seed)
    beta, _ = gen_sparse_beta(p, s, beta_seed)
    y = gen_observations(X, beta, cfg.sigma_values[sigma_index], noise_seed)
    return X, beta, y


def _run_method(method: Method, problem: ProblemInstance, sigma: float, max_iters: int) -> SolveResult:
    tol = 2.0 * sigma
    if method is Method.FP:
        op = DantzigOperator(problem)
        solver_cfg, _ = default_solver_params(sigma, problem.p, op.norm_estimate, max_iters)
        return solve(problem, solver_cfg, op=op)
    if method is Method.ADM:
        return adm_solve(problem, AdmConfig(support_tol=tol))
    return ladm_solve(problem, LadmConfig(support_tol=tol, max_iters=max_iters))


def run_cell(cfg: SweepConfig, m: int, sigma_index: int, replicate: int) -> List[BenchRecord]:
    """Все методы на одном экземпляре; сбой метода фиксируется в записи"""
    sigma = cfg.sigma_values[sigma_index]
    X, beta, y = cell_instance(cfg, m, sigma_index, replicate)
    problem = unit_scaled(X, y, universal_delta(sigma, X.shape[1]))

    records = []
    for method in cfg.methods:
        key = dict(method=method, m=m, sigma=sigma, replicate=replicate)
        started = time.perf_counter()
        try:
            result = _run_method(method, problem, sigma, cfg.max_iters)
        except Exception as e:
            logger.warning("Сбой метода в ячейке прогона", method=method.value, m=m, sigma=sigma,
                           replicate=replicate, error=str(e))
            records.append(BenchRecord(**key, termination="failed"))
            continue
        elapsed = time.perf_counter() - started

        records.append(BenchRecord(
            **key,
            rho_raw=accuracy_rho(beta, result.beta_raw, sigma),
            rho_post=accuracy_rho(beta, result.beta_hat, sigma),
            iterations=result.iterations,
            wall_seconds=elapsed,
            feasibility_violation=result.feasibility_violation,
            termination=result.termination.value,
        ))
    return records


def _run_cell_task(task) -> List[BenchRecord]:
    return run_cell(*task)


def record_sort_key(record: BenchRecord):
    return record.method.value, record.m, record.sigma, record.replicate


def run_sweep(cfg: SweepConfig) -> List[BenchRecord]:
    """
    Полный прогон по сетке

    При cfg.jobs > 1 ячейки выполняются в пуле процессов; результат
    отсортирован по (method, m, sigma, replicate).
    """
    tasks = [
        (cfg, m, sigma_index, replicate)
        for m in cfg.m_values
        for sigma_index in range(len(cfg.sigma_values))
        for replicate in range(cfg.replicates)
    ]
    logger.info("Запуск прогона", cells=len(tasks), methods=[m.value for m in cfg.methods], jobs=cfg.jobs)

    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            batches = list(pool.map(_run_cell_task, tasks))
    else:
        batches = [_run_cell_task(task) for task in tasks]

    records = sorted((r for batch in batches for r in batch), key=record_sort_key)
    failed = sum(r.failed for r in records)
    if failed:
        logger.warning("Часть записей прогона завершилась сбоем", failed=failed, total=len(records))
    return records


def oracle_instance(n: int, p: int, delta: float, sigma: float, seed: int) -> ProblemInstance:
    """Маленький экземпляр с нормированными столбцами для сверки с LP-оракулом"""
    design_seed, beta_seed, noise_seed = np.random.SeedSequence(seed).spawn(3)
    X = gen_design(n, p, design_seed)
    beta, _ = gen_sparse_beta(p, max(1, p // 4), beta_seed)
    return unit_scaled(X, gen_observations(X, beta, sigma, noise_seed), delta)


def oracle_check(
        n: int,
        p: int,
        delta: float,
        seed: int,
        trials: int,
        sigma: float = 0.05,
        scheme: Scheme = Scheme.TAU_FIRST,
) -> dict:
    """
    Сверка fpsolver с LP-оракулом на trials экземплярах

    Экземпляр номер t строится из seed + t. Останавливается на первом
    нарушении допусков и сообщает его seed.
    """
    if trials < 1:
        raise UsageError(f"trials должно быть >= 1: {trials}")
    if n > ORACLE_CONFIG["max_n"] or p > ORACLE_CONFIG["max_p"]:
        raise SizeLimitError(n, p, ORACLE_CONFIG["max_n"], ORACLE_CONFIG["max_p"])

    report = {"trials": 0, "max_gap": 0.0, "max_violation": 0.0, "ok": True, "failed_seed": None}
    for trial in range(trials):
        instance_seed = seed + trial
        problem = oracle_instance(n, p, delta, sigma, instance_seed)
        op = DantzigOperator(problem)
        cfg = SolverConfig(
            alpha=SOLVER_CONFIG["alpha_factor"] * op.norm_estimate ** 2,
            epsilon=ORACLE_CONFIG["check_epsilon"],
            eta=ORACLE_CONFIG["check_max_iters"],
            max_iters=ORACLE_CONFIG["check_max_iters"],
            scheme=scheme,
            postprocess=False,
        )
        result = solve(problem, cfg, op=op)
        _, objective = lp_reference_solve(problem)

        gap = abs(float(np.abs(result.beta_raw).sum()) - objective)
        violation = feasibility_violation(problem, result.beta_raw)
        report["trials"] += 1
        report["max_gap"] = max(report["max_gap"], gap)
        report["max_violation"] = max(report["max_violation"], violation)

        if gap > ORACLE_CONFIG["oracle_check_gap"] or violation > ORACLE_CONFIG["oracle_check_violation"]:
            logger.warning("Расхождение с LP-оракулом", seed=instance_seed, gap=gap, violation=violation)
            report["ok"] = False
            report["failed_seed"] = instance_seed
            break
    return report


# Таблицы и CSV

def records_frame(records: List[BenchRecord]) -> pd.DataFrame:
    rows = [r.model_dump(mode="json") for r in records]
    frame = pd.DataFrame(rows, columns=[
        "method", "m", "sigma", "replicate", "rho_raw", "rho_post",
        "iterations", "wall_seconds", "feasibility_violation", "termination",
    ])
    frame = frame.rename(columns={"feasibility_violation": "feas_violation"})
    frame["iterations"] = frame["iterations"].astype("Int64")
    for column in ("rho_raw", "rho_post", "wall_seconds", "feas_violation", "sigma"):
        frame[column] = frame[column].astype("float64")
    return frame


def aggregate(records: List[BenchRecord]) -> List[AggregateRow]:
    """Среднее и стандартное отклонение (ddof=1) по (method, m, sigma) без сбойных записей"""
    frame = records_frame([r for r in records if not r.failed])
    if frame.empty:
        return []
    frame["iterations"] = frame["iterations"].astype("float64")

    grouped = frame.groupby(["method", "m", "sigma"], sort=True)[METRICS]
    means = grouped.mean().reset_index().melt(id_vars=["method", "m", "sigma"], var_name="metric",
                                              value_name="mean")
    stds = grouped.std(ddof=1).fillna(0.0).reset_index().melt(id_vars=["method", "m", "sigma"],
                                                              var_name="metric", value_name="std")
    table = means.merge(stds, on=["method", "m", "sigma", "metric"])
    table["metric"] = pd.Categorical(table["metric"], categories=METRICS, ordered=True)
    table = table.sort_values(["method", "m", "sigma", "metric"])

    return [
        AggregateRow(method=row.method, m=int(row.m), sigma=float(row.sigma), metric=str(row.metric),
                     mean=float(row.mean), std=float(row.std))
        for row in table.itertuples(index=False)
    ]


def write_records(records: List[BenchRecord], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records_frame(records)[RECORD_COLUMNS].to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def read_records(path: Path) -> List[BenchRecord]:
    frame = pd.read_csv(path, dtype={"method": str, "termination": str}, float_precision="round_trip")
    if list(frame.columns) != RECORD_COLUMNS:
        raise InvalidDatasetError(f"Неожиданный заголовок CSV записей: {list(frame.columns)}")
    frame = frame.rename(columns={"feas_violation": "feasibility_violation"})
    return [
        BenchRecord(**{key: _native(value) for key, value in row.items()})
        for row in frame.to_dict(orient="records")
    ]


def _native(value):
    # numpy-скаляры из pandas в обычные типы Python
    return value.item() if isinstance(value, np.generic) else value


def write_aggregates(rows: List[AggregateRow], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([r.model_dump(mode="json") for r in rows], columns=AGGREGATE_COLUMNS)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path
