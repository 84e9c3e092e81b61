"""
Бинарная классификация на редуцированной задаче Dantzig selector

Отбор признаков по дисперсии, обучение на подматрице, предсказание
по порогам 0.49 / 0.51 с кластерным правилом для промежуточной полосы.
"""
from typing import Optional, Tuple

import numpy as np

from config import CLASSIFY_CONFIG, SOLVER_CONFIG
from dantzig.baselines import adm_solve
from dantzig.core import column_norms, unit_scaled
from dantzig.csv_io import read_matrix, read_vector
from dantzig.fpsolver import solve
from dantzig.linop import DantzigOperator, rng_for
from dantzig.oracle import feasibility_violation
from shared.errors import DimensionMismatchError, FeasibilityNotReachedError, InvalidDatasetError, NTooLargeError
from shared.logs import get_logger
from shared.schemas import AdmConfig, LabeledDataset, Method, SolveResult, SolverConfig, Termination

logger = get_logger(__name__)


def normalize_columns(features: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Столбцы единичной нормы и исходные нормы (для нулевого столбца 1)"""
    features = np.asarray(features, dtype=np.float64)
    scale = column_norms(features)
    scale[scale == 0.0] = 1.0
    return features / scale, scale


def make_dataset(features: np.ndarray, labels: np.ndarray) -> LabeledDataset:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise DimensionMismatchError(f"признаки должны быть матрицей, ndim={features.ndim}")
    if len(labels) != features.shape[0]:
        raise DimensionMismatchError(f"строк признаков {features.shape[0]}, меток {len(labels)}")
    normalized, scale = normalize_columns(features)
    return LabeledDataset(features=normalized, labels=labels, scale=scale)


def load_dataset(features_csv, labels_csv) -> LabeledDataset:
    """Признаки и метки из CSV; столбцы нормируются при загрузке"""
    features = read_matrix(features_csv)
    labels = read_vector(labels_csv)
    if not np.all(np.isin(labels, (0.0, 1.0))):
        raise InvalidDatasetError(f"{labels_csv}: метки должны быть 0 или 1")
    return make_dataset(features, labels.astype(np.int64))


def restore_features(dataset: LabeledDataset) -> np.ndarray:
    """Признаки в исходных единицах"""
    return dataset.features * dataset.scale


def select_top_variance(train: LabeledDataset, n_top: int) -> np.ndarray:
    """
    Индексы n_top признаков с наибольшей выборочной дисперсией (ddof=1)

    При равенстве дисперсий выбирается меньший индекс; результат по возрастанию.
    """
    if n_top < 1:
        raise ValueError(f"N должно быть >= 1: {n_top}")
    if n_top > train.n_features:
        raise NTooLargeError(n_top, train.n_features)
    if train.n_rows < 2:
        raise InvalidDatasetError("Для выборочной дисперсии нужно не меньше двух строк")

    variance = train.features.var(axis=0, ddof=1)
    order = np.argsort(-variance, kind="stable")
    return np.sort(order[:n_top])


def classify_solver_config(
        norm_estimate: float,
        alpha: Optional[float] = None,
        tol: float = CLASSIFY_CONFIG["tol"],
        eta: int = CLASSIFY_CONFIG["eta"],
        epsilon: float = CLASSIFY_CONFIG["epsilon"],
        max_iters: int = SOLVER_CONFIG["max_iters"],
        postprocess: bool = False,
) -> SolverConfig:
    """Параметры для классификации: alpha = ||X^T X||^2, без Stage-II"""
    return SolverConfig(
        alpha=alpha if alpha is not None else norm_estimate ** 2,
        tol=tol,
        eta=eta,
        epsilon=epsilon,
        max_iters=max_iters,
        postprocess=postprocess,
    )


def _solve_reduced(problem, cfg, method: Method, op: Optional[DantzigOperator]) -> SolveResult:
    if method is Method.ADM:
        return adm_solve(problem, cfg)
    return solve(problem, cfg, op=op)


def _tightened(cfg, method: Method):
    """Та же конфигурация с меньшим допуском; для FP критерий носителя отключается"""
    factor = CLASSIFY_CONFIG["refine_factor"]
    if method is Method.ADM:
        return cfg.model_copy(update={"outer_tol": cfg.outer_tol * factor})
    return cfg.model_copy(update={"epsilon": cfg.epsilon * factor, "eta": cfg.max_iters})


def train_reduced(
        train: LabeledDataset,
        indices: np.ndarray,
        delta: float,
        cfg: Optional[SolverConfig] = None,
        method: Method = Method.FP,
) -> Tuple[np.ndarray, SolveResult]:
    """
    Решение задачи на столбцах indices и продолжение нулями до длины p

    Решение Stage-I должно удовлетворять ограничению с точностью
    feasibility_check: пока это не так, задача решается заново с допуском,
    уменьшенным в 1/refine_factor раз. Если не помогли refine_rounds
    попыток или исчерпан max_iters, FeasibilityNotReachedError.

    Возвращает (beta полной длины, результат решателя).
    """
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size == 0:
        raise ValueError("Пустой набор признаков")

    problem = unit_scaled(train.features[:, indices], train.labels.astype(np.float64), delta)
    op = None
    if method is Method.ADM:
        solver_cfg = AdmConfig(support_tol=CLASSIFY_CONFIG["tol"], postprocess=False) if cfg is None \
            else AdmConfig(support_tol=cfg.tol, postprocess=cfg.postprocess)
    elif method is Method.FP:
        op = DantzigOperator(problem)
        solver_cfg = cfg or classify_solver_config(op.norm_estimate)
    else:
        raise ValueError(f"Метод {method.value} не поддерживается для классификации")

    limit = CLASSIFY_CONFIG["feasibility_check"]
    result = _solve_reduced(problem, solver_cfg, method, op)
    violation = feasibility_violation(problem, result.beta_raw)
    for _ in range(CLASSIFY_CONFIG["refine_rounds"]):
        if violation <= limit or result.termination is Termination.MAX_ITERS:
            break
        logger.info("Ограничение нарушено, повторное решение с меньшим допуском", delta=delta,
                    violation=violation, termination=result.termination.value)
        solver_cfg = _tightened(solver_cfg, method)
        result = _solve_reduced(problem, solver_cfg, method, op)
        violation = feasibility_violation(problem, result.beta_raw)

    if violation > limit:
        raise FeasibilityNotReachedError(violation, limit, result.iterations)

    beta = np.zeros(train.n_features)
    beta[indices] = result.beta_hat
    return beta, result


def predict_labels(
        test_features: np.ndarray,
        beta: np.ndarray,
        low: float = CLASSIFY_CONFIG["threshold_low"],
        high: float = CLASSIFY_CONFIG["threshold_high"],
) -> Tuple[np.ndarray, np.ndarray]:
    """
    (y_raw, метки): 0 ниже low, 1 выше high

    Значение в полосе [low, high] получает метку ближайшего якоря:
    y0 = max{y_raw < low}, y1 = min{y_raw > high}, при равенстве 0.
    Если якоря нет, сравнивается с 0.5.
    """
    test_features = np.asarray(test_features, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    if test_features.ndim != 2 or test_features.shape[1] != beta.shape[0]:
        raise DimensionMismatchError(f"признаки {test_features.shape}, beta {beta.shape}")

    y_raw = test_features @ beta
    labels = (y_raw > high).astype(np.int64)

    band = (y_raw >= low) & (y_raw <= high)
    if band.any():
        below = y_raw[y_raw < low]
        above = y_raw[y_raw > high]
        if below.size and above.size:
            y0, y1 = below.max(), above.min()
            labels[band] = (np.abs(y_raw[band] - y0) > np.abs(y_raw[band] - y1)).astype(np.int64)
        else:
            labels[band] = (y_raw[band] >= 0.5).astype(np.int64)
    return y_raw, labels


def misdiagnosis_count(predicted: np.ndarray, actual: np.ndarray) -> int:
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape:
        raise DimensionMismatchError(f"predicted {predicted.shape}, actual {actual.shape}")
    return int(np.count_nonzero(predicted != actual))


def planted_dataset(
        n_train: int,
        n_test: int,
        p: int,
        s: int = 10,
        noise: float = 0.02,
        seed: int = 0,
) -> Tuple[LabeledDataset, LabeledDataset]:
    """
    Синтетическая пара (train, test) с известными информативными признаками

    s случайно выбранных столбцов равны
    label * (1 + |a|) + N(0, noise^2), остальные стандартные нормальные.
    Метки сбалансированы.
    """
    if not 1 <= s <= p:
        raise ValueError(f"Требуется 1 <= s <= p: s={s}, p={p}")
    rng = rng_for(seed)
    informative = rng.choice(p, size=s, replace=False)

    def draw(rows: int) -> LabeledDataset:
        labels = rng.permutation(np.arange(rows) % 2)
        features = rng.standard_normal((rows, p))
        magnitude = 1.0 + np.abs(rng.standard_normal((rows, s)))
        features[:, informative] = labels[:, None] * magnitude + noise * rng.standard_normal((rows, s))
        return make_dataset(features, labels)

    return draw(n_train), draw(n_test)
