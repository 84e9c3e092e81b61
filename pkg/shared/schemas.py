"""
Pydantic схемы для валидации данных решателя
"""
import math
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import ADM_CONFIG, BENCH_CONFIG, LADM_CONFIG, SOLVER_CONFIG
from shared.errors import DimensionMismatchError, InvalidDatasetError


class Scheme(str, Enum):
    BETA_FIRST = "beta_first"  # сначала beta, затем tau
    TAU_FIRST = "tau_first"  # сначала tau, затем beta (по умолчанию)


class Termination(str, Enum):
    REL_CHANGE = "rel_change"
    SUPPORT_STATIONARY = "support_stationary"
    MAX_ITERS = "max_iters"


class Method(str, Enum):
    FP = "fp"
    ADM = "adm"
    LADM = "ladm"


def frozen_array(value, ndim: int, name: str) -> np.ndarray:
    """Копия в float64 только для чтения"""
    array = np.array(value, dtype=np.float64)
    if array.ndim != ndim:
        raise DimensionMismatchError(f"{name}: ожидается {ndim}-мерный массив, получено {array.ndim}")
    array.setflags(write=False)
    return array


class ArrayModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


# Problem schemas
class ProblemInstance(ArrayModel):
    X: np.ndarray
    y: np.ndarray
    D: np.ndarray
    delta: float = Field(..., ge=0)

    @field_validator("X", mode="before")
    @classmethod
    def _matrix(cls, value):
        return frozen_array(value, 2, "X")

    @field_validator("y", "D", mode="before")
    @classmethod
    def _vector(cls, value, info):
        return frozen_array(value, 1, info.field_name)

    @model_validator(mode="after")
    def _check_shapes(self):
        n, p = self.X.shape
        if n < 1 or p < 1:
            raise DimensionMismatchError(f"X имеет форму {self.X.shape}")
        if self.y.shape != (n,):
            raise DimensionMismatchError(f"len(y) = {self.y.shape[0]}, строк X = {n}")
        if self.D.shape != (p,):
            raise DimensionMismatchError(f"len(D) = {self.D.shape[0]}, столбцов X = {p}")
        if not np.all(self.D > 0):
            raise ValueError("Все элементы D должны быть положительны")
        return self

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def is_unit_scaled(self, atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.D - 1.0)) <= atol)


class SolverConfig(BaseModel):
    """Параметры двухэтапного решателя; lam = None означает 0.999 * alpha / ||A||^2"""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    alpha: float = Field(..., gt=0)
    lam: Optional[float] = Field(None, gt=0, alias="lambda")
    tol: float = Field(SOLVER_CONFIG["tol"], ge=0)
    epsilon: float = Field(SOLVER_CONFIG["epsilon"], gt=0)
    eta: int = Field(SOLVER_CONFIG["eta"], ge=1)
    max_iters: int = Field(SOLVER_CONFIG["max_iters"], ge=1)
    scheme: Scheme = Scheme(SOLVER_CONFIG["scheme"])
    postprocess: bool = SOLVER_CONFIG["postprocess"]


class SolveResult(ArrayModel):
    method: Method = Method.FP
    beta_raw: np.ndarray
    tau: np.ndarray
    beta_hat: np.ndarray
    support: List[int] = []
    iterations: int = Field(..., ge=0)
    wall_seconds: float = Field(..., ge=0)
    termination: Termination
    feasibility_violation: float = Field(..., ge=0)
    empty_support: bool = False
    norm_estimate: Optional[float] = None

    @field_validator("beta_raw", "tau", "beta_hat", mode="before")
    @classmethod
    def _vector(cls, value, info):
        return frozen_array(value, 1, info.field_name)

    def summary(self) -> dict:
        """Краткая сводка для JSON-вывода"""
        return {
            "method": self.method.value,
            "iterations": self.iterations,
            "seconds": self.wall_seconds,
            "termination": self.termination.value,
            "l1_norm": float(np.abs(self.beta_hat).sum()),
            "feasibility_violation": self.feasibility_violation,
            "support_size": len(self.support),
            "empty_support": self.empty_support,
        }


# Baseline schemas
class AdmConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    c: float = Field(ADM_CONFIG["c"], gt=0)
    inner_max_iters: int = Field(ADM_CONFIG["inner_max_iters"], ge=1)
    inner_tol: float = Field(ADM_CONFIG["inner_tol"], gt=0)
    outer_max_iters: int = Field(ADM_CONFIG["outer_max_iters"], ge=1)
    outer_tol: float = Field(ADM_CONFIG["outer_tol"], gt=0)
    nonmonotone_memory: int = Field(ADM_CONFIG["nonmonotone_memory"], ge=1)
    bb_min: float = Field(ADM_CONFIG["bb_min"], gt=0)
    bb_max: float = Field(ADM_CONFIG["bb_max"], gt=0)
    sufficient_decrease: float = Field(ADM_CONFIG["sufficient_decrease"], gt=0)
    support_tol: float = Field(SOLVER_CONFIG["tol"], ge=0)
    postprocess: bool = True


class LadmConfig(BaseModel):
    """ell = None означает 2.001 * ||X^T X||^2"""
    model_config = ConfigDict(frozen=True)

    c: float = Field(LADM_CONFIG["c"], gt=0)
    ell: Optional[float] = Field(None, gt=0)
    max_iters: int = Field(LADM_CONFIG["max_iters"], ge=1)
    tol: float = Field(LADM_CONFIG["tol"], gt=0)
    support_tol: float = Field(SOLVER_CONFIG["tol"], ge=0)
    postprocess: bool = True


# Bench schemas
class SweepConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    m_values: List[int] = Field(..., min_length=1)
    sigma_values: List[float] = Field(default_factory=lambda: list(BENCH_CONFIG["sigma_values"]), min_length=1)
    replicates: int = Field(BENCH_CONFIG["replicates"], ge=1)
    base_seed: int = Field(BENCH_CONFIG["base_seed"], ge=0, lt=2 ** 64)
    methods: List[Method] = Field(default_factory=lambda: [Method(m) for m in BENCH_CONFIG["methods"]], min_length=1)
    n_per_m: int = Field(BENCH_CONFIG["n_per_m"], ge=1)
    p_per_m: int = Field(BENCH_CONFIG["p_per_m"], ge=1)
    s_per_m: int = Field(BENCH_CONFIG["s_per_m"], ge=1)
    max_iters: int = Field(SOLVER_CONFIG["max_iters"], ge=1)
    jobs: int = Field(1, ge=1)

    @field_validator("m_values")
    @classmethod
    def _positive_m(cls, value):
        if any(m < 1 for m in value):
            raise ValueError("m должны быть положительны")
        return value

    @field_validator("sigma_values")
    @classmethod
    def _positive_sigma(cls, value):
        if any(not s > 0 for s in value):
            raise ValueError("sigma должны быть положительны")
        return value


class BenchRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: Method
    m: int
    sigma: float
    replicate: int
    rho_raw: Optional[float] = Field(None, ge=0)
    rho_post: Optional[float] = Field(None, ge=0)
    iterations: Optional[int] = None
    wall_seconds: Optional[float] = Field(None, ge=0)
    feasibility_violation: Optional[float] = Field(None, ge=0)
    termination: str

    @field_validator("rho_raw", "rho_post", "wall_seconds", "feasibility_violation", mode="before")
    @classmethod
    def _missing_float(cls, value):
        # пустые ячейки CSV и NaN означают отсутствие значения
        if value is None or value == "":
            return None
        if isinstance(value, float) and math.isnan(value):
            return None
        return value

    @field_validator("iterations", mode="before")
    @classmethod
    def _missing_int(cls, value):
        if value is None or value == "":
            return None
        if isinstance(value, float):
            return None if math.isnan(value) else int(value)
        return value

    @property
    def failed(self) -> bool:
        return self.termination == "failed"


class AggregateRow(BaseModel):
    method: Method
    m: int
    sigma: float
    metric: str
    mean: float
    std: float


# Classification schemas
class LabeledDataset(ArrayModel):
    features: np.ndarray
    labels: np.ndarray
    scale: np.ndarray

    @field_validator("features", mode="before")
    @classmethod
    def _matrix(cls, value):
        return frozen_array(value, 2, "features")

    @field_validator("labels", mode="before")
    @classmethod
    def _labels(cls, value):
        labels = np.array(value)
        if labels.ndim != 1:
            raise InvalidDatasetError("Метки должны быть одномерным вектором")
        if not np.all(np.isin(labels, (0, 1))):
            raise InvalidDatasetError("Метки должны принимать значения 0 или 1")
        labels = labels.astype(np.int64)
        labels.setflags(write=False)
        return labels

    @field_validator("scale", mode="before")
    @classmethod
    def _scale(cls, value):
        return frozen_array(value, 1, "scale")

    @model_validator(mode="after")
    def _check_shapes(self):
        if self.features.shape[0] != self.labels.shape[0]:
            raise DimensionMismatchError(
                f"строк признаков {self.features.shape[0]}, меток {self.labels.shape[0]}"
            )
        if self.scale.shape != (self.features.shape[1],):
            raise DimensionMismatchError("длина scale не совпадает с числом признаков")
        return self

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]
