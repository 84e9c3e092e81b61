"""
Схемы запросов и ответов HTTP-сервиса решателя
"""
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from config import ORACLE_CONFIG, SOLVER_CONFIG, SUMMARY_SCHEMA_VERSION
from shared.schemas import Scheme, Termination


class SolveRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    x: List[List[float]] = Field(..., min_length=1, description="строки матрицы X")
    y: List[float] = Field(..., min_length=1)
    delta: float = Field(..., ge=0)
    alpha: Optional[float] = Field(None, gt=0, description="по умолчанию 0.2 * ||A||^2")
    lam: Optional[float] = Field(None, gt=0, alias="lambda")
    tol: float = Field(SOLVER_CONFIG["tol"], ge=0)
    epsilon: float = Field(SOLVER_CONFIG["epsilon"], gt=0)
    eta: int = Field(SOLVER_CONFIG["eta"], ge=1)
    max_iters: int = Field(SOLVER_CONFIG["max_iters"], ge=1)
    scheme: Scheme = Scheme(SOLVER_CONFIG["scheme"])
    postprocess: bool = SOLVER_CONFIG["postprocess"]
    seed: int = Field(0, ge=0)


class SolveResponse(BaseModel):
    schema_version: int = Field(SUMMARY_SCHEMA_VERSION, serialization_alias="schema")
    beta_hat: List[float]
    support: List[int]
    iterations: int
    seconds: float
    termination: Termination
    l1_norm: float
    feasibility_violation: float
    support_size: int
    empty_support: bool


class OracleCheckRequest(BaseModel):
    n: int = Field(12, ge=1)
    p: int = Field(8, ge=1)
    delta: float = Field(0.2, ge=0)
    seed: int = Field(0, ge=0)
    trials: int = Field(10, ge=1)
    sigma: float = Field(0.05, ge=0)
    scheme: Scheme = Scheme.TAU_FIRST


class OracleCheckResponse(BaseModel):
    schema_version: int = Field(SUMMARY_SCHEMA_VERSION, serialization_alias="schema")
    trials: int
    max_gap: float
    max_violation: float
    ok: bool
    failed_seed: Optional[int] = None
    gap_tolerance: float = ORACLE_CONFIG["oracle_check_gap"]
    violation_tolerance: float = ORACLE_CONFIG["oracle_check_violation"]
