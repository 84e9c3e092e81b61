"""
HTTP-сервис решателя Dantzig selector
"""
import sys
from datetime import datetime
from pathlib import Path

# Добавляем корневую директорию в путь Python
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
from fastapi import FastAPI, HTTPException, status

from config import APP_CONFIG, SERVICES_CONFIG, SOLVER_CONFIG
from dantzig.bench import oracle_check
from dantzig.core import from_design
from dantzig.fpsolver import solve
from dantzig.linop import DantzigOperator
from shared.errors import NumericalError, UsageError
from shared.logs import get_logger, setup_logging
from shared.schemas import SolverConfig
from solver_service.schemas import OracleCheckRequest, OracleCheckResponse, SolveRequest, SolveResponse

setup_logging(SERVICES_CONFIG["log_level"])
logger = get_logger(__name__)

app = FastAPI(
    title=APP_CONFIG["title"],
    description=APP_CONFIG["description"],
    version=APP_CONFIG["version"],
    docs_url="/docs",
    redoc_url="/redoc"
)


def _http_error(e: Exception) -> HTTPException:
    if isinstance(e, NumericalError):
        return HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail=str(e))
    return HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))


@app.post("/solve", response_model=SolveResponse)
def solve_problem(request: SolveRequest):
    """
    Решение одной задачи двухэтапным алгоритмом

    - **x**: строки матрицы X (n x p)
    - **y**: вектор наблюдений длины n
    - **delta**: порог ограничения
    - остальные поля переопределяют параметры решателя
    """
    try:
        X = np.asarray(request.x, dtype=np.float64)
        problem = from_design(X, request.y, request.delta)
        logger.info("Запрос на решение", n=problem.n, p=problem.p, delta=request.delta)

        op = DantzigOperator(problem, seed=request.seed)
        alpha = request.alpha or SOLVER_CONFIG["alpha_factor"] * op.norm_estimate ** 2
        cfg = SolverConfig(
            alpha=alpha,
            lam=request.lam,
            tol=request.tol,
            epsilon=request.epsilon,
            eta=request.eta,
            max_iters=request.max_iters,
            scheme=request.scheme,
            postprocess=request.postprocess,
        )
        result = solve(problem, cfg, op=op)
        return SolveResponse(beta_hat=result.beta_hat.tolist(), support=result.support, **result_summary(result))

    except HTTPException:
        raise
    except (UsageError, NumericalError, ValueError) as e:
        logger.warning("Запрос на решение отклонён", error=str(e))
        raise _http_error(e)
    except Exception as e:
        logger.error("Ошибка при решении", error=str(e))
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Не удалось решить задачу"
        )


def result_summary(result) -> dict:
    summary = result.summary()
    summary.pop("method")
    return summary


@app.post("/oracle-check", response_model=OracleCheckResponse)
def run_oracle_check(request: OracleCheckRequest):
    """
    Сверка решателя с LP-оракулом на случайных маленьких задачах
    """
    try:
        report = oracle_check(
            request.n, request.p, request.delta, request.seed, request.trials,
            sigma=request.sigma, scheme=request.scheme,
        )
        logger.info("Сверка с оракулом завершена", ok=report["ok"], trials=report["trials"])
        return OracleCheckResponse(**report)

    except (UsageError, NumericalError, ValueError) as e:
        logger.warning("Сверка с оракулом отклонена", error=str(e))
        raise _http_error(e)


@app.get("/health")
async def health_check():
    """
    Проверка здоровья сервиса
    """
    return {
        "status": "healthy",
        "service": "solver",
        "timestamp": datetime.utcnow().isoformat()
    }


if __name__ == "__main__":
    import uvicorn

    port = SERVICES_CONFIG["solver_port"]
    print(f"Запуск Solver Service на порту {port}...")
    print(f"Документация API: http://localhost:{port}/docs")

    uvicorn.run(
        "solver_service.main:app",
        host="0.0.0.0",
        port=port,
        log_level=SERVICES_CONFIG["log_level"].lower()
    )
