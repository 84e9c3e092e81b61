import os
from pathlib import Path

import psutil

# Базовый путь проекта
BASE_DIR = Path(__file__).parent

# Параметры Stage-I / Stage-II решателя по умолчанию
SOLVER_CONFIG = {
    "max_iters": 50_000,
    "epsilon": 1e-4,
    "eta": 5,
    "tol": 1e-4,
    "alpha_factor": 0.2,  # alpha = 0.2 * ||A||^2
    "step_safety": 0.999,  # lambda = 0.999 * alpha / ||A||^2
    "norm_guard": 1e-4,  # оценка нормы умножается на (1 + norm_guard)
    "scheme": "tau_first",
    "postprocess": True,
    "lstsq_rank_rtol": 1e-10,
}

# Степенной метод для оценки ||A||_2
POWER_ITERATION_CONFIG = {
    "max_iters": 500,
    "rel_tol": 1e-8,
    "seed": 0,
}

# ADM (схема с внутренним немонотонным градиентным циклом)
ADM_CONFIG = {
    "c": 1.0,
    "inner_max_iters": 500,
    "inner_tol": 1e-6,
    "outer_max_iters": 5_000,
    "outer_tol": 1e-4,
    "nonmonotone_memory": 10,
    "bb_min": 1e-10,
    "bb_max": 1e10,
    "sufficient_decrease": 1e-4,
}

# LADM
LADM_CONFIG = {
    "c": 1.0,
    "ell_factor": 2.001,  # ell = 2.001 * ||X^T X||^2
    "max_iters": 50_000,
    "tol": 1e-4,
}

# Эксперимент с синтетическими данными
BENCH_CONFIG = {
    "n_per_m": 720,
    "p_per_m": 2560,
    "s_per_m": 80,
    "sigma_values": [0.01, 0.05, 0.10, 0.15],
    "replicates": 100,
    "base_seed": 2014,
    "methods": ["fp", "adm"],
}

# Эксперимент с классификацией
CLASSIFY_CONFIG = {
    "n_top": 1000,
    "tol": 0.1,
    "eta": 80,
    "epsilon": 1e-4,
    "delta_grid": [0.0625, 0.125, 0.1875, 0.25, 0.3125, 0.375],
    "threshold_low": 0.49,
    "threshold_high": 0.51,
    "feasibility_check": 1e-4,
    "refine_rounds": 4,  # ужесточение epsilon, пока ограничение нарушено
    "refine_factor": 1e-2,
}

# Предельный размер задачи для точного LP-оракула
ORACLE_CONFIG = {
    "max_n": 24,
    "max_p": 24,
    "pivot_tol": 1e-12,
    "oracle_check_gap": 1e-4,
    "oracle_check_violation": 1e-6,
    "check_epsilon": 1e-10,  # жёсткие критерии для сверки
    "check_max_iters": 200_000,
}

# Пути к файлам
PATHS = {
    "data_dir": BASE_DIR / "data",
}

# Хранилище результатов (SQLite по умолчанию)
DATABASE_CONFIG = {
    "url": os.getenv("DANTZIG_DATABASE_URL", f"sqlite:///{PATHS['data_dir'] / 'results.db'}"),
    "echo": False,
}

# Настройки сервисов
SERVICES_CONFIG = {
    "solver_port": 8010,
    "log_level": os.getenv("DANTZIG_LOG_LEVEL", "INFO"),
}

# Настройки приложения
APP_CONFIG = {
    "title": "Dantzig Selector Solver API",
    "description": "Решатель задачи Dantzig selector: двухэтапный алгоритм неподвижной точки, ADM/LADM, LP-оракул",
    "version": "1.0.0",
}

# Версия формата JSON-сводок
SUMMARY_SCHEMA_VERSION = 1

# Журнал: только stderr, stdout CLI занят JSON-сводкой
LOGGING_CONFIG = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(levelname)s %(name)s: %(message)s"},
        "timestamped": {"format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "stderr": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
            "stream": "ext://sys.stderr",
        },
    },
    "loggers": {
        "": {"handlers": ["stderr"], "level": SERVICES_CONFIG["log_level"]},
        "uvicorn": {"handlers": ["stderr"], "level": "INFO", "propagate": False},
        "sqlalchemy.engine": {"level": "WARNING"},
    },
}

# Файл журнала для долгих прогонов (--log-file)
LOG_FILE_HANDLER = {
    "class": "logging.handlers.RotatingFileHandler",
    "formatter": "timestamped",
    "maxBytes": 10 * 1024 * 1024,
    "backupCount": 3,
    "encoding": "utf-8",
}


def get_database_url():
    """Получение URL базы данных"""
    return DATABASE_CONFIG["url"]


def get_jobs():
    """
    Число параллельных процессов для бенчмарка

    DANTZIG_JOBS имеет приоритет, иначе число физических ядер
    (если psutil не может его определить, число логических CPU)
    """
    value = os.getenv("DANTZIG_JOBS")
    if value:
        return max(1, int(value))
    return psutil.cpu_count(logical=False) or os.cpu_count() or 1
