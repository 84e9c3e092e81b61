"""
Настройка логирования: stdlib dictConfig + structlog поверх него
"""
import copy
import logging.config
from pathlib import Path
from typing import Optional, Union

import structlog

from config import LOG_FILE_HANDLER, LOGGING_CONFIG

structlog.configure(
    processors=[
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.stdlib.PositionalArgumentsFormatter(),
        structlog.processors.format_exc_info,
        structlog.processors.KeyValueRenderer(key_order=["event"], drop_missing=True),
    ],
    logger_factory=structlog.stdlib.LoggerFactory(),
    wrapper_class=structlog.stdlib.BoundLogger,
    cache_logger_on_first_use=True,
)


def setup_logging(level: Optional[str] = None, log_file: Optional[Union[str, Path]] = None):
    """
    Применение LOGGING_CONFIG

    level переопределяет уровень корневого логгера, log_file добавляет
    ротируемый файл рядом с stderr. Повторный вызов перенастраивает обработчики.
    """
    config = copy.deepcopy(LOGGING_CONFIG)
    root = config["loggers"][""]
    if level:
        root["level"] = level.upper()
    if log_file is not None:
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        config["handlers"]["file"] = {**LOG_FILE_HANDLER, "filename": str(path)}
        root["handlers"] = root["handlers"] + ["file"]

    logging.config.dictConfig(config)


def get_logger(name: str):
    """Структурированный логгер модуля"""
    return structlog.get_logger(name)
