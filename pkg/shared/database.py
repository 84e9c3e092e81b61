"""
Модуль для работы с хранилищем результатов
"""
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, List, Optional

from sqlalchemy import create_engine, text
from sqlalchemy.engine import Engine, make_url
from sqlalchemy.orm import declarative_base, sessionmaker

from config import DATABASE_CONFIG, get_database_url
from shared.logs import get_logger
from shared.schemas import BenchRecord, Method

logger = get_logger(__name__)

# Базовый класс для моделей
Base = declarative_base()

_engines: Dict[str, Engine] = {}


def create_database_engine(url: Optional[str] = None) -> Engine:
    """
    Создание engine; для SQLite создаётся каталог файла базы
    """
    url = url or get_database_url()
    parsed = make_url(url)
    options = {
        "echo": DATABASE_CONFIG["echo"],
        "pool_pre_ping": True,
    }

    if parsed.get_backend_name() == "sqlite":
        if parsed.database and parsed.database != ":memory:":
            Path(parsed.database).parent.mkdir(parents=True, exist_ok=True)
    else:
        options.update(pool_size=5, max_overflow=10, pool_recycle=3600)

    engine = create_engine(url, **options)
    logger.info("Подключение к хранилищу результатов", backend=parsed.get_backend_name())
    return engine


def get_engine(url: Optional[str] = None) -> Engine:
    url = url or get_database_url()
    if url not in _engines:
        _engines[url] = create_database_engine(url)
    return _engines[url]


@contextmanager
def get_db_session(url: Optional[str] = None):
    """
    Контекстный менеджер для работы с сессией базы данных
    """
    session_factory = sessionmaker(bind=get_engine(url), autoflush=False, expire_on_commit=False)
    db = session_factory()
    try:
        yield db
        db.commit()
    except Exception as e:
        db.rollback()
        logger.error("Ошибка в сессии базы данных", error=str(e))
        raise
    finally:
        db.close()


def init_database(url: Optional[str] = None) -> bool:
    """
    Создание таблиц (повторный вызов ничего не меняет)
    """
    try:
        # Импортируем модели для их регистрации
        from shared.models import BenchRecordRow  # noqa: F401

        Base.metadata.create_all(bind=get_engine(url))
        logger.info("Таблицы базы данных созданы/проверены")
        return True
    except Exception as e:
        logger.error("Ошибка инициализации базы данных", error=str(e))
        return False


def check_database_connection(url: Optional[str] = None) -> bool:
    try:
        with get_engine(url).connect() as conn:
            conn.execute(text("SELECT 1"))
        return True
    except Exception as e:
        logger.error("Ошибка подключения к базе данных", error=str(e))
        return False


def store_bench_records(records: List[BenchRecord], url: Optional[str] = None) -> int:
    """Сохранение записей прогона; возвращает число сохранённых строк"""
    from shared.models import BenchRecordRow

    if not init_database(url):
        raise RuntimeError("Хранилище результатов недоступно")
    with get_db_session(url) as db:
        db.add_all([BenchRecordRow.from_record(r) for r in records])
    logger.info("Записи прогона сохранены", count=len(records))
    return len(records)


def fetch_bench_records(url: Optional[str] = None, method: Optional[Method] = None) -> List[BenchRecord]:
    """Записи в порядке (method, m, sigma, replicate)"""
    from shared.models import BenchRecordRow

    init_database(url)
    with get_db_session(url) as db:
        query = db.query(BenchRecordRow)
        if method is not None:
            query = query.filter(BenchRecordRow.method == Method(method).value)
        rows = query.order_by(
            BenchRecordRow.method, BenchRecordRow.m, BenchRecordRow.sigma, BenchRecordRow.replicate, BenchRecordRow.id
        ).all()
        return [row.to_record() for row in rows]
