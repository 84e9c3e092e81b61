"""
Инициализация хранилища результатов бенчмарка
"""
import sys
from pathlib import Path

# Добавляем корневую директорию в путь Python
sys.path.insert(0, str(Path(__file__).parent))

from config import get_database_url
from shared.database import check_database_connection, fetch_bench_records, init_database
from shared.logs import get_logger, setup_logging

setup_logging()
logger = get_logger(__name__)


def print_header(url: str):
    """Вывод заголовка"""
    print("=" * 70)
    print("ИНИЦИАЛИЗАЦИЯ ХРАНИЛИЩА РЕЗУЛЬТАТОВ")
    print("=" * 70)
    print(f"База данных: {url}")
    print("=" * 70)


def main(url: str = None) -> bool:
    """Основная функция инициализации"""
    url = url or get_database_url()
    print_header(url)

    print("\n Проверка подключения...")
    if not check_database_connection(url):
        print(" Не удалось подключиться к базе данных")
        print("Проверьте DANTZIG_DATABASE_URL")
        return False

    print("\n Создание таблиц...")
    if not init_database(url):
        print(" Ошибка при создании таблиц")
        return False

    stored = len(fetch_bench_records(url))
    print(f"\n Таблица bench_records готова, записей: {stored}")
    print("\n Следующие шаги:")
    print("   1. Прогон: python -m dantzig bench --out-dir results --db-url <url>")
    print("   2. Сервис: python -m solver_service.main")
    print("=" * 70)
    logger.info("Хранилище инициализировано", records=stored)
    return True


if __name__ == "__main__":
    success = main(sys.argv[1] if len(sys.argv) > 1 else None)
    sys.exit(0 if success else 1)
