"""
Общие модули: схемы данных, ошибки, логирование, хранилище результатов
"""
