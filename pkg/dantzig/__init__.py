"""
Решатель задачи Dantzig selector: двухэтапная схема неподвижной точки,
базовые методы ADM/LADM, LP-оракул, бенчмарк и классификация
"""
