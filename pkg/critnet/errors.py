"""Иерархия ошибок critnet.

Каждая ошибка знает свой код выхода CLI и код ошибки MCP,
чтобы инструменты и командная строка сообщали о ней одинаково.
"""

from typing import Optional

# Коды JSON-RPC, которые использует MCP
INVALID_PARAMS = -32602
INTERNAL_ERROR = -32603

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class CritnetError(Exception):
    """Базовая ошибка библиотеки."""

    exit_code: int = EXIT_NUMERIC
    mcp_code: int = INTERNAL_ERROR


class ConfigError(CritnetError):
    """Неверная конфигурация запуска или окружения."""

    exit_code = EXIT_USAGE
    mcp_code = INVALID_PARAMS


class DatasetError(CritnetError):
    """Датасет не читается или не совпадает с архитектурой."""

    exit_code = EXIT_USAGE
    mcp_code = INVALID_PARAMS


class DomainError(CritnetError):
    """Аргумент вне области определения (c вне [-1, 1], x < 0, sd2 <= 0, ...)."""

    exit_code = EXIT_USAGE
    mcp_code = INVALID_PARAMS


class NonFiniteIntegrand(CritnetError):
    """Подынтегральная функция вернула inf/nan."""

    def __init__(self, abscissa: float, message: Optional[str] = None):
        self.abscissa = abscissa
        super().__init__(message or f"Неконечное значение подынтегральной функции в точке z={abscissa!r}")


class Unsupported(CritnetError):
    """Запрошенный вариант не поддерживается (n > 2, активация вне семейства ReLU, ...)."""

    exit_code = EXIT_USAGE
    mcp_code = INVALID_PARAMS


class UnknownActivation(CritnetError):
    """Имя активации отсутствует в реестре."""

    exit_code = EXIT_USAGE
    mcp_code = INVALID_PARAMS


class ArityError(CritnetError):
    """Операция требует активацию другой арности."""

    exit_code = EXIT_USAGE
    mcp_code = INVALID_PARAMS


class InvariantViolation(CritnetError):
    """Нарушено |q| <= Lambda или 0 <= q."""

    exit_code = EXIT_USAGE
    mcp_code = INVALID_PARAMS


class DegenerateVariance(CritnetError):
    """Нулевая дисперсия там, где на неё делим."""


class EmptyCurve(CritnetError):
    """Ни одна точка сетки q не дала допустимую точку EOC."""


class NonConvergent(CritnetError):
    """Итерация не сошлась за отведённое число шагов."""
