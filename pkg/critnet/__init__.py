"""critnet: теория среднего поля и IGB для широких случайных MLP + Монте-Карло проверка."""

__version__ = "0.1.0"
