"""Пакет с MCP-инструментами поверх critnet: теория среднего поля и ансамбли случайных сетей."""
