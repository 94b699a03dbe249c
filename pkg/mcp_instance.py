# mcp_instance.py
import os
from mcp.server.fastmcp import FastMCP

HOST = os.getenv("HOST", "0.0.0.0")
PORT = int(os.getenv("PORT", "8080"))

# Официальный FastMCP из пакета mcp
mcp = FastMCP(
    name="critnet",
    instructions=(
        "Теория среднего поля и IGB для широких случайных MLP: траектории по глубине, "
        "фазовые диаграммы, край хаоса, Монте-Карло сверка. Тяжёлые расчёты идут минутами, "
        "начинай с малых сеток и ансамблей."
    ),
    host=HOST,
    port=PORT,
    stateless_http=True,
)
