# server.py
from dotenv import load_dotenv, find_dotenv

load_dotenv(find_dotenv())

from mcp_instance import HOST, PORT, mcp

from tools.depth_trace import depth_trace  # noqa: F401
from tools.phase_diagram import phase_diagram  # noqa: F401
from tools.eoc_curve import eoc_curve  # noqa: F401
from tools.monte_carlo import monte_carlo  # noqa: F401
from tools.g0_histogram import g0_histogram  # noqa: F401
from tools.self_check import self_check  # noqa: F401


@mcp.prompt()
def initialization_prompt(activation: str = "relu", sigma_w2: float = 2.0, sigma_b2: float = 0.0) -> str:
    return (
        f"Исследуй инициализацию сети с активацией {activation}, σ²_w={sigma_w2}, σ²_b={sigma_b2}: "
        "построй depth_trace, определи фазу через phase_diagram на узкой сетке вокруг точки "
        "и сравни с monte_carlo на небольшом ансамбле. Ответь, будет ли сеть предвзятой на старте."
    )


def main() -> None:
    print("=" * 60)
    print("🌐 ЗАПУСК MCP СЕРВЕРА CRITNET (СРЕДНЕЕ ПОЛЕ И EOC)")
    print("=" * 60)
    print(f"🚀 MCP Server: http://{HOST}:{PORT}/mcp")
    print("=" * 60)

    # Официальный SDK: транспорт задаём только тут
    mcp.run(transport="streamable-http")


if __name__ == "__main__":
    main()
