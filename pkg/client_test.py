import asyncio
import json
import os
import uuid
import httpx

MCP_URL = os.getenv("MCP_URL", "http://0.0.0.0:8080/mcp")


def extract_sse_json(raw: str):
    """Вытаскиваем последнее data:{...} из SSE-ответа."""
    last_json = None
    for line in raw.splitlines():
        line = line.strip()
        if line.startswith("data:"):
            candidate = line.removeprefix("data:").strip()
            if candidate:
                last_json = candidate
    return last_json


async def call_tool(name: str, arguments: dict):
    payload = {
        "jsonrpc": "2.0",
        "id": str(uuid.uuid4()),
        "method": "tools/call",
        "params": {
            "name": name,
            "arguments": arguments,
        },
    }

    headers = {
        "Content-Type": "application/json",
        "Accept": "application/json, text/event-stream",
    }

    # Монте-Карло на полном ансамбле может идти минуты
    async with httpx.AsyncClient(timeout=600.0) as client:
        resp = await client.post(MCP_URL, headers=headers, json=payload)
        resp.raise_for_status()
        raw = resp.text

    json_text = extract_sse_json(raw)
    if not json_text:
        print("❌ JSON не найден в SSE потоке")
        print(raw)
        return

    data = json.loads(json_text)
    if "error" in data:
        print(f"❌ {data['error']['code']}: {data['error']['message']}")
        return data

    result = data.get("result", {})
    for block in result.get("content", []):
        print(block.get("text", ""))
    structured = result.get("structuredContent") or {}
    # ToolResult приходит целиком: полезная часть лежит в structured_content
    structured = structured.get("structured_content") or structured
    if "rows" in structured:
        print(f"📊 {structured.get('schema')}: {len(structured['rows'])} строк, столбцы {structured.get('columns')}")
    return data


# --- Ручная проверка запущенного сервера ---


async def smoke_all():
    print("\n>>> depth_trace")
    await call_tool("depth_trace", {"activation": "tanh", "sigma_w2": 1.5, "sigma_b2": 0.05, "depth": 50})

    print("\n>>> phase_diagram")
    await call_tool("phase_diagram", {"activation": "relu", "sw_range": "1:3:5", "sb_range": "0:1:3"})

    print("\n>>> eoc_curve")
    await call_tool("eoc_curve", {"activation": "tanh", "q_max": 5.0, "points": 20})

    print("\n>>> g0_histogram")
    await call_tool("g0_histogram", {"gamma": 100.0, "draws": 50_000})

    print("\n>>> monte_carlo")
    await call_tool(
        "monte_carlo",
        {"activation": "relu", "sigma_w2": 2.0, "sigma_b2": 0.1, "width": 128, "depth": 10, "ensemble": 4},
    )

    print("\n>>> phase_diagram (ошибка: пустой диапазон)")
    await call_tool("phase_diagram", {"activation": "relu", "sw_range": "3:1:3", "sb_range": "0:0:1"})


if __name__ == "__main__":
    asyncio.run(smoke_all())
