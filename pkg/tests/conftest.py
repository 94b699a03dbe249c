"""Общие фикстуры: квадратуры и поддельный MCP-контекст."""

from typing import List, Tuple

import pytest

from critnet.quadrature import Backend, default_spec


@pytest.fixture
def quad():
    return default_spec()


@pytest.fixture
def hermite():
    return default_spec(Backend.HERMITE)


class FakeContext:
    """Собирает сообщения, которые инструмент отправил бы клиенту."""

    def __init__(self) -> None:
        self.infos: List[str] = []
        self.errors: List[str] = []
        self.progress: List[Tuple[float, float]] = []

    async def info(self, message: str) -> None:
        self.infos.append(message)

    async def error(self, message: str) -> None:
        self.errors.append(message)

    async def report_progress(self, progress: float, total: float | None = None, message: str | None = None) -> None:
        self.progress.append((progress, total))


@pytest.fixture
def ctx():
    return FakeContext()


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch, tmp_path):
    for name in ("CRITNET_THREADS", "CRITNET_QUAD_BACKEND", "CRITNET_QUAD_NODES", "PORT"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("CRITNET_OUT_DIR", str(tmp_path / "out"))
