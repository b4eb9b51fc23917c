from __future__ import annotations

import threading
import time

import pytest

from annohub.api import create_app
from annohub.config import AppConfig, SeedUser, SeedWebsite
from annohub.store import PlatformStore
from annohub.vocab import bundled_vocabulary_path, load_vocabulary

TOKEN_SECRET = "test-secret"


@pytest.fixture(scope="session")
def vocab_graph():
    return load_vocabulary(bundled_vocabulary_path())


@pytest.fixture(scope="session")
def raw_vocab():
    import json

    with open(bundled_vocabulary_path(), "r", encoding="utf-8") as fh:
        return json.load(fh)


def make_config(**overrides) -> AppConfig:
    defaults = dict(
        token_secret=TOKEN_SECRET,
        seed_organizations=("Acme", "Rival"),
        seed_users=(
            SeedUser(email="owner@acme.test", password="hunter2", organization="Acme"),
            SeedUser(email="other@rival.test", password="hunter2", organization="Rival"),
        ),
        seed_websites=(
            SeedWebsite(organization="Acme", display_name="Acme Site", website_id="site-acme", api_key="KEY-ACME"),
            SeedWebsite(organization="Rival", display_name="Rival Site", website_id="site-rival", api_key="KEY-RIVAL"),
        ),
    )
    defaults.update(overrides)
    return AppConfig(**defaults)


def make_app(store: PlatformStore | None = None, **config_overrides):
    return create_app(make_config(**config_overrides), store=store)


@pytest.fixture()
def app():
    return make_app()


@pytest.fixture()
def client(app):
    from fastapi.testclient import TestClient

    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


def login(client, email="owner@acme.test", password="hunter2") -> dict:
    resp = client.post("/api/auth/login", json={"email": email, "password": password})
    assert resp.status_code == 200, resp.text
    return {"Authorization": f"Bearer {resp.json()['token']}"}


class LiveServer:
    """Real uvicorn instance on a random localhost port, run in a thread."""

    def __init__(self, app):
        import uvicorn

        self._config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
        self._server = uvicorn.Server(self._config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)
        self.base_url = ""

    def __enter__(self) -> "LiveServer":
        self._thread.start()
        deadline = time.time() + 10
        while not self._server.started:
            if time.time() > deadline:
                raise RuntimeError("server failed to start")
            time.sleep(0.01)
        port = self._server.servers[0].sockets[0].getsockname()[1]
        self.base_url = f"http://127.0.0.1:{port}"
        return self

    def __exit__(self, *exc_info) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10)


# --- acceptance reporting -------------------------------------------------

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_record():
    def record(criterion: str, ok: bool, detail: str) -> None:
        status = "PASS" if ok else "FAIL"
        _ACCEPTANCE_LINES.append(f"ACCEPTANCE {status} {criterion}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
