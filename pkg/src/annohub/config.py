"""Service configuration: one JSON file, overridable per-field from the
environment (ANNOHUB_HOST, ANNOHUB_PORT, ANNOHUB_PERSISTENCE_PATH,
ANNOHUB_TOKEN_SECRET, ANNOHUB_VOCABULARY_PATH, ANNOHUB_APP_DIR,
ANNOHUB_OPEN_REGISTRATION)."""

from __future__ import annotations

import json
import os
import secrets
from dataclasses import dataclass, field


@dataclass(frozen=True)
class SeedUser:
    email: str
    password: str
    organization: str


@dataclass(frozen=True)
class SeedWebsite:
    organization: str
    display_name: str
    website_id: str | None = None
    api_key: str | None = None


@dataclass(frozen=True)
class AppConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    persistence_path: str | None = None  # None → in-memory store
    token_secret: str = ""
    vocabulary_path: str | None = None  # None → bundled vocabulary
    app_dir: str | None = None  # static frontend to serve under /app
    open_registration: bool = False
    seed_organizations: tuple[str, ...] = ()
    seed_users: tuple[SeedUser, ...] = ()
    seed_websites: tuple[SeedWebsite, ...] = ()


def load_config(path: str | None = None, env: dict[str, str] | None = None) -> AppConfig:
    env = os.environ if env is None else env
    raw: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ValueError("config file must hold a JSON object")

    def pick(key: str, env_key: str, default):
        if env_key in env:
            return env[env_key]
        return raw.get(key, default)

    port = pick("port", "ANNOHUB_PORT", 8000)
    open_reg = pick("openRegistration", "ANNOHUB_OPEN_REGISTRATION", False)
    if isinstance(open_reg, str):
        open_reg = open_reg.strip().lower() in ("1", "true", "yes", "on")

    seed = raw.get("seed", {})
    users = tuple(
        SeedUser(email=u["email"], password=u["password"], organization=u["organization"])
        for u in seed.get("users", [])
    )
    websites = tuple(
        SeedWebsite(
            organization=w["organization"],
            display_name=w["displayName"],
            website_id=w.get("websiteId"),
            api_key=w.get("apiKey"),
        )
        for w in seed.get("websites", [])
    )
    return AppConfig(
        host=str(pick("host", "ANNOHUB_HOST", "127.0.0.1")),
        port=int(port),
        persistence_path=pick("persistencePath", "ANNOHUB_PERSISTENCE_PATH", None),
        token_secret=str(pick("tokenSecret", "ANNOHUB_TOKEN_SECRET", "")) or secrets.token_hex(32),
        vocabulary_path=pick("vocabularyPath", "ANNOHUB_VOCABULARY_PATH", None),
        app_dir=pick("appDir", "ANNOHUB_APP_DIR", None),
        open_registration=bool(open_reg),
        seed_organizations=tuple(seed.get("organizations", [])),
        seed_users=users,
        seed_websites=websites,
    )
