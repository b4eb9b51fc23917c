"""HTTP client adapters use to talk to the platform.

Everything goes through the public REST surface — adapters exercise the same
contract as any external integration and can run on a separate host.
"""

from __future__ import annotations

from typing import Any

import httpx


class PlatformClientError(Exception):
    """Codes: Network, Rejected, Unauthorized."""

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(f"{code}: {message}")
        self.message = message


class PlatformClient:
    def __init__(self, endpoint: str, timeout: float = 30.0, client: httpx.Client | None = None):
        self._endpoint = endpoint.rstrip("/")
        self._client = client if client is not None else httpx.Client(timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "PlatformClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _request(self, method: str, path: str, **kwargs) -> httpx.Response:
        try:
            return self._client.request(method, f"{self._endpoint}{path}", **kwargs)
        except httpx.HTTPError as exc:
            raise PlatformClientError("Network", str(exc)) from exc

    def push_annotation(self, api_key: str, body: dict, cid: str | None = None) -> tuple[str, bool]:
        """Single-document upsert. Returns (hash, created)."""
        params = {"cid": cid} if cid is not None else None
        resp = self._request("POST", f"/api/annotation/{api_key}", json=body, params=params)
        if resp.status_code == 401:
            raise PlatformClientError("Unauthorized", _error_message(resp))
        if resp.status_code != 200:
            raise PlatformClientError("Rejected", _error_message(resp))
        results = resp.json()
        item = results[0]
        if not item.get("ok"):
            err = item.get("error", {})
            raise PlatformClientError(
                "Rejected", f"{err.get('code', 'Unknown')}: {err.get('message', '')}"
            )
        return item["hash"], bool(item["created"])

    def push_bulk(self, api_key: str, bodies: list[dict]) -> list[dict]:
        resp = self._request("POST", f"/api/annotation/{api_key}", json=bodies)
        if resp.status_code == 401:
            raise PlatformClientError("Unauthorized", _error_message(resp))
        if resp.status_code != 200:
            raise PlatformClientError("Rejected", _error_message(resp))
        return resp.json()

    def get_by_cid(self, api_key: str, cid: str) -> dict | None:
        resp = self._request("GET", f"/cid/{cid}", params={"key": api_key})
        if resp.status_code == 404:
            return None
        if resp.status_code == 401:
            raise PlatformClientError("Unauthorized", _error_message(resp))
        if resp.status_code != 200:
            raise PlatformClientError("Rejected", _error_message(resp))
        return resp.json()

    def fetch_text(self, url: str) -> str:
        """Plain GET used by adapters for feeds and pages."""
        try:
            resp = self._client.get(url)
        except httpx.HTTPError as exc:
            raise PlatformClientError("Network", str(exc)) from exc
        if resp.status_code != 200:
            raise PlatformClientError("Network", f"GET {url} -> {resp.status_code}")
        return resp.text


def _error_message(resp: httpx.Response) -> str:
    try:
        err = resp.json().get("error", {})
        return f"{err.get('code', resp.status_code)}: {err.get('message', '')}"
    except Exception:
        return f"HTTP {resp.status_code}"
