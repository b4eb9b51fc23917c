"""Fetch an annotation and inject it into HTML as a JSON-LD script element.

This is the generic stand-in for per-CMS plugins: resolve the annotation via
one of the public shortener routes (hash, page URL, or CID), then insert
``<script type="application/ld+json">…</script>`` immediately before the
closing head tag. Handling is textual, not DOM-based — every byte outside the
inserted region is preserved, and a page whose head already carries the same
payload is returned unchanged.

The payload embeds the annotation verbatim except that ``<`` becomes
``\\u003c``. In canonically serialized JSON a ``<`` can only occur inside a
string literal, where the escape is value-preserving, so the page can never
gain a premature ``</script>`` terminator.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import re
import sys
import tempfile
import time
from dataclasses import dataclass
from urllib.parse import quote

import httpx

from annohub.annotation import url_retrieval_key

SCRIPT_OPEN = b'<script type="application/ld+json">'
SCRIPT_CLOSE = b"</script>"

_HEAD_CLOSE_RE = re.compile(rb"</head\s*>", re.IGNORECASE)
_COMMENT_RE = re.compile(rb"<!--.*?-->", re.DOTALL)
_LD_SCRIPT_RE = re.compile(
    rb"<script[^>]*type\s*=\s*[\"']application/ld\+json[\"'][^>]*>(.*?)</script>",
    re.IGNORECASE | re.DOTALL,
)


class InjectorError(Exception):
    """Codes: NotFound, Unauthorized, NetworkError, UsageError."""

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(f"{code}: {message}")
        self.message = message


@dataclass(frozen=True)
class InjectionSpec:
    mode: str  # "byHash" | "byPageUrl" | "byCid"
    key: str
    endpoint: str
    api_key: str | None = None


@dataclass(frozen=True)
class InjectionResult:
    document: bytes
    changed: bool
    warning: str | None = None


def fetch_annotation(spec: InjectionSpec, client: httpx.Client | None = None) -> bytes:
    """Resolve the annotation through the matching shortener route."""
    if spec.mode not in ("byHash", "byPageUrl", "byCid"):
        raise InjectorError("UsageError", f"unknown mode {spec.mode}")
    if spec.mode != "byHash" and not spec.api_key:
        raise InjectorError("UsageError", f"{spec.mode} requires the website apiKey")

    endpoint = spec.endpoint.rstrip("/")
    if spec.mode == "byHash":
        url = f"{endpoint}/{spec.key}"
        params = None
    elif spec.mode == "byPageUrl":
        url = f"{endpoint}/url/{url_retrieval_key(spec.key)}"
        params = {"key": spec.api_key}
    else:
        url = f"{endpoint}/cid/{quote(spec.key, safe='')}"
        params = {"key": spec.api_key}

    owned = client is None
    client = client if client is not None else httpx.Client(timeout=30.0)
    try:
        resp = client.get(url, params=params)
    except httpx.HTTPError as exc:
        raise InjectorError("NetworkError", str(exc)) from exc
    finally:
        if owned:
            client.close()
    if resp.status_code == 404:
        raise InjectorError("NotFound", f"no annotation for {spec.mode} {spec.key}")
    if resp.status_code == 401:
        raise InjectorError("Unauthorized", "missing or unknown apiKey")
    if resp.status_code != 200:
        raise InjectorError("NetworkError", f"unexpected status {resp.status_code}")
    return resp.content


def script_payload(annotation: bytes) -> bytes:
    return annotation.replace(b"<", b"\\u003c")


def script_tag(annotation: bytes) -> bytes:
    return SCRIPT_OPEN + script_payload(annotation) + SCRIPT_CLOSE


def _head_close_position(html: bytes) -> int | None:
    """Offset of the first closing head tag that is not inside a comment."""
    comments = [m.span() for m in _COMMENT_RE.finditer(html)]
    for match in _HEAD_CLOSE_RE.finditer(html):
        start = match.start()
        if not any(lo <= start < hi for lo, hi in comments):
            return start
    return None


def extract_ld_json(html: bytes) -> list[bytes]:
    """Bodies of every application/ld+json script element in the page."""
    return [m.group(1) for m in _LD_SCRIPT_RE.finditer(html)]


def inject(html: bytes, annotation: bytes) -> InjectionResult:
    """Insert the annotation before ``</head>``.

    Idempotent: when an existing JSON-LD script already carries this exact
    payload the input is returned unchanged. A page without a head section is
    also returned unchanged, flagged with the NoHeadElement warning.
    """
    payload = script_payload(annotation)
    digest = hashlib.sha256(payload.strip()).digest()
    for existing in extract_ld_json(html):
        if hashlib.sha256(existing.strip()).digest() == digest:
            return InjectionResult(document=html, changed=False)

    position = _head_close_position(html)
    if position is None:
        return InjectionResult(document=html, changed=False, warning="NoHeadElement")
    out = html[:position] + SCRIPT_OPEN + payload + SCRIPT_CLOSE + html[position:]
    return InjectionResult(document=out, changed=True)


# --- optional on-disk cache ---------------------------------------------------


def _cache_path(cache_dir: str, spec: InjectionSpec) -> str:
    token = hashlib.sha256(
        f"{spec.endpoint}|{spec.mode}|{spec.key}|{spec.api_key or ''}".encode("utf-8")
    ).hexdigest()
    return os.path.join(cache_dir, token)


def fetch_with_cache(spec: InjectionSpec, cache_ttl: float | None, cache_dir: str | None = None) -> bytes:
    if not cache_ttl or cache_ttl <= 0:
        return fetch_annotation(spec)
    cache_dir = cache_dir or os.path.join(tempfile.gettempdir(), "annohub-inject-cache")
    os.makedirs(cache_dir, exist_ok=True)
    path = _cache_path(cache_dir, spec)
    try:
        if time.time() - os.path.getmtime(path) < cache_ttl:
            with open(path, "rb") as fh:
                return fh.read()
    except OSError:
        pass
    data = fetch_annotation(spec)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)
    return data


# --- CLI -----------------------------------------------------------------------

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NETWORK = 3
EXIT_NOT_FOUND = 4
EXIT_INJECTION = 5


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="annohub-inject",
        description="Fetch an annotation and inject it into an HTML document",
    )
    parser.add_argument("--endpoint", default=os.environ.get("ANNOHUB_ENDPOINT"),
                        help="platform base URL (or ANNOHUB_ENDPOINT)")
    parser.add_argument("--hash", dest="hash_token", help="retrieve by 9-character hash")
    parser.add_argument("--page-url", help="retrieve by the page's url property value")
    parser.add_argument("--cid", help="retrieve by custom identifier")
    parser.add_argument("--key", default=os.environ.get("ANNOHUB_API_KEY"),
                        help="website apiKey (required with --page-url/--cid, or ANNOHUB_API_KEY)")
    parser.add_argument("--in", dest="in_file", help="HTML file to inject into")
    parser.add_argument("--out", dest="out_file", help="output file (with --in)")
    parser.add_argument("--stdout", action="store_true", help="write result to stdout")
    parser.add_argument("--cache-ttl", type=float, default=0.0,
                        help="cache fetched annotations on disk for this many seconds")
    args = parser.parse_args(argv)

    modes = [m for m in ((args.hash_token, "byHash"), (args.page_url, "byPageUrl"), (args.cid, "byCid")) if m[0]]
    if not args.endpoint or len(modes) != 1:
        print("exactly one of --hash/--page-url/--cid and an --endpoint are required", file=sys.stderr)
        return EXIT_USAGE
    key_value, mode = modes[0]
    if mode != "byHash" and not args.key:
        print(f"--key is required with --{ 'page-url' if mode == 'byPageUrl' else 'cid' }", file=sys.stderr)
        return EXIT_USAGE
    if not args.stdout and not (args.in_file and args.out_file):
        print("choose --stdout or both --in and --out", file=sys.stderr)
        return EXIT_USAGE

    spec = InjectionSpec(mode=mode, key=key_value, endpoint=args.endpoint, api_key=args.key)
    try:
        annotation = fetch_with_cache(spec, args.cache_ttl)
    except InjectorError as exc:
        print(str(exc), file=sys.stderr)
        if exc.code == "NotFound":
            return EXIT_NOT_FOUND
        if exc.code == "UsageError":
            return EXIT_USAGE
        return EXIT_NETWORK

    if not args.in_file:
        sys.stdout.buffer.write(script_tag(annotation) + b"\n")
        return EXIT_OK

    try:
        with open(args.in_file, "rb") as fh:
            html = fh.read()
    except OSError as exc:
        print(f"cannot read {args.in_file}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    result = inject(html, annotation)
    if result.warning:
        print(f"injection failed: {result.warning}", file=sys.stderr)
        return EXIT_INJECTION

    if args.out_file:
        with open(args.out_file, "wb") as fh:
            fh.write(result.document)
    else:
        sys.stdout.buffer.write(result.document)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
