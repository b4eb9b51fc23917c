"""Injector: fetch an annotation and splice it into HTML ahead of </head>."""

from __future__ import annotations

import json
import os
from html.parser import HTMLParser

import httpx
import pytest

from annohub.injector import (
    EXIT_INJECTION,
    EXIT_NETWORK,
    EXIT_NOT_FOUND,
    EXIT_OK,
    EXIT_USAGE,
    SCRIPT_CLOSE,
    SCRIPT_OPEN,
    InjectionSpec,
    InjectorError,
    extract_ld_json,
    fetch_annotation,
    fetch_with_cache,
    inject,
    main,
    script_payload,
    script_tag,
)

ANNOTATION = b'{"@context":"http://schema.org","@type":"Hotel","name":"Alpenhof"}'

PAGE = (
    b"<!doctype html>\n<html>\n<head>\n  <meta charset=\"utf-8\">\n"
    b"  <title>Alpenhof</title>\n</head>\n<body>\n  <p>Welcome \xc3\xa9t\xc3\xa9</p>\n"
    b"</body>\n</html>\n"
)

HOTEL = {
    "@context": "http://schema.org",
    "@type": "Hotel",
    "name": "Alpenhof",
    "url": "https://example.com/alpenhof?room=2&view=s%C3%BCd",
}


class ScriptCollector(HTMLParser):
    """Counts <script> elements and captures each element's text content."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=False)
        self.count = 0
        self.bodies: list[str] = []
        self._buf: list[str] | None = None

    def handle_starttag(self, tag, attrs):
        if tag == "script":
            self.count += 1
            self._buf = []

    def handle_endtag(self, tag):
        if tag == "script" and self._buf is not None:
            self.bodies.append("".join(self._buf))
            self._buf = None

    def handle_data(self, data):
        if self._buf is not None:
            self._buf.append(data)


def collect_scripts(html: bytes) -> ScriptCollector:
    parser = ScriptCollector()
    parser.feed(html.decode("utf-8"))
    parser.close()
    return parser


# --- placement ------------------------------------------------------------------


def test_inject_places_tag_directly_before_head_close():
    result = inject(PAGE, ANNOTATION)
    assert result.changed is True
    assert result.warning is None
    position = PAGE.index(b"</head>")
    expected = (
        PAGE[:position]
        + SCRIPT_OPEN
        + script_payload(ANNOTATION)
        + SCRIPT_CLOSE
        + PAGE[position:]
    )
    assert result.document == expected


def test_inject_matches_head_close_case_and_spacing():
    page = b"<html><HEAD><title>x</title></HEAD ><body></body></html>"
    result = inject(page, ANNOTATION)
    assert result.changed is True
    position = page.index(b"</HEAD >")
    assert result.document[:position] == page[:position]
    assert result.document[position : position + len(SCRIPT_OPEN)] == SCRIPT_OPEN
    assert result.document.endswith(b"</HEAD ><body></body></html>")


def test_inject_skips_head_close_inside_comment():
    page = (
        b"<html><head><!-- template: duplicate </head> marker -->"
        b"<title>x</title></head><body></body></html>"
    )
    result = inject(page, ANNOTATION)
    assert result.changed is True
    # The commented-out close tag is untouched; the tag lands before the real one.
    comment_end = page.index(b"-->") + 3
    real_close = page.index(b"</head>", comment_end)
    assert result.document[:real_close] == page[:real_close]
    assert result.document[real_close : real_close + len(SCRIPT_OPEN)] == SCRIPT_OPEN
    assert b"<!-- template: duplicate </head> marker -->" in result.document


def test_inject_preserves_every_byte_outside_inserted_region():
    page = b"<html>\r\n<head \t>\xe2\x80\x94<title>a</title></head>\r\n<body>\x00weird</body></html>"
    result = inject(page, ANNOTATION)
    position = page.index(b"</head>")
    inserted = len(result.document) - len(page)
    assert result.document[:position] == page[:position]
    assert result.document[position + inserted :] == page[position:]


def test_inject_without_head_returns_page_unchanged_with_warning():
    page = b"<html><body><p>no head here</p></body></html>"
    result = inject(page, ANNOTATION)
    assert result.changed is False
    assert result.warning == "NoHeadElement"
    assert result.document == page


def test_inject_is_idempotent():
    first = inject(PAGE, ANNOTATION)
    second = inject(first.document, ANNOTATION)
    assert second.changed is False
    assert second.warning is None
    assert second.document == first.document


def test_inject_recognizes_existing_payload_despite_whitespace():
    position = PAGE.index(b"</head>")
    page = (
        PAGE[:position]
        + b'<script type="application/ld+json">\n  '
        + script_payload(ANNOTATION)
        + b"\n</script>"
        + PAGE[position:]
    )
    result = inject(page, ANNOTATION)
    assert result.changed is False
    assert result.document == page


def test_inject_adds_second_script_for_different_annotation():
    other = b'{"@context":"http://schema.org","@type":"Hotel","name":"Edelweiss"}'
    first = inject(PAGE, ANNOTATION)
    second = inject(first.document, other)
    assert second.changed is True
    assert len(extract_ld_json(second.document)) == 2


# --- escaping -------------------------------------------------------------------


def test_script_payload_escapes_every_angle_open():
    hostile = json.dumps(
        {
            "@context": "http://schema.org",
            "@type": "Hotel",
            "name": "</script><script>alert(1)</script>",
        },
        separators=(",", ":"),
        ensure_ascii=False,
    ).encode("utf-8")
    payload = script_payload(hostile)
    assert b"<" not in payload
    assert b"\\u003c" in payload
    # The escape is value-preserving JSON.
    assert json.loads(payload) == json.loads(hostile)


def test_hostile_value_cannot_terminate_script_element():
    hostile = json.dumps(
        {
            "@context": "http://schema.org",
            "@type": "Hotel",
            "name": "</script><img src=x onerror=alert(1)>",
        },
        separators=(",", ":"),
        ensure_ascii=False,
    ).encode("utf-8")
    result = inject(PAGE, hostile)
    parsed = collect_scripts(result.document)
    assert parsed.count == 1
    assert json.loads(parsed.bodies[0]) == json.loads(hostile)


def test_script_tag_wraps_payload():
    tag = script_tag(ANNOTATION)
    assert tag == SCRIPT_OPEN + script_payload(ANNOTATION) + SCRIPT_CLOSE


def test_extract_ld_json_finds_all_bodies_with_attribute_variants():
    html = (
        b"<head><script type='application/ld+json'>{\"a\":1}</script>"
        b'<script async type="application/ld+json" id="x">{"b":2}</script>'
        b"<script>var notLd = 1;</script></head>"
    )
    assert extract_ld_json(html) == [b'{"a":1}', b'{"b":2}']


# --- fetch_annotation over the platform API --------------------------------------


def seed(client, payload=HOTEL, **params):
    resp = client.post("/api/annotation/KEY-ACME", json=payload, params=params)
    assert resp.status_code == 200, resp.text
    (result,) = resp.json()
    assert result["ok"], result
    return result["hash"]


def test_fetch_by_hash_returns_stored_bytes(client):
    h = seed(client)
    spec = InjectionSpec(mode="byHash", key=h, endpoint="http://testserver")
    body = fetch_annotation(spec, client=client)
    assert body == client.get(f"/{h}").content
    assert json.loads(body)["name"] == "Alpenhof"


def test_fetch_by_page_url_uses_exact_encoded_key(client):
    h = seed(client)
    spec = InjectionSpec(
        mode="byPageUrl",
        key=HOTEL["url"],
        endpoint="http://testserver",
        api_key="KEY-ACME",
    )
    assert fetch_annotation(spec, client=client) == client.get(f"/{h}").content


def test_fetch_by_cid(client):
    h = seed(client, cid="feed 9/de")
    spec = InjectionSpec(
        mode="byCid", key="feed 9/de", endpoint="http://testserver", api_key="KEY-ACME"
    )
    assert fetch_annotation(spec, client=client) == client.get(f"/{h}").content


def test_fetch_missing_hash_raises_not_found(client):
    spec = InjectionSpec(mode="byHash", key="ZZZZZZZZZ", endpoint="http://testserver")
    with pytest.raises(InjectorError) as excinfo:
        fetch_annotation(spec, client=client)
    assert excinfo.value.code == "NotFound"


def test_fetch_with_unknown_api_key_raises_unauthorized(client):
    seed(client, cid="feed-1-de")
    spec = InjectionSpec(
        mode="byCid", key="feed-1-de", endpoint="http://testserver", api_key="KEY-NOPE"
    )
    with pytest.raises(InjectorError) as excinfo:
        fetch_annotation(spec, client=client)
    assert excinfo.value.code == "Unauthorized"


def test_fetch_unknown_mode_is_usage_error(client):
    spec = InjectionSpec(mode="byMagic", key="x", endpoint="http://testserver")
    with pytest.raises(InjectorError) as excinfo:
        fetch_annotation(spec, client=client)
    assert excinfo.value.code == "UsageError"


def test_fetch_by_cid_without_api_key_is_usage_error():
    spec = InjectionSpec(mode="byCid", key="feed-1-de", endpoint="http://testserver")
    with pytest.raises(InjectorError) as excinfo:
        fetch_annotation(spec)
    assert excinfo.value.code == "UsageError"


def test_fetch_unexpected_status_is_network_error(client):
    # GET against a POST-only path returns 405, outside the mapped statuses.
    spec = InjectionSpec(mode="byHash", key="api/auth/login", endpoint="http://testserver")
    with pytest.raises(InjectorError) as excinfo:
        fetch_annotation(spec, client=client)
    assert excinfo.value.code == "NetworkError"
    assert "405" in excinfo.value.message


def test_fetch_connection_failure_is_network_error():
    spec = InjectionSpec(mode="byHash", key="AAAAAAAAA", endpoint="http://127.0.0.1:1")
    with pytest.raises(InjectorError) as excinfo:
        fetch_annotation(spec)
    assert excinfo.value.code == "NetworkError"


# --- on-disk cache ----------------------------------------------------------------


def test_cache_disabled_fetches_every_time(monkeypatch, tmp_path):
    calls = []
    monkeypatch.setattr(
        "annohub.injector.fetch_annotation", lambda spec: calls.append(spec) or ANNOTATION
    )
    spec = InjectionSpec(mode="byHash", key="AAAAAAAAA", endpoint="http://x")
    assert fetch_with_cache(spec, 0, cache_dir=str(tmp_path)) == ANNOTATION
    assert fetch_with_cache(spec, 0, cache_dir=str(tmp_path)) == ANNOTATION
    assert len(calls) == 2
    assert list(tmp_path.iterdir()) == []


def test_cache_hit_within_ttl_skips_fetch(monkeypatch, tmp_path):
    calls = []
    monkeypatch.setattr(
        "annohub.injector.fetch_annotation", lambda spec: calls.append(spec) or ANNOTATION
    )
    spec = InjectionSpec(mode="byHash", key="AAAAAAAAA", endpoint="http://x")
    assert fetch_with_cache(spec, 3600, cache_dir=str(tmp_path)) == ANNOTATION
    assert fetch_with_cache(spec, 3600, cache_dir=str(tmp_path)) == ANNOTATION
    assert len(calls) == 1


def test_cache_expires_after_ttl(monkeypatch, tmp_path):
    calls = []
    monkeypatch.setattr(
        "annohub.injector.fetch_annotation", lambda spec: calls.append(spec) or ANNOTATION
    )
    spec = InjectionSpec(mode="byHash", key="AAAAAAAAA", endpoint="http://x")
    fetch_with_cache(spec, 3600, cache_dir=str(tmp_path))
    (entry,) = tmp_path.iterdir()
    stale = os.path.getmtime(entry) - 7200
    os.utime(entry, (stale, stale))
    fetch_with_cache(spec, 3600, cache_dir=str(tmp_path))
    assert len(calls) == 2


def test_cache_keys_distinguish_specs(monkeypatch, tmp_path):
    monkeypatch.setattr("annohub.injector.fetch_annotation", lambda spec: spec.key.encode())
    first = InjectionSpec(mode="byHash", key="AAAAAAAAA", endpoint="http://x")
    second = InjectionSpec(mode="byHash", key="BBBBBBBBB", endpoint="http://x")
    assert fetch_with_cache(first, 3600, cache_dir=str(tmp_path)) == b"AAAAAAAAA"
    assert fetch_with_cache(second, 3600, cache_dir=str(tmp_path)) == b"BBBBBBBBB"
    assert fetch_with_cache(first, 3600, cache_dir=str(tmp_path)) == b"AAAAAAAAA"
    assert len(list(tmp_path.iterdir())) == 2


# --- CLI --------------------------------------------------------------------------


@pytest.fixture()
def clean_env(monkeypatch):
    monkeypatch.delenv("ANNOHUB_ENDPOINT", raising=False)
    monkeypatch.delenv("ANNOHUB_API_KEY", raising=False)


def test_cli_usage_errors(clean_env, tmp_path, capsys):
    page = tmp_path / "page.html"
    page.write_bytes(PAGE)
    # No endpoint.
    assert main(["--hash", "AAAAAAAAA", "--stdout"]) == EXIT_USAGE
    # No mode at all.
    assert main(["--endpoint", "http://x", "--stdout"]) == EXIT_USAGE
    # Two modes at once.
    assert (
        main(["--endpoint", "http://x", "--hash", "A" * 9, "--cid", "c", "--key", "k", "--stdout"])
        == EXIT_USAGE
    )
    # byCid without an apiKey.
    assert main(["--endpoint", "http://x", "--cid", "c", "--stdout"]) == EXIT_USAGE
    # byPageUrl without an apiKey.
    assert main(["--endpoint", "http://x", "--page-url", "http://p", "--stdout"]) == EXIT_USAGE
    # Neither --stdout nor --in/--out.
    assert main(["--endpoint", "http://x", "--hash", "A" * 9]) == EXIT_USAGE
    assert main(["--endpoint", "http://x", "--hash", "A" * 9, "--in", str(page)]) == EXIT_USAGE
    capsys.readouterr()


def test_cli_unreadable_input_file(clean_env, tmp_path, capsys):
    with live_server() as server:
        h = seed_live(server.base_url)
        code = main(
            [
                "--endpoint",
                server.base_url,
                "--hash",
                h,
                "--in",
                str(tmp_path / "missing.html"),
                "--out",
                str(tmp_path / "out.html"),
            ]
        )
    assert code == EXIT_USAGE
    assert "cannot read" in capsys.readouterr().err


def test_cli_network_failure(clean_env, capsys):
    code = main(["--endpoint", "http://127.0.0.1:1", "--hash", "AAAAAAAAA", "--stdout"])
    assert code == EXIT_NETWORK
    assert "NetworkError" in capsys.readouterr().err


def live_server():
    from conftest import LiveServer, make_app  # noqa: PLC0415

    return LiveServer(make_app())


def seed_live(base_url: str, payload=HOTEL, **params) -> str:
    resp = httpx.post(f"{base_url}/api/annotation/KEY-ACME", json=payload, params=params)
    assert resp.status_code == 200, resp.text
    (result,) = resp.json()
    assert result["ok"], result
    return result["hash"]


def test_cli_end_to_end(clean_env, tmp_path, capsysbinary):
    infile = tmp_path / "page.html"
    outfile = tmp_path / "page.out.html"
    infile.write_bytes(PAGE)
    with live_server() as server:
        h = seed_live(server.base_url)
        annotation = httpx.get(f"{server.base_url}/{h}").content

        # Happy path: fetch, inject, write --out.
        code = main(
            [
                "--endpoint",
                server.base_url,
                "--hash",
                h,
                "--in",
                str(infile),
                "--out",
                str(outfile),
            ]
        )
        assert code == EXIT_OK
        written = outfile.read_bytes()
        assert written == inject(PAGE, annotation).document
        assert infile.read_bytes() == PAGE  # input untouched

        # --stdout without --in prints the bare script tag.
        code = main(["--endpoint", server.base_url, "--hash", h, "--stdout"])
        assert code == EXIT_OK
        assert capsysbinary.readouterr().out == script_tag(annotation) + b"\n"

        # --in with --stdout streams the injected page.
        code = main(["--endpoint", server.base_url, "--hash", h, "--in", str(infile), "--stdout"])
        assert code == EXIT_OK
        assert capsysbinary.readouterr().out == inject(PAGE, annotation).document

        # Missing hash: exit 4 and no output file written.
        missing_out = tmp_path / "never.html"
        code = main(
            [
                "--endpoint",
                server.base_url,
                "--hash",
                "ZZZZZZZZZ",
                "--in",
                str(infile),
                "--out",
                str(missing_out),
            ]
        )
        assert code == EXIT_NOT_FOUND
        assert not missing_out.exists()

        # Headless page: exit 5 and no output file written.
        headless = tmp_path / "fragment.html"
        headless.write_bytes(b"<div>content only</div>")
        failed_out = tmp_path / "failed.html"
        code = main(
            [
                "--endpoint",
                server.base_url,
                "--hash",
                h,
                "--in",
                str(headless),
                "--out",
                str(failed_out),
            ]
        )
        assert code == EXIT_INJECTION
        assert not failed_out.exists()
        assert capsysbinary.readouterr().err.endswith(b"NoHeadElement\n")

        # byCid and byPageUrl through the CLI resolve the same annotation.
        code = main(
            [
                "--endpoint",
                server.base_url,
                "--page-url",
                HOTEL["url"],
                "--key",
                "KEY-ACME",
                "--stdout",
            ]
        )
        assert code == EXIT_OK
        assert capsysbinary.readouterr().out == script_tag(annotation) + b"\n"


def test_cli_reads_endpoint_and_key_from_environment(monkeypatch, tmp_path, capsysbinary):
    with live_server() as server:
        h = seed_live(server.base_url, cid="env-1-de")
        annotation = httpx.get(f"{server.base_url}/{h}").content
        monkeypatch.setenv("ANNOHUB_ENDPOINT", server.base_url)
        monkeypatch.setenv("ANNOHUB_API_KEY", "KEY-ACME")
        code = main(["--cid", "env-1-de", "--stdout"])
    assert code == EXIT_OK
    assert capsysbinary.readouterr().out == script_tag(annotation) + b"\n"
