"""Scrape adapter: HTML pages → Article documents.

Pages come from an explicit ``pages`` list or a fetched ``index`` (JSON array
of URLs, or one URL per line). Extraction is limited to standard signals:
``<title>``, the usual meta tags, and a leading ``<h1>``. The page URL itself
becomes the document's url property, so the platform can serve the annotation
back by URL match. A page without any title signal is unmappable; every other
missing field is simply dropped.
"""

from __future__ import annotations

import json
import re
from datetime import date
from html.parser import HTMLParser
from typing import Callable

from annohub.domainspec import DomainSpecification
from annohub.wrapper.framework import (
    AdapterDescriptor,
    ConfigField,
    SourceRecord,
    UnmappableRecord,
    WrapperError,
    load_bundled_ds,
)

_LANG_ATTR_RE = re.compile(r"<html[^>]*\blang\s*=\s*[\"']?([A-Za-z]{2})", re.IGNORECASE)


class _PageMeta(HTMLParser):
    """Collects title text, meta name/property→content pairs, and the first h1."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.title = ""
        self.h1 = ""
        self.meta: dict[str, str] = {}
        self._collecting: str | None = None

    def handle_starttag(self, tag: str, attrs):
        if tag == "meta":
            attr_map = {k.lower(): (v or "") for k, v in attrs}
            key = attr_map.get("name") or attr_map.get("property")
            content = attr_map.get("content")
            if key and content is not None and key.lower() not in self.meta:
                self.meta[key.lower()] = content
        elif tag == "title":
            self._collecting = "title"
        elif tag == "h1" and not self.h1:
            self._collecting = "h1"

    def handle_endtag(self, tag: str):
        if tag in ("title", "h1"):
            self._collecting = None

    def handle_data(self, data: str):
        if self._collecting == "title":
            self.title += data
        elif self._collecting == "h1":
            self.h1 += data


def _http_fetch(url: str) -> str:
    import httpx

    resp = httpx.get(url, timeout=30.0, follow_redirects=True)
    resp.raise_for_status()
    return resp.text


class PageScrapeAdapter:
    descriptor = AdapterDescriptor(
        adapter_id="page-scrape",
        display_name="Web page scraper",
        config_schema=(
            ConfigField("apiKey", required=True, secret=True),
            ConfigField("pages"),
            ConfigField("index"),
            ConfigField("language"),
        ),
        languages=("de", "en", "fr", "it"),
    )

    def __init__(self, fetcher: Callable[[str], str] | None = None):
        self._fetcher = fetcher if fetcher is not None else _http_fetch

    def fetch(self, config: dict) -> list[SourceRecord]:
        urls = config.get("pages")
        if not urls:
            index = config.get("index")
            if not index:
                raise WrapperError("ConfigInvalid", "one of pages or index is required")
            urls = _parse_index(self._fetcher(index))
        default_lang = str(config.get("language") or "en").lower()
        records = []
        for url in urls:
            try:
                html = self._fetcher(url)
                payload = {"html": html}
                match = _LANG_ATTR_RE.search(html)
                language = match.group(1).lower() if match else default_lang
            except Exception as exc:
                payload = {"error": str(exc)}
                language = default_lang
            records.append(SourceRecord(source_id=url, language=language, payload=payload))
        return records

    def map(self, record: SourceRecord, config: dict) -> dict:
        if "error" in record.payload:
            raise UnmappableRecord(f"PageUnreachable: {record.payload['error']}")
        parser = _PageMeta()
        parser.feed(record.payload["html"])
        meta = parser.meta

        headline = (parser.title or meta.get("og:title") or parser.h1).strip()
        if not headline:
            raise UnmappableRecord("NoTitle")

        body: dict = {"@context": "http://schema.org", "@type": "Article", "headline": headline}
        if record.source_id.startswith(("http://", "https://")):
            body["url"] = record.source_id
        description = (meta.get("description") or meta.get("og:description") or "").strip()
        if description:
            body["description"] = description
        author = (meta.get("author") or "").strip()
        if author:
            body["author"] = {"@type": "Person", "name": author}
        published = _as_iso_date(meta.get("article:published_time") or meta.get("date") or "")
        if published:
            body["datePublished"] = published
        keywords = [k.strip() for k in (meta.get("keywords") or "").split(",") if k.strip()]
        if keywords:
            body["keywords"] = keywords
        return body

    def domain_specification(self) -> DomainSpecification:
        return load_bundled_ds("article_ds.json")


def _parse_index(text: str) -> list[str]:
    try:
        data = json.loads(text)
        if isinstance(data, list):
            return [str(u) for u in data]
    except json.JSONDecodeError:
        pass
    return [line.strip() for line in text.splitlines() if line.strip()]


def _as_iso_date(value: str) -> str | None:
    candidate = value.strip()[:10]
    try:
        date.fromisoformat(candidate)
        return candidate
    except ValueError:
        return None
