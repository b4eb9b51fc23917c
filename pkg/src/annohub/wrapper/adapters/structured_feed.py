"""Feed adapter: JSON accommodation records → LodgingBusiness documents.

Feed contract: a JSON array of
``{"id", "lang", "category", "name", "street", "city", "postalCode",
"lat", "lon", "offers": [{"name", "price", "currency"}]}``.

Upstream categories are translated through a data table; anything the table
does not know collapses onto the table's generic root type. Absent or
malformed optional fields are dropped, never fatal — only a missing name
makes a record unmappable.
"""

from __future__ import annotations

import json
import logging
from typing import Callable

from annohub.domainspec import DomainSpecification
from annohub.wrapper.framework import (
    AdapterDescriptor,
    ConfigField,
    SourceRecord,
    UnmappableRecord,
    WrapperError,
    load_bundled_ds,
    load_bundled_table,
)

log = logging.getLogger("annohub.wrapper.structured_feed")


def _http_fetch(url: str) -> str:
    import httpx

    resp = httpx.get(url, timeout=30.0)
    resp.raise_for_status()
    return resp.text


class StructuredFeedAdapter:
    descriptor = AdapterDescriptor(
        adapter_id="structured-feed",
        display_name="Structured accommodation feed",
        config_schema=(
            ConfigField("apiKey", required=True, secret=True),
            ConfigField("feedUrl"),
            ConfigField("feedPath"),
        ),
        languages=("de", "en", "fr", "it"),
    )

    def __init__(self, fetcher: Callable[[str], str] | None = None):
        self._fetcher = fetcher if fetcher is not None else _http_fetch
        self._type_table = load_bundled_table("lodging_type_map.json")

    def fetch(self, config: dict) -> list[SourceRecord]:
        if config.get("feedPath"):
            with open(config["feedPath"], "r", encoding="utf-8") as fh:
                text = fh.read()
        elif config.get("feedUrl"):
            text = self._fetcher(config["feedUrl"])
        else:
            raise WrapperError("ConfigInvalid", "one of feedPath or feedUrl is required")
        data = json.loads(text)
        if not isinstance(data, list):
            raise WrapperError("SourceUnreachable", "feed must be a JSON array")
        records = []
        for i, entry in enumerate(data):
            entry = entry if isinstance(entry, dict) else {}
            source_id = str(entry.get("id") or f"row{i}")
            language = str(entry.get("lang") or "en").lower()
            records.append(SourceRecord(source_id=source_id, language=language, payload=entry))
        return records

    def map(self, record: SourceRecord, config: dict) -> dict:
        entry = record.payload
        if len(record.language) != 2 or not record.language.isalpha():
            raise UnmappableRecord(f"BadLanguage: {record.language!r}")
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            raise UnmappableRecord("MissingName")

        body: dict = {
            "@context": "http://schema.org",
            "@type": self.resolve_type(entry.get("category")),
            "name": name,
        }
        address = {
            key: entry[src]
            for key, src in (
                ("streetAddress", "street"),
                ("addressLocality", "city"),
                ("postalCode", "postalCode"),
            )
            if isinstance(entry.get(src), str) and entry[src]
        }
        if address:
            body["address"] = {"@type": "PostalAddress", **address}
        lat, lon = entry.get("lat"), entry.get("lon")
        if _is_number(lat) and _is_number(lon):
            body["geo"] = {"@type": "GeoCoordinates", "latitude": lat, "longitude": lon}
        offers = []
        for raw in entry.get("offers") or []:
            if not isinstance(raw, dict):
                log.debug("dropping malformed offer on %s", record.source_id)
                continue
            offer: dict = {"@type": "Offer"}
            if isinstance(raw.get("name"), str) and raw["name"]:
                offer["name"] = raw["name"]
            if _is_number(raw.get("price")):
                offer["price"] = raw["price"]
            if isinstance(raw.get("currency"), str) and raw["currency"]:
                offer["priceCurrency"] = raw["currency"]
            offers.append(offer)
        if offers:
            body["makesOffer"] = offers
        return body

    def resolve_type(self, category) -> str:
        """Table lookup with fallback to the generic root type."""
        table = self._type_table["categories"]
        if isinstance(category, str) and category in table:
            return table[category]
        return self._type_table["rootType"]

    def domain_specification(self) -> DomainSpecification:
        return load_bundled_ds("lodging_ds.json")


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)
