"""Adapter contract and the run loop shared by every extension.

A run fetches SourceRecords, maps each one to an annotation document, checks
it against the adapter's bundled domain specification, and pushes it with
``cid = make_cid(sourceId, language)`` so re-runs replace instead of
duplicating. Per-record problems never abort the run; the RunReport accounts
for every fetched record: fetched = mapped + skipped + failed, and mapped
counts only records that were actually pushed (created or replaced).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any, Callable, Protocol

from annohub.annotation import parse_annotation_object, validate_against_ds
from annohub.domainspec import DomainSpecification, ds_from_json
from annohub.vocab import VocabularyGraph, load_vocabulary, bundled_vocabulary_path


class WrapperError(Exception):
    """Codes: ConfigInvalid, SourceUnreachable, UnknownAdapter."""

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(f"{code}: {message}")
        self.message = message


class UnmappableRecord(Exception):
    """Raised by an adapter's map() when a record cannot become a document.
    The record is skipped with this reason; the run continues."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


@dataclass(frozen=True)
class ConfigField:
    key: str
    required: bool = False
    secret: bool = False


@dataclass(frozen=True)
class AdapterDescriptor:
    adapter_id: str
    display_name: str
    config_schema: tuple[ConfigField, ...]
    languages: tuple[str, ...]


@dataclass(frozen=True)
class SourceRecord:
    source_id: str
    language: str
    payload: Any


@dataclass
class ExtensionActivation:
    website_id: str
    adapter_id: str
    config: dict[str, Any]
    frequency_seconds: int = 24 * 60 * 60
    last_run_at: str | None = None
    last_run_report: "RunReport | None" = None


@dataclass(frozen=True)
class RunReport:
    fetched: int
    mapped: int
    pushed_created: int
    pushed_replaced: int
    skipped: int
    failed: int
    failures: tuple[dict, ...] = ()

    def to_json(self) -> dict:
        return {
            "fetched": self.fetched,
            "mapped": self.mapped,
            "pushedCreated": self.pushed_created,
            "pushedReplaced": self.pushed_replaced,
            "skipped": self.skipped,
            "failed": self.failed,
            "failures": list(self.failures),
        }


class Adapter(Protocol):
    descriptor: AdapterDescriptor

    def fetch(self, config: dict) -> list[SourceRecord]: ...

    def map(self, record: SourceRecord, config: dict) -> dict: ...

    def domain_specification(self) -> DomainSpecification: ...


_LANG_RE = re.compile(r"^[a-z]{2}$")


def make_cid(source_id: str, language: str) -> str:
    """``sourceId-languageCode``. The language code is always the suffix after
    the final hyphen, so sourceIds may themselves contain hyphens."""
    if not source_id:
        raise ValueError("sourceId must be nonempty")
    if not _LANG_RE.fullmatch(language):
        raise ValueError("language must be two lowercase letters")
    return f"{source_id}-{language}"


def parse_cid(cid: str) -> tuple[str, str]:
    source_id, sep, language = cid.rpartition("-")
    if not sep or not source_id or not _LANG_RE.fullmatch(language):
        raise ValueError(f"not a sourceId-languageCode cid: {cid!r}")
    return source_id, language


def check_activation(activation: ExtensionActivation, descriptor: AdapterDescriptor) -> None:
    if activation.frequency_seconds < 60:
        raise WrapperError("ConfigInvalid", "frequency must be at least one minute")
    for field_def in descriptor.config_schema:
        if field_def.required and not activation.config.get(field_def.key):
            raise WrapperError("ConfigInvalid", f"config key {field_def.key} is required")


def run_extension(
    activation: ExtensionActivation,
    client,
    adapter: Adapter,
    vocabulary: VocabularyGraph | None = None,
    clock: Callable[[], str] | None = None,
) -> RunReport:
    """One synchronous run of one activation against the platform HTTP API.

    ``client`` must expose ``push_annotation(api_key, body, cid) -> (hash,
    created)``; push failures raise and are charged to the failed bucket.
    """
    check_activation(activation, adapter.descriptor)
    api_key = activation.config.get("apiKey")
    if not api_key:
        raise WrapperError("ConfigInvalid", "config key apiKey is required")
    g = vocabulary if vocabulary is not None else load_vocabulary(bundled_vocabulary_path())
    ds = adapter.domain_specification()

    try:
        records = adapter.fetch(activation.config)
    except WrapperError:
        raise
    except Exception as exc:
        raise WrapperError("SourceUnreachable", str(exc)) from exc

    mapped = created = replaced = skipped = failed = 0
    failures: list[dict] = []
    for record in records:
        try:
            body = adapter.map(record, activation.config)
        except UnmappableRecord as exc:
            skipped += 1
            failures.append({"sourceId": record.source_id, "reason": exc.reason})
            continue
        except Exception as exc:
            failed += 1
            failures.append({"sourceId": record.source_id, "reason": f"MapError: {exc}"})
            continue
        try:
            doc = parse_annotation_object(body)
            report = validate_against_ds(doc, ds, g)
            if not report.ok:
                raise ValueError(
                    "ValidationFailed: "
                    + "; ".join(f"{v.path}:{v.code}" for v in report.violations)
                )
            cid = make_cid(record.source_id, record.language)
            _, was_created = client.push_annotation(api_key, doc.body, cid)
        except Exception as exc:
            failed += 1
            failures.append({"sourceId": record.source_id, "reason": str(exc)})
            continue
        mapped += 1
        if was_created:
            created += 1
        else:
            replaced += 1

    report = RunReport(
        fetched=len(records),
        mapped=mapped,
        pushed_created=created,
        pushed_replaced=replaced,
        skipped=skipped,
        failed=failed,
        failures=tuple(failures),
    )
    if clock is not None:
        activation.last_run_at = clock()
    activation.last_run_report = report
    return report


def load_bundled_ds(filename: str) -> DomainSpecification:
    from importlib import resources

    text = resources.files("annohub.wrapper").joinpath(f"data/{filename}").read_text("utf-8")
    return ds_from_json(json.loads(text))


def load_bundled_table(filename: str) -> dict:
    from importlib import resources

    text = resources.files("annohub.wrapper").joinpath(f"data/{filename}").read_text("utf-8")
    return json.loads(text)
