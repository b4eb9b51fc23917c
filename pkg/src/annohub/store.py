"""Platform store: users, organizations, websites, and stored annotations.

Annotations carry three retrieval keys — a store-wide 9-character hash, an
optional per-website encoded-URL key, and an optional per-website custom
identifier (cid). Writes maintain per-website counters (annotationCount,
statementCount, requestCount) incrementally; ``recount`` recomputes them from
a full scan and repairs any drift.
"""

from __future__ import annotations

import re
import secrets
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable

from annohub.annotation import AnnotationDocument, parse_annotation_object
from annohub.storage import MemoryBackend, StorageBackend

HASH_ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789"
HASH_RE = re.compile(r"^[A-Za-z0-9]{9}$")
HASH_RETRIES = 5

USERS = "users"
ORGANIZATIONS = "organizations"
WEBSITES = "websites"
ANNOTATIONS = "annotations"


class StoreError(ValueError):
    """Codes: UnknownWebsite, UnknownOrganization, HashSpaceExhausted,
    NotFound, InvalidPage, DuplicateEmail, DuplicateApiKey, DuplicateKey."""

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(f"{code}: {message}")
        self.message = message


def default_hash_generator() -> str:
    return "".join(secrets.choice(HASH_ALPHABET) for _ in range(9))


def default_clock() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


@dataclass(frozen=True)
class StoredAnnotation:
    hash: str
    website_id: str
    doc: AnnotationDocument
    url_key: str | None
    cid: str | None
    created_at: str
    updated_at: str


@dataclass(frozen=True)
class AnnotationSummary:
    hash: str
    cid: str | None
    url_key: str | None
    root_type: str
    statement_count: int
    created_at: str
    updated_at: str


class PlatformStore:
    """All mutations run under one lock: plenty for a single-service
    deployment, and it makes counter increments and key upserts atomic."""

    def __init__(
        self,
        backend: StorageBackend | None = None,
        hash_generator: Callable[[], str] = default_hash_generator,
        clock: Callable[[], str] = default_clock,
    ):
        self._backend = backend if backend is not None else MemoryBackend()
        self._hash_generator = hash_generator
        self._clock = clock
        self._lock = threading.RLock()
        # exact-match secondary indexes, rebuilt from the backend on open
        self._by_cid: dict[tuple[str, str], str] = {}
        self._by_url: dict[tuple[str, str], str] = {}
        self._by_api_key: dict[str, str] = {}
        self._by_email: dict[str, str] = {}
        self._seq = 0
        self._rebuild_indexes()

    @property
    def backend(self) -> StorageBackend:
        return self._backend

    def _rebuild_indexes(self) -> None:
        with self._lock:
            self._by_cid.clear()
            self._by_url.clear()
            self._by_api_key.clear()
            self._by_email.clear()
            for h, rec in self._backend.items(ANNOTATIONS):
                if rec.get("cid") is not None:
                    self._by_cid[(rec["websiteId"], rec["cid"])] = h
                if rec.get("urlKey") is not None:
                    self._by_url[(rec["websiteId"], rec["urlKey"])] = h
                self._seq = max(self._seq, rec.get("seq", 0))
            for wid, rec in self._backend.items(WEBSITES):
                self._by_api_key[rec["apiKey"]] = wid
            for uid, rec in self._backend.items(USERS):
                self._by_email[rec["email"]] = uid

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    # -- organizations / users / websites ------------------------------------

    def create_organization(self, name: str, organization_id: str | None = None) -> str:
        if not name:
            raise StoreError("InvalidName", "organization name must be nonempty")
        with self._lock:
            org_id = organization_id or uuid.uuid4().hex[:12]
            self._backend.put(ORGANIZATIONS, org_id, {"organizationId": org_id, "name": name})
            return org_id

    def get_organization(self, organization_id: str) -> dict:
        rec = self._backend.get(ORGANIZATIONS, organization_id)
        if rec is None:
            raise StoreError("NotFound", f"no organization {organization_id}")
        return rec

    def list_organizations(self) -> list[dict]:
        return [rec for _, rec in self._backend.items(ORGANIZATIONS)]

    def create_user(
        self,
        email: str,
        password_hash: str,
        organization_id: str,
        user_id: str | None = None,
    ) -> str:
        email = email.strip().lower()
        if not email:
            raise StoreError("InvalidEmail", "email must be nonempty")
        with self._lock:
            if self._backend.get(ORGANIZATIONS, organization_id) is None:
                raise StoreError("UnknownOrganization", f"no organization {organization_id}")
            if email in self._by_email:
                raise StoreError("DuplicateEmail", f"{email} is already registered")
            uid = user_id or uuid.uuid4().hex[:12]
            self._backend.put(
                USERS,
                uid,
                {
                    "userId": uid,
                    "email": email,
                    "passwordHash": password_hash,
                    "organizationId": organization_id,
                },
            )
            self._by_email[email] = uid
            return uid

    def get_user_by_email(self, email: str) -> dict | None:
        with self._lock:
            uid = self._by_email.get(email.strip().lower())
            return self._backend.get(USERS, uid) if uid is not None else None

    def create_website(
        self,
        organization_id: str,
        display_name: str,
        website_id: str | None = None,
        api_key: str | None = None,
    ) -> tuple[str, str]:
        with self._lock:
            if self._backend.get(ORGANIZATIONS, organization_id) is None:
                raise StoreError("UnknownOrganization", f"no organization {organization_id}")
            wid = website_id or uuid.uuid4().hex[:12]
            key = api_key or secrets.token_urlsafe(24)
            if key in self._by_api_key:
                raise StoreError("DuplicateApiKey", "apiKey already in use")
            self._backend.put(
                WEBSITES,
                wid,
                {
                    "websiteId": wid,
                    "organizationId": organization_id,
                    "displayName": display_name,
                    "apiKey": key,
                    "counters": {"annotationCount": 0, "statementCount": 0, "requestCount": 0},
                },
            )
            self._by_api_key[key] = wid
            return wid, key

    def get_website(self, website_id: str) -> dict:
        rec = self._backend.get(WEBSITES, website_id)
        if rec is None:
            raise StoreError("UnknownWebsite", f"no website {website_id}")
        return rec

    def website_by_api_key(self, api_key: str) -> dict | None:
        with self._lock:
            wid = self._by_api_key.get(api_key)
            return self._backend.get(WEBSITES, wid) if wid is not None else None

    def list_websites(self, organization_id: str | None = None) -> list[dict]:
        rows = [rec for _, rec in self._backend.items(WEBSITES)]
        if organization_id is not None:
            rows = [r for r in rows if r["organizationId"] == organization_id]
        rows.sort(key=lambda r: (r["displayName"], r["websiteId"]))
        return rows

    def update_website(self, website_id: str, display_name: str) -> None:
        with self._lock:
            rec = self.get_website(website_id)
            rec["displayName"] = display_name
            self._backend.put(WEBSITES, website_id, rec)

    def delete_website(self, website_id: str) -> None:
        """Removes the website and every annotation it owns."""
        with self._lock:
            rec = self.get_website(website_id)
            for h, ann in list(self._backend.items(ANNOTATIONS)):
                if ann["websiteId"] == website_id:
                    self._drop_annotation_record(h, ann, adjust_counters=False)
            self._by_api_key.pop(rec["apiKey"], None)
            self._backend.delete(WEBSITES, website_id)

    # -- annotations ----------------------------------------------------------

    def put_annotation(
        self, website_id: str, doc: AnnotationDocument, cid: str | None = None
    ) -> tuple[str, bool]:
        """Upsert. A matching (websiteId, cid) replaces that record in place;
        otherwise a matching (websiteId, urlKey) does; otherwise a fresh hash
        is minted. Returns (hash, created)."""
        with self._lock:
            if self._backend.get(WEBSITES, website_id) is None:
                raise StoreError("UnknownWebsite", f"no website {website_id}")
            url_key = self._safe_url_key(doc.url_value) if doc.url_value else None
            now = self._clock()

            target_hash: str | None = None
            if cid is not None:
                target_hash = self._by_cid.get((website_id, cid))
            if target_hash is None and url_key is not None:
                target_hash = self._by_url.get((website_id, url_key))

            if target_hash is not None:
                old = self._backend.get(ANNOTATIONS, target_hash)
                self._replace_record(target_hash, old, website_id, doc, cid, url_key, now)
                return target_hash, False

            h = self._mint_hash()
            record = {
                "hash": h,
                "websiteId": website_id,
                "body": doc.body,
                "statementCount": doc.statement_count,
                "cid": cid,
                "urlKey": url_key,
                "createdAt": now,
                "updatedAt": now,
                "seq": self._next_seq(),
            }
            self._backend.put(ANNOTATIONS, h, record)
            if cid is not None:
                self._by_cid[(website_id, cid)] = h
            if url_key is not None:
                self._evict_url_holder(website_id, url_key, keep=h)
                self._by_url[(website_id, url_key)] = h
            self._bump_counters(website_id, annotations=1, statements=doc.statement_count)
            return h, True

    @staticmethod
    def _safe_url_key(url_value: str) -> str | None:
        from annohub.annotation import NotAbsoluteUrl, url_retrieval_key

        try:
            return url_retrieval_key(url_value)
        except NotAbsoluteUrl:
            return None

    def _replace_record(
        self,
        h: str,
        old: dict,
        website_id: str,
        doc: AnnotationDocument,
        cid: str | None,
        url_key: str | None,
        now: str,
    ) -> None:
        new_cid = cid if cid is not None else old.get("cid")
        if old.get("cid") is not None and old["cid"] != new_cid:
            self._by_cid.pop((website_id, old["cid"]), None)
        if new_cid is not None:
            self._evict_cid_holder(website_id, new_cid, keep=h)
        if old.get("urlKey") is not None and old["urlKey"] != url_key:
            self._by_url.pop((website_id, old["urlKey"]), None)
        record = {
            "hash": h,
            "websiteId": website_id,
            "body": doc.body,
            "statementCount": doc.statement_count,
            "cid": new_cid,
            "urlKey": url_key,
            "createdAt": old["createdAt"],
            "updatedAt": now,
            "seq": self._next_seq(),
        }
        self._backend.put(ANNOTATIONS, h, record)
        if new_cid is not None:
            self._by_cid[(website_id, new_cid)] = h
        if url_key is not None:
            self._evict_url_holder(website_id, url_key, keep=h)
            self._by_url[(website_id, url_key)] = h
        self._bump_counters(
            website_id, annotations=0, statements=doc.statement_count - old["statementCount"]
        )

    def _evict_cid_holder(self, website_id: str, cid: str, keep: str) -> None:
        other = self._by_cid.get((website_id, cid))
        if other is None or other == keep:
            return
        rec = self._backend.get(ANNOTATIONS, other)
        rec["cid"] = None
        rec["seq"] = self._next_seq()
        self._backend.put(ANNOTATIONS, other, rec)
        self._by_cid.pop((website_id, cid), None)

    def _evict_url_holder(self, website_id: str, url_key: str, keep: str) -> None:
        """(websiteId, urlKey) is unique: if another record holds this key it
        loses it (the record stays fetchable by hash and cid)."""
        other = self._by_url.get((website_id, url_key))
        if other is None or other == keep:
            return
        rec = self._backend.get(ANNOTATIONS, other)
        rec["urlKey"] = None
        rec["seq"] = self._next_seq()
        self._backend.put(ANNOTATIONS, other, rec)
        self._by_url.pop((website_id, url_key), None)

    def _mint_hash(self) -> str:
        for _ in range(HASH_RETRIES + 1):
            h = self._hash_generator()
            if not HASH_RE.fullmatch(h):
                raise StoreError("HashSpaceExhausted", f"generator produced invalid token {h!r}")
            if self._backend.get(ANNOTATIONS, h) is None:
                return h
        raise StoreError(
            "HashSpaceExhausted", f"no unused hash after {HASH_RETRIES + 1} attempts"
        )

    def _bump_counters(self, website_id: str, annotations: int, statements: int) -> None:
        rec = self._backend.get(WEBSITES, website_id)
        c = rec["counters"]
        c["annotationCount"] = max(0, c["annotationCount"] + annotations)
        c["statementCount"] = max(0, c["statementCount"] + statements)
        self._backend.put(WEBSITES, website_id, rec)

    def _record_to_stored(self, rec: dict) -> StoredAnnotation:
        return StoredAnnotation(
            hash=rec["hash"],
            website_id=rec["websiteId"],
            doc=parse_annotation_object(rec["body"]),
            url_key=rec.get("urlKey"),
            cid=rec.get("cid"),
            created_at=rec["createdAt"],
            updated_at=rec["updatedAt"],
        )

    def _fetch_counted(self, rec: dict | None, what: str) -> StoredAnnotation:
        if rec is None:
            raise StoreError("NotFound", what)
        website = self._backend.get(WEBSITES, rec["websiteId"])
        if website is not None:
            website["counters"]["requestCount"] += 1
            self._backend.put(WEBSITES, rec["websiteId"], website)
        return self._record_to_stored(rec)

    def get_by_hash(self, h: str) -> StoredAnnotation:
        with self._lock:
            return self._fetch_counted(self._backend.get(ANNOTATIONS, h), f"no annotation {h}")

    def get_by_url(self, website_id: str, encoded_url: str) -> StoredAnnotation:
        with self._lock:
            target = self._by_url.get((website_id, encoded_url))
            rec = self._backend.get(ANNOTATIONS, target) if target is not None else None
            return self._fetch_counted(rec, f"no annotation for url key {encoded_url}")

    def get_by_cid(self, website_id: str, cid: str) -> StoredAnnotation:
        with self._lock:
            target = self._by_cid.get((website_id, cid))
            rec = self._backend.get(ANNOTATIONS, target) if target is not None else None
            return self._fetch_counted(rec, f"no annotation for cid {cid}")

    def peek_by_hash(self, h: str) -> StoredAnnotation:
        """Metadata read: no requestCount increment."""
        rec = self._backend.get(ANNOTATIONS, h)
        if rec is None:
            raise StoreError("NotFound", f"no annotation {h}")
        return self._record_to_stored(rec)

    def replace_annotation(self, h: str, doc: AnnotationDocument, cid: str | None = None) -> None:
        """Replace the body under an existing hash (keeps hash; cid/urlKey
        recomputed the same way put_annotation recomputes them)."""
        with self._lock:
            old = self._backend.get(ANNOTATIONS, h)
            if old is None:
                raise StoreError("NotFound", f"no annotation {h}")
            url_key = self._safe_url_key(doc.url_value) if doc.url_value else None
            self._replace_record(h, old, old["websiteId"], doc, cid, url_key, self._clock())

    def delete_annotation(self, h: str) -> None:
        with self._lock:
            rec = self._backend.get(ANNOTATIONS, h)
            if rec is None:
                raise StoreError("NotFound", f"no annotation {h}")
            self._drop_annotation_record(h, rec, adjust_counters=True)

    def _drop_annotation_record(self, h: str, rec: dict, adjust_counters: bool) -> None:
        if rec.get("cid") is not None:
            self._by_cid.pop((rec["websiteId"], rec["cid"]), None)
        if rec.get("urlKey") is not None:
            self._by_url.pop((rec["websiteId"], rec["urlKey"]), None)
        self._backend.delete(ANNOTATIONS, h)
        if adjust_counters:
            self._bump_counters(rec["websiteId"], annotations=-1, statements=-rec["statementCount"])

    def list_annotations(self, website_id: str, page: int, page_size: int) -> list[AnnotationSummary]:
        """updatedAt-descending, ties broken by write order; page is 1-based
        and a page beyond the end is empty, not an error."""
        if page < 1 or page_size < 1:
            raise StoreError("InvalidPage", "page and pageSize must be >= 1")
        with self._lock:
            self.get_website(website_id)
            rows = [rec for _, rec in self._backend.items(ANNOTATIONS) if rec["websiteId"] == website_id]
        rows.sort(key=lambda r: (r["updatedAt"], r["seq"]), reverse=True)
        start = (page - 1) * page_size
        return [
            AnnotationSummary(
                hash=r["hash"],
                cid=r.get("cid"),
                url_key=r.get("urlKey"),
                root_type=r["body"]["@type"],
                statement_count=r["statementCount"],
                created_at=r["createdAt"],
                updated_at=r["updatedAt"],
            )
            for r in rows[start : start + page_size]
        ]

    def recount(self, website_id: str) -> tuple[int, int]:
        """Full-scan recomputation; repairs the incremental counters."""
        with self._lock:
            rec = self.get_website(website_id)
            count = 0
            statements = 0
            for _, ann in self._backend.items(ANNOTATIONS):
                if ann["websiteId"] == website_id:
                    count += 1
                    statements += ann["statementCount"]
            rec["counters"]["annotationCount"] = count
            rec["counters"]["statementCount"] = statements
            self._backend.put(WEBSITES, website_id, rec)
            return count, statements

    def stats(self, website_id: str) -> dict:
        return dict(self.get_website(website_id)["counters"])

    # -- interchange ----------------------------------------------------------

    def export_dump(self) -> dict:
        """Stable JSON interchange: websites and annotations, internal write
        sequence excluded."""
        websites = [rec for _, rec in self._backend.items(WEBSITES)]
        annotations = []
        for _, rec in self._backend.items(ANNOTATIONS):
            rec = dict(rec)
            rec.pop("seq", None)
            annotations.append(rec)
        websites.sort(key=lambda r: r["websiteId"])
        annotations.sort(key=lambda r: r["hash"])
        return {"websites": websites, "annotations": annotations}

    def import_dump(self, dump: dict, organization_id: str) -> None:
        """Load an export into this store; imported websites are attached to
        ``organization_id``. Existing annotation/website state is replaced."""
        with self._lock:
            for h, rec in list(self._backend.items(ANNOTATIONS)):
                self._backend.delete(ANNOTATIONS, h)
            for wid, rec in list(self._backend.items(WEBSITES)):
                self._backend.delete(WEBSITES, wid)
            for rec in dump.get("websites", []):
                rec = dict(rec)
                rec["organizationId"] = organization_id
                self._backend.put(WEBSITES, rec["websiteId"], rec)
            ordered = sorted(
                dump.get("annotations", []), key=lambda r: (r["updatedAt"], r["hash"])
            )
            for rec in ordered:
                rec = dict(rec)
                rec["seq"] = self._next_seq()
                self._backend.put(ANNOTATIONS, rec["hash"], rec)
            self._rebuild_indexes()
