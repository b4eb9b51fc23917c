"""REST surface of the platform.

Public retrieval:
  GET /{hash}                        annotation body (9-char token, no auth)
  GET /url/{encodedUrl}?key=API_KEY  exact-string lookup on the encoded url key
  GET /cid/{cid}?key=API_KEY         lookup by custom identifier

API-key scoped ingestion:
  POST /api/annotation/{apiKey}            single document or array, per-item results
  POST /api/annotation/{apiKey}/validate   validation report, nothing stored

Session-token routes (Authorization: Bearer <token>):
  auth, annotation update/delete, website CRUD + stats, DS CRUD + forms,
  vocabulary queries and hot reload.

Every error body is the envelope {"error": {"code", "message"}}.
"""

from __future__ import annotations

import argparse
import logging
from dataclasses import replace
from typing import Any
from urllib.parse import unquote

from fastapi import Body, FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from starlette.exceptions import HTTPException as StarletteHTTPException

from annohub import auth
from annohub.annotation import (
    ProfileError,
    parse_annotation_object,
    semantic_validate,
    validate_against_ds,
)
from annohub.config import AppConfig, load_config
from annohub.domainspec import (
    DomainSpecError,
    DsStore,
    derive_form_schema,
    ds_from_json,
    ds_to_json,
    form_schema_to_json,
)
from annohub.storage import FileBackend, MemoryBackend
from annohub.store import HASH_RE, PlatformStore, StoreError, StoredAnnotation
from annohub.vocab import (
    UnknownClass,
    VocabularyError,
    VocabularyHolder,
    bundled_vocabulary_path,
    properties_of,
)

log = logging.getLogger("annohub")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(f"{status} {code}: {message}")


def _envelope(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


def _seed(store: PlatformStore, config: AppConfig) -> None:
    """Bootstrap organizations, users, and websites from config. Idempotent so
    a persistent deployment can restart with the same config file."""
    org_ids: dict[str, str] = {}
    existing_orgs = {o["name"]: o["organizationId"] for o in store.list_organizations()}
    for entry in config.seed_organizations:
        name = entry if isinstance(entry, str) else entry["name"]
        org_ids[name] = existing_orgs.get(name) or store.create_organization(name)
    for user in config.seed_users:
        if store.get_user_by_email(user.email) is not None:
            continue
        org_id = org_ids.get(user.organization)
        if org_id is None:
            org_id = existing_orgs.get(user.organization) or store.create_organization(
                user.organization
            )
            org_ids[user.organization] = org_id
        store.create_user(user.email, auth.hash_password(user.password), org_id)
    for site in config.seed_websites:
        if site.api_key is not None and store.website_by_api_key(site.api_key) is not None:
            continue
        org_id = org_ids.get(site.organization)
        if org_id is None:
            org_id = existing_orgs.get(site.organization) or store.create_organization(
                site.organization
            )
            org_ids[site.organization] = org_id
        store.create_website(
            org_id, site.display_name, website_id=site.website_id, api_key=site.api_key
        )


def create_app(
    config: AppConfig | None = None,
    store: PlatformStore | None = None,
) -> FastAPI:
    config = config if config is not None else AppConfig()
    if store is None:
        backend = (
            FileBackend(config.persistence_path) if config.persistence_path else MemoryBackend()
        )
        store = PlatformStore(backend)
    vocab = VocabularyHolder(config.vocabulary_path or bundled_vocabulary_path())
    ds_store = DsStore(store.backend)
    _seed(store, config)

    g = vocab.graph
    log.info(
        "vocabulary %s loaded (%d classes, %d properties)",
        g.version,
        len(g.classes),
        len(g.properties),
    )

    app = FastAPI(title="annohub", docs_url=None, redoc_url=None, openapi_url=None)
    app.state.store = store
    app.state.ds_store = ds_store
    app.state.vocab = vocab
    app.state.config = config

    # -- error rendering ------------------------------------------------------

    @app.exception_handler(ApiError)
    def _api_error(request: Request, exc: ApiError):
        return _envelope(exc.status, exc.code, exc.message)

    @app.exception_handler(ProfileError)
    def _profile_error(request: Request, exc: ProfileError):
        return _envelope(400, exc.code, exc.message)

    @app.exception_handler(auth.TokenError)
    def _token_error(request: Request, exc: auth.TokenError):
        return _envelope(401, exc.code, exc.message)

    @app.exception_handler(StoreError)
    def _store_error(request: Request, exc: StoreError):
        status = {
            "NotFound": 404,
            "UnknownWebsite": 404,
            "UnknownOrganization": 404,
            "InvalidPage": 400,
            "HashSpaceExhausted": 503,
        }.get(exc.code, 400)
        return _envelope(status, exc.code, exc.message)

    @app.exception_handler(DomainSpecError)
    def _ds_error(request: Request, exc: DomainSpecError):
        status = {"NotFound": 404, "StaleVersion": 409}.get(exc.code, 400)
        return _envelope(status, exc.code, exc.message)

    @app.exception_handler(VocabularyError)
    def _vocab_error(request: Request, exc: VocabularyError):
        status = 404 if isinstance(exc, UnknownClass) else 400
        return _envelope(status, type(exc).__name__, str(exc))

    @app.exception_handler(RequestValidationError)
    def _validation_error(request: Request, exc: RequestValidationError):
        if any(e.get("type") == "json_invalid" for e in exc.errors()):
            return _envelope(400, "NotJson", "request body is not valid JSON")
        return _envelope(400, "BadRequest", str(exc.errors()[:1]))

    @app.exception_handler(StarletteHTTPException)
    def _http_error(request: Request, exc: StarletteHTTPException):
        code = {404: "NotFound", 405: "MethodNotAllowed"}.get(exc.status_code, "HttpError")
        return _envelope(exc.status_code, code, str(exc.detail))

    @app.exception_handler(Exception)
    def _unhandled(request: Request, exc: Exception):
        log.exception("unhandled error on %s", request.url.path)
        return _envelope(500, "InternalError", "unexpected server error")

    # -- auth helpers ----------------------------------------------------------

    def require_claims(request: Request) -> dict:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise ApiError(401, "MissingToken", "Authorization: Bearer <token> required")
        return auth.verify_token(header[7:].strip(), config.token_secret)

    def site_from_api_key(key: str | None) -> dict:
        if not key:
            raise ApiError(401, "MissingApiKey", "website apiKey required")
        site = store.website_by_api_key(key)
        if site is None:
            raise ApiError(401, "UnknownApiKey", "no website with that apiKey")
        return site

    def owned_website(claims: dict, website_id: str) -> dict:
        site = store.get_website(website_id)
        if site["organizationId"] != claims["organizationId"]:
            raise ApiError(403, "Forbidden", "website belongs to another organization")
        return site

    def owned_annotation(claims: dict, hash_token: str) -> StoredAnnotation:
        ann = store.peek_by_hash(hash_token)
        owned_website(claims, ann.website_id)
        return ann

    def raw_segment(request: Request, prefix: str) -> str | None:
        """Exact request-target bytes after ``prefix``, before any query part.
        Path parameters are percent-decoded by the framework; the url route's
        keys are exact encoded strings, so the raw request line is the source
        of truth."""
        raw = request.scope.get("raw_path")
        if not raw:
            return None
        path = raw.split(b"?", 1)[0].decode("latin-1")
        return path[len(prefix) :] if path.startswith(prefix) else None

    def ld_response(ann: StoredAnnotation) -> Response:
        return Response(content=ann.doc.raw_bytes, media_type="application/ld+json")

    # -- auth routes -----------------------------------------------------------

    @app.post("/api/auth/login")
    def login(payload: Any = Body(None)):
        if not isinstance(payload, dict):
            raise ApiError(400, "BadRequest", "body must be {email, password}")
        email = payload.get("email")
        password = payload.get("password")
        user = store.get_user_by_email(email) if isinstance(email, str) else None
        if user is None or not isinstance(password, str) or not auth.verify_password(
            password, user["passwordHash"]
        ):
            raise ApiError(401, "BadCredentials", "email or password incorrect")
        token = auth.make_token(user["userId"], user["organizationId"], config.token_secret)
        return {
            "token": token,
            "userId": user["userId"],
            "organizationId": user["organizationId"],
            "expiresIn": auth.TOKEN_TTL_SECONDS,
        }

    @app.post("/api/auth/register", status_code=201)
    def register(payload: Any = Body(None)):
        if not config.open_registration:
            raise ApiError(403, "RegistrationClosed", "this deployment does not accept sign-ups")
        if not isinstance(payload, dict):
            raise ApiError(400, "BadRequest", "body must be {email, password, organizationName}")
        email = payload.get("email")
        password = payload.get("password")
        org_name = payload.get("organizationName")
        if not all(isinstance(v, str) and v for v in (email, password, org_name)):
            raise ApiError(400, "BadRequest", "email, password, organizationName all required")
        org_id = store.create_organization(org_name)
        user_id = store.create_user(email, auth.hash_password(password), org_id)
        return {"userId": user_id, "organizationId": org_id}

    # -- ingestion (apiKey) ------------------------------------------------------

    @app.post("/api/annotation/{api_key}/validate")
    def validate_endpoint(api_key: str, ds: str = Query(...), payload: Any = Body(None)):
        site_from_api_key(api_key)
        dspec = ds_store.get(ds)
        doc = parse_annotation_object(payload)
        report = validate_against_ds(doc, dspec, vocab.graph)
        if report.ok:
            report = semantic_validate(doc, dspec)
        return report.to_json()

    @app.post("/api/annotation/{api_key}")
    def post_annotations(api_key: str, cid: str | None = Query(None), payload: Any = Body(None)):
        site = site_from_api_key(api_key)
        if payload is None:
            raise ApiError(400, "NotJson", "request body must be a JSON document or array")
        if isinstance(payload, list):
            if cid is not None:
                raise ApiError(400, "CidOnArray", "cid applies to single-document posts only")
            items = payload
            cids: list[str | None] = [None] * len(items)
        else:
            items = [payload]
            cids = [cid]
        results = []
        for index, (item, item_cid) in enumerate(zip(items, cids)):
            try:
                doc = parse_annotation_object(item)
                h, created = store.put_annotation(site["websiteId"], doc, item_cid)
                results.append({"index": index, "ok": True, "hash": h, "created": created})
            except (ProfileError, StoreError) as exc:
                results.append(
                    {
                        "index": index,
                        "ok": False,
                        "error": {"code": exc.code, "message": exc.message},
                    }
                )
        return results

    # -- annotation management (token) -----------------------------------------

    @app.get("/api/annotation/{hash_token}")
    def annotation_metadata(hash_token: str, request: Request):
        claims = require_claims(request)
        ann = owned_annotation(claims, hash_token)
        return {
            "hash": ann.hash,
            "websiteId": ann.website_id,
            "cid": ann.cid,
            "urlKey": ann.url_key,
            "rootType": ann.doc.root_type,
            "statementCount": ann.doc.statement_count,
            "createdAt": ann.created_at,
            "updatedAt": ann.updated_at,
            "body": ann.doc.body,
        }

    @app.put("/api/annotation/{hash_token}")
    def update_annotation(
        hash_token: str,
        request: Request,
        cid: str | None = Query(None),
        payload: Any = Body(None),
    ):
        claims = require_claims(request)
        owned_annotation(claims, hash_token)
        doc = parse_annotation_object(payload)
        store.replace_annotation(hash_token, doc, cid)
        updated = store.peek_by_hash(hash_token)
        return {
            "hash": hash_token,
            "statementCount": doc.statement_count,
            "updatedAt": updated.updated_at,
        }

    @app.delete("/api/annotation/{hash_token}")
    def delete_annotation(hash_token: str, request: Request):
        claims = require_claims(request)
        owned_annotation(claims, hash_token)
        store.delete_annotation(hash_token)
        return {"deleted": hash_token}

    # -- websites (token) --------------------------------------------------------

    def website_view(site: dict) -> dict:
        return {
            "websiteId": site["websiteId"],
            "organizationId": site["organizationId"],
            "displayName": site["displayName"],
            "apiKey": site["apiKey"],
            "counters": site["counters"],
        }

    @app.post("/api/website", status_code=201)
    def create_website(request: Request, payload: Any = Body(None)):
        claims = require_claims(request)
        if not isinstance(payload, dict) or not isinstance(payload.get("displayName"), str):
            raise ApiError(400, "BadRequest", "body must be {displayName}")
        wid, key = store.create_website(claims["organizationId"], payload["displayName"])
        return {"websiteId": wid, "apiKey": key}

    @app.get("/api/website")
    def list_websites(request: Request):
        claims = require_claims(request)
        return [website_view(s) for s in store.list_websites(claims["organizationId"])]

    @app.get("/api/website/{website_id}")
    def get_website(website_id: str, request: Request):
        claims = require_claims(request)
        return website_view(owned_website(claims, website_id))

    @app.put("/api/website/{website_id}")
    def update_website(website_id: str, request: Request, payload: Any = Body(None)):
        claims = require_claims(request)
        owned_website(claims, website_id)
        if not isinstance(payload, dict) or not isinstance(payload.get("displayName"), str):
            raise ApiError(400, "BadRequest", "body must be {displayName}")
        store.update_website(website_id, payload["displayName"])
        return website_view(store.get_website(website_id))

    @app.delete("/api/website/{website_id}")
    def delete_website(website_id: str, request: Request):
        claims = require_claims(request)
        owned_website(claims, website_id)
        store.delete_website(website_id)
        return {"deleted": website_id}

    @app.get("/api/website/{website_id}/stats")
    def website_stats(website_id: str, request: Request):
        claims = require_claims(request)
        owned_website(claims, website_id)
        return store.stats(website_id)

    @app.get("/api/website/{website_id}/annotation")
    def website_annotations(
        website_id: str, request: Request, page: int = Query(1), pageSize: int = Query(20)
    ):
        claims = require_claims(request)
        owned_website(claims, website_id)
        rows = store.list_annotations(website_id, page, pageSize)
        return {
            "page": page,
            "pageSize": pageSize,
            "items": [
                {
                    "hash": r.hash,
                    "cid": r.cid,
                    "urlKey": r.url_key,
                    "rootType": r.root_type,
                    "statementCount": r.statement_count,
                    "createdAt": r.created_at,
                    "updatedAt": r.updated_at,
                }
                for r in rows
            ],
        }

    @app.post("/api/website/{website_id}/recount")
    def website_recount(website_id: str, request: Request):
        claims = require_claims(request)
        owned_website(claims, website_id)
        count, statements = store.recount(website_id)
        return {"annotationCount": count, "statementCount": statements}

    # -- domain specifications (token) --------------------------------------------

    @app.post("/api/ds")
    def save_ds(request: Request, payload: Any = Body(None)):
        claims = require_claims(request)
        ds = ds_from_json(payload)
        if ds.ds_id is not None:
            try:
                owner = ds_store.owner_of(ds.ds_id)
            except DomainSpecError:
                owner = claims["organizationId"]  # fresh id chosen by the client
            if owner is not None and owner != claims["organizationId"]:
                raise ApiError(403, "Forbidden", "DS belongs to another organization")
        ds_id = ds_store.save(ds, vocab.graph, organization_id=claims["organizationId"])
        return {"dsId": ds_id, "version": ds_store.get(ds_id).version}

    @app.get("/api/ds")
    def list_ds(request: Request):
        require_claims(request)
        return [
            {"dsId": ds_id, "name": name, "targetType": target, "version": version}
            for ds_id, name, target, version in ds_store.list()
        ]

    @app.get("/api/ds/{ds_id}")
    def get_ds(ds_id: str, request: Request):
        require_claims(request)
        return ds_to_json(ds_store.get(ds_id))

    @app.get("/api/ds/{ds_id}/form")
    def ds_form(ds_id: str, request: Request):
        require_claims(request)
        return form_schema_to_json(derive_form_schema(ds_store.get(ds_id)))

    # -- vocabulary (token) ---------------------------------------------------------

    @app.get("/api/vocabulary")
    def vocabulary_info(request: Request):
        require_claims(request)
        graph = vocab.graph
        return {
            "version": graph.version,
            "classCount": len(graph.classes),
            "propertyCount": len(graph.properties),
        }

    @app.get("/api/vocabulary/classes")
    def vocabulary_classes(request: Request):
        require_claims(request)
        graph = vocab.graph
        return [
            {"name": c.name, "parents": list(c.parents), "description": c.description}
            for c in sorted(graph.classes.values(), key=lambda c: c.name)
        ]

    @app.get("/api/vocabulary/class/{token}/properties")
    def vocabulary_properties(token: str, request: Request):
        require_claims(request)
        return [
            {
                "name": p.name,
                "domains": list(p.domains),
                "ranges": list(p.ranges),
                "description": p.description,
            }
            for p in properties_of(token, vocab.graph)
        ]

    @app.post("/api/vocabulary/reload")
    def vocabulary_reload(request: Request, payload: Any = Body(None)):
        require_claims(request)
        path = payload.get("path") if isinstance(payload, dict) else None
        graph = vocab.reload(path)
        log.info(
            "vocabulary %s loaded (%d classes, %d properties)",
            graph.version,
            len(graph.classes),
            len(graph.properties),
        )
        return {"version": graph.version}

    # -- public retrieval ------------------------------------------------------------

    @app.get("/")
    def banner():
        return {"service": "annohub", "vocabularyVersion": vocab.graph.version}

    @app.get("/url/{encoded_url:path}")
    def shortener_url(request: Request, encoded_url: str = "", key: str | None = Query(None)):
        site = site_from_api_key(key)
        exact = raw_segment(request, "/url/")
        if exact is None:
            exact = encoded_url
        return ld_response(store.get_by_url(site["websiteId"], exact))

    @app.get("/cid/{cid_value:path}")
    def shortener_cid(request: Request, cid_value: str = "", key: str | None = Query(None)):
        site = site_from_api_key(key)
        exact = raw_segment(request, "/cid/")
        cid = unquote(exact) if exact is not None else cid_value
        return ld_response(store.get_by_cid(site["websiteId"], cid))

    if config.app_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/app", StaticFiles(directory=config.app_dir, html=True), name="app")

    @app.get("/{hash_token}")
    def shortener_hash(hash_token: str):
        if not HASH_RE.fullmatch(hash_token):
            raise ApiError(404, "NotFound", "retrieval tokens are 9 alphanumeric characters")
        return ld_response(store.get_by_hash(hash_token))

    return app


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(prog="annohub-server", description="Run the annotation platform")
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--host", help="bind address (overrides config)")
    parser.add_argument("--port", type=int, help="bind port (overrides config)")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(levelname)s %(message)s")
    config = load_config(args.config)
    if args.host:
        config = replace(config, host=args.host)
    if args.port:
        config = replace(config, port=args.port)

    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="info")


if __name__ == "__main__":
    main()
