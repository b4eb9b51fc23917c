"""Password hashing and stateless session tokens.

Tokens are compact JWS-style strings (`header.payload.signature`, base64url,
HMAC-SHA256) carrying {userId, organizationId, exp}. No refresh tokens: a
token is valid until its expiry, default 24 hours.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import json
import os
import time

TOKEN_TTL_SECONDS = 24 * 60 * 60
_PBKDF2_ITERATIONS = 60_000


class TokenError(ValueError):
    """Codes: TokenInvalid, TokenExpired."""

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(f"{code}: {message}")
        self.message = message


def hash_password(password: str) -> str:
    salt = os.urandom(16)
    digest = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, _PBKDF2_ITERATIONS)
    return f"pbkdf2${_PBKDF2_ITERATIONS}${salt.hex()}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        scheme, iterations, salt_hex, digest_hex = stored.split("$")
        if scheme != "pbkdf2":
            return False
        digest = hashlib.pbkdf2_hmac(
            "sha256", password.encode("utf-8"), bytes.fromhex(salt_hex), int(iterations)
        )
        return hmac.compare_digest(digest.hex(), digest_hex)
    except (ValueError, TypeError):
        return False


def _b64(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).rstrip(b"=").decode("ascii")


def _unb64(text: str) -> bytes:
    padding = -len(text) % 4
    return base64.urlsafe_b64decode(text + "=" * padding)


def make_token(
    user_id: str,
    organization_id: str,
    secret: str,
    ttl_seconds: int = TOKEN_TTL_SECONDS,
    now: float | None = None,
) -> str:
    issued = time.time() if now is None else now
    header = _b64(json.dumps({"alg": "HS256", "typ": "JWT"}, separators=(",", ":")).encode())
    payload = _b64(
        json.dumps(
            {"userId": user_id, "organizationId": organization_id, "exp": int(issued + ttl_seconds)},
            separators=(",", ":"),
        ).encode()
    )
    signing_input = f"{header}.{payload}".encode("ascii")
    signature = _b64(hmac.new(secret.encode("utf-8"), signing_input, hashlib.sha256).digest())
    return f"{header}.{payload}.{signature}"


def verify_token(token: str, secret: str, now: float | None = None) -> dict:
    """Returns the claims; raises TokenError on any defect."""
    parts = token.split(".")
    if len(parts) != 3:
        raise TokenError("TokenInvalid", "token must have three segments")
    header_b64, payload_b64, signature_b64 = parts
    signing_input = f"{header_b64}.{payload_b64}".encode("ascii")
    expected = _b64(hmac.new(secret.encode("utf-8"), signing_input, hashlib.sha256).digest())
    if not hmac.compare_digest(expected, signature_b64):
        raise TokenError("TokenInvalid", "signature mismatch")
    try:
        claims = json.loads(_unb64(payload_b64))
    except (ValueError, UnicodeDecodeError) as exc:
        raise TokenError("TokenInvalid", "payload is not valid JSON") from exc
    if not isinstance(claims, dict) or not isinstance(claims.get("exp"), int):
        raise TokenError("TokenInvalid", "claims must be an object with an integer exp")
    current = time.time() if now is None else now
    if current >= claims["exp"]:
        raise TokenError("TokenExpired", "token expiry has passed")
    if not isinstance(claims.get("userId"), str) or not isinstance(claims.get("organizationId"), str):
        raise TokenError("TokenInvalid", "claims must carry userId and organizationId")
    return claims
