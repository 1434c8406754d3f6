"""Authenticated encryption for sensitive fields at rest.

AES-256-GCM with a fresh random nonce per field. The key is supplied
externally (``TELEMON_ENCRYPTION_KEY`` env var or config entry, base64 of
32 bytes) and is never written next to the data. Decrypting with the
wrong key or a tampered field raises ``WrongKeyError``, never returns
garbage.
"""

from __future__ import annotations

import base64
import os
import secrets
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import CorruptFieldError, MissingKeyError, WrongKeyError

KEY_ENV_VAR = "TELEMON_ENCRYPTION_KEY"
_KEY_BYTES = 32
_NONCE_BYTES = 12


@dataclass(frozen=True)
class EncryptedField:
    nonce: bytes
    ciphertext: bytes

    def pack(self) -> bytes:
        return self.nonce + self.ciphertext

    @classmethod
    def unpack(cls, blob: bytes) -> "EncryptedField":
        if len(blob) < _NONCE_BYTES + 16:  # GCM tag is 16 bytes
            raise CorruptFieldError("encrypted field too short")
        return cls(nonce=blob[:_NONCE_BYTES], ciphertext=blob[_NONCE_BYTES:])


def generate_key() -> str:
    """Fresh random key, base64-encoded for config/env use."""
    return base64.b64encode(secrets.token_bytes(_KEY_BYTES)).decode("ascii")


def load_key(encoded: str | None = None) -> bytes:
    """Decode a configured key, failing fast when absent or malformed."""
    raw = encoded if encoded is not None else os.environ.get(KEY_ENV_VAR)
    if not raw:
        raise MissingKeyError(
            f"no encryption key: set {KEY_ENV_VAR} or pass one in config"
        )
    try:
        key = base64.b64decode(raw, validate=True)
    except Exception as exc:
        raise MissingKeyError(f"encryption key is not valid base64: {exc}") from exc
    if len(key) != _KEY_BYTES:
        raise MissingKeyError(f"encryption key must be {_KEY_BYTES} bytes, got {len(key)}")
    return key


class FieldCipher:
    """Encrypts and decrypts individual sensitive fields."""

    def __init__(self, key: bytes):
        if len(key) != _KEY_BYTES:
            raise MissingKeyError(f"key must be {_KEY_BYTES} bytes")
        self._aead = AESGCM(key)

    @classmethod
    def from_config(cls, encoded_key: str | None = None) -> "FieldCipher":
        return cls(load_key(encoded_key))

    def protect(self, plaintext: bytes) -> EncryptedField:
        nonce = secrets.token_bytes(_NONCE_BYTES)
        return EncryptedField(nonce, self._aead.encrypt(nonce, plaintext, None))

    def unprotect(self, field: EncryptedField) -> bytes:
        if len(field.nonce) != _NONCE_BYTES:
            raise CorruptFieldError("bad nonce length")
        if len(field.ciphertext) < 16:
            raise CorruptFieldError("ciphertext shorter than auth tag")
        try:
            return self._aead.decrypt(field.nonce, field.ciphertext, None)
        except InvalidTag as exc:
            raise WrongKeyError("decryption failed: wrong key or tampered data") from exc

    def protect_text(self, text: str) -> EncryptedField:
        return self.protect(text.encode("utf-8"))

    def unprotect_text(self, field: EncryptedField) -> str:
        return self.unprotect(field).decode("utf-8")
