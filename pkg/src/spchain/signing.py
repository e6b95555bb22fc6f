"""Ed25519 signatures with seed-deterministic key derivation."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)


@dataclass(frozen=True)
class KeyPair:
    public_key: bytes
    private_bytes: bytes = field(repr=False)


def keypair_from_seed(seed: bytes) -> KeyPair:
    private_bytes = hashlib.sha256(b"spchain/sigkey/" + seed).digest()
    sk = Ed25519PrivateKey.from_private_bytes(private_bytes)
    pub = sk.public_key().public_bytes_raw()
    return KeyPair(public_key=pub, private_bytes=private_bytes)


def sign(msg: bytes, keypair: KeyPair) -> bytes:
    sk = Ed25519PrivateKey.from_private_bytes(keypair.private_bytes)
    return sk.sign(msg)


def verify_sig(msg: bytes, signature: bytes, public_key: bytes) -> bool:
    """Deterministic verification; malformed inputs return False."""
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(signature, msg)
        return True
    except (InvalidSignature, ValueError):
        return False


def address_of(public_key: bytes) -> str:
    """Short stable identifier derived from a public key."""
    return hashlib.sha256(public_key).hexdigest()[:20]
