"""Key-exposure-free chameleon hash with trapdoor collisions.

The digest of a message m under randomness r is h = r*h1 + m*h2 (additive
notation), with witness R = r*g. The trapdoor holder can move the digest
to any new message without changing h, which is what makes records
redactable while keeping every hash link intact.

Proof backend: a "transparent" backend where the proof simply encodes the
witness R (plus the message it binds), and verification is the direct
pairing check e(h - m*h2, g2) == e(R, h1_hat). A zero-knowledge backend
could be slotted in by swapping the proof encode/parse pair.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .group import BilinearGroup
from .wire import DecodeError, Reader, u32

PROOF_TAG = b"TRV1"


@dataclass(frozen=True)
class ChameleonHashKey:
    """Public hashing key (h1, h1_hat, h2, crs)."""

    h1: int
    h1_hat: int
    h2: int
    crs: bytes
    group: BilinearGroup


@dataclass(frozen=True)
class ChameleonTrapdoor:
    x: int


@dataclass(frozen=True)
class ChameleonKeys:
    hk: ChameleonHashKey
    tk: ChameleonTrapdoor


@dataclass(frozen=True)
class ChameleonDigest:
    """Digest h with its opaque proof and the message it binds."""

    h: int
    proof: bytes
    message: int


def ch_keygen(security_param: int, group: BilinearGroup, rng: random.Random) -> ChameleonKeys:
    """Draw a trapdoor x and derive (hk, tk).

    The trapdoor is redrawn if zero since collisions divide by it; h2 is
    uniform nonzero in G1.
    """
    if security_param <= 0:
        raise ValueError("security parameter must be positive")
    if group.p < 5:
        raise ValueError("degenerate group: order must be >= 5")
    x = group.random_nonzero_scalar(rng)
    h2 = group.scalar_mul(group.random_nonzero_scalar(rng), group.g1)
    hk = ChameleonHashKey(
        h1=group.scalar_mul(x, group.g1),
        h1_hat=group.scalar_mul(x, group.g2),
        h2=h2,
        crs=b"",
        group=group,
    )
    return ChameleonKeys(hk=hk, tk=ChameleonTrapdoor(x=x))


def _make_proof(group: BilinearGroup, witness: int, message: int) -> bytes:
    return PROOF_TAG + group.encode_element(witness) + group.encode_element(message)


def _parse_proof(group: BilinearGroup, proof: bytes):
    """Return (witness, bound message) or None when malformed."""
    w = group.element_width
    if len(proof) != len(PROOF_TAG) + 2 * w:
        return None
    if proof[: len(PROOF_TAG)] != PROOF_TAG:
        return None
    try:
        witness = group.decode_element(proof[len(PROOF_TAG) : len(PROOF_TAG) + w])
        bound = group.decode_element(proof[len(PROOF_TAG) + w :])
    except ValueError:
        return None
    return witness, bound


def ch_hash(hk: ChameleonHashKey, m: int, r: int) -> ChameleonDigest:
    """Hash message m under randomness r; deterministic given (m, r)."""
    g = hk.group
    m = g.reduce_scalar(m)
    r = g.reduce_scalar(r)
    if r == 0:
        raise ValueError("randomness r must be nonzero")
    h = g.add(g.scalar_mul(r, hk.h1), g.scalar_mul(m, hk.h2))
    witness = g.scalar_mul(r, g.g1)
    return ChameleonDigest(h=h, proof=_make_proof(g, witness, m), message=m)


def ch_verify(hk: ChameleonHashKey, m: int, digest: ChameleonDigest) -> bool:
    """Check e(h - m*h2, g2) == e(R, h1_hat); malformed proofs verify false."""
    g = hk.group
    m = g.reduce_scalar(m)
    parsed = _parse_proof(g, digest.proof)
    if parsed is None:
        return False
    witness, bound = parsed
    if bound != m:
        return False
    lhs = g.pair(g.sub(digest.h, g.scalar_mul(m, hk.h2)), g.g2)
    rhs = g.pair(witness, hk.h1_hat)
    return lhs == rhs


def ch_collide(
    tk: ChameleonTrapdoor,
    hk: ChameleonHashKey,
    old: ChameleonDigest,
    m_new: int,
) -> ChameleonDigest:
    """Move a verified digest to message m_new without changing h.

    New witness R' = x^-1 * (h - m_new*h2). A trapdoor that does not match
    the hash key is detected by the post-collision verification.
    """
    g = hk.group
    if not ch_verify(hk, old.message, old):
        raise ValueError("invalid source digest")
    m_new = g.reduce_scalar(m_new)
    witness = g.scalar_mul(g.inv_scalar(tk.x), g.sub(old.h, g.scalar_mul(m_new, hk.h2)))
    out = ChameleonDigest(h=old.h, proof=_make_proof(g, witness, m_new), message=m_new)
    if not ch_verify(hk, m_new, out):
        raise ValueError("trapdoor does not match hash key")
    return out


def message_scalar(data: bytes, group: BilinearGroup) -> int:
    """Map arbitrary bytes into Z_p via a content hash reduced mod p."""
    return group.hash_to_scalar(data)


# -- wire format: h || len(proof) as 4-byte big-endian || proof ----------


def encode_digest(digest: ChameleonDigest, group: BilinearGroup) -> bytes:
    return group.encode_element(digest.h) + u32(len(digest.proof)) + digest.proof


def decode_digest(reader: Reader, group: BilinearGroup) -> ChameleonDigest:
    start = reader.pos
    try:
        h = group.decode_element(reader.take(group.element_width))
    except ValueError as exc:
        raise DecodeError(str(exc), start)
    proof = reader.var_bytes()
    # The bound message lives inside the proof; an unparsable proof still
    # decodes (it just never verifies), mirroring ch_verify's behavior.
    parsed = _parse_proof(group, proof)
    message = parsed[1] if parsed is not None else 0
    return ChameleonDigest(h=h, proof=proof, message=message)
