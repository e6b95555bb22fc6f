"""Keyblock and microblock structures, pinning certificates and the
chameleon-Merkle institution hash root.

Every patient owns exactly one microblock holding their complete record
history; keyblocks carry register transactions and the proof-of-work.
Encoding is canonical and round-trip exact.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from . import wire
from .chameleon import (
    ChameleonDigest,
    ChameleonHashKey,
    ChameleonTrapdoor,
    ch_collide,
    ch_hash,
    ch_verify,
    decode_digest,
    encode_digest,
    message_scalar,
)
from .group import BilinearGroup
from .tx import Transaction, TxType, decode_tx, encode_tx
from .wire import DecodeError, Reader

GENESIS_KEYBLOCK_HASH = hashlib.sha256(b"spchain/genesis/keyblock").digest()
GENESIS_MICROBLOCK_HASH = hashlib.sha256(b"spchain/genesis/microblock").digest()

_KIND_KEYBLOCK = 1
_KIND_MICROBLOCK = 2


# -- pinning certificates ------------------------------------------------


@dataclass(frozen=True)
class PinSignature:
    signer_id: str
    weight: float
    signature: bytes


@dataclass(frozen=True)
class PinCertificate:
    """Quorum certificate: >= 2/3 of the group by count AND > 2/3 by weight."""

    subject_hash: bytes
    signers: tuple[PinSignature, ...]
    group_size: int
    group_total_weight: float


def required_vote_count(group_size: int) -> int:
    return math.ceil(2 * group_size / 3)


def certificate_meets_quorum(cert: PinCertificate) -> bool:
    if cert.group_size < 1:
        return False
    count_ok = len(cert.signers) >= required_vote_count(cert.group_size)
    weight = sum(s.weight for s in cert.signers)
    weight_ok = weight > (2.0 / 3.0) * cert.group_total_weight
    return count_ok and weight_ok


def encode_pin_certificate(cert: PinCertificate) -> bytes:
    out = wire.var_bytes(cert.subject_hash)
    out += wire.u32(len(cert.signers))
    for s in cert.signers:
        out += wire.var_str(s.signer_id) + wire.f64(s.weight) + wire.var_bytes(s.signature)
    out += wire.u32(cert.group_size) + wire.f64(cert.group_total_weight)
    return out


def decode_pin_certificate(reader: Reader) -> PinCertificate:
    subject = reader.var_bytes()
    n = reader.u32()
    signers = tuple(
        PinSignature(
            signer_id=reader.var_str(),
            weight=reader.f64(),
            signature=reader.var_bytes(),
        )
        for _ in range(n)
    )
    return PinCertificate(
        subject_hash=subject,
        signers=signers,
        group_size=reader.u32(),
        group_total_weight=reader.f64(),
    )


# -- blocks ----------------------------------------------------------------


@dataclass(frozen=True)
class KeyBlock:
    prev_keyblock_hash: bytes
    penu_microblock_hash: bytes
    nonce: int
    miner_public_key: bytes
    register_txs: tuple[Transaction, ...]
    target: int
    height: int
    pin_cert: Optional[PinCertificate] = None


@dataclass(frozen=True)
class MicroBlock:
    owner_patient_id: str
    institution_root: ChameleonDigest
    txs: tuple[Transaction, ...]
    creator_miner_id: str
    round_number: int
    prev_hash: bytes


def encode_keyblock(block: KeyBlock, group: BilinearGroup, include_cert: bool = True) -> bytes:
    out = (
        wire.u8(_KIND_KEYBLOCK)
        + wire.var_bytes(block.prev_keyblock_hash)
        + wire.var_bytes(block.penu_microblock_hash)
        + wire.u64(block.nonce)
        + wire.var_bytes(block.miner_public_key)
        + wire.u256(block.target)
        + wire.u64(block.height)
        + wire.u32(len(block.register_txs))
    )
    for tx in block.register_txs:
        out += wire.var_bytes(encode_tx(tx, group))
    if include_cert and block.pin_cert is not None:
        out += wire.u8(1) + encode_pin_certificate(block.pin_cert)
    else:
        out += wire.u8(0)
    return out


def encode_microblock(block: MicroBlock, group: BilinearGroup) -> bytes:
    out = (
        wire.u8(_KIND_MICROBLOCK)
        + wire.var_str(block.owner_patient_id)
        + encode_digest(block.institution_root, group)
        + wire.var_str(block.creator_miner_id)
        + wire.u64(block.round_number)
        + wire.var_bytes(block.prev_hash)
        + wire.u32(len(block.txs))
    )
    for tx in block.txs:
        out += wire.var_bytes(encode_tx(tx, group))
    return out


def encode_block(block: "KeyBlock | MicroBlock", group: BilinearGroup) -> bytes:
    if isinstance(block, KeyBlock):
        return encode_keyblock(block, group)
    return encode_microblock(block, group)


def decode_block(data: bytes, group: BilinearGroup) -> "KeyBlock | MicroBlock":
    reader = Reader(data)
    kind = reader.u8()
    if kind == _KIND_KEYBLOCK:
        block = _decode_keyblock_body(reader, group)
    elif kind == _KIND_MICROBLOCK:
        block = _decode_microblock_body(reader, group)
    else:
        raise DecodeError(f"unknown block kind {kind}", 0)
    reader.expect_end()
    return block


def _decode_tx_entry(reader: Reader, group: BilinearGroup) -> Transaction:
    raw = reader.var_bytes()
    inner = Reader(raw)
    tx = decode_tx(inner, group)
    inner.expect_end()
    return tx


def _decode_keyblock_body(reader: Reader, group: BilinearGroup) -> KeyBlock:
    prev = reader.var_bytes()
    penu = reader.var_bytes()
    nonce = reader.u64()
    pk = reader.var_bytes()
    target = reader.u256()
    height = reader.u64()
    n = reader.u32()
    txs = []
    for _ in range(n):
        tx = _decode_tx_entry(reader, group)
        if tx.tx_type is not TxType.REGISTER:
            raise DecodeError("keyblock may only contain register transactions", reader.pos)
        txs.append(tx)
    cert = decode_pin_certificate(reader) if reader.u8() else None
    return KeyBlock(
        prev_keyblock_hash=prev,
        penu_microblock_hash=penu,
        nonce=nonce,
        miner_public_key=pk,
        register_txs=tuple(txs),
        target=target,
        height=height,
        pin_cert=cert,
    )


def _decode_microblock_body(reader: Reader, group: BilinearGroup) -> MicroBlock:
    owner = reader.var_str()
    root = decode_digest(reader, group)
    creator = reader.var_str()
    round_number = reader.u64()
    prev_hash = reader.var_bytes()
    n = reader.u32()
    txs = tuple(_decode_tx_entry(reader, group) for _ in range(n))
    return MicroBlock(
        owner_patient_id=owner,
        institution_root=root,
        txs=txs,
        creator_miner_id=creator,
        round_number=round_number,
        prev_hash=prev_hash,
    )


def keyblock_hash(block: KeyBlock, group: BilinearGroup) -> bytes:
    """Hash of the keyblock content; the pin certificate (added after the
    fact) is excluded so the hash is stable across pinning."""
    return hashlib.sha256(encode_keyblock(block, group, include_cert=False)).digest()


def microblock_hash(block: MicroBlock, group: BilinearGroup) -> bytes:
    return hashlib.sha256(encode_microblock(block, group)).digest()


# -- institution hash root (chameleon Merkle) ------------------------------


def merkle_root(leaves: Sequence[bytes]) -> bytes:
    """Binary Merkle over content-hashed leaves; odd level widths
    duplicate the last digest."""
    if not leaves:
        raise ValueError("merkle tree needs at least one leaf")
    level = [hashlib.sha256(leaf).digest() for leaf in leaves]
    while len(level) > 1:
        if len(level) % 2 == 1:
            level.append(level[-1])
        level = [
            hashlib.sha256(level[i] + level[i + 1]).digest()
            for i in range(0, len(level), 2)
        ]
    return level[0]


def institution_root(
    leaves: Sequence[bytes],
    hk: ChameleonHashKey,
    rng: random.Random,
) -> ChameleonDigest:
    """Merkle the institution info, then chameleon-hash the top digest.

    Only the final root is trapdoor-hashed, so redaction keeps the stored
    root h stable while the leaf set changes.
    """
    if not leaves:
        raise ValueError("institution root needs at least one leaf")
    top = merkle_root(leaves)
    r = hk.group.random_nonzero_scalar(rng)
    return ch_hash(hk, message_scalar(top, hk.group), r)


def update_institution_root(
    root: ChameleonDigest,
    new_leaves: Sequence[bytes],
    hk: ChameleonHashKey,
    tk: ChameleonTrapdoor,
) -> ChameleonDigest:
    """Rebind the root to a new leaf set without changing h (trapdoor collision)."""
    if not new_leaves:
        raise ValueError("institution root needs at least one leaf")
    top = merkle_root(new_leaves)
    return ch_collide(tk, hk, root, message_scalar(top, hk.group))


# -- microblock append ------------------------------------------------------


def append_pinned_tx(
    microblock: MicroBlock, tx: Transaction, pin_cert: Optional[PinCertificate]
) -> MicroBlock:
    """Append a pinned transaction at the tail; prior entries are untouched."""
    if pin_cert is None:
        raise ValueError("unpinned transaction")
    if pin_cert.subject_hash != tx.tx_id:
        raise ValueError("unpinned transaction: certificate covers a different subject")
    if not certificate_meets_quorum(pin_cert):
        raise ValueError("unpinned transaction: certificate below quorum")
    if tx.tx_type not in (TxType.MEDICAL, TxType.LABEL):
        raise ValueError("microblocks hold medical and label transactions only")
    return replace(microblock, txs=microblock.txs + (tx,))
