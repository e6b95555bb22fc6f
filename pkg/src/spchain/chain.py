"""Chain state: pinned keyblocks, per-patient microblocks, registration
and transaction validation.

Single-writer discipline: all mutation goes through the methods here, so
readers always see a consistent snapshot. Block and transaction values
themselves are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .blocks import (
    GENESIS_KEYBLOCK_HASH,
    GENESIS_MICROBLOCK_HASH,
    KeyBlock,
    MicroBlock,
    PinCertificate,
    append_pinned_tx,
    certificate_meets_quorum,
    keyblock_hash,
    microblock_hash,
)
from .chameleon import ChameleonHashKey, ch_verify
from .group import BilinearGroup
from .signing import address_of, verify_sig
from .tx import (
    LabelPayload,
    MedicalPayload,
    RegisterPayload,
    Transaction,
    TxType,
    signing_bytes,
)

# machine-readable validation reasons
OK = "OK"
BAD_SIGNATURE = "BAD_SIGNATURE"
UNKNOWN_INSTITUTION = "UNKNOWN_INSTITUTION"
UNREGISTERED = "UNREGISTERED"
ALREADY_REGISTERED = "ALREADY_REGISTERED"
BAD_PROOF = "BAD_PROOF"
LABEL_TARGET_MISSING = "LABEL_TARGET_MISSING"
BAD_ROUND = "BAD_ROUND"
MALFORMED = "MALFORMED"


@dataclass(frozen=True)
class InstitutionInfo:
    institution_id: str
    public_key: bytes
    hk: ChameleonHashKey
    info_leaf: bytes


@dataclass(frozen=True)
class PatientInfo:
    patient_id: str
    public_key: bytes
    identity_digest: bytes
    registration_round: int


@dataclass(frozen=True)
class ChainView:
    """Immutable snapshot used by miners and fork choice."""

    pinned: tuple[tuple[int, bytes], ...]  # (height, keyblock hash), ascending
    tip_height: int
    tip_hash: bytes
    penu_microblock_hash: bytes
    genesis_keyblock_hash: bytes = GENESIS_KEYBLOCK_HASH
    genesis_microblock_hash: bytes = GENESIS_MICROBLOCK_HASH

    def pinned_hash_at(self, height: int) -> Optional[bytes]:
        for h, digest in self.pinned:
            if h == height:
                return digest
        return None


class ChainState:
    def __init__(self, group: BilinearGroup):
        self.group = group
        self.institutions: dict[str, InstitutionInfo] = {}
        self.patients: dict[str, PatientInfo] = {}
        self._patients_by_pk: dict[bytes, str] = {}
        self._identity_index: dict[bytes, str] = {}
        self.microblocks: dict[str, MicroBlock] = {}
        self.pinned_keyblocks: list[KeyBlock] = []
        self._pinned_hashes: list[bytes] = []
        # per keyblock height: hash of the last microblock touched that round
        self._last_mb_hash: dict[int, bytes] = {}
        self.current_round = 0
        # instrumentation: microblock store reads, for retrieval-cost checks
        self.store_accesses = 0

    # -- registries -----------------------------------------------------

    def register_institution(self, info: InstitutionInfo) -> None:
        self.institutions[info.institution_id] = info

    def is_registered_patient(self, public_key: bytes) -> bool:
        return public_key in self._patients_by_pk

    def patient_id_for(self, public_key: bytes) -> Optional[str]:
        return self._patients_by_pk.get(public_key)

    def register_patient(self, tx: Transaction) -> PatientInfo:
        assert tx.tx_type is TxType.REGISTER
        payload = tx.payload
        assert isinstance(payload, RegisterPayload)
        patient_id = address_of(tx.sender_pk)
        info = PatientInfo(
            patient_id=patient_id,
            public_key=tx.sender_pk,
            identity_digest=payload.identity_digest,
            registration_round=self.current_round,
        )
        self.patients[patient_id] = info
        self._patients_by_pk[tx.sender_pk] = patient_id
        self._identity_index[payload.identity_digest] = patient_id
        return info

    # -- chain growth -----------------------------------------------------

    @property
    def tip_height(self) -> int:
        return self.pinned_keyblocks[-1].height if self.pinned_keyblocks else 0

    @property
    def tip_hash(self) -> bytes:
        return self._pinned_hashes[-1] if self._pinned_hashes else GENESIS_KEYBLOCK_HASH

    def last_microblock_hash(self, height: int) -> bytes:
        """Hash of the last microblock appended under the keyblock at
        ``height``; carried forward from earlier rounds, genesis before any."""
        while height >= 1:
            if height in self._last_mb_hash:
                return self._last_mb_hash[height]
            height -= 1
        return GENESIS_MICROBLOCK_HASH

    def penu_microblock_hash_for(self, next_height: int) -> bytes:
        if next_height <= 2:
            return GENESIS_MICROBLOCK_HASH
        return self.last_microblock_hash(next_height - 2)

    def view(self) -> ChainView:
        pinned = tuple(
            (kb.height, digest)
            for kb, digest in zip(self.pinned_keyblocks, self._pinned_hashes)
        )
        return ChainView(
            pinned=pinned,
            tip_height=self.tip_height,
            tip_hash=self.tip_hash,
            penu_microblock_hash=self.penu_microblock_hash_for(self.tip_height + 1),
        )

    def add_pinned_keyblock(self, block: KeyBlock) -> None:
        if block.pin_cert is None or not certificate_meets_quorum(block.pin_cert):
            raise ValueError("keyblock is not pinned")
        digest = keyblock_hash(block, self.group)
        if block.pin_cert.subject_hash != digest:
            raise ValueError("pin certificate covers a different keyblock")
        if block.height != self.tip_height + 1 or block.prev_keyblock_hash != self.tip_hash:
            raise ValueError("keyblock does not extend the pinned tip")
        self.pinned_keyblocks.append(block)
        self._pinned_hashes.append(digest)

    def create_microblock(self, microblock: MicroBlock) -> None:
        if microblock.owner_patient_id in self.microblocks:
            raise ValueError("patient already owns a microblock")
        if microblock.owner_patient_id not in self.patients:
            raise ValueError("owner is not a registered patient")
        self.microblocks[microblock.owner_patient_id] = microblock
        self._touch_microblock(microblock)

    def append_to_microblock(
        self, patient_id: str, tx: Transaction, cert: Optional[PinCertificate]
    ) -> MicroBlock:
        current = self.microblocks[patient_id]
        updated = append_pinned_tx(current, tx, cert)
        self.microblocks[patient_id] = updated
        self._touch_microblock(updated)
        return updated

    def replace_microblock(self, microblock: MicroBlock) -> None:
        """Swap in a microblock whose institution root was redacted."""
        if microblock.owner_patient_id not in self.microblocks:
            raise KeyError(microblock.owner_patient_id)
        self.microblocks[microblock.owner_patient_id] = microblock

    def _touch_microblock(self, microblock: MicroBlock) -> None:
        height = max(self.tip_height, 1)
        self._last_mb_hash[height] = microblock_hash(microblock, self.group)

    # -- lookups ----------------------------------------------------------

    def microblock_of(self, patient_id: str) -> MicroBlock:
        self.store_accesses += 1
        return self.microblocks[patient_id]

    def find_patient_tx(self, patient_id: str, tx_id: bytes) -> Optional[Transaction]:
        microblock = self.microblocks.get(patient_id)
        if microblock is None:
            return None
        for tx in microblock.txs:
            self.store_accesses += 1
            if tx.tx_id == tx_id:
                return tx
        return None

    # -- validation ---------------------------------------------------------

    def validate_tx(self, tx: Transaction) -> tuple[bool, str]:
        """True plus OK, or False plus a machine-readable reason code."""
        try:
            body = signing_bytes(tx.tx_type, tx.payload, tx.sender_pk, tx.fee, self.group)
        except Exception:
            return False, MALFORMED
        if not verify_sig(body, tx.signature, tx.sender_pk):
            return False, BAD_SIGNATURE

        receiver = self.institutions.get(tx.payload.receiver_id)
        if receiver is None:
            return False, UNKNOWN_INSTITUTION

        if tx.tx_type is TxType.REGISTER:
            payload = tx.payload
            assert isinstance(payload, RegisterPayload)
            if (
                tx.sender_pk in self._patients_by_pk
                or payload.identity_digest in self._identity_index
            ):
                return False, ALREADY_REGISTERED
            return True, OK

        patient_id = self._patients_by_pk.get(tx.sender_pk)
        if patient_id is None:
            return False, UNREGISTERED

        payload = tx.payload
        assert isinstance(payload, (MedicalPayload, LabelPayload))
        if payload.round_number > self.current_round:
            return False, BAD_ROUND
        if not ch_verify(receiver.hk, payload.ch_digest.message, payload.ch_digest):
            return False, BAD_PROOF

        if tx.tx_type is TxType.LABEL:
            assert isinstance(payload, LabelPayload)
            if self.find_patient_tx(patient_id, payload.target_tx_hash) is None:
                return False, LABEL_TARGET_MISSING
        return True, OK
