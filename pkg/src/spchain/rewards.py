"""Reward distribution for pinned blocks.

Keyblock: the creator collects the mining reward plus the register fees
it packed. Microblock: the reward (base plus the batch's transaction
fees) is split between the committing miner and the pinning signers,
signers sharing proportionally to their reputation weight. The creator's
slice absorbs rounding residue so the total always distributes exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .blocks import KeyBlock, MicroBlock, PinCertificate, certificate_meets_quorum
from .consensus import ConsensusGroup
from .signing import address_of
from .tx import Transaction


@dataclass(frozen=True)
class FeeSchedule:
    mining_reward: float = 50.0
    micro_reward: float = 10.0
    register_fee: int = 2
    tx_fee: int = 1
    creator_share: float = 0.5  # microblock split between creator and signers


def distribute_rewards(
    block: Union[KeyBlock, MicroBlock],
    group: ConsensusGroup,
    fees: FeeSchedule,
    pin_cert: Optional[PinCertificate] = None,
    batch_txs: Optional[Sequence[Transaction]] = None,
) -> dict[str, float]:
    """Reward map minerId -> amount for one pinned block.

    For a microblock, ``pin_cert`` is the certificate that pinned the
    appended batch and ``batch_txs`` the transactions it covered
    (defaults to the whole microblock).
    """
    if isinstance(block, KeyBlock):
        cert = block.pin_cert
        if cert is None or not certificate_meets_quorum(cert):
            raise ValueError("block is not pinned")
        creator = address_of(block.miner_public_key)
        total = fees.mining_reward + sum(tx.fee for tx in block.register_txs)
        return {creator: total}

    cert = pin_cert
    if cert is None or not certificate_meets_quorum(cert):
        raise ValueError("block is not pinned")
    txs = block.txs if batch_txs is None else batch_txs
    total = fees.micro_reward + sum(tx.fee for tx in txs)
    signer_pool = total * (1.0 - fees.creator_share)
    signer_weight = sum(s.weight for s in cert.signers)
    rewards: dict[str, float] = {}
    distributed = 0.0
    if signer_weight > 0:
        for s in cert.signers:
            share = signer_pool * s.weight / signer_weight
            rewards[s.signer_id] = rewards.get(s.signer_id, 0.0) + share
            distributed += share
    creator = block.creator_miner_id
    # remainder assignment keeps the sum exact despite float division
    rewards[creator] = rewards.get(creator, 0.0) + (total - distributed)
    return rewards
