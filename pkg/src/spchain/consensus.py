"""Consensus-group selection and weighted Byzantine pinning.

A subject (keyblock or transaction) is pinned when it gathers at least
two thirds of the group's signatures by count AND strictly more than two
thirds of the group's reputation weight. Weights are frozen per epoch at
group-selection time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

from .blocks import PinCertificate, PinSignature, required_vote_count
from .signing import verify_sig


@dataclass(frozen=True)
class GroupMember:
    miner_id: str
    weight: float
    public_key: Optional[bytes] = None


@dataclass(frozen=True)
class ConsensusGroup:
    members: tuple[GroupMember, ...]
    epoch: int

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def total_weight(self) -> float:
        return sum(m.weight for m in self.members)

    def member(self, miner_id: str) -> Optional[GroupMember]:
        for m in self.members:
            if m.miner_id == miner_id:
                return m
        return None


def select_group(
    reputations: Mapping[str, float],
    group_size: int,
    public_keys: Optional[Mapping[str, bytes]] = None,
    epoch: int = 0,
) -> ConsensusGroup:
    """Top-``group_size`` miners by reputation, ties broken by id ascending."""
    if group_size < 1:
        raise ValueError("group size must be at least 1")
    if len(reputations) < group_size:
        raise ValueError(
            f"need at least {group_size} miners, have {len(reputations)}"
        )
    ranked = sorted(reputations.items(), key=lambda kv: (-kv[1], kv[0]))
    members = tuple(
        GroupMember(
            miner_id=miner_id,
            weight=rep,
            public_key=public_keys.get(miner_id) if public_keys else None,
        )
        for miner_id, rep in ranked[:group_size]
    )
    return ConsensusGroup(members=members, epoch=epoch)


@dataclass(frozen=True)
class InsufficientQuorum:
    """Pinning failed; carries the measured count and weight."""

    vote_count: int
    vote_weight: float
    required_count: int
    required_weight: float
    ignored: tuple[str, ...] = ()


def pin(
    subject_hash: bytes,
    votes: Sequence[tuple[str, bytes]],
    group: ConsensusGroup,
    verify_signatures: bool = True,
) -> Union[PinCertificate, InsufficientQuorum]:
    """Aggregate votes into a certificate or report the shortfall.

    Votes from non-members (or with bad signatures) are ignored and listed
    in the outcome's audit trail; duplicates count once.
    """
    ignored: list[str] = []
    accepted: dict[str, PinSignature] = {}
    for signer_id, signature in votes:
        member = group.member(signer_id)
        if member is None:
            ignored.append(signer_id)
            continue
        if signer_id in accepted:
            continue
        if verify_signatures:
            if member.public_key is None or not verify_sig(
                subject_hash, signature, member.public_key
            ):
                ignored.append(signer_id)
                continue
        accepted[signer_id] = PinSignature(
            signer_id=signer_id, weight=member.weight, signature=signature
        )

    signers = tuple(accepted[k] for k in sorted(accepted))
    count = len(signers)
    weight = sum(s.weight for s in signers)
    need_count = required_vote_count(group.size)
    need_weight = (2.0 / 3.0) * group.total_weight
    if count >= need_count and weight > need_weight:
        return PinCertificate(
            subject_hash=subject_hash,
            signers=signers,
            group_size=group.size,
            group_total_weight=group.total_weight,
        )
    return InsufficientQuorum(
        vote_count=count,
        vote_weight=weight,
        required_count=need_count,
        required_weight=need_weight,
        ignored=tuple(ignored),
    )
