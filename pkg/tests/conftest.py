import random

import pytest

from spchain.blocks import PinCertificate
from spchain.consensus import ConsensusGroup, GroupMember, pin
from spchain.group import BilinearGroup, default_group
from spchain.signing import keypair_from_seed, sign


@pytest.fixture(scope="session")
def group():
    return default_group()


@pytest.fixture
def small_group():
    return BilinearGroup(101)


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture(scope="session")
def trio():
    """A 3-member consensus group with signing keys, for manual pinning."""
    keypairs = {}
    members = []
    for i in range(3):
        kp = keypair_from_seed(b"trio/%d" % i)
        miner_id = f"m{i}"
        keypairs[miner_id] = kp
        members.append(GroupMember(miner_id=miner_id, weight=1.0, public_key=kp.public_key))
    return ConsensusGroup(members=tuple(members), epoch=0), keypairs


def pin_subject(subject: bytes, consensus_group, keypairs) -> PinCertificate:
    votes = [
        (m.miner_id, sign(subject, keypairs[m.miner_id]))
        for m in consensus_group.members
    ]
    outcome = pin(subject, votes, consensus_group)
    assert isinstance(outcome, PinCertificate)
    return outcome
