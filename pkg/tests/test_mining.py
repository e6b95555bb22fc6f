import dataclasses
import random
import statistics

import pytest

from spchain.blocks import (
    GENESIS_KEYBLOCK_HASH,
    GENESIS_MICROBLOCK_HASH,
    KeyBlock,
    keyblock_hash,
)
from spchain.chain import ChainView
from spchain.mining import (
    ForkChoice,
    PuzzleInput,
    check_puzzle,
    fork_choice,
    mine_keyblock,
    puzzle_preimage,
    puzzle_value,
    solves,
    target_from_zero_bits,
)
from spchain.signing import keypair_from_seed


def genesis_view():
    return ChainView(
        pinned=(),
        tip_height=0,
        tip_hash=GENESIS_KEYBLOCK_HASH,
        penu_microblock_hash=GENESIS_MICROBLOCK_HASH,
    )


def test_target_arithmetic():
    assert target_from_zero_bits(0) == (1 << 256) - 1  # widest expressible
    assert target_from_zero_bits(8) == 1 << 248
    with pytest.raises(ValueError):
        target_from_zero_bits(-1)
    with pytest.raises(ValueError):
        target_from_zero_bits(256)


def test_preimage_layout():
    pk = keypair_from_seed(b"m").public_key
    preimage = puzzle_preimage(b"A" * 32, b"B" * 32, 5, pk)
    assert preimage == b"A" * 32 + b"B" * 32 + (5).to_bytes(8, "big") + pk


def test_puzzle_sensitivity_to_every_input():
    pk = keypair_from_seed(b"m").public_key
    base = PuzzleInput(b"A" * 32, b"B" * 32, 5, pk, 1 << 255)
    v = puzzle_value(base)
    assert v != puzzle_value(dataclasses.replace(base, nonce=6))
    assert v != puzzle_value(dataclasses.replace(base, prev_keyblock_hash=b"C" * 32))
    assert v != puzzle_value(dataclasses.replace(base, penu_microblock_hash=b"C" * 32))
    other_pk = keypair_from_seed(b"n").public_key
    assert v != puzzle_value(dataclasses.replace(base, miner_public_key=other_pk))


def test_mined_block_passes_check(group):
    view = genesis_view()
    kp = keypair_from_seed(b"miner")
    result = mine_keyblock(view, (), kp, target_from_zero_bits(4), 10_000, random.Random(1))
    assert result.block is not None
    assert check_puzzle(result.block)
    assert result.block.height == 1
    assert result.block.prev_keyblock_hash == GENESIS_KEYBLOCK_HASH
    # and the solution is tight against the claimed target
    assert solves(
        PuzzleInput(
            result.block.prev_keyblock_hash,
            result.block.penu_microblock_hash,
            result.block.nonce,
            result.block.miner_public_key,
            result.block.target,
        )
    )


def test_check_puzzle_rejects_malformed():
    block = KeyBlock(
        prev_keyblock_hash=b"x",
        penu_microblock_hash=b"y",
        nonce="not-an-int",  # type: ignore[arg-type]
        miner_public_key=b"pk",
        register_txs=(),
        target=1 << 255,
        height=1,
    )
    assert not check_puzzle(block)


def test_budget_exhaustion_returns_none():
    view = genesis_view()
    kp = keypair_from_seed(b"miner")
    result = mine_keyblock(view, (), kp, 0, 50, random.Random(2))  # impossible target
    assert result.block is None
    assert result.attempts == 50


def test_expected_attempts_match_difficulty():
    """At z zero bits a solution needs ~2^z attempts on average."""
    z = 8
    view = genesis_view()
    kp = keypair_from_seed(b"miner")
    samples = []
    for seed in range(100):
        result = mine_keyblock(
            view, (), kp, target_from_zero_bits(z), 40 * (1 << z), random.Random(seed)
        )
        assert result.block is not None
        samples.append(result.attempts)
    mean = statistics.mean(samples)
    assert (1 << z) * 0.7 < mean < (1 << z) * 1.3


# -- fork choice ---------------------------------------------------------------


def mined_at(view, seed, group):
    kp = keypair_from_seed(seed)
    result = mine_keyblock(view, (), kp, target_from_zero_bits(0), 1, random.Random(3))
    return result.block


def test_fork_choice_accepts_tip_extension(group):
    view = genesis_view()
    block = mined_at(view, b"m1", group)
    assert fork_choice(view, block, group) is ForkChoice.ACCEPT


def test_fork_choice_rejects_pinned_conflict(group):
    view = genesis_view()
    pinned_block = mined_at(view, b"m1", group)
    pinned_hash = keyblock_hash(pinned_block, group)
    advanced = ChainView(
        pinned=((1, pinned_hash),),
        tip_height=1,
        tip_hash=pinned_hash,
        penu_microblock_hash=GENESIS_MICROBLOCK_HASH,
    )
    rival = mined_at(view, b"m2", group)  # same height, different content
    assert fork_choice(advanced, rival, group) is ForkChoice.REJECT
    # re-announcing the pinned block itself is fine
    assert fork_choice(advanced, pinned_block, group) is ForkChoice.ACCEPT


def test_fork_choice_orphans_side_branch(group):
    view = genesis_view()
    pinned_block = mined_at(view, b"m1", group)
    pinned_hash = keyblock_hash(pinned_block, group)
    advanced = ChainView(
        pinned=((1, pinned_hash),),
        tip_height=1,
        tip_hash=pinned_hash,
        penu_microblock_hash=GENESIS_MICROBLOCK_HASH,
    )
    # extends an unknown parent at an unpinned height
    stray = KeyBlock(
        prev_keyblock_hash=b"\x05" * 32,
        penu_microblock_hash=GENESIS_MICROBLOCK_HASH,
        nonce=1,
        miner_public_key=keypair_from_seed(b"m3").public_key,
        register_txs=(),
        target=(1 << 256) - 1,
        height=2,
    )
    assert fork_choice(advanced, stray, group) is ForkChoice.ORPHAN
