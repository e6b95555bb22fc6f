import random

import pytest

from spchain.chameleon import (
    PROOF_TAG,
    ChameleonDigest,
    ChameleonHashKey,
    ChameleonTrapdoor,
    ch_collide,
    ch_hash,
    ch_keygen,
    ch_verify,
    decode_digest,
    encode_digest,
    message_scalar,
)
from spchain.group import BilinearGroup, default_group
from spchain.wire import Reader


def worked_key(small_group):
    """x=7, h2=5 over p=101; hand-checked oracle values used below."""
    hk = ChameleonHashKey(h1=7, h1_hat=7, h2=5, crs=b"", group=small_group)
    return hk, ChameleonTrapdoor(x=7)


def test_worked_example_hash(small_group):
    # h = r*h1 + m*h2 = 10*7 + 3*5 = 85 mod 101, witness R = r*g = 10
    hk, _ = worked_key(small_group)
    digest = ch_hash(hk, m=3, r=10)
    assert digest.h == 85
    assert ch_verify(hk, 3, digest)
    witness = small_group.decode_element(digest.proof[len(PROOF_TAG) : len(PROOF_TAG) + 1])
    assert witness == 10


def test_worked_example_collision(small_group):
    # x^-1 = 29 mod 101; R' = 29*(85 - 4*5) = 29*65 = 67 mod 101
    hk, tk = worked_key(small_group)
    old = ch_hash(hk, m=3, r=10)
    new = ch_collide(tk, hk, old, m_new=4)
    assert new.h == 85  # digest unchanged
    assert ch_verify(hk, 4, new)
    witness = small_group.decode_element(new.proof[len(PROOF_TAG) : len(PROOF_TAG) + 1])
    assert witness == 67


def test_proof_binds_message(small_group):
    hk, _ = worked_key(small_group)
    digest = ch_hash(hk, m=3, r=10)
    # same h would also open at other (m, r) pairs, but the proof pins m
    assert not ch_verify(hk, 4, digest)
    assert not ch_verify(hk, 0, digest)


def test_exhaustive_binding_small_prime(small_group):
    """Brute force over all messages: only the bound message verifies."""
    hk, _ = worked_key(small_group)
    digest = ch_hash(hk, m=3, r=10)
    verifying = [m for m in range(101) if ch_verify(hk, m, digest)]
    assert verifying == [3]


def test_keygen_shapes_and_determinism(small_group):
    keys1 = ch_keygen(128, small_group, random.Random(42))
    keys2 = ch_keygen(128, small_group, random.Random(42))
    assert keys1 == keys2
    g = small_group
    assert keys1.hk.h1 == g.scalar_mul(keys1.tk.x, g.g1)
    assert keys1.hk.h1_hat == g.scalar_mul(keys1.tk.x, g.g2)
    assert keys1.hk.h2 != 0
    assert keys1.tk.x != 0


def test_keygen_rejects_bad_params(small_group):
    with pytest.raises(ValueError):
        ch_keygen(0, small_group, random.Random(1))


def test_hash_rejects_zero_randomness(small_group):
    hk, _ = worked_key(small_group)
    with pytest.raises(ValueError):
        ch_hash(hk, m=3, r=0)
    with pytest.raises(ValueError):
        ch_hash(hk, m=3, r=101)  # reduces to zero


def test_collide_requires_valid_source(small_group):
    hk, tk = worked_key(small_group)
    digest = ch_hash(hk, m=3, r=10)
    broken = ChameleonDigest(h=digest.h, proof=b"garbage", message=3)
    with pytest.raises(ValueError, match="invalid source digest"):
        ch_collide(tk, hk, broken, m_new=4)


def test_collide_detects_wrong_trapdoor(small_group):
    hk, _ = worked_key(small_group)
    digest = ch_hash(hk, m=3, r=10)
    with pytest.raises(ValueError, match="trapdoor does not match"):
        ch_collide(ChameleonTrapdoor(x=8), hk, digest, m_new=4)


def test_malformed_proofs_verify_false(small_group):
    hk, _ = worked_key(small_group)
    digest = ch_hash(hk, m=3, r=10)
    for proof in (b"", b"XXXX" + digest.proof[4:], digest.proof + b"\x00"):
        assert not ch_verify(hk, 3, ChameleonDigest(h=digest.h, proof=proof, message=3))


def test_randomized_hash_collide_cycle(group):
    rng = random.Random(99)
    keys = ch_keygen(128, group, rng)
    for _ in range(50):
        m = rng.randrange(group.p)
        r = rng.randrange(1, group.p)
        digest = ch_hash(keys.hk, m, r)
        assert ch_verify(keys.hk, m, digest)
        m_new = rng.randrange(group.p)
        new = ch_collide(keys.tk, keys.hk, digest, m_new)
        assert new.h == digest.h
        assert ch_verify(keys.hk, m_new, new)
        if m_new != m:
            assert not ch_verify(keys.hk, m, new)


def test_digest_wire_format_is_h_len_proof(group):
    keys = ch_keygen(128, group, random.Random(5))
    digest = ch_hash(keys.hk, 12345, 678)
    encoded = encode_digest(digest, group)
    w = group.element_width
    assert encoded[:w] == group.encode_element(digest.h)
    assert int.from_bytes(encoded[w : w + 4], "big") == len(digest.proof)
    assert encoded[w + 4 :] == digest.proof

    reader = Reader(encoded)
    decoded = decode_digest(reader, group)
    reader.expect_end()
    assert decoded == digest
    assert ch_verify(keys.hk, decoded.message, decoded)


def test_decode_digest_with_opaque_proof_never_verifies(group):
    keys = ch_keygen(128, group, random.Random(6))
    digest = ch_hash(keys.hk, 1, 2)
    encoded = group.encode_element(digest.h) + (4).to_bytes(4, "big") + b"junk"
    decoded = decode_digest(Reader(encoded), group)
    assert not ch_verify(keys.hk, decoded.message, decoded)


def test_message_scalar_range_and_stability():
    g101 = BilinearGroup(101)
    big = default_group()
    for data in (b"", b"a", b"record" * 100):
        assert 0 <= message_scalar(data, g101) < 101
        assert message_scalar(data, big) == message_scalar(data, big)
