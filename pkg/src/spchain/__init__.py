"""SPChain: keyblock/microblock blockchain for medical-record sharing
with chameleon-hash redaction and reputation-weighted Byzantine pinning."""

from .group import BilinearGroup, default_group
from .chameleon import (
    ChameleonDigest,
    ChameleonHashKey,
    ChameleonKeys,
    ChameleonTrapdoor,
    ch_collide,
    ch_hash,
    ch_keygen,
    ch_verify,
    message_scalar,
)
from .envelope import SealedEmr, SymmetricKey, seal_emr, symmetric_key_from_seed, unseal_layer
from .signing import KeyPair, address_of, keypair_from_seed, sign, verify_sig

__all__ = [
    "BilinearGroup",
    "default_group",
    "ChameleonDigest",
    "ChameleonHashKey",
    "ChameleonKeys",
    "ChameleonTrapdoor",
    "ch_collide",
    "ch_hash",
    "ch_keygen",
    "ch_verify",
    "message_scalar",
    "SealedEmr",
    "SymmetricKey",
    "seal_emr",
    "symmetric_key_from_seed",
    "unseal_layer",
    "KeyPair",
    "address_of",
    "keypair_from_seed",
    "sign",
    "verify_sig",
]

__version__ = "0.1.0"
