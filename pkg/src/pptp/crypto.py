"""Commitments, slot-secret PRF, hashing and auditor signatures.

Commitments are Pedersen commitments ``v*G + r*H`` in ristretto255, where
``G`` is the standard generator and ``H`` is obtained by hashing the
encoding of ``G`` to the group.  Scalars travel as 32-byte big-endian
integers and commitments as 32-byte compressed points; these layouts are
what digests and signatures are computed over.
"""

from __future__ import annotations

import contextlib
import contextvars
import hashlib
import hmac
import secrets
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.serialization import (
    Encoding,
    NoEncryption,
    PrivateFormat,
    PublicFormat,
)

from .group import DecodeError, Point, Q, point_sum

__all__ = [
    "Q",
    "ComParams",
    "Commitment",
    "RetailerKey",
    "SigKeyPair",
    "OpCounter",
    "count_ops",
    "com_setup",
    "commit",
    "com_add",
    "com_sum",
    "decode_commitment",
    "prf_keygen",
    "prf_eval",
    "hash_bytes",
    "scalar_bytes",
    "scalar_from_bytes",
    "sig_keygen",
    "sign",
    "verify_sig",
]

SUPPORTED_SECURITY = (128,)
SCALAR_BYTES = 32
POINT_BYTES = 32

Commitment = Point


class UnsupportedParameter(ValueError):
    pass


@dataclass(frozen=True)
class ComParams:
    """Commitment parameters: value generator ``G`` and blinding generator ``H``."""

    G: Point
    H: Point
    q: int = Q
    security: int = 128

    def encode(self) -> bytes:
        return self.G.encode() + self.H.encode()


@lru_cache(maxsize=None)
def com_setup(security_parameter: int = 128) -> ComParams:
    if security_parameter not in SUPPORTED_SECURITY:
        raise UnsupportedParameter(f"unsupported security parameter {security_parameter}")
    g = Point.base()
    h = Point.hash_to_group(b"pptp/commitment/H", g.encode())
    return ComParams(G=g.fixed_base(8), H=h.fixed_base(8), security=security_parameter)


# --- operation counters --------------------------------------------------


@dataclass
class OpCounter:
    """Tally of cryptographic operations made while the counter is active."""

    commit: int = 0
    prove: int = 0
    verify: int = 0
    extra: dict[str, int] = field(default_factory=dict)

    def bump(self, op: str, k: int = 1) -> None:
        if op in ("commit", "prove", "verify"):
            setattr(self, op, getattr(self, op) + k)
        else:
            self.extra[op] = self.extra.get(op, 0) + k

    def as_dict(self) -> dict[str, int]:
        return {"commit": self.commit, "prove": self.prove, "verify": self.verify, **self.extra}


_active: contextvars.ContextVar[tuple[OpCounter, ...]] = contextvars.ContextVar(
    "pptp_op_counters", default=()
)


@contextlib.contextmanager
def count_ops() -> Iterator[OpCounter]:
    """Count commit/prove/verify calls made inside the block (nesting allowed)."""
    counter = OpCounter()
    token = _active.set(_active.get() + (counter,))
    try:
        yield counter
    finally:
        _active.reset(token)


def record(op: str, k: int = 1) -> None:
    for c in _active.get():
        c.bump(op, k)


# --- commitments -----------------------------------------------------------


def commit(params: ComParams, v: int, r: int) -> Commitment:
    if not 0 <= v < Q:
        raise ValueError("value out of scalar range")
    if not 0 <= r < Q:
        raise ValueError("randomness out of scalar range")
    record("commit")
    acc = Point.identity()
    if v:
        acc = v * params.G
    if r:
        acc = acc + r * params.H
    return acc


def com_add(c1: Commitment, c2: Commitment) -> Commitment:
    return c1 + c2


def com_sum(cs: Iterable[Commitment]) -> Commitment:
    return point_sum(cs)


def decode_commitment(data: bytes) -> Commitment:
    """Decode a canonical commitment; raises ``ValueError`` on bad input."""
    try:
        return Point.decode(data)
    except DecodeError as exc:
        raise ValueError(str(exc)) from None


def scalar_bytes(x: int) -> bytes:
    return (x % Q).to_bytes(SCALAR_BYTES, "big")


def scalar_from_bytes(data: bytes) -> int:
    if len(data) != SCALAR_BYTES:
        raise ValueError("scalar must be 32 bytes")
    x = int.from_bytes(data, "big")
    if x >= Q:
        raise ValueError("non-canonical scalar")
    return x


def random_scalar(rng=None) -> int:
    """Uniform scalar; ``rng`` (a ``random.Random``) makes it reproducible."""
    if rng is None:
        return secrets.randbelow(Q)
    return rng.getrandbits(512) % Q


# --- PRF, hashing ----------------------------------------------------------


@dataclass(frozen=True)
class RetailerKey:
    key: bytes

    def __repr__(self) -> str:
        return "RetailerKey(<redacted>)"


def prf_keygen(security_parameter: int = 128, rng=None) -> RetailerKey:
    if security_parameter not in SUPPORTED_SECURITY:
        raise UnsupportedParameter(f"unsupported security parameter {security_parameter}")
    n = security_parameter // 8
    if rng is None:
        return RetailerKey(secrets.token_bytes(n))
    return RetailerKey(rng.getrandbits(8 * n).to_bytes(n, "big"))


def prf_eval(key: RetailerKey, user: int, period: int) -> int:
    """Slot secret for (user, period): HMAC-SHA512 over user||period, reduced mod q."""
    msg = user.to_bytes(8, "big") + period.to_bytes(8, "big")
    digest = hmac.new(key.key, msg, hashlib.sha512).digest()
    return int.from_bytes(digest, "big") % Q


def hash_bytes(message: bytes) -> bytes:
    return hashlib.sha256(message).digest()


# --- signatures --------------------------------------------------------------


@dataclass(frozen=True)
class SigKeyPair:
    sk: bytes
    vk: bytes

    def __repr__(self) -> str:
        return f"SigKeyPair(vk={self.vk.hex()[:16]}...)"


def sig_keygen(seed: bytes | None = None) -> SigKeyPair:
    if seed is None:
        priv = Ed25519PrivateKey.generate()
    else:
        priv = Ed25519PrivateKey.from_private_bytes(hashlib.sha256(seed).digest())
    sk = priv.private_bytes(Encoding.Raw, PrivateFormat.Raw, NoEncryption())
    vk = priv.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
    return SigKeyPair(sk=sk, vk=vk)


def sign(sk: bytes, message: bytes) -> bytes:
    if len(sk) != 32:
        raise ValueError("malformed signing key")
    return Ed25519PrivateKey.from_private_bytes(sk).sign(message)


def verify_sig(vk: bytes, message: bytes, sig: bytes) -> bool:
    if len(vk) != 32:
        raise ValueError("malformed verification key")
    if len(sig) != 64:
        raise ValueError("malformed signature")
    try:
        Ed25519PublicKey.from_public_bytes(vk).verify(sig, message)
    except (InvalidSignature, ValueError):
        return False
    return True
