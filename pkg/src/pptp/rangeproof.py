"""Bulletproofs range proofs for ``c = commit(v, r)`` with ``0 <= v <= vmax``.

The inner proof system shows that values lie in ``[0, 2^L)``.  An arbitrary
inclusive bound is reduced to two such claims proven in one aggregated
proof: ``v`` and ``vmax - v`` (committed as ``vmax*G - c``) are both in
``[0, 2^L)`` with ``2^L > vmax``.

The Fiat-Shamir transcript absorbs the statement (commitments and bound),
so a proof only verifies against the exact commitment it was made for.
"""

from __future__ import annotations

import hashlib
import random
import secrets
import struct
import threading
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from gmpy2 import invert, mpz

from .crypto import (
    POINT_BYTES,
    SCALAR_BYTES,
    ComParams,
    Commitment,
    com_setup,
    hash_bytes,
    random_scalar,
    record,
    scalar_bytes,
    scalar_from_bytes,
)
from .group import DecodeError, Point, Q, msm, point_sum

MAX_BITS = 64
_VERSION = 1
_DOMAIN = b"pptp/rangeproof/v1"


class RangeProofError(ValueError):
    pass


class WitnessOutOfRange(RangeProofError):
    """The prover was asked to prove a false range statement."""


class CommitmentMismatch(RangeProofError):
    """The witness does not open the statement commitment."""


class UnsupportedBitLength(RangeProofError):
    pass


# --- parameters ---------------------------------------------------------------


class ZkParams:
    """Generator vectors for the proof system, derived from the commitment params.

    Vector generators are hashed to the group on demand; the first ones get
    fixed-base tables since every small proof uses them.
    """

    def __init__(self, com: ComParams, max_bits: int = MAX_BITS):
        self.com = com
        self.max_bits = max_bits
        self.domain = hashlib.sha256(_DOMAIN + com.encode()).digest()
        self.u = Point.hash_to_group(self.domain, b"u").fixed_base(8)
        self._G: list[Point] = []
        self._H: list[Point] = []
        self._lock = threading.Lock()

    def generators(self, n: int) -> tuple[list[Point], list[Point]]:
        if len(self._G) < n:
            with self._lock:
                for i in range(len(self._G), n):
                    idx = i.to_bytes(4, "big")
                    g = Point.hash_to_group(self.domain, b"G", idx)
                    h = Point.hash_to_group(self.domain, b"H", idx)
                    if i < 32:
                        g, h = g.fixed_base(8), h.fixed_base(8)
                    elif i < 128:
                        g, h = g.fixed_base(6), h.fixed_base(6)
                    self._G.append(g)
                    self._H.append(h)
        return self._G[:n], self._H[:n]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ZkParams)
            and self.domain == other.domain
            and self.max_bits == other.max_bits
        )

    def __hash__(self) -> int:
        return hash((self.domain, self.max_bits))

    def __repr__(self) -> str:
        return f"ZkParams(max_bits={self.max_bits}, domain={self.domain.hex()[:16]})"


@lru_cache(maxsize=None)
def zk_setup(com_params: ComParams, max_bits: int = MAX_BITS) -> ZkParams:
    if not 1 <= max_bits <= MAX_BITS:
        raise UnsupportedBitLength(f"max_bits must be in [1, {MAX_BITS}], got {max_bits}")
    return ZkParams(com_params, max_bits)


def bits_for(vmax: int) -> int:
    """Power-of-two bit length L with 2^L > vmax."""
    need = max(1, vmax.bit_length())
    L = 1
    while L < need:
        L <<= 1
    return L


# --- transcript -----------------------------------------------------------------


class Transcript:
    def __init__(self, label: bytes):
        self._h = hashlib.sha512()
        self.append(b"dom", label)

    def append(self, label: bytes, data: bytes) -> None:
        self._h.update(struct.pack(">I", len(label)) + label)
        self._h.update(struct.pack(">I", len(data)) + data)

    def append_point(self, label: bytes, pt: Point) -> None:
        self.append(label, pt.encode())

    def append_scalar(self, label: bytes, x: int) -> None:
        self.append(label, scalar_bytes(x))

    def challenge(self, label: bytes) -> int:
        h = self._h.copy()
        h.update(b"challenge" + label)
        digest = h.digest()
        self.append(b"c:" + label, digest)
        x = int.from_bytes(digest, "big") % Q
        if x == 0:
            raise RangeProofError("degenerate challenge")
        return x


def _statement_transcript(params: ZkParams, cs: Sequence[Point], vmax: int) -> Transcript:
    ts = Transcript(_DOMAIN)
    ts.append(b"params", params.domain)
    ts.append(b"vmax", vmax.to_bytes(8, "big"))
    ts.append(b"count", len(cs).to_bytes(4, "big"))
    for c in cs:
        ts.append_point(b"C", c)
    return ts


# --- proof object -------------------------------------------------------------


@dataclass(frozen=True)
class RangeProof:
    """A (possibly aggregated) range proof.

    ``digest`` is the SHA-256 of the concatenated statement commitments and
    ``count`` the number of statements covered.
    """

    vmax: int
    count: int
    digest: bytes
    A: Point
    S: Point
    T1: Point
    T2: Point
    taux: int
    mu: int
    t_hat: int
    L: tuple[Point, ...]
    R: tuple[Point, ...]
    a: tuple[int, int]
    b: tuple[int, int]

    def to_bytes(self) -> bytes:
        out = [
            bytes([_VERSION]),
            self.vmax.to_bytes(8, "big"),
            self.count.to_bytes(4, "big"),
            self.digest,
            self.A.encode(),
            self.S.encode(),
            self.T1.encode(),
            self.T2.encode(),
            scalar_bytes(self.taux),
            scalar_bytes(self.mu),
            scalar_bytes(self.t_hat),
            bytes([len(self.L)]),
        ]
        for l_pt, r_pt in zip(self.L, self.R):
            out.append(l_pt.encode())
            out.append(r_pt.encode())
        out.extend(scalar_bytes(v) for v in self.a + self.b)
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> RangeProof:
        try:
            return cls._parse(memoryview(data))
        except (DecodeError, IndexError, struct.error) as exc:
            raise RangeProofError(f"malformed proof: {exc}") from None

    @classmethod
    def _parse(cls, buf: memoryview) -> RangeProof:
        pos = 0

        def take(n: int) -> bytes:
            nonlocal pos
            if pos + n > len(buf):
                raise RangeProofError("truncated proof")
            chunk = bytes(buf[pos : pos + n])
            pos += n
            return chunk

        def point() -> Point:
            return Point.decode(take(POINT_BYTES))

        def scalar() -> int:
            return scalar_from_bytes(take(SCALAR_BYTES))

        if take(1)[0] != _VERSION:
            raise RangeProofError("unknown proof version")
        vmax = int.from_bytes(take(8), "big")
        count = int.from_bytes(take(4), "big")
        digest = take(32)
        A, S, T1, T2 = point(), point(), point(), point()
        taux, mu, t_hat = scalar(), scalar(), scalar()
        rounds = take(1)[0]
        Ls, Rs = [], []
        for _ in range(rounds):
            Ls.append(point())
            Rs.append(point())
        a = (scalar(), scalar())
        b = (scalar(), scalar())
        if pos != len(buf):
            raise RangeProofError("trailing bytes")
        return cls(vmax, count, digest, A, S, T1, T2, taux, mu, t_hat, tuple(Ls), tuple(Rs), a, b)

    def __len__(self) -> int:
        return 1 + 8 + 4 + 32 + 4 * 32 + 3 * 32 + 1 + 64 * len(self.L) + 128


def _digest(cs: Sequence[Point]) -> bytes:
    return hash_bytes(b"".join(c.encode() for c in cs))


# --- core aggregated protocol ---------------------------------------------------


def _inner(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b)) % Q


def _powers(x: int, n: int) -> list[int]:
    out = [1] * n
    for i in range(1, n):
        out[i] = out[i - 1] * x % Q
    return out


def _inv(x: int) -> int:
    return int(invert(mpz(x), Q))


def _prove_core(params, ts, V, values, gammas, L, rng):
    """Aggregated proof that every values[j] in [0, 2^L); V[j] = values[j]*G + gammas[j]*H."""
    M = len(values)
    N = M * L
    Gs, Hs = params.generators(N)
    g, h, u = params.com.G, params.com.H, params.u
    rand = lambda: random_scalar(rng)  # noqa: E731

    aL = [(values[j] >> i) & 1 for j in range(M) for i in range(L)]
    aR = [(bit - 1) % Q for bit in aL]
    alpha = rand()
    A = (
        alpha * h
        + point_sum(Gs[i] for i in range(N) if aL[i])
        - point_sum(Hs[i] for i in range(N) if not aL[i])
    )
    sL = [rand() for _ in range(N)]
    sR = [rand() for _ in range(N)]
    rho = rand()
    S = msm([rho] + sL + sR, [h] + Gs + Hs)
    ts.append_point(b"A", A)
    ts.append_point(b"S", S)
    y = ts.challenge(b"y")
    z = ts.challenge(b"z")

    yN = _powers(y, N)
    zz = [z * z % Q]
    for _ in range(1, M):
        zz.append(zz[-1] * z % Q)
    two_L = _powers(2, L)
    l0 = [(x - z) % Q for x in aL]
    r0 = [
        (yN[i] * (aR[i] + z) + zz[i // L] * two_L[i % L]) % Q for i in range(N)
    ]
    r1 = [yN[i] * sR[i] % Q for i in range(N)]
    t1 = (_inner(l0, r1) + _inner(sL, r0)) % Q
    t2 = _inner(sL, r1)
    tau1, tau2 = rand(), rand()
    T1 = msm([t1, tau1], [g, h])
    T2 = msm([t2, tau2], [g, h])
    ts.append_point(b"T1", T1)
    ts.append_point(b"T2", T2)
    x = ts.challenge(b"x")

    lv = [(l0[i] + sL[i] * x) % Q for i in range(N)]
    rv = [(r0[i] + r1[i] * x) % Q for i in range(N)]
    t_hat = _inner(lv, rv)
    taux = (tau2 * x % Q * x + tau1 * x + sum(zz[j] * gammas[j] for j in range(M))) % Q
    mu = (alpha + rho * x) % Q
    ts.append_scalar(b"taux", taux)
    ts.append_scalar(b"mu", mu)
    ts.append_scalar(b"t_hat", t_hat)
    w = ts.challenge(b"w")

    # Inner-product argument.  Folded generators are never materialised:
    # gco/hco hold each original generator's coefficient in its folded slot.
    y_inv = _inv(y)
    gco = [1] * N
    hco = _powers(y_inv, N)
    a, b = lv, rv
    n = N
    Ls, Rs = [], []
    while n > 2:
        half = n // 2
        cL = _inner(a[:half], b[half:])
        cR = _inner(a[half:], b[:half])
        ls, lp, rs, rp = [], [], [], []
        for i in range(N):
            k = i % n
            if k < half:
                rs.append(a[k + half] * gco[i] % Q)
                rp.append(Gs[i])
                ls.append(b[k + half] * hco[i] % Q)
                lp.append(Hs[i])
            else:
                ls.append(a[k - half] * gco[i] % Q)
                lp.append(Gs[i])
                rs.append(b[k - half] * hco[i] % Q)
                rp.append(Hs[i])
        Lj = msm(ls + [cL * w % Q], lp + [u])
        Rj = msm(rs + [cR * w % Q], rp + [u])
        ts.append_point(b"L", Lj)
        ts.append_point(b"R", Rj)
        e = ts.challenge(b"e")
        e_inv = _inv(e)
        a = [(a[k] * e + a[k + half] * e_inv) % Q for k in range(half)]
        b = [(b[k] * e_inv + b[k + half] * e) % Q for k in range(half)]
        for i in range(N):
            if i % n < half:
                gco[i] = gco[i] * e_inv % Q
                hco[i] = hco[i] * e % Q
            else:
                gco[i] = gco[i] * e % Q
                hco[i] = hco[i] * e_inv % Q
        Ls.append(Lj)
        Rs.append(Rj)
        n = half
    return A, S, T1, T2, taux, mu, t_hat, Ls, Rs, tuple(a), tuple(b)


def _verify_terms(params, ts, V, L, proof, weight):
    """MSM terms (fixed-generator coefficient arrays + variable terms) that sum
    to the identity iff the aggregated proof is valid; scaled by ``weight``."""
    M = len(V)
    N = M * L
    rounds = N.bit_length() - 2  # folding stops at length 2
    if len(proof.L) != rounds or len(proof.R) != rounds:
        raise RangeProofError("wrong number of rounds")
    ts.append_point(b"A", proof.A)
    ts.append_point(b"S", proof.S)
    y = ts.challenge(b"y")
    z = ts.challenge(b"z")
    ts.append_point(b"T1", proof.T1)
    ts.append_point(b"T2", proof.T2)
    x = ts.challenge(b"x")
    ts.append_scalar(b"taux", proof.taux)
    ts.append_scalar(b"mu", proof.mu)
    ts.append_scalar(b"t_hat", proof.t_hat)
    w = ts.challenge(b"w")
    es = []
    for Lj, Rj in zip(proof.L, proof.R):
        ts.append_point(b"L", Lj)
        ts.append_point(b"R", Rj)
        es.append(ts.challenge(b"e"))

    c = secrets.randbits(128) | 1
    yN = _powers(y, N)
    y_inv = _inv(y)
    y_invN = _powers(y_inv, N)
    zz = [z * z % Q]
    for _ in range(1, M):
        zz.append(zz[-1] * z % Q)
    two_L = _powers(2, L)
    delta = ((z - z * z) * sum(yN) - sum(zz) * z % Q * ((1 << L) - 1)) % Q

    e_inv = [_inv(e) for e in es]
    s = [1] * N
    s0 = 1
    for ei in e_inv:
        s0 = s0 * ei % Q
    s[0] = s[1] = s0
    e_sq = [e * e % Q for e in es]
    for i in range(2, N):
        top = i.bit_length() - 1
        s[i] = s[i - (1 << top)] * e_sq[rounds - top] % Q
    s_inv = [_inv(v) for v in s] if N <= 4 else _batch_inv(s)

    a, b = proof.a, proof.b
    gcoef = [(-z - a[i & 1] * s[i]) * weight % Q for i in range(N)]
    hcoef = [
        (z + (zz[i // L] * two_L[i % L] - b[i & 1] * s_inv[i]) * y_invN[i]) * weight % Q
        for i in range(N)
    ]
    g_c = c * (proof.t_hat - delta) * weight % Q
    h_c = (c * proof.taux - proof.mu) * weight % Q
    u_c = w * (proof.t_hat - a[0] * b[0] - a[1] * b[1]) * weight % Q
    var_s = [
        weight,
        x * weight % Q,
        -c * x * weight % Q,
        -c * x % Q * x * weight % Q,
    ]
    var_p = [proof.A, proof.S, proof.T1, proof.T2]
    for j in range(M):
        var_s.append(-c * zz[j] * weight % Q)
        var_p.append(V[j])
    for j in range(rounds):
        var_s.append(e_sq[j] * weight % Q)
        var_p.append(proof.L[j])
        var_s.append(_inv(e_sq[j]) * weight % Q)
        var_p.append(proof.R[j])
    return g_c, h_c, u_c, gcoef, hcoef, var_s, var_p


def _batch_inv(xs: list[int]) -> list[int]:
    prefix = [1] * (len(xs) + 1)
    for i, v in enumerate(xs):
        prefix[i + 1] = prefix[i] * v % Q
    inv = _inv(prefix[-1])
    out = [0] * len(xs)
    for i in range(len(xs) - 1, -1, -1):
        out[i] = prefix[i] * inv % Q
        inv = inv * xs[i] % Q
    return out


class _Accumulator:
    """Sums weighted verification equations into one multi-scalar multiplication."""

    def __init__(self, params: ZkParams):
        self.params = params
        self.g = 0
        self.h = 0
        self.u = 0
        self.gc: list[int] = []
        self.hc: list[int] = []
        self.var_s: list[int] = []
        self.var_p: list[Point] = []

    def add(self, terms) -> None:
        g_c, h_c, u_c, gcoef, hcoef, var_s, var_p = terms
        self.g += g_c
        self.h += h_c
        self.u += u_c
        if len(gcoef) > len(self.gc):
            self.gc.extend([0] * (len(gcoef) - len(self.gc)))
            self.hc.extend([0] * (len(hcoef) - len(self.hc)))
        for i, v in enumerate(gcoef):
            self.gc[i] += v
        for i, v in enumerate(hcoef):
            self.hc[i] += v
        self.var_s.extend(var_s)
        self.var_p.extend(var_p)

    def check(self) -> bool:
        p = self.params
        Gs, Hs = p.generators(len(self.gc))
        scalars = [self.g, self.h, self.u] + self.gc + self.hc + self.var_s
        points = [p.com.G, p.com.H, p.u] + Gs + Hs + self.var_p
        return msm(scalars, points).is_identity()


# --- single statements ------------------------------------------------------------


def _dual(params: ZkParams, c: Point, vmax: int) -> tuple[Point, Point]:
    return c, vmax * params.com.G - c


def _check_opening(params: ZkParams, c: Point, v: int, r: int) -> None:
    com = params.com
    if not 0 <= r < Q or v * com.G + r * com.H != c:
        raise CommitmentMismatch("witness does not open the commitment")


def _check_bound(params: ZkParams, vmax: int) -> int:
    if vmax < 0:
        raise RangeProofError("vmax must be nonnegative")
    if vmax.bit_length() > params.max_bits:
        raise UnsupportedBitLength(f"vmax needs more than {params.max_bits} bits")
    return bits_for(vmax)


def zk_prove(
    params: ZkParams, c: Commitment, vmax: int, v: int, r: int, rng=None
) -> RangeProof:
    """Prove knowledge of (v, r) with c = commit(v, r) and 0 <= v <= vmax."""
    L = _check_bound(params, vmax)
    if not 0 <= v <= vmax:
        raise WitnessOutOfRange(f"value {v} outside [0, {vmax}]")
    _check_opening(params, c, v, r)
    record("prove")
    ts = _statement_transcript(params, [c], vmax)
    V = _dual(params, c, vmax)
    parts = _prove_core(params, ts, V, [v, vmax - v], [r, (-r) % Q], L, rng)
    return RangeProof(vmax, 1, _digest([c]), *parts[:7], tuple(parts[7]), tuple(parts[8]), *parts[9:])


def _coerce(proof) -> RangeProof:
    if isinstance(proof, RangeProof):
        return proof
    return RangeProof.from_bytes(bytes(proof))


def _single_terms(params, c, vmax, proof, weight):
    proof = _coerce(proof)
    if proof.vmax != vmax or proof.count != 1 or proof.digest != _digest([c]):
        raise RangeProofError("proof does not match statement")
    L = _check_bound(params, vmax)
    ts = _statement_transcript(params, [c], vmax)
    return _verify_terms(params, ts, _dual(params, c, vmax), L, proof, weight)


def zk_verify(params: ZkParams, c: Commitment, vmax: int, proof) -> bool:
    """Check a single range proof; malformed input gives False, never an exception."""
    record("verify")
    try:
        acc = _Accumulator(params)
        acc.add(_single_terms(params, c, vmax, proof, 1))
        return acc.check()
    except (RangeProofError, ValueError, TypeError):
        return False


def zk_verify_all(params: ZkParams, items: Sequence[tuple[Commitment, int, object]]) -> bool:
    """True iff every (c, vmax, proof) verifies.

    The equations are combined with random weights into one multi-scalar
    multiplication; each item still counts as one verification.
    """
    record("verify", len(items))
    if not items:
        return True
    try:
        acc = _Accumulator(params)
        for c, vmax, proof in items:
            acc.add(_single_terms(params, c, vmax, proof, secrets.randbits(128) | 1))
        return acc.check()
    except (RangeProofError, ValueError, TypeError):
        return False


# --- aggregated batches -----------------------------------------------------------


def _batch_layout(params, cs, vmax):
    L = _check_bound(params, vmax)
    V = []
    for c in cs:
        V.extend(_dual(params, c, vmax))
    M = 1
    while M < len(V):
        M <<= 1
    V.extend([Point.identity()] * (M - len(V)))
    return L, V


def zk_prove_batch(params: ZkParams, statements: Sequence[tuple], rng=None) -> RangeProof:
    """One aggregated proof for statements [(c, vmax, v, r), ...] sharing one vmax."""
    if not statements:
        raise RangeProofError("empty batch")
    vmaxes = {st[1] for st in statements}
    if len(vmaxes) != 1:
        raise RangeProofError("all statements in a batch must share vmax")
    vmax = vmaxes.pop()
    cs = [st[0] for st in statements]
    for c, _, v, r in statements:
        if not 0 <= v <= vmax:
            raise WitnessOutOfRange(f"value {v} outside [0, {vmax}]")
        _check_opening(params, c, v, r)
    L, V = _batch_layout(params, cs, vmax)
    values, gammas = [], []
    for _, _, v, r in statements:
        values += [v, vmax - v]
        gammas += [r, (-r) % Q]
    pad = len(V) - len(values)
    values += [0] * pad
    gammas += [0] * pad
    record("prove")
    ts = _statement_transcript(params, cs, vmax)
    parts = _prove_core(params, ts, V, values, gammas, L, rng)
    return RangeProof(
        vmax, len(cs), _digest(cs), *parts[:7], tuple(parts[7]), tuple(parts[8]), *parts[9:]
    )


def zk_verify_batch(params: ZkParams, statements: Sequence[tuple], proof) -> bool:
    """Verify an aggregated proof against statements [(c, vmax), ...]."""
    record("verify")
    try:
        proof = _coerce(proof)
        vmaxes = {st[1] for st in statements}
        if len(vmaxes) != 1:
            return False
        vmax = vmaxes.pop()
        cs = [st[0] for st in statements]
        if proof.vmax != vmax or proof.count != len(cs) or proof.digest != _digest(cs):
            return False
        L, V = _batch_layout(params, cs, vmax)
        ts = _statement_transcript(params, cs, vmax)
        acc = _Accumulator(params)
        acc.add(_verify_terms(params, ts, V, L, proof, 1))
        return acc.check()
    except (RangeProofError, ValueError, TypeError):
        return False


# --- many independent proofs -------------------------------------------------------


_worker_params: ZkParams | None = None


def _worker_init(security: int, max_bits: int) -> None:
    global _worker_params
    _worker_params = zk_setup(com_setup(security), max_bits)


def _worker_prove(job):
    c_enc, vmax, v, r, seed = job
    c = Point.decode(c_enc)
    return zk_prove(_worker_params, c, vmax, v, r, random.Random(seed)).to_bytes()


def zk_prove_many(
    params: ZkParams, statements: Sequence[tuple], rng=None, workers: int = 1
) -> list[RangeProof]:
    """Independent proofs for [(c, vmax, v, r), ...], in input order.

    With ``rng`` every proof gets a seed drawn up front, so the output does
    not depend on ``workers``.  ``workers > 1`` proves in a process pool.
    """
    for c, vmax, v, r in statements:
        _check_bound(params, vmax)
        if not 0 <= v <= vmax:
            raise WitnessOutOfRange(f"value {v} outside [0, {vmax}]")
    seeds = [rng.getrandbits(64) if rng is not None else None for _ in statements]
    if workers <= 1 or len(statements) < 2:
        return [
            zk_prove(params, c, vmax, v, r, None if s is None else random.Random(s))
            for (c, vmax, v, r), s in zip(statements, seeds)
        ]
    jobs = [
        (c.encode(), vmax, v, r, s if s is not None else secrets.randbits(64))
        for (c, vmax, v, r), s in zip(statements, seeds)
    ]
    for c, _, v, r in statements:
        _check_opening(params, c, v, r)
    chunk = max(1, len(jobs) // (4 * workers))
    with ProcessPoolExecutor(
        max_workers=workers,
        initializer=_worker_init,
        initargs=(params.com.security, params.max_bits),
    ) as pool:
        out = [RangeProof.from_bytes(b) for b in pool.map(_worker_prove, jobs, chunksize=chunk)]
    record("prove", len(out))
    return out
