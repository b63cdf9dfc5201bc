"""The ristretto255 prime-order group over Curve25519.

Points are kept in extended twisted-Edwards coordinates (X:Y:Z:T) with
gmpy2 integers and only converted to the canonical 32-byte encoding at
API boundaries.  Encoding, decoding and the one-way map follow RFC 9496.

Nothing here is constant time.
"""

from __future__ import annotations

import hashlib
from typing import Iterable, Sequence

from gmpy2 import invert, mpz, powmod

P = mpz(2**255 - 19)
Q = 2**252 + 27742317777372353535851937790883648493
"""Order of the group (and modulus of the scalar field)."""
_HALF_Q = Q >> 1

_D = mpz(-121665) * invert(mpz(121666), P) % P
_D2 = 2 * _D % P
_SQRT_M1 = powmod(2, (P - 1) // 4, P)
_ONE_MINUS_D_SQ = (1 - _D * _D) % P
_D_MINUS_ONE_SQ = (_D - 1) * (_D - 1) % P


def _is_negative(x) -> bool:
    return bool(x % P & 1)


def _abs(x):
    x %= P
    return P - x if x & 1 else x


def _sqrt_ratio_m1(u, v):
    u %= P
    v %= P
    v3 = v * v % P * v % P
    v7 = v3 * v3 % P * v % P
    r = u * v3 % P * powmod(u * v7 % P, (P - 5) // 8, P) % P
    check = v * r % P * r % P
    correct = check == u
    flipped = check == (-u) % P
    flipped_i = check == (-u * _SQRT_M1) % P
    if flipped or flipped_i:
        r = r * _SQRT_M1 % P
    r = _abs(r)
    return correct or flipped, r


_SQRT_AD_MINUS_ONE = mpz(
    25063068953384623474111414158702152701244531502492656460079210482610430750235
)
_INVSQRT_A_MINUS_D = mpz(
    54469307008909316920995813868745141605393597292927456921205312896311721017578
)

# Extended-coordinate helpers work on plain tuples to keep the hot loops lean.


def _add(p1, p2):
    X1, Y1, Z1, T1 = p1
    X2, Y2, Z2, T2 = p2
    A = (Y1 - X1) * (Y2 - X2) % P
    B = (Y1 + X1) * (Y2 + X2) % P
    C = T1 * _D2 % P * T2 % P
    D = 2 * Z1 * Z2 % P
    E, F, G, H = B - A, D - C, D + C, B + A
    return (E * F % P, G * H % P, F * G % P, E * H % P)


def _dbl(p1):
    X1, Y1, Z1, _ = p1
    A = X1 * X1 % P
    B = Y1 * Y1 % P
    C = 2 * Z1 * Z1 % P
    E = ((X1 + Y1) * (X1 + Y1) - A - B) % P
    G = B - A
    F = G - C
    H = -A - B
    return (E * F % P, G * H % P, F * G % P, E * H % P)


def _neg(p1):
    X, Y, Z, T = p1
    return (-X % P, Y, Z, -T % P)


def _to_cached(p1):
    """(Y+X, Y-X, 2Z, 2dT): the operand form for repeated additions."""
    X, Y, Z, T = p1
    return ((Y + X) % P, (Y - X) % P, 2 * Z % P, T * _D2 % P)


def _to_affine_cached(p1):
    X, Y, Z, T = p1
    zi = invert(Z, P)
    x = X * zi % P
    y = Y * zi % P
    return ((y + x) % P, (y - x) % P, x * y % P * _D2 % P)


def _add_cached(p1, c):
    X1, Y1, Z1, T1 = p1
    ypx, ymx, z2, t2d = c
    A = (Y1 - X1) * ymx % P
    B = (Y1 + X1) * ypx % P
    C = T1 * t2d % P
    D = Z1 * z2 % P
    E, F, G, H = B - A, D - C, D + C, B + A
    return (E * F % P, G * H % P, F * G % P, E * H % P)


def _sub_cached(p1, c):
    X1, Y1, Z1, T1 = p1
    ypx, ymx, z2, t2d = c
    A = (Y1 - X1) * ypx % P
    B = (Y1 + X1) * ymx % P
    C = T1 * t2d % P
    D = Z1 * z2 % P
    E, F, G, H = B - A, D + C, D - C, B + A
    return (E * F % P, G * H % P, F * G % P, E * H % P)


def _add_affine(p1, c):
    X1, Y1, Z1, T1 = p1
    ypx, ymx, t2d = c
    A = (Y1 - X1) * ymx
    B = (Y1 + X1) * ypx
    C = T1 * t2d % P
    D = Z1 << 1
    E, F, G, H = (B - A) % P, D - C, D + C, (B + A) % P
    return (E * F % P, G * H % P, F * G % P, E * H % P)


def _sub_affine(p1, c):
    X1, Y1, Z1, T1 = p1
    ypx, ymx, t2d = c
    A = (Y1 - X1) * ypx
    B = (Y1 + X1) * ymx
    C = T1 * t2d % P
    D = Z1 << 1
    E, F, G, H = (B - A) % P, D + C, D - C, (B + A) % P
    return (E * F % P, G * H % P, F * G % P, E * H % P)


_IDENTITY = (mpz(0), mpz(1), mpz(1), mpz(0))


class DecodeError(ValueError):
    """Raised for byte strings that are not canonical ristretto255 encodings."""


class Point:
    """An element of ristretto255.

    Supports ``+``, ``-``, unary ``-``, ``int * Point`` and equality.  Points
    built with :meth:`fixed_base` carry a precomputed window table and
    make scalar multiplication (and :func:`msm` terms) much cheaper.
    """

    __slots__ = ("_e", "_table", "_window", "_enc")

    def __init__(self, ext):
        self._e = ext
        self._table = None
        self._window = 0
        self._enc = None

    @classmethod
    def identity(cls) -> Point:
        return cls(_IDENTITY)

    @classmethod
    def base(cls) -> Point:
        """The standard ristretto255 generator."""
        return _BASE

    @classmethod
    def decode(cls, data: bytes) -> Point:
        if len(data) != 32:
            raise DecodeError("encoding must be 32 bytes")
        s = mpz(int.from_bytes(data, "little"))
        if s >= P or _is_negative(s):
            raise DecodeError("non-canonical field element")
        ss = s * s % P
        u1 = (1 - ss) % P
        u2 = (1 + ss) % P
        u2_sqr = u2 * u2 % P
        v = (-(_D * u1 % P * u1) - u2_sqr) % P
        was_square, invsqrt = _sqrt_ratio_m1(1, v * u2_sqr)
        den_x = invsqrt * u2 % P
        den_y = invsqrt * den_x % P * v % P
        x = _abs(2 * s * den_x)
        y = u1 * den_y % P
        t = x * y % P
        if not was_square or _is_negative(t) or y == 0:
            raise DecodeError("not a valid ristretto255 point")
        pt = cls((x, y, mpz(1), t))
        pt._enc = bytes(data)
        return pt

    @classmethod
    def from_uniform_bytes(cls, data: bytes) -> Point:
        """Map 64 uniformly random bytes to a point (hash-to-group)."""
        if len(data) != 64:
            raise ValueError("need 64 bytes")
        p1 = _elligator(data[:32])
        p2 = _elligator(data[32:])
        return cls(_add(p1, p2))

    @classmethod
    def hash_to_group(cls, *parts: bytes) -> Point:
        h = hashlib.sha512()
        for part in parts:
            h.update(len(part).to_bytes(8, "big"))
            h.update(part)
        return cls.from_uniform_bytes(h.digest())

    def encode(self) -> bytes:
        if self._enc is None:
            self._enc = _encode(self._e)
        return self._enc

    def __bytes__(self) -> bytes:
        return self.encode()

    def is_identity(self) -> bool:
        X, Y, _, _ = self._e
        return X % P == 0 or Y % P == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, Point):
            return NotImplemented
        X1, Y1, _, _ = self._e
        X2, Y2, _, _ = other._e
        return (X1 * Y2 - Y1 * X2) % P == 0 or (Y1 * Y2 - X1 * X2) % P == 0

    def __hash__(self) -> int:
        return hash(self.encode())

    def __add__(self, other: Point) -> Point:
        return Point(_add(self._e, other._e))

    def __sub__(self, other: Point) -> Point:
        return Point(_add(self._e, _neg(other._e)))

    def __neg__(self) -> Point:
        return Point(_neg(self._e))

    def __rmul__(self, k: int) -> Point:
        return msm([k], [self])

    __mul__ = __rmul__

    def __repr__(self) -> str:
        return f"Point({self.encode().hex()})"

    def fixed_base(self, window: int = 8) -> Point:
        """Return a copy of this point with a precomputed multiplication table."""
        pt = Point(self._e)
        pt._enc = self._enc
        pt._window = window
        pt._table = _build_table(self._e, window)
        return pt


def _encode(ext) -> bytes:
    X0, Y0, Z0, T0 = ext
    u1 = (Z0 + Y0) * (Z0 - Y0) % P
    u2 = X0 * Y0 % P
    _, invsqrt = _sqrt_ratio_m1(1, u1 * u2 % P * u2)
    den1 = invsqrt * u1 % P
    den2 = invsqrt * u2 % P
    z_inv = den1 * den2 % P * T0 % P
    if _is_negative(T0 * z_inv):
        x = Y0 * _SQRT_M1 % P
        y = X0 * _SQRT_M1 % P
        den_inv = den1 * _INVSQRT_A_MINUS_D % P
    else:
        x, y, den_inv = X0, Y0, den2
    if _is_negative(x * z_inv):
        y = -y
    s = _abs(den_inv * (Z0 - y))
    return int(s).to_bytes(32, "little")


def _elligator(b: bytes):
    t = mpz(int.from_bytes(b, "little") & ((1 << 255) - 1)) % P
    r = _SQRT_M1 * t % P * t % P
    u = (r + 1) * _ONE_MINUS_D_SQ % P
    v = (-1 - r * _D) * (r + _D) % P
    was_square, s = _sqrt_ratio_m1(u, v)
    s_prime = -_abs(s * t) % P
    if not was_square:
        s = s_prime
        c = r
    else:
        c = P - 1
    N = (c * (r - 1) % P * _D_MINUS_ONE_SQ - v) % P
    w0 = 2 * s * v % P
    w1 = N * _SQRT_AD_MINUS_ONE % P
    w2 = (1 - s * s) % P
    w3 = (1 + s * s) % P
    return (w0 * w3 % P, w2 * w1 % P, w1 * w3 % P, w0 * w2 % P)


def _build_table(ext, window: int):
    """rows[j][d-1] = d * 2^(window*j) * point for d in 1..2^(window-1).

    Entries are affine cached operands; scalars are recoded into signed
    digits so negative digits reuse the same entries.
    """
    n_rows = (253 + window - 1) // window + 1
    size = 1 << (window - 1)
    rows = []
    base = ext
    for _ in range(n_rows):
        ext_row = [base]
        cb = _to_cached(base)
        for _ in range(size - 1):
            ext_row.append(_add_cached(ext_row[-1], cb))
        rows.append(_batch_affine(ext_row))
        base = _dbl(ext_row[-1])  # 2^w * base
    return rows


def _batch_affine(pts):
    """Affine cached forms with one shared field inversion."""
    prefix = [mpz(1)]
    for p in pts:
        prefix.append(prefix[-1] * p[2] % P)
    inv = invert(prefix[-1], P)
    out = [None] * len(pts)
    for i in range(len(pts) - 1, -1, -1):
        X, Y, Z, _ = pts[i]
        zi = inv * prefix[i] % P
        inv = inv * Z % P
        x = X * zi % P
        y = Y * zi % P
        out[i] = ((y + x) % P, (y - x) % P, x * y % P * _D2 % P)
    return out


def _wnaf(k: int, w: int = 5) -> list[tuple[int, int]]:
    """Nonzero signed digits of k as (bit position, odd digit) pairs."""
    out = []
    half = 1 << (w - 1)
    full = 1 << w
    pos = 0
    while k:
        tz = (k & -k).bit_length() - 1
        k >>= tz
        pos += tz
        d = k & (full - 1)
        if d >= half:
            d -= full
        out.append((pos, d))
        k = (k - d) >> w
        pos += w
    return out


def msm(scalars: Sequence[int], points: Sequence[Point]) -> Point:
    """Multi-scalar multiplication sum(s_i * P_i).

    Terms whose point has a fixed-base table are accumulated from the
    table; the rest share one Straus doubling chain over signed windows.
    """
    if len(scalars) != len(points):
        raise ValueError("length mismatch")
    acc = _IDENTITY
    adds: dict[int, list] = {}
    subs: dict[int, list] = {}
    top = -1
    for k, pt in zip(scalars, points):
        k = int(k) % Q
        if not k:
            continue
        # k and -k cost the same, so small negative scalars stay cheap
        neg = k > _HALF_Q
        if neg:
            k = Q - k
        table = pt._table
        if table is not None:
            w = pt._window
            full = 1 << w
            half = full >> 1
            mask = full - 1
            add, sub = (_sub_affine, _add_affine) if neg else (_add_affine, _sub_affine)
            j = 0
            while k:
                d = k & mask
                k >>= w
                if d > half:
                    k += 1
                    acc = sub(acc, table[j][full - d - 1])
                elif d:
                    acc = add(acc, table[j][d - 1])
                j += 1
            continue
        if k == 1:
            acc = _add(acc, _neg(pt._e) if neg else pt._e)
            continue
        e = pt._e
        two = _to_cached(_dbl(e))
        odd = [e]
        for _ in range(7):
            odd.append(_add_cached(odd[-1], two))
        cached = [_to_cached(o) for o in odd]
        for pos, d in _wnaf(k):
            if neg:
                d = -d
            if d > 0:
                adds.setdefault(pos, []).append(cached[d >> 1])
            else:
                subs.setdefault(pos, []).append(cached[(-d) >> 1])
            if pos > top:
                top = pos
    if top >= 0:
        r = _IDENTITY
        for i in range(top, -1, -1):
            r = _dbl(r)
            for c in adds.get(i, ()):
                r = _add_cached(r, c)
            for c in subs.get(i, ()):
                r = _sub_cached(r, c)
        acc = _add(acc, r)
    return Point(acc)


def point_sum(points: Iterable[Point]) -> Point:
    acc = _IDENTITY
    for pt in points:
        acc = _add(acc, pt._e)
    return Point(acc)


_BASE = Point.decode(
    bytes.fromhex("e2f2ae0a6abc4e71a884a961c500515f58e30b6aa582dd8db6a65945e08d2d76")
)
