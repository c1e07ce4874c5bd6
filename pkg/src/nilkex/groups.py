"""Finite platform groups: unitriangular matrices UT(m, q) and the wreath product Z_p wr Z_p.

Both families sit behind :class:`Platform`, which doubles as the platform
descriptor (family, parameters, claimed nilpotency class, claimed non-Engel
degree). Elements are immutable and carry the platform that made them, so
``a * b``, ``a ** k`` and ``a.inverse()`` work without passing the group around.

Canonical byte encodings::

    UT(m, q)   strictly-upper entries, row-major, each big-endian in
               Modulus(q).byte_width bytes
    wreath(p)  v_0 .. v_{p-1}, then the shift, one byte each
    header     family tag (0x01 UT, 0x02 wreath) + params as big-endian u32
"""

from __future__ import annotations

import itertools
import random
import struct
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterator

from sympy import isprime

from .errors import DecodeError, PlatformError, PlatformMismatchError
from .modular import Modulus, Residue

UT_TAG = 0x01
WREATH_TAG = 0x02


class GroupElement:
    """Operator sugar shared by every element type; the arithmetic lives on the platform."""

    group: Platform

    def __mul__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.group.multiply(self, other)

    def __pow__(self, a: int):
        return self.group.power(self, a)

    def inverse(self):
        return self.group.inverse(self)

    def conjugate(self, y):
        """``self ** y`` in the commutator sense: y^-1 * self * y."""
        return y.inverse() * self * y

    def to_bytes(self) -> bytes:
        return self.group.encode(self)

    @property
    def is_identity(self) -> bool:
        return self == self.group.identity()


class Platform(ABC):
    family: str
    tag: int

    @property
    @abstractmethod
    def params(self) -> tuple[int, ...]: ...

    @property
    @abstractmethod
    def claimed_class(self) -> int: ...

    @property
    @abstractmethod
    def claimed_not_engel(self) -> int | None: ...

    @property
    @abstractmethod
    def characteristic(self) -> int:
        """Prime acting on the central key band; private exponents live in [1, characteristic)."""

    @property
    @abstractmethod
    def order(self) -> int: ...

    @property
    @abstractmethod
    def element_size(self) -> int: ...

    @abstractmethod
    def identity(self) -> GroupElement: ...

    @abstractmethod
    def multiply(self, a: GroupElement, b: GroupElement) -> GroupElement: ...

    @abstractmethod
    def inverse(self, a: GroupElement) -> GroupElement: ...

    @abstractmethod
    def random_element(self, rng: random.Random) -> GroupElement: ...

    @abstractmethod
    def elements(self) -> Iterator[GroupElement]: ...

    @abstractmethod
    def encode(self, g: GroupElement) -> bytes: ...

    @abstractmethod
    def decode(self, data: bytes) -> GroupElement: ...

    def check(self, *elements: GroupElement) -> None:
        for g in elements:
            if g.group is not self and g.group != self:
                raise PlatformMismatchError(f"element of {g.group.name} used in {self.name}")

    def power(self, g: GroupElement, a: int) -> GroupElement:
        self.check(g)
        if a < 0:
            g, a = self.inverse(g), -a
        result = self.identity()
        while a:
            if a & 1:
                result = self.multiply(result, g)
            a >>= 1
            if a:
                g = self.multiply(g, g)
        return result

    def header(self) -> bytes:
        return bytes([self.tag]) + b"".join(struct.pack(">I", v) for v in self.params)

    @property
    def name(self) -> str:
        return ":".join([self.family, *map(str, self.params)])

    def __str__(self):
        return self.name


# ---------------------------------------------------------------------------
# UT(m, q)


@dataclass(frozen=True, repr=False)
class UTMatrix(GroupElement):
    group: UnitriangularGroup
    rows: tuple[tuple[int, ...], ...]

    def entry(self, i: int, j: int) -> int:
        """0-based (i, j) entry as a plain integer in [0, q)."""
        return self.rows[i][j]

    def residue(self, i: int, j: int) -> Residue:
        return Residue(self.rows[i][j], self.group.modulus)

    def upper(self) -> tuple[int, ...]:
        m = self.group.m
        return tuple(self.rows[i][j] for i in range(m) for j in range(i + 1, m))

    def __repr__(self):
        terms = [
            f"E{i + 1}{j + 1}({v})" if v != 1 else f"E{i + 1}{j + 1}"
            for (i, j), v in zip(self.group.upper_positions, self.upper())
            if v
        ]
        return f"<{self.group.name} I{''.join('+' + t for t in terms)}>"


@dataclass(frozen=True)
class UnitriangularGroup(Platform):
    """Upper unitriangular m x m matrices over Z_q; nilpotent of class m - 1."""

    m: int
    q: int

    family = "ut"
    tag = UT_TAG

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 2:
            raise PlatformError(f"UT dimension must be >= 2, got {self.m!r}")
        if not isinstance(self.q, int) or self.q < 2 or not isprime(self.q):
            raise PlatformError(f"UT modulus must be prime, got {self.q!r}")
        if self.q >= 2**32:
            raise PlatformError("UT modulus must fit the u32 platform header")

    @property
    def modulus(self) -> Modulus:
        return Modulus(self.q)

    @property
    def params(self):
        return (self.m, self.q)

    @property
    def claimed_class(self):
        return self.m - 1

    @property
    def claimed_not_engel(self):
        # [I+E12, _(m-2) I+E23+...+E(m-1)m] has corner entry +-1
        return self.m - 2 if self.m >= 3 else None

    @property
    def characteristic(self):
        return self.q

    @property
    def upper_positions(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.m) for j in range(i + 1, self.m)]

    @property
    def order(self):
        return self.q ** (self.m * (self.m - 1) // 2)

    @property
    def element_size(self):
        return self.m * (self.m - 1) // 2 * self.modulus.byte_width

    def _from_upper(self, upper) -> UTMatrix:
        m = self.m
        it = iter(upper)
        rows = tuple(
            tuple(1 if j == i else (next(it) if j > i else 0) for j in range(m)) for i in range(m)
        )
        return UTMatrix(self, rows)

    def element(self, rows) -> UTMatrix:
        """Build a validated element from a full m x m array of integers (reduced mod q)."""
        m, q = self.m, self.q
        if len(rows) != m or any(len(r) != m for r in rows):
            raise ValueError(f"expected a {m}x{m} array")
        out = []
        for i, r in enumerate(rows):
            row = tuple(int(v) % q for v in r)
            for j, v in enumerate(row):
                if (j == i and v != 1) or (j < i and v != 0):
                    raise ValueError(f"not unitriangular at ({i}, {j})")
            out.append(row)
        return UTMatrix(self, tuple(out))

    def elementary(self, i: int, j: int, c: int = 1) -> UTMatrix:
        """I + c*E_ij with 1-based indices, i < j."""
        if not 1 <= i < j <= self.m:
            raise ValueError(f"need 1 <= i < j <= {self.m}, got ({i}, {j})")
        rows = [[int(a == b) for b in range(self.m)] for a in range(self.m)]
        rows[i - 1][j - 1] = c % self.q
        return self.element(rows)

    def identity(self):
        return self._from_upper(itertools.repeat(0))

    def multiply(self, a, b):
        self.check(a, b)
        m, q = self.m, self.q
        A, B = a.rows, b.rows
        rows = []
        for i in range(m):
            Ai = A[i]
            row = [0] * m
            row[i] = 1
            for j in range(i + 1, m):
                s = Ai[j] + B[i][j]
                for k in range(i + 1, j):
                    s += Ai[k] * B[k][j]
                row[j] = s % q
            rows.append(tuple(row))
        return UTMatrix(self, tuple(rows))

    def inverse(self, a):
        self.check(a)
        m, q = self.m, self.q
        A = a.rows
        X = [[int(i == j) for j in range(m)] for i in range(m)]
        for j in range(m):
            for i in range(j - 1, -1, -1):
                s = A[i][j]
                for k in range(i + 1, j):
                    s += A[i][k] * X[k][j]
                X[i][j] = -s % q
        return UTMatrix(self, tuple(map(tuple, X)))

    def random_element(self, rng):
        n = self.m * (self.m - 1) // 2
        return self._from_upper(rng.randrange(self.q) for _ in range(n))

    def elements(self):
        n = self.m * (self.m - 1) // 2
        for upper in itertools.product(range(self.q), repeat=n):
            yield self._from_upper(upper)

    def encode(self, g):
        self.check(g)
        w = self.modulus.byte_width
        return b"".join(v.to_bytes(w, "big") for v in g.upper())

    def decode(self, data):
        data = bytes(data)
        if len(data) != self.element_size:
            raise DecodeError(
                f"{self.name} element needs {self.element_size} bytes, got {len(data)}"
            )
        w = self.modulus.byte_width
        upper = [int.from_bytes(data[k : k + w], "big") for k in range(0, len(data), w)]
        for v in upper:
            if v >= self.q:
                raise DecodeError(f"entry {v} out of range for modulus {self.q}")
        return self._from_upper(upper)


# ---------------------------------------------------------------------------
# Z_p wr Z_p


@dataclass(frozen=True, repr=False)
class WreathElement(GroupElement):
    group: WreathGroup
    base: tuple[int, ...]
    top: int

    def __repr__(self):
        return f"<{self.group.name} ({','.join(map(str, self.base))}; {self.top})>"


@dataclass(frozen=True)
class WreathGroup(Platform):
    """Z_p wr Z_p as pairs (v, s) with (v, s)(w, t) = (v + sigma^s w, s + t).

    sigma moves the coordinate at index i to index i + 1 (mod p), i.e.
    (sigma^s w)_i = w_{i-s}. Nilpotent of class p and not (p-1)-Engel.
    """

    p: int

    family = "wreath"
    tag = WREATH_TAG

    def __post_init__(self):
        if not isinstance(self.p, int) or not isprime(self.p):
            raise PlatformError(f"wreath parameter must be prime, got {self.p!r}")
        if self.p >= 256:
            raise PlatformError("wreath parameter must be < 256 (one byte per coordinate)")

    @property
    def params(self):
        return (self.p,)

    @property
    def claimed_class(self):
        return self.p

    @property
    def claimed_not_engel(self):
        return self.p - 1

    @property
    def characteristic(self):
        return self.p

    @property
    def order(self):
        return self.p ** (self.p + 1)

    @property
    def element_size(self):
        return self.p + 1

    def element(self, base, top) -> WreathElement:
        base = tuple(int(v) % self.p for v in base)
        if len(base) != self.p:
            raise ValueError(f"base vector must have length {self.p}")
        return WreathElement(self, base, int(top) % self.p)

    def identity(self):
        return WreathElement(self, (0,) * self.p, 0)

    def multiply(self, a, b):
        self.check(a, b)
        p, s = self.p, a.top
        w = b.base
        base = tuple((a.base[i] + w[(i - s) % p]) % p for i in range(p))
        return WreathElement(self, base, (s + b.top) % p)

    def inverse(self, a):
        self.check(a)
        p, s = self.p, a.top
        base = tuple(-a.base[(i + s) % p] % p for i in range(p))
        return WreathElement(self, base, -s % p)

    def random_element(self, rng):
        p = self.p
        return WreathElement(self, tuple(rng.randrange(p) for _ in range(p)), rng.randrange(p))

    def elements(self):
        p = self.p
        for top in range(p):
            for base in itertools.product(range(p), repeat=p):
                yield WreathElement(self, base, top)

    def encode(self, g):
        self.check(g)
        return bytes(g.base) + bytes([g.top])

    def decode(self, data):
        data = bytes(data)
        if len(data) != self.element_size:
            raise DecodeError(
                f"{self.name} element needs {self.element_size} bytes, got {len(data)}"
            )
        if any(v >= self.p for v in data):
            raise DecodeError(f"coordinate out of range for p = {self.p}")
        return WreathElement(self, tuple(data[:-1]), data[-1])


# ---------------------------------------------------------------------------
# functional surface


def parse_platform(text: str) -> Platform:
    """Parse ``ut:<m>:<q>`` or ``wreath:<p>``."""
    parts = text.strip().lower().split(":")
    try:
        if parts[0] == "ut" and len(parts) == 3:
            return UnitriangularGroup(int(parts[1]), int(parts[2]))
        if parts[0] == "wreath" and len(parts) == 2:
            return WreathGroup(int(parts[1]))
    except ValueError as exc:
        if isinstance(exc, PlatformError):
            raise
        raise PlatformError(f"bad platform string {text!r}") from exc
    raise PlatformError(f"bad platform string {text!r}; expected ut:<m>:<q> or wreath:<p>")


def platform_from_header(data: bytes, offset: int = 0) -> tuple[Platform, int]:
    """Decode a platform header; returns the platform and the offset just past it."""
    if len(data) <= offset:
        raise DecodeError("truncated platform header")
    tag = data[offset]
    nparams = {UT_TAG: 2, WREATH_TAG: 1}.get(tag)
    if nparams is None:
        raise DecodeError(f"unknown platform tag 0x{tag:02x}")
    end = offset + 1 + 4 * nparams
    if len(data) < end:
        raise DecodeError("truncated platform header")
    params = struct.unpack(f">{nparams}I", data[offset + 1 : end])
    try:
        platform = UnitriangularGroup(*params) if tag == UT_TAG else WreathGroup(*params)
    except PlatformError as exc:
        raise DecodeError(f"invalid platform in header: {exc}") from exc
    return platform, end


def group_identity(platform: Platform) -> GroupElement:
    return platform.identity()


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    return a.group.multiply(a, b)


def inverse(a: GroupElement) -> GroupElement:
    return a.group.inverse(a)


def power(g: GroupElement, a: int) -> GroupElement:
    return g.group.power(g, a)


def serialize(g: GroupElement) -> bytes:
    return g.group.encode(g)


def deserialize(data: bytes, platform: Platform) -> GroupElement:
    return platform.decode(data)
