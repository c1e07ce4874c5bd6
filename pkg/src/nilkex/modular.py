"""Exact residue arithmetic in Z_q."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Modulus:
    q: int

    def __post_init__(self):
        if not isinstance(self.q, int) or self.q < 2:
            raise ValueError(f"modulus must be an integer >= 2, got {self.q!r}")

    @property
    def byte_width(self) -> int:
        # bytes needed for the largest canonical residue q - 1
        return max(1, ((self.q - 1).bit_length() + 7) // 8)

    def __call__(self, value: int) -> Residue:
        return Residue(value % self.q, self)

    def inverse(self, value: int) -> int:
        return pow(value, -1, self.q)


@dataclass(frozen=True)
class Residue:
    """An element of Z_q kept in canonical form 0 <= value < q."""

    value: int
    modulus: Modulus

    def __post_init__(self):
        if not 0 <= self.value < self.modulus.q:
            raise ValueError(f"{self.value} is not a canonical residue mod {self.modulus.q}")

    def _coerce(self, other) -> int:
        if isinstance(other, Residue):
            if other.modulus != self.modulus:
                raise ValueError("residues with different moduli")
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def __add__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return self.modulus(self.value + v)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return self.modulus(self.value - v)

    def __rsub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return self.modulus(v - self.value)

    def __mul__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return self.modulus(self.value * v)

    __rmul__ = __mul__

    def __neg__(self):
        return self.modulus(-self.value)

    def __pow__(self, k: int):
        return Residue(pow(self.value, k, self.modulus.q), self.modulus)

    def inverse(self) -> Residue:
        return Residue(self.modulus.inverse(self.value), self.modulus)

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.modulus.q})"
