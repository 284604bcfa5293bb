"""Pauli operators in binary symplectic form with an exact phase.

An operator is stored as ``i**phase * prod_j X_j**x_j Z_j**z_j`` where the
bit vectors ``x`` and ``z`` are packed into Python ints, bit ``j`` belonging
to qubit ``j``. Qubit 0 is the leftmost character of the string form.

With this convention a product only needs one popcount to fix the phase:
moving ``Z**z1`` past ``X**x2`` costs a factor ``(-1)**|z1 & x2|``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping

__all__ = [
    "DimensionError",
    "PauliParseError",
    "PauliOperator",
    "multiply",
    "commutes",
    "weight",
    "parse_pauli",
    "serialize_pauli",
    "popcount",
]


class DimensionError(ValueError):
    """Operands act on a different number of qubits or out-of-range indices."""


class PauliParseError(ValueError):
    """Malformed Pauli string; ``position`` is the offending character index."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at index {position})")
        self.position = position


def popcount(v: int) -> int:
    return bin(v).count("1")


_SIGNS = {"": 0, "+": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}
_SIGN_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_SIGN_RE = re.compile(r"^(\+i|-i|\+|-|i)?")


@dataclass(frozen=True)
class PauliOperator:
    """An ``n``-qubit Pauli ``i**phase * X**x Z**z`` (immutable)."""

    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise DimensionError("qubit count must be non-negative")
        limit = 1 << self.n
        if self.x < 0 or self.z < 0 or self.x >= limit or self.z >= limit:
            raise DimensionError(f"bit vector wider than n={self.n}")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> PauliOperator:
        return cls(n)

    @classmethod
    def from_sparse(cls, n: int, paulis: Mapping[int, str], phase: int = 0) -> PauliOperator:
        """Build from ``{qubit: 'X'|'Y'|'Z'|'I'}``.

        ``Y`` is taken as the Hermitian matrix, so each one contributes a
        factor of ``i`` relative to ``XZ``.
        """
        x = z = 0
        ys = 0
        for q, c in paulis.items():
            if not 0 <= q < n:
                raise DimensionError(f"qubit {q} out of range for n={n}")
            c = c.upper()
            if c in "XY":
                x |= 1 << q
            if c in "ZY":
                z |= 1 << q
            if c == "Y":
                ys += 1
            elif c not in "XZI":
                raise ValueError(f"unknown Pauli {c!r}")
        return cls(n, x, z, phase + ys)

    @property
    def support(self) -> int:
        return self.x | self.z

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def sign_exponent(self) -> int:
        """Exponent of ``i`` in front of the Hermitian-letter string form."""
        return (self.phase - popcount(self.x & self.z)) % 4

    @property
    def is_hermitian(self) -> bool:
        return self.sign_exponent % 2 == 0

    def letter(self, q: int) -> str:
        return "IXZY"[((self.x >> q) & 1) | (((self.z >> q) & 1) << 1)]

    def letters(self) -> str:
        return "".join(self.letter(q) for q in range(self.n))

    def qubits(self) -> list[int]:
        s, out, q = self.support, [], 0
        while s:
            if s & 1:
                out.append(q)
            s >>= 1
            q += 1
        return out

    def phaseless(self) -> PauliOperator:
        """The Hermitian representative with ``+`` sign."""
        return PauliOperator(self.n, self.x, self.z, popcount(self.x & self.z))

    def same_up_to_phase(self, other: PauliOperator) -> bool:
        return self.n == other.n and self.x == other.x and self.z == other.z

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        return multiply(self, other)

    def __neg__(self) -> PauliOperator:
        return PauliOperator(self.n, self.x, self.z, self.phase + 2)

    def inverse(self) -> PauliOperator:
        # P * P = i**(2*phase) * (-1)**|x&z|, so divide that out.
        return PauliOperator(self.n, self.x, self.z, -self.phase - 2 * popcount(self.x & self.z))

    def restrict(self, qubits: Iterable[int]) -> PauliOperator:
        """Keep only ``qubits`` (in the given order); sign is preserved."""
        qubits = list(qubits)
        x = z = 0
        ys = 0
        for k, q in enumerate(qubits):
            if (self.x >> q) & 1:
                x |= 1 << k
            if (self.z >> q) & 1:
                z |= 1 << k
            if (self.x >> q) & (self.z >> q) & 1:
                ys += 1
        return PauliOperator(len(qubits), x, z, self.sign_exponent + ys)

    def embed(self, n: int, qubits: Iterable[int]) -> PauliOperator:
        """Place local qubit ``k`` on qubit ``qubits[k]`` of an ``n``-qubit register."""
        x = z = 0
        for k, q in enumerate(qubits):
            if not 0 <= q < n:
                raise DimensionError(f"qubit {q} out of range for n={n}")
            if (self.x >> k) & 1:
                x |= 1 << q
            if (self.z >> k) & 1:
                z |= 1 << q
        return PauliOperator(n, x, z, self.phase)

    def __str__(self) -> str:
        return serialize_pauli(self)


def _check_dims(p: PauliOperator, q: PauliOperator) -> None:
    if p.n != q.n:
        raise DimensionError(f"qubit counts differ: {p.n} vs {q.n}")


def multiply(p: PauliOperator, q: PauliOperator) -> PauliOperator:
    """Operator product ``p * q`` with exact phase."""
    _check_dims(p, q)
    return PauliOperator(
        p.n, p.x ^ q.x, p.z ^ q.z, p.phase + q.phase + 2 * popcount(p.z & q.x)
    )


def commutes(p: PauliOperator, q: PauliOperator) -> bool:
    _check_dims(p, q)
    return (popcount(p.x & q.z) + popcount(p.z & q.x)) % 2 == 0


def weight(p: PauliOperator) -> int:
    return popcount(p.x | p.z)


def parse_pauli(text: str, n: int | None = None) -> PauliOperator:
    """Parse ``[+|-|+i|-i]`` followed by letters from ``IXYZ``.

    ``n`` is optional; when given, the letter count must match.
    """
    m = _SIGN_RE.match(text)
    sign_text = m.group(0) if m else ""
    body = text[len(sign_text):]
    if sign_text == "i" and not body:
        raise PauliParseError("missing operator letters", len(text))
    sign = _SIGNS[sign_text]
    if n is not None and len(body) != n:
        pos = len(sign_text) + min(len(body), n)
        raise PauliParseError(f"expected {n} letters, got {len(body)}", pos)
    x = z = 0
    ys = 0
    for k, c in enumerate(body):
        if c == "X":
            x |= 1 << k
        elif c == "Z":
            z |= 1 << k
        elif c == "Y":
            x |= 1 << k
            z |= 1 << k
            ys += 1
        elif c != "I":
            raise PauliParseError(f"bad character {c!r}", len(sign_text) + k)
    return PauliOperator(len(body), x, z, sign + ys)


def serialize_pauli(p: PauliOperator) -> str:
    return _SIGN_TEXT[p.sign_exponent] + p.letters()
