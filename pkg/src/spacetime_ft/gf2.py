"""GF(2) linear algebra on int-packed rows.

Rows are Python ints; bit ``j`` is column ``j``. :class:`Basis` keeps each
row keyed by its lowest set bit, which makes reduction a single upward
sweep and the remainder a canonical coset representative.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .pauli import PauliOperator

__all__ = [
    "Basis",
    "rank",
    "kernel",
    "interleave",
    "deinterleave",
    "symplectic_vector",
    "symplectic_swap",
]


def _low_bit(v: int) -> int:
    return (v & -v).bit_length() - 1


class Basis:
    """Incrementally built row space with combination tracking.

    ``add`` returns ``True`` when the vector was independent. Every stored
    row remembers which inserted vectors (by insertion index) sum to it.
    """

    def __init__(self, vectors: Iterable[int] = ()):
        self.rows: dict[int, int] = {}
        self.combos: dict[int, int] = {}
        self.count = 0
        for v in vectors:
            self.add(v)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, v: int) -> tuple[int, int]:
        """Return ``(remainder, combination)`` with ``v = remainder + sum(combination)``."""
        rows, combos = self.rows, self.combos
        combo = 0
        todo = v
        while todo:
            b = _low_bit(todo)
            row = rows.get(b)
            if row is not None:
                v ^= row
                combo ^= combos[b]
            todo = v >> (b + 1) << (b + 1)
        return v, combo

    def remainder(self, v: int) -> int:
        rows = self.rows
        todo = v
        while todo:
            b = _low_bit(todo)
            row = rows.get(b)
            if row is not None:
                v ^= row
            todo = v >> (b + 1) << (b + 1)
        return v

    def contains(self, v: int) -> bool:
        return self.remainder(v) == 0

    def add(self, v: int) -> bool:
        index = self.count
        self.count += 1
        r, combo = self.reduce(v)
        if r == 0:
            return False
        b = _low_bit(r)
        self.rows[b] = r
        self.combos[b] = combo ^ (1 << index)
        return True

    def dependency(self, v: int) -> int | None:
        """Combination of inserted vectors summing to ``v``, or ``None``."""
        r, combo = self.reduce(v)
        return combo if r == 0 else None


def rank(vectors: Iterable[int]) -> int:
    return Basis(vectors).rank


def kernel(images: Sequence[int]) -> list[int]:
    """Basis of ``{c : sum_i c_i * images[i] == 0}`` as bitmasks over indices."""
    basis = Basis()
    out = []
    for i, v in enumerate(images):
        r, combo = basis.reduce(v)
        if r == 0:
            out.append(combo | (1 << i))
        else:
            b = _low_bit(r)
            basis.rows[b] = r
            basis.combos[b] = combo | (1 << i)
        basis.count += 1
    return out


_SPREAD = [0] * 256
for _b in range(256):
    _s = 0
    for _k in range(8):
        if (_b >> _k) & 1:
            _s |= 1 << (2 * _k)
    _SPREAD[_b] = _s
_SPREAD_BYTES = [s.to_bytes(2, "little") for s in _SPREAD]


def interleave(x: int, z: int) -> int:
    """Bits ``x_j`` at ``2j`` and ``z_j`` at ``2j+1``."""
    return _spread(x) | (_spread(z) << 1)


def _spread(v: int) -> int:
    if v < 256:
        return _SPREAD[v]
    raw = v.to_bytes((v.bit_length() + 7) // 8, "little")
    return int.from_bytes(b"".join(_SPREAD_BYTES[c] for c in raw), "little")


_EVEN_MASK_CACHE: dict[int, int] = {}


def _even_mask(nbits: int) -> int:
    m = _EVEN_MASK_CACHE.get(nbits)
    if m is None:
        m = int("01" * nbits, 2) if nbits else 0
        _EVEN_MASK_CACHE[nbits] = m
    return m


def _squeeze(v: int) -> int:
    out = 0
    shift = 0
    while v:
        chunk = v & 0xFFFF
        b = 0
        for k in range(8):
            if (chunk >> (2 * k)) & 1:
                b |= 1 << k
        out |= b << shift
        shift += 8
        v >>= 16
    return out


def deinterleave(v: int, n: int) -> tuple[int, int]:
    m = _even_mask(n)
    return _squeeze(v & m), _squeeze((v >> 1) & m)


def symplectic_vector(p: PauliOperator) -> int:
    return interleave(p.x, p.z)


def symplectic_swap(v: int, n: int) -> int:
    """Exchange each ``(x_j, z_j)`` pair; ``popcount(a & swap(b))`` is the symplectic form."""
    m = _even_mask(n)
    return ((v & m) << 1) | ((v >> 1) & m)
