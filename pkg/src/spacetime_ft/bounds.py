"""Counting bound on the information needed to locate faults."""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["binary_entropy", "info_bound", "budget_bits", "InfoBound"]


def binary_entropy(x: float) -> float:
    """``h(x) = -x log2 x - (1-x) log2 (1-x)`` with ``h(0) = h(1) = 0``."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x={x} outside [0, 1]")
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")


@dataclass(frozen=True)
class InfoBound:
    T: int
    p: float
    a: int
    faults: int
    exact_log2: float
    entropy_bits: float

    @property
    def gap(self) -> float:
        return self.entropy_bits - self.exact_log2

    def to_json(self) -> dict:
        return {
            "T": self.T,
            "p": self.p,
            "a": self.a,
            "faults": self.faults,
            "exact_log2": self.exact_log2,
            "entropy_bits": self.entropy_bits,
        }


def info_bound(T: int, p: float, a: int) -> InfoBound:
    """Exact ``log2(a**(pT) * C(T, pT))`` next to its entropy estimate ``T (h(p) + p log2 a)``.

    ``pT`` is rounded to the nearest integer (halves round up) for the exact count.
    """
    _check_p(p)
    if T < 0 or a < 1:
        raise ValueError("need T >= 0 and a >= 1")
    m = int(math.floor(p * T + 0.5))
    exact = m * math.log2(a) + (math.lgamma(T + 1) - math.lgamma(m + 1) - math.lgamma(T - m + 1)) / math.log(2)
    entropy = T * (binary_entropy(p) + p * math.log2(a))
    return InfoBound(T, p, a, m, exact, entropy)


def budget_bits(d: int, k: int, m: int, p: float, a: int) -> float:
    """``d (k + m) (h(p) + p log2 a)``: fault information a code block must absorb."""
    _check_p(p)
    return d * (k + m) * (binary_entropy(p) + p * math.log2(a))
