"""Conjugation of Pauli operators through Clifford gates and gate layers.

Gate semantics are plain data: for each gate kind, the images ``U X_k U^dag``
and ``U Z_k U^dag`` of every operand ``k`` as Pauli strings on the gate's
support. Adding a gate means adding a table row.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

from .pauli import DimensionError, PauliOperator, multiply, parse_pauli

__all__ = [
    "GATE_TABLE",
    "GateSemantics",
    "CliffordGate",
    "conjugate_through_gate",
    "conjugate_through_layer",
    "propagate",
]

Direction = Literal["forward", "backward"]


@dataclass(frozen=True)
class GateSemantics:
    """Images of ``X_k`` and ``Z_k`` for each operand ``k``."""

    arity: int
    x_images: tuple[PauliOperator, ...]
    z_images: tuple[PauliOperator, ...]
    inverse: str


def _sem(arity: int, xs: Sequence[str], zs: Sequence[str], inverse: str) -> GateSemantics:
    return GateSemantics(
        arity,
        tuple(parse_pauli(s, arity) for s in xs),
        tuple(parse_pauli(s, arity) for s in zs),
        inverse,
    )


GATE_TABLE: dict[str, GateSemantics] = {
    "I": _sem(1, ["X"], ["Z"], "I"),
    "X": _sem(1, ["X"], ["-Z"], "X"),
    "Y": _sem(1, ["-X"], ["-Z"], "Y"),
    "Z": _sem(1, ["-X"], ["Z"], "Z"),
    "H": _sem(1, ["Z"], ["X"], "H"),
    "PHASE_S": _sem(1, ["Y"], ["Z"], "PHASE_S_DAG"),
    "PHASE_S_DAG": _sem(1, ["-Y"], ["Z"], "PHASE_S"),
    "CNOT": _sem(2, ["XX", "IX"], ["ZI", "ZZ"], "CNOT"),
    "CZ": _sem(2, ["XZ", "ZX"], ["ZI", "IZ"], "CZ"),
    "SWAP": _sem(2, ["IX", "XI"], ["IZ", "ZI"], "SWAP"),
}


@dataclass(frozen=True)
class CliffordGate:
    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        sem = GATE_TABLE.get(self.kind)
        if sem is None:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != sem.arity:
            raise ValueError(f"{self.kind} takes {sem.arity} operand(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.kind} operands must be distinct: {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError("negative qubit index")

    @property
    def semantics(self) -> GateSemantics:
        return GATE_TABLE[self.kind]

    @property
    def inverse(self) -> CliffordGate:
        return CliffordGate(self.semantics.inverse, self.qubits)

    def __str__(self) -> str:
        return f"{self.kind} {' '.join(map(str, self.qubits))}"


def conjugate_through_gate(
    p: PauliOperator, gate: CliffordGate, direction: Direction = "forward"
) -> PauliOperator:
    """``U p U^dag`` (forward) or ``U^dag p U`` (backward)."""
    if direction == "backward":
        gate = gate.inverse
    elif direction != "forward":
        raise ValueError(f"direction must be 'forward' or 'backward', not {direction!r}")
    qs = gate.qubits
    if max(qs) >= p.n:
        raise DimensionError(f"gate {gate} outside a {p.n}-qubit register")
    sem = gate.semantics
    mask = 0
    for q in qs:
        mask |= 1 << q
    # Off-support part keeps its bits; the on-support factors are rebuilt in
    # the canonical order X_q Z_q per operand (operands commute with each
    # other, and X_q**a Z_q**b is exactly the stored order).
    out = PauliOperator(p.n, p.x & ~mask, p.z & ~mask, p.phase)
    for k, q in enumerate(qs):
        if (p.x >> q) & 1:
            out = multiply(out, sem.x_images[k].embed(p.n, qs))
        if (p.z >> q) & 1:
            out = multiply(out, sem.z_images[k].embed(p.n, qs))
    return out


def conjugate_through_layer(
    p: PauliOperator, layer: Iterable[CliffordGate], direction: Direction = "forward"
) -> PauliOperator:
    # Gates within a layer have disjoint supports, so order is irrelevant.
    support = p.x | p.z
    for g in layer:
        if any((support >> q) & 1 for q in g.qubits):
            p = conjugate_through_gate(p, g, direction)
    return p


def propagate(p: PauliOperator, circuit, t_from: int, t_to: int) -> PauliOperator:
    """Propagate ``p`` from time slice ``t_from`` to ``t_to`` through ``circuit``.

    Layer ``t`` acts between slices ``t`` and ``t + 1``. Backward
    propagation undoes layers in reverse.
    """
    T = len(circuit.layers)
    if not (0 <= t_from <= T and 0 <= t_to <= T):
        raise ValueError(f"tick out of range 0..{T}: {t_from} -> {t_to}")
    if p.n != circuit.n_total:
        raise DimensionError(f"operator on {p.n} qubits, circuit has {circuit.n_total}")
    if t_to >= t_from:
        for t in range(t_from, t_to):
            p = conjugate_through_layer(p, circuit.layers[t], "forward")
    else:
        for t in range(t_from - 1, t_to - 1, -1):
            p = conjugate_through_layer(p, circuit.layers[t], "backward")
    return p
