"""Circuit intermediate representation, text format and gadget normal form.

A circuit is a sequence of layers (ticks). Layer ``t`` maps time slice ``t``
to slice ``t + 1``. Preparations happen before the layer of their block and
measurements after it. Qubits ``0..n-1`` carry the input code; prepared
ancillas are ``n..n_total-1``.

Normal form puts every preparation at slice 0 and every measurement at slice
``T`` with an even ``T``. The ticks a qubit spends waiting before its real
preparation or after its real measurement are kept in ``windows`` and carry
no faults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .clifford import CliffordGate, propagate
from .gf2 import Basis, symplectic_vector
from .pauli import PauliOperator, commutes, multiply, parse_pauli, serialize_pauli

__all__ = [
    "CircuitError",
    "Circuit",
    "OutputStabilizer",
    "parse_circuit",
    "serialize_circuit",
    "normalize",
    "output_stabilizer",
    "circuit_to_json",
]

GATE_MNEMONICS = {
    "i": "I",
    "h": "H",
    "s": "PHASE_S",
    "sdg": "PHASE_S_DAG",
    "x": "X",
    "y": "Y",
    "z": "Z",
    "cnot": "CNOT",
    "cx": "CNOT",
    "cz": "CZ",
    "swap": "SWAP",
}
_KIND_TO_MNEMONIC = {v: k for k, v in GATE_MNEMONICS.items() if k != "cx"}


class CircuitError(ValueError):
    """Invalid circuit; ``line`` is the 1-based source line when known."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass(frozen=True)
class Circuit:
    """A Clifford gadget.

    ``preps`` and ``measurements`` are ``(qubit, basis, block)`` triples with
    basis ``"Z"`` or ``"X"``. ``active_ticks`` is the number of ticks before
    parity padding. ``logical_preps`` lists prepared qubits declared as new
    logical qubits of the output code.
    """

    n_total: int
    layers: tuple[tuple[CliffordGate, ...], ...] = ()
    preps: tuple[tuple[int, str, int], ...] = ()
    measurements: tuple[tuple[int, str, int], ...] = ()
    input_stabilizer: tuple[PauliOperator, ...] = ()
    logical_preps: tuple[int, ...] = ()
    normalized: bool = False
    active_ticks: int | None = None
    _lines: dict = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(tuple(layer) for layer in self.layers))
        object.__setattr__(self, "preps", tuple(tuple(p) for p in self.preps))
        object.__setattr__(self, "measurements", tuple(tuple(m) for m in self.measurements))
        object.__setattr__(self, "input_stabilizer", tuple(self.input_stabilizer))
        object.__setattr__(self, "logical_preps", tuple(sorted(self.logical_preps)))
        if self.active_ticks is None:
            object.__setattr__(self, "active_ticks", len(self.layers))
        _validate(self)

    @property
    def T(self) -> int:
        return len(self.layers)

    @property
    def n(self) -> int:
        return self.n_total - len(self.preps)

    @property
    def a(self) -> int:
        return len(self.preps)

    @property
    def b(self) -> int:
        return len(self.measurements)

    @property
    def n_out(self) -> int:
        return self.n_total - len(self.measurements)

    @property
    def prep_qubits(self) -> tuple[int, ...]:
        return tuple(q for q, _, _ in self.preps)

    @property
    def measured_qubits(self) -> tuple[int, ...]:
        return tuple(q for q, _, _ in self.measurements)

    @property
    def output_qubits(self) -> tuple[int, ...]:
        m = set(self.measured_qubits)
        return tuple(q for q in range(self.n_total) if q not in m)

    @property
    def windows(self) -> tuple[tuple[int, int], ...]:
        """Per qubit, the half-open range of ticks in which it is live."""
        start = [0] * self.n_total
        stop = [self.active_ticks] * self.n_total
        for q, _, k in self.preps:
            start[q] = k
        for q, _, k in self.measurements:
            stop[q] = k + 1
        return tuple(zip(start, stop))

    def gate_at(self, q: int, t: int) -> CliffordGate | None:
        for g in self.layers[t]:
            if q in g.qubits:
                return g
        return None

    def live(self, q: int, t: int) -> bool:
        s, e = self.windows[q]
        return s <= t < e

    def gate_count(self, kind: str | None = None) -> int:
        return sum(1 for layer in self.layers for g in layer if kind is None or g.kind == kind)


def _validate(c: Circuit) -> None:
    lines = c._lines or {}

    def fail(msg, key=None):
        raise CircuitError(msg, lines.get(key))

    if c.n_total < 0:
        fail("qubit count must be non-negative")
    T = len(c.layers)
    if not 0 <= c.active_ticks <= T:
        fail("active tick count out of range")
    prepped: dict[int, int] = {}
    for idx, (q, basis, k) in enumerate(c.preps):
        key = ("prep", idx)
        if not 0 <= q < c.n_total:
            fail(f"qubit {q} out of range", key)
        if basis not in ("Z", "X"):
            fail(f"bad preparation basis {basis!r}", key)
        if q in prepped:
            fail(f"qubit {q} prepared twice", key)
        if not 0 <= k < max(T, 1):
            fail(f"preparation block {k} out of range", key)
        prepped[q] = k
    n = c.n_total - len(prepped)
    if set(prepped) != set(range(n, c.n_total)):
        fail(f"prepared qubits must be the last {len(prepped)} qubits ({n}..{c.n_total - 1})")
    measured: dict[int, int] = {}
    for idx, (q, basis, k) in enumerate(c.measurements):
        key = ("meas", idx)
        if not 0 <= q < c.n_total:
            fail(f"qubit {q} out of range", key)
        if basis not in ("Z", "X"):
            fail(f"bad measurement basis {basis!r}", key)
        if q in measured:
            fail(f"qubit {q} measured twice", key)
        if not 0 <= k < max(T, 1):
            fail(f"measurement block {k} out of range", key)
        if q in prepped and prepped[q] > k:
            fail(f"qubit {q} measured before it is prepared", key)
        measured[q] = k
    for q in c.logical_preps:
        if q not in prepped:
            fail(f"logical qubit {q} is not prepared")
    windows = c.windows
    for t, layer in enumerate(c.layers):
        used: set[int] = set()
        for gi, g in enumerate(layer):
            key = ("gate", t, gi)
            for q in g.qubits:
                if q >= c.n_total:
                    fail(f"qubit {q} out of range", key)
                if q in used:
                    fail(f"qubit {q} used twice in tick {t}", key)
                used.add(q)
                s, e = windows[q]
                if t < s:
                    fail(f"gate on qubit {q} before its preparation", key)
                if t >= e:
                    fail(f"gate on qubit {q} after its measurement", key)
        for coll, name in ((c.preps, "prep"), (c.measurements, "meas")):
            for idx, (q, basis, k) in enumerate(coll):
                if basis == "X" and k == t and q in used:
                    fail(f"X-basis {name} of qubit {q} collides with a gate in tick {t}", (name, idx))
    if c.normalized:
        if any(b != "Z" for _, b, _ in c.preps + c.measurements):
            fail("normalized circuit has X-basis preparation or measurement")
        if T % 2:
            fail("normalized circuit has odd T")
    for idx, s in enumerate(c.input_stabilizer):
        if s.n != n:
            fail(f"input stabilizer has {s.n} qubits, expected {n}", ("stab", idx))
    for i, s in enumerate(c.input_stabilizer):
        for s2 in c.input_stabilizer[i + 1:]:
            if not commutes(s, s2):
                fail(f"input stabilizers {s} and {s2} anticommute", ("stab", i))


def normalize(c: Circuit) -> Circuit:
    """Desugar X-basis events into ``H`` and pad ``T`` to even; idempotent."""
    if c.normalized:
        return c
    layers = [list(layer) for layer in c.layers]
    if not layers and (c.preps or c.measurements):
        layers = [[]]
    x_events = [(q, k) for q, basis, k in c.preps + c.measurements if basis == "X"]
    for q, k in x_events:
        # prep_x and meas_x in one block: the two H gates cancel
        if x_events.count((q, k)) == 1:
            layers[k].append(CliffordGate("H", (q,)))
    active = len(layers)
    if len(layers) % 2:
        layers.append([])
    return Circuit(
        c.n_total,
        [sorted(layer, key=lambda g: g.qubits) for layer in layers],
        [(q, "Z", k) for q, _, k in c.preps],
        [(q, "Z", k) for q, _, k in c.measurements],
        c.input_stabilizer,
        c.logical_preps,
        normalized=True,
        active_ticks=active,
    )


def parse_circuit(text: str) -> Circuit:
    """Parse the line format and return the normalized circuit.

    Grammar (one statement per line, ``#`` starts a comment)::

        qubits N
        stab <pauli on the input qubits>
        logical q              # prepared qubit q is a new logical qubit
        tick                   # starts the next block
        h|s|sdg|x|y|z|i q
        cnot|cz|swap a b
        prep_z|prep_x q        # before this block's gates
        meas_z|meas_x q        # after this block's gates
    """
    return normalize(parse_raw(text))


def parse_raw(text: str) -> Circuit:
    n_total = None
    blocks: list[list[CliffordGate]] = []
    preps, meas, stabs, logical = [], [], [], []
    stab_text: list[tuple[str, int]] = []
    lines: dict = {}
    block = -1

    def cur_block():
        nonlocal block
        if block < 0:
            block = 0
            blocks.append([])
        return block

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        op, *args = line.split()
        op = op.lower()
        if op == "qubits":
            if n_total is not None:
                raise CircuitError("duplicate 'qubits' line", lineno)
            if len(args) != 1 or not args[0].isdigit():
                raise CircuitError("expected 'qubits N'", lineno)
            n_total = int(args[0])
            continue
        if n_total is None:
            raise CircuitError("'qubits N' must come first", lineno)
        if op == "stab":
            if len(args) != 1:
                raise CircuitError("expected 'stab <pauli>'", lineno)
            stab_text.append((args[0], lineno))
            continue
        if op == "tick":
            if args:
                raise CircuitError("'tick' takes no arguments", lineno)
            cur_block()
            block += 1
            blocks.append([])
            continue
        try:
            qs = [int(a) for a in args]
        except ValueError:
            raise CircuitError(f"bad qubit index in {line!r}", lineno) from None
        for q in qs:
            if not 0 <= q < n_total:
                raise CircuitError(f"qubit {q} out of range 0..{n_total - 1}", lineno)
        if op == "logical":
            if len(qs) != 1:
                raise CircuitError("expected 'logical q'", lineno)
            logical.append(qs[0])
            continue
        if op in ("prep_z", "prep_x", "meas_z", "meas_x"):
            if len(qs) != 1:
                raise CircuitError(f"{op} takes one qubit", lineno)
            k = cur_block()
            target = preps if op.startswith("prep") else meas
            lines[("prep" if target is preps else "meas", len(target))] = lineno
            target.append((qs[0], op[-1].upper(), k))
            continue
        kind = GATE_MNEMONICS.get(op)
        if kind is None:
            raise CircuitError(f"unknown mnemonic {op!r}", lineno)
        try:
            g = CliffordGate(kind, tuple(qs))
        except ValueError as e:
            raise CircuitError(str(e), lineno) from None
        k = cur_block()
        lines[("gate", k, len(blocks[k]))] = lineno
        blocks[k].append(g)
    if n_total is None:
        raise CircuitError("missing 'qubits N'")
    n = n_total - len(preps)
    for idx, (s, lineno) in enumerate(stab_text):
        try:
            stabs.append(parse_pauli(s, n))
        except ValueError as e:
            raise CircuitError(str(e), lineno) from None
        lines[("stab", idx)] = lineno
    return Circuit(n_total, blocks, preps, meas, stabs, logical, _lines=lines)


def serialize_circuit(c: Circuit) -> str:
    """Text form; parity padding is left implicit so that parsing restores it."""
    out = [f"qubits {c.n_total}"]
    out += [f"stab {serialize_pauli(s)}" for s in c.input_stabilizer]
    out += [f"logical {q}" for q in c.logical_preps]
    blocks = c.active_ticks
    for k in range(blocks):
        if k:
            out.append("tick")
        body = [f"prep_{b.lower()} {q}" for q, b, kk in c.preps if kk == k]
        body += [
            f"{_KIND_TO_MNEMONIC[g.kind]} {' '.join(map(str, g.qubits))}" for g in c.layers[k]
        ]
        body += [f"meas_{b.lower()} {q}" for q, b, kk in c.measurements if kk == k]
        if blocks == 1 and not body:
            body = ["i 0"] if c.n_total else []
        out += body
    return "\n".join(out) + "\n"


def circuit_to_json(c: Circuit) -> dict:
    return {
        "qubits": c.n_total,
        "T": c.T,
        "active_ticks": c.active_ticks,
        "normalized": c.normalized,
        "stab": [serialize_pauli(s) for s in c.input_stabilizer],
        "layers": [[[g.kind, *g.qubits] for g in layer] for layer in c.layers],
        "preps": [list(p) for p in c.preps],
        "measurements": [list(m) for m in c.measurements],
        "logical": list(c.logical_preps),
    }


def circuit_from_json(data: dict | str) -> Circuit:
    if isinstance(data, str):
        data = json.loads(data)
    n_total = int(data["qubits"])
    n = n_total - len(data.get("preps", []))
    return Circuit(
        n_total,
        [[CliffordGate(g[0], tuple(g[1:])) for g in layer] for layer in data.get("layers", [])],
        [tuple(p) for p in data.get("preps", [])],
        [tuple(m) for m in data.get("measurements", [])],
        [parse_pauli(s, n) for s in data.get("stab", [])],
        data.get("logical", []),
        normalized=bool(data.get("normalized", False)),
        active_ticks=data.get("active_ticks"),
    )


@dataclass(frozen=True)
class OutputStabilizer:
    """Input-side group ``S_hat`` and output-side group ``S_hat_prime``.

    ``S_hat`` lives at slice 0: embedded input stabilizers first, then ``Z``
    on each prepared qubit. ``S_hat_prime`` lives at slice ``T``.
    ``adjoined`` and ``pivoted`` list measured qubits whose ``Z`` was added
    as a new generator or replaced an anticommuting one.
    """

    S_hat: tuple[PauliOperator, ...]
    S_hat_prime: tuple[PauliOperator, ...]
    output_code: tuple[PauliOperator, ...]
    adjoined: tuple[int, ...]
    pivoted: tuple[int, ...]
    declared: tuple[int, ...]

    @property
    def rank_in(self) -> int:
        return Basis(symplectic_vector(p) for p in self.S_hat).rank

    @property
    def rank_out(self) -> int:
        return Basis(symplectic_vector(p) for p in self.S_hat_prime).rank


def input_generators(c: Circuit) -> list[PauliOperator]:
    """Generators of ``S_hat`` at slice 0."""
    gens = [s.embed(c.n_total, range(c.n)) for s in c.input_stabilizer]
    gens += [PauliOperator.from_sparse(c.n_total, {q: "Z"}) for q in c.prep_qubits]
    return gens


def output_stabilizer(c: Circuit) -> OutputStabilizer:
    if not c.normalized:
        raise CircuitError("output_stabilizer needs a normalized circuit")
    s_hat = input_generators(c)
    declared = set(c.logical_preps)
    seed = [
        propagate(g, c, 0, c.T)
        for i, g in enumerate(s_hat)
        if i < len(c.input_stabilizer) or c.prep_qubits[i - len(c.input_stabilizer)] not in declared
    ]
    gens = list(seed)
    adjoined, pivoted = [], []
    for q in c.measured_qubits:
        zq = PauliOperator.from_sparse(c.n_total, {q: "Z"})
        if Basis(symplectic_vector(g) for g in gens).contains(symplectic_vector(zq)):
            continue
        anti = [i for i, g in enumerate(gens) if not commutes(g, zq)]
        if anti:
            i0 = anti[0]
            for i in anti[1:]:
                gens[i] = multiply(gens[i], gens[i0])
            gens[i0] = zq
            pivoted.append(q)
        else:
            gens.append(zq)
            adjoined.append(q)
    return OutputStabilizer(
        tuple(s_hat),
        tuple(gens),
        tuple(_restrict_output(c, gens)),
        tuple(adjoined),
        tuple(pivoted),
        tuple(sorted(declared)),
    )


def _restrict_output(c: Circuit, gens: Sequence[PauliOperator]) -> list[PauliOperator]:
    meas = c.measured_qubits
    out_q = c.output_qubits
    basis = Basis()
    result = []
    for g in gens:
        for q in meas:
            if (g.z >> q) & 1:
                g = multiply(g, PauliOperator.from_sparse(c.n_total, {q: "Z"}))
        r = g.restrict(out_q)
        if r.is_identity:
            continue
        if basis.add(symplectic_vector(r)):
            result.append(r)
    return result


def with_input_stabilizer(c: Circuit, stabs: Iterable[PauliOperator]) -> Circuit:
    return replace(c, input_stabilizer=tuple(stabs), _lines=None)
