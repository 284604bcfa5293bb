"""Built-in circuits: the weight-4 parity-check gadgets, the toy gadget, and
one round of surface-code syndrome extraction.

Every fixture is generated as circuit text and parsed, so fixtures also
exercise the parser.
"""

from __future__ import annotations

from typing import Sequence

from .circuit import Circuit, parse_circuit
from .codes import rotated_surface_checks, surface_code
from .pauli import PauliOperator, serialize_pauli

__all__ = [
    "flag_circuit_plain",
    "flag_circuit_flagged",
    "toy_circuit",
    "surface_extraction",
    "surface_extraction_text",
    "FIXTURES",
    "FLAG_INPUT_CODE",
    "fixture",
]


def _stab_lines(stabs: Sequence[PauliOperator | str]) -> list[str]:
    return [f"stab {s if isinstance(s, str) else serialize_pauli(s)}" for s in stabs]


FLAG_PLAIN_TEXT = """\
qubits 5
# data 0-3, ancilla 4; measures ZZZZ on the data
prep_z 4
cnot 0 4
tick
cnot 1 4
tick
cnot 2 4
tick
cnot 3 4
meas_z 4
"""

FLAG_FLAGGED_TEXT = """\
qubits 6
# data 0-3, ancilla 4, flag 5 prepared in |+> and measured in X
prep_z 4
prep_x 5
cnot 0 4
tick
cnot 5 4
tick
cnot 1 4
tick
cnot 2 4
tick
cnot 5 4
tick
cnot 3 4
meas_z 4
meas_x 5
"""

TOY_TEXT = """\
qubits 5
# data 0-2, ancillas 3 and 4 prepared in |0>
prep_z 3
prep_z 4
cnot 0 1
cnot 2 3
h 4
tick
cnot 4 2
cnot 1 3
meas_z 3
"""


# Default input code for the weight-4 check gadgets: a four-qubit stabilizer
# state containing the measured ZZZZ, so that no residual is a logical.
FLAG_INPUT_CODE = ("ZZZZ", "XXII", "IXXI", "IIXX")


def _with_stabs(text: str, stabs) -> Circuit:
    if not stabs:
        return parse_circuit(text)
    head, rest = text.split("\n", 1)
    return parse_circuit("\n".join([head, *_stab_lines(stabs), rest]))


def flag_circuit_plain(stabs: Sequence[PauliOperator | str] | None = None) -> Circuit:
    """Plain ancilla measurement of ``ZZZZ``; pass ``stabs=()`` for an empty input code."""
    return _with_stabs(FLAG_PLAIN_TEXT, FLAG_INPUT_CODE if stabs is None else stabs)


def flag_circuit_flagged(stabs: Sequence[PauliOperator | str] | None = None) -> Circuit:
    """Flagged measurement of ``ZZZZ``: flag in ``|+>`` coupled twice to the ancilla."""
    return _with_stabs(FLAG_FLAGGED_TEXT, FLAG_INPUT_CODE if stabs is None else stabs)


def toy_circuit(stabs: Sequence[PauliOperator | str] = ()) -> Circuit:
    """The three-data-qubit toy gadget; the input code defaults to no stabilizers."""
    return _with_stabs(TOY_TEXT, stabs)


def _toric_checks(L: int) -> list[tuple[str, list[int | None]]]:
    # positions: bottom, left, right, top edge of a face / matching star edges
    def h(x, y):
        return (y % L) * L + (x % L)

    def v(x, y):
        return L * L + (y % L) * L + (x % L)

    checks = []
    for y in range(L):
        for x in range(L):
            checks.append(("X", [h(x, y), v(x, y), v(x + 1, y), h(x, y + 1)]))
    for y in range(L):
        for x in range(L):
            checks.append(("Z", [v(x, y - 1), h(x - 1, y), h(x, y), v(x, y)]))
    return checks


def _rotated_checks(L: int) -> list[tuple[str, list[int | None]]]:
    out = []
    for kind, qs in rotated_surface_checks(L):
        if len(qs) == 4:
            out.append((kind, list(qs)))
            continue
        # weight-2 boundary check: keep the corner slots it actually has
        r0, c0 = divmod(qs[0], L)
        r1, _ = divmod(qs[1], L)
        if r0 == r1:  # horizontal pair: top or bottom row of the plaquette
            out.append((kind, [None, None, qs[0], qs[1]] if r0 == 0 else [qs[0], qs[1], None, None]))
        else:
            out.append((kind, [None, qs[0], None, qs[1]] if c0 == 0 else [qs[0], None, qs[1], None]))
    return out


def surface_extraction_text(L: int, style: str = "plain", layout: str = "rotated") -> str:
    """One round of syndrome extraction, X checks first, then Z checks.

    Each check's four slots are visited in a fixed order, so at every step
    all checks of one type touch distinct data qubits. In ``flagged`` style
    every weight-4 check gets a flag qubit coupled to its ancilla after the
    first and before the last data CNOT.
    """
    if L not in (2, 3):
        raise ValueError("surface_extraction supports L in {2, 3}")
    if style not in ("plain", "flagged"):
        raise ValueError(f"unknown style {style!r}")
    if layout == "rotated":
        checks = _rotated_checks(L)
        n_data = L * L
        stabs = [
            PauliOperator.from_sparse(n_data, {q: k for q in qs}) for k, qs in rotated_surface_checks(L)
        ]
    elif layout == "toric":
        checks = _toric_checks(L)
        n_data = 2 * L * L
        stabs = list(surface_code(L).generators)
    else:
        raise ValueError(f"unknown layout {layout!r}")

    blocks: dict[int, list[str]] = {}

    def emit(b: int, line: str) -> None:
        blocks.setdefault(b, []).append(line)

    next_q = n_data
    x_len = 6 if style == "plain" else 8
    for kind, slots in checks:
        anc = next_q
        next_q += 1
        flag = None
        if style == "flagged" and all(s is not None for s in slots):
            flag = next_q
            next_q += 1
        if kind == "X":
            base = 0
            if flag is None:
                steps = {1: slots[0], 2: slots[1], 3: slots[2], 4: slots[3]}
                last = 5
            else:
                steps = {1: slots[0], 3: slots[1], 4: slots[2], 6: slots[3]}
                emit(base + 0, f"prep_z {flag}")
                emit(base + 2, f"cnot {anc} {flag}")
                emit(base + 5, f"cnot {anc} {flag}")
                last = 7
                emit(base + last, f"meas_z {flag}")
            if style == "flagged" and flag is None:
                steps = {1: slots[0], 3: slots[1], 4: slots[2], 6: slots[3]}
                last = 7
            emit(base, f"prep_x {anc}")
            for b, q in steps.items():
                if q is not None:
                    emit(base + b, f"cnot {anc} {q}")
            emit(base + last, f"meas_x {anc}")
        else:
            base = x_len
            if flag is None:
                steps = {0: slots[0], 1: slots[1], 2: slots[2], 3: slots[3]}
                last = 3
            else:
                steps = {0: slots[0], 2: slots[1], 3: slots[2], 5: slots[3]}
                emit(base + 0, f"prep_x {flag}")
                emit(base + 1, f"cnot {flag} {anc}")
                emit(base + 4, f"cnot {flag} {anc}")
                last = 5
                emit(base + last, f"meas_x {flag}")
            if style == "flagged" and flag is None:
                steps = {0: slots[0], 2: slots[1], 3: slots[2], 5: slots[3]}
                last = 5
            emit(base, f"prep_z {anc}")
            for b, q in steps.items():
                if q is not None:
                    emit(base + b, f"cnot {q} {anc}")
            emit(base + last, f"meas_z {anc}")
    out = [f"qubits {next_q}", *_stab_lines(stabs)]
    for b in range(max(blocks) + 1):
        if b:
            out.append("tick")
        out.extend(blocks.get(b, []))
    return "\n".join(out) + "\n"


def surface_extraction(L: int, style: str = "plain", layout: str = "rotated") -> Circuit:
    return parse_circuit(surface_extraction_text(L, style, layout))


FIXTURES = {
    "flag-a": flag_circuit_plain,
    "flag-b": flag_circuit_flagged,
    "toy": toy_circuit,
}


def fixture(name: str, L: int = 3, style: str = "plain", layout: str = "rotated") -> Circuit:
    if name == "surface":
        return surface_extraction(L, style, layout)
    try:
        return FIXTURES[name]()
    except KeyError:
        raise ValueError(f"unknown fixture {name!r}") from None
