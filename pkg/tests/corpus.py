"""Seeded random gadgets in the circuit text format."""

from __future__ import annotations

import random

from spacetime_ft.circuit import Circuit, parse_circuit
from spacetime_ft.codes import reduce
from spacetime_ft.pauli import PauliOperator, commutes, serialize_pauli

ONE_QUBIT = ("h", "s", "sdg", "x", "y", "z", "i")
TWO_QUBIT = ("cnot", "cz", "swap")


def random_stabilizers(rng: random.Random, n: int) -> list[PauliOperator]:
    """A random independent commuting set on ``n`` qubits."""
    if n == 0:
        return []
    target = rng.randint(0, n)
    gens: list[PauliOperator] = []
    for _ in range(40):
        if len(gens) == target:
            break
        x, z = rng.getrandbits(n), rng.getrandbits(n)
        # Hermitian: i**phase must cancel the i from each XZ = -iY factor
        p = PauliOperator(n, x, z, bin(x & z).count("1") + 2 * rng.randint(0, 1))
        if p.is_identity or not all(commutes(p, g) for g in gens):
            continue
        if reduce(gens + [p])[1] == len(gens) + 1:
            gens.append(p)
    return gens


def random_circuit_text(rng: random.Random, max_n: int = 5, max_blocks: int = 6) -> str:
    n_total = rng.randint(1, max_n)
    a = rng.randint(0, n_total)
    n = n_total - a
    blocks = rng.randint(1, max_blocks)
    prep = {q: (rng.randrange(blocks), rng.choice("ZX")) for q in range(n, n_total)}
    meas = {}
    for q in range(n_total):
        if rng.random() < 0.5:
            lo = prep[q][0] if q in prep else 0
            meas[q] = (rng.randint(lo, blocks - 1), rng.choice("ZX"))
    lines = [f"qubits {n_total}"]
    lines += [f"stab {serialize_pauli(s)}" for s in random_stabilizers(rng, n)]
    for k in range(blocks):
        if k:
            lines.append("tick")
        for q, (b, basis) in sorted(prep.items()):
            if b == k:
                lines.append(f"prep_{basis.lower()} {q}")
        free = []
        for q in range(n_total):
            start = prep[q][0] if q in prep else 0
            stop = meas[q][0] + 1 if q in meas else blocks
            x_event = (q in prep and prep[q] == (k, "X")) or (q in meas and meas[q] == (k, "X"))
            if start <= k < stop and not x_event:
                free.append(q)
        rng.shuffle(free)
        while free:
            if len(free) >= 2 and rng.random() < 0.5:
                g = rng.choice(TWO_QUBIT)
                lines.append(f"{g} {free.pop()} {free.pop()}")
            elif rng.random() < 0.6:
                lines.append(f"{rng.choice(ONE_QUBIT)} {free.pop()}")
            else:
                free.pop()
        for q, (b, basis) in sorted(meas.items()):
            if b == k:
                lines.append(f"meas_{basis.lower()} {q}")
    return "\n".join(lines) + "\n"


def random_circuit(rng: random.Random, max_n: int = 5, max_blocks: int = 6) -> Circuit:
    return parse_circuit(random_circuit_text(rng, max_n, max_blocks))


def corpus(count: int, seed: int, max_n: int = 5, max_blocks: int = 6) -> list[Circuit]:
    rng = random.Random(seed)
    return [random_circuit(rng, max_n, max_blocks) for _ in range(count)]
