"""Composition checks for a chain of gadgets.

Each gadget receives a set of residual errors from its predecessor, adds up
to ``max_new_faults`` fresh faults, and hands on the residuals it accepts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .circuit import Circuit
from .clifford import propagate
from .faults import FaultPath, SyndromeReport, fault_table, residual_rep
from .gf2 import Basis, symplectic_swap, symplectic_vector
from .pauli import PauliOperator, multiply, popcount, serialize_pauli, weight
from .spacetime import SpacetimeCode, build_spacetime_code

__all__ = ["ChainError", "ResidualContext", "verify_gadget_chain", "max_weight"]


class ChainError(ValueError):
    """Consecutive gadgets disagree on the code they share."""


@dataclass(frozen=True)
class ResidualContext:
    """What an acceptability predicate gets to see.

    ``flips`` maps each measured qubit to whether its outcome is flipped
    relative to the fault-free reference frame.
    """

    residual: PauliOperator
    syndrome: SyndromeReport
    flips: dict[int, int]
    gadget: int


Acceptable = Callable[[ResidualContext], bool]


def max_weight(w: int) -> Acceptable:
    """Accept residuals whose minimum-weight representative has weight at most ``w``."""
    return lambda ctx: weight(ctx.residual) <= w


@dataclass
class ChainReport:
    closed: bool
    violations: list[dict] = field(default_factory=list)
    gadgets: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"closed": self.closed, "violations": self.violations, "gadgets": self.gadgets}


def _span(gens: Sequence[PauliOperator]) -> Basis:
    return Basis(symplectic_vector(g.phaseless()) for g in gens)


def _same_group(a: Sequence[PauliOperator], b: Sequence[PauliOperator]) -> bool:
    ba, bb = _span(a), _span(b)
    return ba.rank == bb.rank and all(ba.contains(symplectic_vector(g)) for g in b)


def verify_gadget_chain(
    gadgets: Sequence[Circuit | SpacetimeCode],
    acceptable: Sequence[Acceptable | None] | None = None,
    max_new_faults: int | Sequence[int] = 1,
    initial_errors: Sequence[PauliOperator] | None = None,
    stop_at_first: bool = False,
) -> ChainReport:
    """Check closure and distinguishability of acceptable residuals along a chain.

    For gadget ``g``, every incoming residual combined with every path of at
    most ``max_new_faults`` new faults (input locations excluded) must give
    an acceptable residual. Among acceptable outcomes with the same unmasked
    syndrome, residuals must agree up to the output code or differ in their
    output-code syndrome. Only acceptable residuals move on.
    """
    sts = [g if isinstance(g, SpacetimeCode) else build_spacetime_code(g) for g in gadgets]
    if acceptable is None:
        acceptable = [None] * len(sts)
    if isinstance(max_new_faults, int):
        max_new_faults = [max_new_faults] * len(sts)
    if len(acceptable) != len(sts) or len(max_new_faults) != len(sts):
        raise ValueError("one acceptable predicate and fault budget per gadget")
    for i in range(len(sts) - 1):
        a, b = sts[i], sts[i + 1]
        if a.circuit.n_out != b.circuit.n:
            raise ChainError(f"gadget {i} outputs {a.circuit.n_out} qubits, gadget {i + 1} takes {b.circuit.n}")
        if not _same_group(a.output.output_code, b.circuit.input_stabilizer):
            raise ChainError(f"output code of gadget {i} differs from input code of gadget {i + 1}")

    report = ChainReport(True)
    first_n = sts[0].circuit.n if sts else 0
    errors = list(initial_errors) if initial_errors is not None else [PauliOperator.identity(first_n)]
    for gi, (st, ok, m) in enumerate(zip(sts, acceptable, max_new_faults)):
        c = st.circuit
        table = fault_table(st)
        new_locs = [l for l, loc in enumerate(table.locations) if loc.kind != "input"]
        out_gens = list(st.output.output_code)
        out_basis = _span(out_gens)
        out_checks = [symplectic_swap(symplectic_vector(g), c.n_out) for g in out_gens]
        n_u = len(st.unmasked_records)
        seen: dict[int, dict[int, tuple[int, PauliOperator, list]]] = {}
        accepted: dict[int, PauliOperator] = {}
        combos = 0
        violations_here = 0
        for e in errors:
            if e.n != c.n:
                raise ChainError(f"input error on {e.n} qubits, gadget {gi} takes {c.n}")
            e_out = propagate(e.embed(c.n_total, range(c.n)), c, 0, c.T).phaseless()
            _, eu, _, _ = st.out_features(e_out)
            for w in range(m + 1):
                for locs in itertools.combinations(new_locs, w):
                    for choice in itertools.product(*(range(len(table.alphabets[l])) for l in locs)):
                        path = FaultPath(tuple(zip(locs, choice)))
                        combos += 1
                        img = multiply(e_out, table.out_image(path)).phaseless()
                        _, u, _, _ = st.out_features(img)
                        syn = SyndromeReport(u, n_u)
                        flips = {q: (img.x >> q) & 1 for q in c.measured_qubits}
                        res = residual_rep(st, img)
                        ctx = ResidualContext(res, syn, flips, gi)
                        where = {
                            "gadget": gi,
                            "input_error": serialize_pauli(e),
                            "faults": path.describe(table),
                            "residual": serialize_pauli(res),
                            "syndrome": syn.bitstring(),
                        }
                        if ok is not None and not ok(ctx):
                            report.closed = False
                            violations_here += 1
                            report.violations.append({"kind": "closure", **where})
                            if stop_at_first:
                                return report
                            continue
                        rv = symplectic_vector(res)
                        cls = out_basis.remainder(rv)
                        qsyn = 0
                        for j, chk in enumerate(out_checks):
                            if popcount(rv & chk) & 1:
                                qsyn |= 1 << j
                        bucket = seen.setdefault(u, {})
                        clash = next(
                            (v for k, v in bucket.items() if k != cls and v[0] == qsyn), None
                        )
                        if clash is not None:
                            report.closed = False
                            violations_here += 1
                            report.violations.append({
                                "kind": "distinguishability",
                                **where,
                                "other_residual": serialize_pauli(clash[1]),
                                "other_faults": clash[2],
                            })
                            if stop_at_first:
                                return report
                        bucket.setdefault(cls, (qsyn, res, where["faults"]))
                        accepted.setdefault(cls, res)
        report.gadgets.append({
            "gadget": gi,
            "inputs": len(errors),
            "combinations": combos,
            "accepted_classes": len(accepted),
            "violations": violations_here,
        })
        errors = [accepted[k] for k in sorted(accepted)]
    return report
