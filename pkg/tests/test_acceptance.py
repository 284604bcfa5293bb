"""Acceptance checks, one per criterion.

Run ``python3 tests/test_acceptance.py`` for one PASS/FAIL line per
criterion, or collect with pytest. Criterion 9 is checked literally and is
known to fail; see the detail line and the project notes.
"""

from __future__ import annotations

import itertools
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from corpus import corpus  # noqa: E402
from oracles import GATES, FaultProfile, Span, dense_commutes, direct_verdict, pauli_matrix, sym_inner  # noqa: E402
from spacetime_ft.bounds import info_bound  # noqa: E402
from spacetime_ft.clifford import GATE_TABLE, CliffordGate, conjugate_through_gate  # noqa: E402
from spacetime_ft.faults import (  # noqa: E402
    CONFUSION,
    FaultPath,
    NoiseModel,
    decode,
    fault_path_to_error,
    fault_table,
    pair_verdict,
    syndrome,
    verify_fault_set,
)
from spacetime_ft.fixtures import (  # noqa: E402
    flag_circuit_flagged,
    flag_circuit_plain,
    surface_extraction,
    toy_circuit,
)
from spacetime_ft.pauli import PauliOperator, commutes, multiply  # noqa: E402
from spacetime_ft.probability import failure_probability  # noqa: E402
from spacetime_ft.spacetime import build_spacetime_code, embed_at, spackle  # noqa: E402


def _paulis(n):
    for x in range(2**n):
        for z in range(2**n):
            for ph in range(4):
                yield PauliOperator(n, x, z, ph)


def criterion_1():
    bad = 0
    for n in (1, 2):
        ops = list(_paulis(n))
        mats = {p: pauli_matrix(p) for p in ops}
        for p, q in itertools.product(ops, repeat=2):
            bad += not np.allclose(pauli_matrix(multiply(p, q)), mats[p] @ mats[q])
            bad += commutes(p, q) != dense_commutes(mats[p], mats[q])
        swap = GATES["SWAP"]
        for kind, sem in GATE_TABLE.items():
            if sem.arity != n:
                continue
            for qs in itertools.permutations(range(n)):
                u = GATES[kind] if qs == tuple(range(n)) else swap @ GATES[kind] @ swap
                g = CliffordGate(kind, qs)
                for p in ops:
                    fwd = pauli_matrix(conjugate_through_gate(p, g, "forward"))
                    bwd = pauli_matrix(conjugate_through_gate(p, g, "backward"))
                    bad += not np.allclose(fwd, u @ mats[p] @ u.conj().T)
                    bad += not np.allclose(bwd, u.conj().T @ mats[p] @ u)
    return bad == 0, f"{bad} mismatches over all 1- and 2-qubit products, commutators and conjugations"


def criterion_2():
    checks = fails = 0
    for c in corpus(120, 21, max_n=5, max_blocks=6):
        st = build_spacetime_code(c)
        g = Span(st.base.gauge_generators, st.N)
        for t in range(c.T + 1):
            for q in range(c.n_total):
                for letter in "XYZ":
                    p = PauliOperator.from_sparse(c.n_total, {q: letter})
                    checks += 1
                    fails += not g.contains(multiply(spackle(p, t, c), embed_at(p, t, c)))
    return fails == 0, f"{fails} failures over {checks} (circuit, tick, Pauli) checks on 120 circuits"


def _structure_ok(st):
    b = st.base
    gauge = Span(b.gauge_generators, st.N)
    s_span = Span(b.stabilizer_generators, st.N)
    t_span = Span(b.temporarily_masked_generators, st.N)
    ok = all(t_span.contains(u) for u in b.unmasked_generators)
    ok &= all(s_span.contains(t) for t in b.temporarily_masked_generators)
    ok &= all(gauge.contains(s) for s in b.stabilizer_generators)
    ok &= all(sym_inner(s, g) == 0 for s in b.stabilizer_generators for g in b.gauge_generators)
    return ok


def _distance_order_ok(code, w_max=3):
    def key(kind):
        r = code.distance(kind, w_max)
        return r.value if r.certified else w_max + 1

    return key("unmasked") <= key("temporarily_masked") <= key("full")


def criterion_3():
    fixtures = [toy_circuit(), flag_circuit_plain(), flag_circuit_flagged(), surface_extraction(2)]
    circuits = fixtures + corpus(100, 31)
    bad_struct = bad_dist = 0
    for i, c in enumerate(circuits):
        st = build_spacetime_code(c)
        bad_struct += not _structure_ok(st)
        if i < len(fixtures) + 100:
            bad_dist += not _distance_order_ok(st.base)
    return bad_struct == bad_dist == 0, (
        f"{len(circuits)} circuits; {bad_struct} containment failures, {bad_dist} distance-order failures (w_max=3)"
    )


def _oracle_faults(table, path):
    out = []
    for l, a in path.faults:
        loc = table.locations[l]
        out.append((loc.slice, loc.qubits, table.alphabets[l][a]))
    return out


def criterion_4(count=50):
    discrepancies = pairs = 0
    first = None
    for c in corpus(count, 41, max_n=4, max_blocks=4):
        st = build_spacetime_code(c)
        table = fault_table(st)
        paths = [FaultPath(), *(FaultPath((s,)) for s in table.singles)]
        errs = [fault_path_to_error(p, st) for p in paths]
        profiles = [FaultProfile(c, _oracle_faults(table, p)) for p in paths]
        for i, j in itertools.combinations(range(len(paths)), 2):
            pairs += 1
            got = pair_verdict(errs[i], errs[j], st).kind
            want = direct_verdict(profiles[i], profiles[j])
            if got != want:
                discrepancies += 1
                first = first or (paths[i].describe(table), paths[j].describe(table), got, want)
    detail = f"{discrepancies} discrepancies over {pairs} single-fault pairs on {count} circuits"
    if first:
        detail += f"; first {first}"
    return discrepancies == 0, detail


def criterion_5():
    plain = verify_fault_set(build_spacetime_code(surface_extraction(3, "plain")), 1)
    flagged = verify_fault_set(build_spacetime_code(surface_extraction(3, "flagged")), 1)
    ok = plain.confusions >= 1 and flagged.confusions == 0
    return ok, f"plain L=3: {plain.confusions} confusing pairs; flagged L=3: {flagged.confusions}"


def criterion_6():
    from spacetime_ft.codes import MaskedSubsystemCode, surface_code

    got = []
    for L in (2, 3):
        group = surface_code(L)
        code = MaskedSubsystemCode.stabilizer_code(group.n, group.generators)
        d = code.distance("full", 4)
        got.append((code.n, code.k, d.value if d.certified else None))
    return got == [(8, 2, 2), (18, 2, 3)], f"L=2 -> {got[0]}, L=3 -> {got[1]}"


def criterion_7():
    worst = -math.inf
    for T in (100, 1000):
        for p in (0.01, 0.1):
            b = info_bound(T, p, 15)
            m = round(p * T)
            exact = m * math.log2(15) + math.log2(math.comb(T, m))
            entropy = T * (-(p * math.log2(p) + (1 - p) * math.log2(1 - p)) + p * math.log2(15))
            ok = math.isclose(b.exact_log2, exact) and math.isclose(b.entropy_bits, entropy)
            if not ok:
                return False, f"T={T} p={p} disagrees with direct evaluation"
            worst = max(worst, abs(exact - entropy) - (0.5 * math.log2(T) + 2))
    return worst <= 0, f"largest gap minus allowance: {worst:.3f} bits"


def criterion_8(shots=100_000):
    st = build_spacetime_code(toy_circuit())
    noise = NoiseModel(0.01)
    ex = failure_probability(st, noise, "exhaustive", order=2)
    mc = failure_probability(st, noise, "montecarlo", shots=shots, seed=2024)
    se = math.sqrt(max(ex.marginal * (1 - ex.marginal), 1e-300) / shots)
    diff = abs(mc.marginal - ex.marginal)
    allow = 3 * se + ex.truncation_mass
    return diff <= allow, (
        f"exhaustive {ex.marginal:.6f} (truncation {ex.truncation_mass:.2e}), "
        f"Monte Carlo {mc.marginal:.6f}; |diff| {diff:.2e} vs allowance {allow:.2e}"
    )


def criterion_9():
    st = build_spacetime_code(flag_circuit_flagged())
    table = fault_table(st)
    gauge = Span(st.base.gauge_generators, st.N)
    singles = list(table.singles)
    mismatched = confused = 0
    for single in singles:
        planted = FaultPath((single,))
        res = decode(syndrome(planted, st), st)
        if not res.found:
            mismatched += 1
            continue
        k, l = fault_path_to_error(res.path, st), fault_path_to_error(planted, st)
        if not gauge.contains(multiply(k, l)):
            mismatched += 1
        confused += pair_verdict(k, l, st).kind == CONFUSION
    return mismatched == 0, (
        f"{mismatched} of {len(singles)} planted faults decode to a non-gauge-equivalent path; "
        f"{confused} of those pairs are LogicalConfusion"
    )


def _cli_json(argv):
    import contextlib
    import io

    from spacetime_ft.cli import main

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        rc = main([*argv, "--format", "json"])
    return rc, buf.getvalue()


def criterion_10():
    runs = [
        ("sample", "flag-b", "-p", "0.01", "--shots", "20000", "--seed", "7"),
        ("exhaust", "toy", "-p", "0.01"),
        ("verify", "flag-a", "--max-faults", "2"),
        ("emit-code", "toy"),
    ]
    same = 0
    for argv in runs:
        a, b = _cli_json(argv), _cli_json(argv)
        same += a == b and bool(a[1]) and json.loads(a[1])["command"] == argv[0]
    return same == len(runs), f"{same}/{len(runs)} commands byte-identical across two runs"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("n", range(1, 11))
def test_criterion(n):
    ok, detail = CRITERIA[n - 1]()
    assert ok, detail


def test_criterion_9_has_no_logical_confusion():
    _, detail = criterion_9()
    assert detail.endswith(" 0 of those pairs are LogicalConfusion")


def main() -> int:
    failed = 0
    for n, fn in enumerate(CRITERIA, 1):
        t0 = time.perf_counter()
        ok, detail = fn()
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail} ({time.perf_counter() - t0:.1f} s)", flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
