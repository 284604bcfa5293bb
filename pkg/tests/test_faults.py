import itertools
import math
import random
from pathlib import Path

import pytest

from spacetime_ft.bounds import binary_entropy, budget_bits, info_bound
from spacetime_ft.chain import ChainError, verify_gadget_chain, max_weight
from spacetime_ft.circuit import parse_circuit
from spacetime_ft.clifford import propagate
from spacetime_ft.faults import (
    CONFUSION,
    CORRECTED,
    DEFERRED,
    BudgetExceeded,
    FaultPath,
    NoiseModel,
    SyndromeReport,
    decode,
    enumerate_locations,
    fault_path_to_error,
    fault_table,
    make_path,
    pair_verdict,
    syndrome,
    verdict_from_features,
    verify_fault_set,
)
from spacetime_ft.fixtures import flag_circuit_flagged, flag_circuit_plain, toy_circuit
from spacetime_ft.pauli import PauliOperator, multiply, parse_pauli, weight
from spacetime_ft.probability import failure_probability, path_probability, residual_distribution
from spacetime_ft.spacetime import build_spacetime_code, embed_at, project

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def st_of(c):
    return build_spacetime_code(c)


def find_loc(table, kind, gate=None, tick=None):
    for l, loc in enumerate(table.locations):
        if loc.kind == kind and (gate is None or loc.gate == gate) and (tick is None or loc.tick == tick):
            return l
    raise LookupError


def fault(table, l, letters):
    a = next(i for i, p in enumerate(table.alphabets[l]) if p.letters() == letters)
    return FaultPath(((l, a),))


# -- locations and noise ------------------------------------------------------

def test_location_enumeration_fig2a():
    c = flag_circuit_plain()
    locs = enumerate_locations(c)
    kinds = [l.kind for l in locs]
    assert kinds.count("input") == 4
    assert kinds.count("after_prep") == 1
    assert kinds.count("before_measurement") == 1
    # four CNOTs plus idle data qubits inside their windows
    assert sum(1 for l in locs if l.kind == "after_gate" and len(l.qubits) == 2) == 4
    table = fault_table(st_of(c))
    assert [len(a) for a in table.alphabets if len(a) == 15] == [15] * 4
    assert table.count_paths(2) == sum(1 for _ in table.paths(2))


def test_noise_model():
    loc1 = enumerate_locations(flag_circuit_plain())[-1]
    loc2 = next(l for l in enumerate_locations(flag_circuit_plain()) if len(l.qubits) == 2)
    assert NoiseModel(0.03).probabilities(loc1, 3) == pytest.approx([0.01] * 3)
    assert sum(NoiseModel(0.03).probabilities(loc2, 15)) == pytest.approx(0.03)
    assert sum(NoiseModel(0.03, convention="depolarizing").probabilities(loc1, 3)) == pytest.approx(0.03)
    assert sum(NoiseModel(0.03, convention="depolarizing").probabilities(loc2, 15)) == pytest.approx(0.0375)
    inp = enumerate_locations(flag_circuit_plain())[0]
    assert NoiseModel(0.03, p_input=0.0).probabilities(inp, 3) == [0.0] * 3
    with pytest.raises(ValueError):
        NoiseModel(1.5)
    with pytest.raises(ValueError):
        NoiseModel(0.1, convention="biased")


# -- errors, projections, syndromes ------------------------------------------

def test_fault_path_to_error_examples():
    st = st_of(flag_circuit_plain())
    table = fault_table(st)
    assert fault_path_to_error(FaultPath(), st).is_identity
    l = find_loc(table, "after_gate", "CNOT 1 4")
    k = fault_path_to_error(fault(table, l, "IZ"), st)
    assert k.letters().count("Z") == 1 and k.letter(st.index(4, 2)) == "Z"
    assert project(k, st.circuit, "out").letters() == "IIZZZ"
    z = parse_pauli("IZ")
    merged = make_path([(l, z), (l, z)], table)
    assert merged == FaultPath()
    with pytest.raises(ValueError):
        fault_path_to_error(FaultPath(((len(table.locations), 0),)), st)


def test_project_final_slice_is_identity_map():
    c = toy_circuit()
    st = st_of(c)
    p = parse_pauli("XIZIY")
    assert project(embed_at(p, c.T, c), c, "out") == p
    k = embed_at(p, 1, c)
    assert project(k, c, "out") == propagate(p, c, 1, c.T)
    assert project(k, c, "in") == propagate(p, c, 1, 0)


def test_flag_fires_for_hook_fault():
    st = st_of(flag_circuit_flagged())
    table = fault_table(st)
    flag_bit = next(j for j, r in enumerate(st.unmasked_records) if r.out_image.letters() == "IIIIIZ")
    l = find_loc(table, "after_gate", "CNOT 1 4")
    s = syndrome(fault(table, l, "IZ"), st)
    assert (s.bits >> flag_bit) & 1
    assert syndrome(FaultPath(), st).bits == 0


def test_syndrome_linearity_and_operator_form():
    st = st_of(flag_circuit_flagged())
    table = fault_table(st)
    rng = random.Random(4)
    singles = list(table.singles)
    for _ in range(200):
        a, b = sorted(rng.sample(singles, 2))
        if a[0] == b[0]:
            continue
        pa, pb, pab = FaultPath((a,)), FaultPath((b,)), FaultPath((a, b))
        assert syndrome(pab, st).bits == syndrome(pa, st).bits ^ syndrome(pb, st).bits
        assert syndrome(fault_path_to_error(pab, st), st) == syndrome(pab, st)


def test_syndrome_bitstring_round_trip():
    s = SyndromeReport.from_bitstring("0110")
    assert (s.bits, s.length, s.bitstring()) == (0b0110, 4, "0110")
    with pytest.raises(ValueError):
        SyndromeReport.from_bitstring("01a")


# -- verdicts -----------------------------------------------------------------

def test_pair_verdict_examples():
    c = flag_circuit_plain()
    st = st_of(c)
    k = embed_at(PauliOperator.from_sparse(5, {0: "X"}), 0, c)
    assert pair_verdict(k, k, st).kind == CORRECTED
    after = embed_at(propagate(PauliOperator.from_sparse(5, {0: "X"}), c, 0, 1), 1, c)
    assert pair_verdict(k, after, st).kind == CORRECTED
    with pytest.raises(ValueError):
        pair_verdict(k, PauliOperator.identity(3), st)


def test_pair_verdict_agrees_with_feature_verdicts():
    st = st_of(flag_circuit_flagged(()))
    table = fault_table(st)
    rng = random.Random(6)
    singles = [FaultPath(()), *(FaultPath((s,)) for s in table.singles)]
    seen = set()
    for _ in range(400):
        a, b = rng.sample(singles, 2)
        v = pair_verdict(fault_path_to_error(a, st), fault_path_to_error(b, st), st)
        assert v.kind == verdict_from_features(table.features(a), table.features(b))
        if v.kind == CONFUSION:
            assert st.base.is_logical(v.witness, "temporarily_masked")
        seen.add(v.kind)
    assert seen == {CORRECTED, DEFERRED, CONFUSION}


def brute_counts(st, max_faults):
    table = fault_table(st)
    feats = [table.features(p) for p in table.paths(max_faults)]
    out = {CORRECTED: 0, DEFERRED: 0, CONFUSION: 0}
    for a, b in itertools.combinations(feats, 2):
        out[verdict_from_features(a, b)] += 1
    return out


@pytest.mark.parametrize("make", [flag_circuit_plain, flag_circuit_flagged, toy_circuit])
def test_verify_counts_match_pair_scan(make):
    st = st_of(make())
    r = verify_fault_set(st, 1)
    b = brute_counts(st, 1)
    assert (r.corrected, r.deferred, r.confusions) == (b[CORRECTED], b[DEFERRED], b[CONFUSION])
    if r.confusions:
        wa, wb = r.witness
        table = fault_table(st)
        assert verdict_from_features(table.features(wa), table.features(wb)) == CONFUSION


def test_verify_examples():
    assert verify_fault_set(st_of(flag_circuit_flagged()), 1).confusions == 0
    assert verify_fault_set(st_of(flag_circuit_plain()), 1).confusions == 0
    idle = st_of(parse_circuit("qubits 1\nstab Z\ni 0\ntick\ni 0\n"))
    r = verify_fault_set(idle, 1)
    assert r.confusions == 0 and r.deferred > 0
    assert verify_fault_set(st_of(toy_circuit()), 1).confusions > 0


def test_verify_two_faults_and_d_u_crosscheck():
    st = st_of(flag_circuit_plain())
    r = verify_fault_set(st, 2, d_u_max_weight=3)
    assert r.paths == fault_table(st).count_paths(2)
    assert r.corrected + r.deferred + r.confusions == r.pairs == r.paths * (r.paths - 1) // 2
    assert r.d_U is not None
    with pytest.raises(BudgetExceeded):
        verify_fault_set(st, 2, budget=10)


# -- decoding -----------------------------------------------------------------

def brute_decode(table, target, cap):
    best = None
    for path in table.paths(cap):
        if table.features(path)[1] == target:
            key = (len(path), path.faults)
            if best is None or key < best[0]:
                best = (key, path)
    return None if best is None else best[1]


@pytest.mark.parametrize("make", [flag_circuit_flagged, toy_circuit])
def test_decode_is_minimal_and_exact(make):
    st = st_of(make())
    table = fault_table(st)
    n_u = len(st.unmasked_records)
    for bits in range(2**n_u):
        res = decode(SyndromeReport(bits, n_u), st, 2)
        expect = brute_decode(table, bits, 2)
        assert res.path == expect
        if res.found:
            assert syndrome(res.path, st).bits == bits
    assert decode(0, st).path == FaultPath()


def test_decode_not_found():
    st = st_of(parse_circuit("qubits 2\nprep_z 1\nprep_z 0\nmeas_z 0\nmeas_z 1\n"))
    assert len(st.unmasked_records) == 2
    assert not decode(SyndromeReport(0b11, 2), st, cap=1).found
    assert decode(SyndromeReport(0b11, 2), st, cap=2).found


def test_decode_round_trip_has_no_logical_confusion():
    st = st_of(flag_circuit_flagged())
    table = fault_table(st)
    for l, a in table.singles:
        planted = FaultPath(((l, a),))
        res = decode(syndrome(planted, st), st)
        assert res.found
        assert verdict_from_features(table.features(planted), table.features(res.path)) != CONFUSION


# -- probabilities ------------------------------------------------------------

def test_zero_noise():
    st = st_of(toy_circuit())
    noise = NoiseModel(0.0)
    d = residual_distribution(st, noise, "")
    assert d.prob_syndrome == pytest.approx(1.0)
    assert d.classes[0]["probability"] == 1.0 and d.classes[0]["representative"] == "+IIII"
    f = failure_probability(st, noise, "exhaustive")
    assert f.marginal == 0.0 and f.truncation_mass == pytest.approx(0.0)


def test_residual_distribution_matches_enumeration():
    st = st_of(flag_circuit_flagged())
    noise = NoiseModel(0.001)
    table = fault_table(st)
    n_u = len(st.unmasked_records)
    total = 0.0
    for bits in range(2**n_u):
        d = residual_distribution(st, noise, SyndromeReport(bits, n_u), order=1)
        total += d.prob_syndrome
        expect = {}
        for path in table.paths(1):
            r, u, _, _ = table.features(path)
            if u == bits:
                expect[r] = expect.get(r, 0.0) + path_probability(st, noise, path)
        norm = sum(expect.values())
        assert d.prob_syndrome == pytest.approx(norm, rel=1e-12, abs=1e-300)
        got = {int(e["class"], 16): e["probability"] for e in d.classes}
        assert got.keys() == expect.keys()
        for r, pr in expect.items():
            assert got[r] == pytest.approx(pr / norm)
        if d.classes:
            assert sum(e["probability"] for e in d.classes) == pytest.approx(1.0)
    assert total == pytest.approx(1.0 - d.truncation_mass)
    with pytest.raises(ValueError):
        residual_distribution(st, noise, "0")


def test_path_probability_formula():
    st = st_of(toy_circuit())
    table = fault_table(st)
    p = 0.01
    noise = NoiseModel(p)
    idle = math.prod(1 - p for _ in table.locations)
    assert path_probability(st, noise, FaultPath()) == pytest.approx(idle)
    one = FaultPath(((0, 1),))
    assert path_probability(st, noise, one) == pytest.approx(idle / (1 - p) * p / 3)


def test_exhaustive_failure_against_direct_sum():
    st = st_of(toy_circuit())
    noise = NoiseModel(0.02)
    table = fault_table(st)
    expect = 0.0
    for path in table.paths(1):
        res = decode(syndrome(path, st), st)
        k = fault_path_to_error(res.path, st)
        l_err = fault_path_to_error(path, st)
        if pair_verdict(k, l_err, st).kind == CONFUSION:
            expect += path_probability(st, noise, path)
    got = failure_probability(st, noise, "exhaustive", order=1)
    assert got.marginal == pytest.approx(expect)
    assert sum(v["probability"] for v in got.per_syndrome.values()) == pytest.approx(1 - got.truncation_mass)


def test_monte_carlo_determinism_and_validation():
    st = st_of(flag_circuit_flagged())
    noise = NoiseModel(0.01)
    a = failure_probability(st, noise, "montecarlo", shots=20000, seed=5)
    b = failure_probability(st, noise, "montecarlo", shots=20000, seed=5, workers=4)
    assert a.to_json() == b.to_json()
    c = failure_probability(st, noise, "montecarlo", shots=20000, seed=6)
    assert c.to_json() != a.to_json()
    with pytest.raises(ValueError):
        failure_probability(st, noise, "montecarlo", shots=0, seed=1)
    with pytest.raises(ValueError):
        failure_probability(st, noise, "montecarlo", shots=10)
    with pytest.raises(ValueError):
        failure_probability(st, noise, "bogus")


def test_input_distribution_replaces_input_locations():
    st = st_of(toy_circuit())
    dist = ((parse_pauli("III"), 0.9), (parse_pauli("XII"), 0.1))
    noise = NoiseModel(0.0, input_distribution=dist)
    d = residual_distribution(st, noise, "", order=1)
    probs = {e["class"]: e["probability"] for e in d.classes}
    assert sum(probs.values()) == pytest.approx(1.0)
    assert probs["0"] == pytest.approx(0.9)
    assert sorted(probs.values())[-2] == pytest.approx(0.1)


# -- counting bound -----------------------------------------------------------

def test_binary_entropy():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == binary_entropy(1.0) == 0.0
    assert binary_entropy(0.11) == pytest.approx(binary_entropy(0.89))
    with pytest.raises(ValueError):
        binary_entropy(1.5)


def test_info_bound_values():
    b = info_bound(1000, 0.01, 15)
    assert b.entropy_bits == pytest.approx(119.862, abs=1e-3)
    small = info_bound(100, 0.01, 15)
    assert small.exact_log2 == pytest.approx(10.550, abs=1e-3)
    assert small.entropy_bits == pytest.approx(100 * (binary_entropy(0.01) + 0.01 * math.log2(15)))
    direct = math.log2(15 * math.comb(100, 1))
    assert small.exact_log2 == pytest.approx(direct)
    for T in (100, 1000):
        for p in (0.01, 0.1):
            r = info_bound(T, p, 15)
            assert abs(r.gap) <= 0.5 * math.log2(T) + 2
            m = round(p * T)
            assert r.exact_log2 == pytest.approx(m * math.log2(15) + math.log2(math.comb(T, m)))
    assert budget_bits(3, 1, 1, 0.5, 1) == pytest.approx(6.0)
    with pytest.raises(ValueError):
        info_bound(10, -0.1, 3)


# -- gadget chains ------------------------------------------------------------

def _ec():
    return parse_circuit((SAMPLES / "ec_four_qubit.circuit").read_text())


def test_chain_identity_gadgets():
    idle = parse_circuit("qubits 1\nstab Z\ni 0\ntick\ni 0\n")
    r = verify_gadget_chain([idle, idle], [max_weight(0), max_weight(0)], 0)
    assert r.closed and not r.violations


def test_chain_flagged_closed_plain_violates():
    def acceptable(ctx):
        # low weight, or announced by the flag (qubit 5)
        return weight(ctx.residual) <= 1 or ctx.flips.get(5, 0) == 1

    good = verify_gadget_chain([flag_circuit_flagged(), _ec()], [acceptable, None], [1, 0])
    assert good.closed
    bad = verify_gadget_chain([flag_circuit_plain(), _ec()], [acceptable, None], [1, 0])
    assert not bad.closed
    v = bad.violations[0]
    assert v["kind"] == "closure" and weight(parse_pauli(v["residual"])) == 2
    first = verify_gadget_chain([flag_circuit_plain(), _ec()], [acceptable, None], [1, 0], stop_at_first=True)
    assert len(first.violations) == 1


def test_chain_distinguishability_violation():
    # input code is empty, so no output-code syndrome separates X from I
    idle = parse_circuit("qubits 1\ni 0\ntick\ni 0\n")
    r = verify_gadget_chain([idle], [max_weight(1)], 1)
    assert not r.closed and r.violations[0]["kind"] == "distinguishability"


def test_chain_code_mismatch():
    with pytest.raises(ChainError):
        verify_gadget_chain([flag_circuit_plain(), toy_circuit()])
    with pytest.raises(ChainError):
        verify_gadget_chain([flag_circuit_plain(), flag_circuit_plain(("ZZZZ",))])
