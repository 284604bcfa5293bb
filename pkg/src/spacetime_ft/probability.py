"""Residual-error distributions and failure probabilities under iid location noise.

Exhaustive sums run over every fault path with at most ``order`` faults and
report the probability mass they leave out. Monte Carlo sampling draws each
location independently with numpy; shots are split into fixed-size chunks
with seeds spawned from one ``SeedSequence``, so results do not depend on
the number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .faults import (
    BudgetExceeded,
    FaultPath,
    FaultTable,
    NoiseModel,
    SyndromeReport,
    decode,
    fault_table,
    residual_rep,
)
from .pauli import serialize_pauli
from .spacetime import SpacetimeCode

__all__ = [
    "path_probability",
    "residual_distribution",
    "failure_probability",
    "FailureEstimate",
    "ResidualDistribution",
    "CHUNK",
]

CHUNK = 8192


def _location_probs(table: FaultTable, noise: NoiseModel) -> list[list[float]]:
    probs = []
    for loc, alph in zip(table.locations, table.alphabets):
        pr = noise.probabilities(loc, len(alph))
        if len(pr) != len(alph):
            raise ValueError("input distribution does not match the input location alphabet")
        if sum(pr) > 1.0 + 1e-12:
            raise ValueError(f"location {loc.label()} has total fault probability above 1")
        probs.append(pr)
    return probs


class _PathWeights:
    """``Prob(path) = base * prod(ratio[l][a])`` with ``base = prod(1 - total_l)``."""

    def __init__(self, probs: list[list[float]]):
        self.probs = probs
        self.totals = [min(1.0, sum(p)) for p in probs]
        self.zero_free = [t >= 1.0 for t in self.totals]
        self.base = math.prod(1.0 - t for t in self.totals)

    def prob(self, path: FaultPath) -> float:
        faulted = {l for l, _ in path.faults}
        if any(self.zero_free[l] for l in range(len(self.probs)) if l not in faulted):
            return 0.0
        value = 1.0
        for l, t in enumerate(self.totals):
            if l not in faulted:
                value *= 1.0 - t
        for l, a in path.faults:
            value *= self.probs[l][a]
        return value


def path_probability(st: SpacetimeCode, noise: NoiseModel, path: FaultPath) -> float:
    table = fault_table(st, noise)
    return _PathWeights(_location_probs(table, noise)).prob(path)


def _iter_weighted(table: FaultTable, noise: NoiseModel, order: int, budget: int):
    total = table.count_paths(order)
    if total > budget:
        raise BudgetExceeded(f"{total} fault paths exceed the budget of {budget}")
    weights = _PathWeights(_location_probs(table, noise))
    if any(weights.zero_free):
        for path in table.paths(order):
            yield path, weights.prob(path)
        return
    ratios = [
        [p / (1.0 - t) for p in pr] for pr, t in zip(weights.probs, weights.totals)
    ]
    base = weights.base
    for path in table.paths(order):
        v = base
        for l, a in path.faults:
            v *= ratios[l][a]
        yield path, v


@dataclass
class ResidualDistribution:
    syndrome: str
    prob_syndrome: float
    classes: list[dict]
    truncation_mass: float
    order: int

    def to_json(self) -> dict:
        return {
            "syndrome": self.syndrome,
            "prob_syndrome": self.prob_syndrome,
            "classes": self.classes,
            "truncation_mass": self.truncation_mass,
            "order": self.order,
        }


def residual_distribution(
    st: SpacetimeCode,
    noise: NoiseModel,
    s: SyndromeReport | str | int,
    order: int = 2,
    budget: int = 5_000_000,
) -> ResidualDistribution:
    """Conditional distribution of residual classes given an unmasked syndrome.

    Classes are gauge classes of ``Pi_out(L)``; each is shown by a
    minimum-weight representative on the output qubits. An unreachable
    syndrome (at this truncation order) yields an empty class list.
    """
    table = fault_table(st, noise)
    n_u = len(st.unmasked_records)
    if isinstance(s, str):
        s = SyndromeReport.from_bitstring(s)
    elif isinstance(s, int):
        s = SyndromeReport(s, n_u)
    if s.length != n_u:
        raise ValueError(f"syndrome has {s.length} bits, expected {n_u}")
    mass = 0.0
    cond = 0.0
    classes: dict[int, list] = {}
    for path, pr in _iter_weighted(table, noise, order, budget):
        mass += pr
        r, u, _, _ = table.features(path)
        if u != s.bits:
            continue
        cond += pr
        entry = classes.get(r)
        if entry is None:
            classes[r] = [pr, path]
        else:
            entry[0] += pr
    out = []
    for r, (pr, path) in classes.items():
        rep = residual_rep(st, table.out_image(path))
        out.append({
            "class": format(r, "x"),
            "representative": serialize_pauli(rep),
            "probability": pr / cond if cond > 0 else 0.0,
        })
    out.sort(key=lambda e: (-e["probability"], e["class"]))
    return ResidualDistribution(s.bitstring(), cond, out, max(0.0, 1.0 - mass), order)


@dataclass
class FailureEstimate:
    mode: str
    marginal: float
    stderr: float
    per_syndrome: dict[str, dict] = field(default_factory=dict)
    truncation_mass: float = 0.0
    order: int | None = None
    shots: int | None = None
    seed: int | None = None
    undecodable: float = 0.0

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "marginal": self.marginal,
            "stderr": self.stderr,
            "per_syndrome": self.per_syndrome,
            "truncation_mass": self.truncation_mass,
            "order": self.order,
            "shots": self.shots,
            "seed": self.seed,
            "undecodable": self.undecodable,
        }


def _fails(table: FaultTable, st: SpacetimeCode, r: int, u: int, t: int, cap: int) -> tuple[bool, bool]:
    """``(failed, undecodable)`` for a path with features ``r, u, t``."""
    res = decode(u, st, cap, table)
    if res.path is None:
        return True, True
    rk, _, tk, _ = table.features(res.path)
    return (tk == t and rk != r), False


def failure_probability(
    st: SpacetimeCode,
    noise: NoiseModel,
    mode: str = "exhaustive",
    *,
    order: int = 2,
    shots: int = 100_000,
    seed: int | None = None,
    decode_cap: int = 2,
    workers: int = 1,
    budget: int = 5_000_000,
) -> FailureEstimate:
    """Probability that decoding leaves a logical error on ``T_st``.

    A path ``L`` fails when the decoded ``K_s`` for its syndrome has
    ``K_s L`` in ``N(T_st)`` but not in ``G_st``. Syndromes the decoder
    cannot explain within ``decode_cap`` faults count as failures and are
    reported separately.
    """
    table = fault_table(st, noise)
    n_u = len(st.unmasked_records)
    if mode == "exhaustive":
        fail = 0.0
        undec = 0.0
        mass = 0.0
        per: dict[int, list[float]] = {}
        for path, pr in _iter_weighted(table, noise, order, budget):
            mass += pr
            r, u, t, _ = table.features(path)
            bad, und = _fails(table, st, r, u, t, decode_cap)
            slot = per.setdefault(u, [0.0, 0.0])
            slot[0] += pr
            if bad:
                slot[1] += pr
                fail += pr
            if und:
                undec += pr
        per_json = {
            SyndromeReport(u, n_u).bitstring(): {
                "probability": v[0],
                "failure": v[1] / v[0] if v[0] > 0 else 0.0,
            }
            for u, v in sorted(per.items())
        }
        return FailureEstimate(
            "exhaustive", fail, 0.0, per_json, max(0.0, 1.0 - mass), order=order, undecodable=undec
        )
    if mode != "montecarlo":
        raise ValueError(f"unknown mode {mode!r}")
    if shots < 1:
        raise ValueError("shots must be at least 1")
    if seed is None:
        raise ValueError("Monte Carlo sampling needs a seed")
    probs = _location_probs(table, noise)
    sampler = _Sampler(table, probs)
    n_chunks = (shots + CHUNK - 1) // CHUNK
    seqs = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [min(CHUNK, shots - i * CHUNK) for i in range(n_chunks)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(sampler.sample, seqs, sizes))
    else:
        chunks = [sampler.sample(sq, sz) for sq, sz in zip(seqs, sizes)]
    counts: dict[int, list[int]] = {}
    failures = 0
    undec = 0
    for u_arr, r_arr, t_arr in chunks:
        uniq, inv = np.unique(u_arr, return_inverse=True)
        inv = inv.reshape(-1)
        kr = []
        kt = []
        kund = []
        for u in uniq.tolist():
            res = decode(int(u), st, decode_cap, table)
            if res.path is None:
                kr.append(0)
                kt.append(0)
                kund.append(True)
            else:
                rk, _, tk, _ = table.features(res.path)
                kr.append(rk)
                kt.append(tk)
                kund.append(False)
        kr_a = np.array(kr, dtype=r_arr.dtype)[inv]
        kt_a = np.array(kt, dtype=t_arr.dtype)[inv]
        und_a = np.array(kund, dtype=bool)[inv]
        bad = und_a | ((kt_a == t_arr) & (kr_a != r_arr))
        failures += int(bad.sum())
        undec += int(und_a.sum())
        for j, u in enumerate(uniq.tolist()):
            sel = inv == j
            slot = counts.setdefault(int(u), [0, 0])
            slot[0] += int(sel.sum())
            slot[1] += int(bad[sel].sum())
    p_hat = failures / shots
    per_json = {
        SyndromeReport(u, n_u).bitstring(): {
            "probability": v[0] / shots,
            "failure": v[1] / v[0],
            "shots": v[0],
        }
        for u, v in sorted(counts.items())
    }
    return FailureEstimate(
        "montecarlo",
        p_hat,
        math.sqrt(p_hat * (1.0 - p_hat) / shots),
        per_json,
        0.0,
        shots=shots,
        seed=seed,
        undecodable=undec / shots,
    )


class _Sampler:
    def __init__(self, table: FaultTable, probs: list[list[float]]):
        self.cum = [np.cumsum(p) if p else np.zeros(0) for p in probs]
        bits = max(
            [x.bit_length() for row in table.rem + table.usyn + table.tsyn for x in row] + [1]
        )
        self.dtype = np.uint64 if bits <= 64 else object
        conv = (lambda row: np.array(row, dtype=np.uint64)) if self.dtype is np.uint64 else (
            lambda row: np.array(row, dtype=object)
        )
        self.rem = [conv(r) for r in table.rem]
        self.usyn = [conv(r) for r in table.usyn]
        self.tsyn = [conv(r) for r in table.tsyn]

    def sample(self, seq: np.random.SeedSequence, size: int):
        rng = np.random.default_rng(seq)
        u_arr = np.zeros(size, dtype=self.dtype)
        r_arr = np.zeros(size, dtype=self.dtype)
        t_arr = np.zeros(size, dtype=self.dtype)
        if self.dtype is object:
            u_arr[:] = 0
            r_arr[:] = 0
            t_arr[:] = 0
        draws = rng.random((size, len(self.cum)))
        for l, cum in enumerate(self.cum):
            if cum.size == 0:
                continue
            idx = np.searchsorted(cum, draws[:, l], side="right")
            hit = idx < cum.size
            if not hit.any():
                continue
            a = idx[hit]
            u_arr[hit] ^= self.usyn[l][a]
            r_arr[hit] ^= self.rem[l][a]
            t_arr[hit] ^= self.tsyn[l][a]
        return u_arr, r_arr, t_arr
