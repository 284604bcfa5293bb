"""Fault paths, correctability verdicts, decoding and residual errors.

Every quantity used here is linear in the fault path once the path is
propagated to the output slice: the remainder of ``Pi_out(K)`` modulo
``<Pi(S_hat), Z_measured>`` (zero iff ``K`` is in ``G_st``) and the
syndromes against the ``U_st``, ``T_st`` and ``S_st`` generators. So each
single fault is processed once and paths are handled by XOR.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .circuit import Circuit
from .clifford import propagate
from .pauli import PauliOperator, multiply, weight
from .spacetime import SpacetimeCode, embed_at, project

__all__ = [
    "FaultLocation",
    "FaultPath",
    "NoiseModel",
    "FaultTable",
    "SyndromeReport",
    "Verdict",
    "FaultSetReport",
    "BudgetExceeded",
    "fault_table",
    "enumerate_locations",
    "local_alphabet",
    "fault_path_to_error",
    "syndrome",
    "pair_verdict",
    "verify_fault_set",
    "decode",
]

CORRECTED = "CorrectedNow"
DEFERRED = "DeferredDistinct"
CONFUSION = "LogicalConfusion"


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed its configured budget."""


def local_alphabet(k: int) -> list[PauliOperator]:
    """All non-identity ``k``-qubit Paulis, lexicographic with ``I < X < Y < Z``."""
    out = []
    for letters in itertools.product("IXYZ", repeat=k):
        if set(letters) == {"I"}:
            continue
        out.append(PauliOperator.from_sparse(k, dict(enumerate(letters))).phaseless())
    return out


@dataclass(frozen=True)
class FaultLocation:
    """A place where faults can occur.

    ``kind`` is ``input``, ``after_prep``, ``after_gate`` or
    ``before_measurement``; ``slice`` is where the fault sits in spacetime.
    An ``input`` location spanning several qubits stands for an explicit
    input-error distribution.
    """

    kind: str
    qubits: tuple[int, ...]
    slice: int
    tick: int | None = None
    gate: str | None = None

    def label(self) -> str:
        qs = ",".join(map(str, self.qubits))
        if self.kind == "after_gate":
            return f"after_gate({self.gate}@{self.tick})"
        return f"{self.kind}({qs})"


def enumerate_locations(c: Circuit) -> list[FaultLocation]:
    """Locations in canonical order: inputs, preparations, gates by tick, measurements.

    Idle qubits inside their live window get an identity-gate location;
    ticks outside the window (waiting added by normalization) get none.
    """
    locs = [FaultLocation("input", (q,), 0) for q in range(c.n)]
    windows = c.windows
    for q, _, _ in sorted(c.preps):
        locs.append(FaultLocation("after_prep", (q,), windows[q][0]))
    for t, layer in enumerate(c.layers):
        entries = []
        busy = set()
        for g in layer:
            busy.update(g.qubits)
            entries.append((min(g.qubits), FaultLocation("after_gate", g.qubits, t + 1, t, str(g))))
        for q in range(c.n_total):
            if q not in busy and c.live(q, t):
                entries.append((q, FaultLocation("after_gate", (q,), t + 1, t, f"I {q}")))
        locs.extend(loc for _, loc in sorted(entries, key=lambda e: e[0]))
    for q in c.measured_qubits:
        locs.append(FaultLocation("before_measurement", (q,), c.T))
    return locs


@dataclass(frozen=True)
class NoiseModel:
    """IID location noise.

    ``uniform``: each location fails with total probability ``p`` spread
    evenly over its nontrivial Paulis. ``depolarizing``: the location is
    replaced by a uniformly random Pauli (identity included) with
    probability ``4p/3``. Input locations use ``p_input`` (default ``p``) or
    an explicit ``input_distribution`` of ``(Pauli on the input qubits,
    probability)`` pairs.
    """

    p: float
    p_input: float | None = None
    convention: str = "uniform"
    input_distribution: tuple[tuple[PauliOperator, float], ...] | None = None

    def __post_init__(self):
        for v in (self.p, self.p_input):
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"probability {v} outside [0, 1]")
        if self.convention not in ("uniform", "depolarizing"):
            raise ValueError(f"unknown noise convention {self.convention!r}")
        if self.input_distribution is not None:
            object.__setattr__(self, "input_distribution", tuple(self.input_distribution))

    def probabilities(self, loc: FaultLocation, alphabet_size: int) -> list[float]:
        if loc.kind == "input" and self.input_distribution is not None:
            return [pr for p, pr in self.input_distribution if not p.is_identity]
        p = self.p_input if (loc.kind == "input" and self.p_input is not None) else self.p
        k = len(loc.qubits)
        if self.convention == "depolarizing":
            each = (4.0 * p / 3.0) / (4**k)
        else:
            each = p / alphabet_size
        return [each] * alphabet_size


@dataclass(frozen=True)
class FaultPath:
    """Faults as sorted ``(location index, alphabet index)`` pairs."""

    faults: tuple[tuple[int, int], ...] = ()

    def __len__(self) -> int:
        return len(self.faults)

    def describe(self, table: FaultTable) -> list[str]:
        return [f"{table.locations[l].label()}:{table.alphabets[l][a].letters()}" for l, a in self.faults]


@dataclass(frozen=True)
class SyndromeReport:
    bits: int
    length: int

    def bitstring(self) -> str:
        return "".join("1" if (self.bits >> j) & 1 else "0" for j in range(self.length))

    @classmethod
    def from_bitstring(cls, s: str) -> SyndromeReport:
        s = s.strip()
        if s and set(s) - {"0", "1"}:
            raise ValueError(f"bad syndrome bitstring {s!r}")
        return cls(sum(1 << j for j, ch in enumerate(s) if ch == "1"), len(s))


@dataclass
class FaultTable:
    """Per-single-fault linear features for one spacetime code."""

    st: SpacetimeCode
    locations: list[FaultLocation]
    alphabets: list[list[PauliOperator]]
    out_images: list[list[PauliOperator]]
    rem: list[list[int]]
    usyn: list[list[int]]
    tsyn: list[list[int]]
    ssyn: list[list[int]]
    _decode_cache: dict = field(default_factory=dict, repr=False)
    _by_usyn: dict | None = field(default=None, repr=False)

    @property
    def singles(self) -> Iterator[tuple[int, int]]:
        for l, alph in enumerate(self.alphabets):
            for a in range(len(alph)):
                yield l, a

    @property
    def n_singles(self) -> int:
        return sum(len(a) for a in self.alphabets)

    def features(self, path: FaultPath) -> tuple[int, int, int, int]:
        r = u = t = s = 0
        for l, a in path.faults:
            r ^= self.rem[l][a]
            u ^= self.usyn[l][a]
            t ^= self.tsyn[l][a]
            s ^= self.ssyn[l][a]
        return r, u, t, s

    def out_image(self, path: FaultPath) -> PauliOperator:
        acc = PauliOperator.identity(self.st.n_total)
        for l, a in path.faults:
            acc = multiply(acc, self.out_images[l][a])
        return acc.phaseless()

    def local_error(self, l: int, a: int) -> PauliOperator:
        loc = self.locations[l]
        return self.alphabets[l][a].embed(self.st.n_total, loc.qubits)

    def paths(self, max_faults: int) -> Iterator[FaultPath]:
        """All paths with at most ``max_faults`` faulty locations, by size then lexicographically."""
        yield FaultPath()
        nl = len(self.locations)
        for w in range(1, max_faults + 1):
            for locs in itertools.combinations(range(nl), w):
                for choice in itertools.product(*(range(len(self.alphabets[l])) for l in locs)):
                    yield FaultPath(tuple(zip(locs, choice)))

    def count_paths(self, max_faults: int) -> int:
        # elementary symmetric polynomials of the alphabet sizes
        e = [1] + [0] * max_faults
        for alph in self.alphabets:
            m = len(alph)
            for w in range(max_faults, 0, -1):
                e[w] += e[w - 1] * m
        return sum(e)


def fault_table(st: SpacetimeCode, noise: NoiseModel | None = None) -> FaultTable:
    """Build (and cache on ``st``) the single-fault feature table."""
    key = ("fault_table", noise.input_distribution if noise is not None else None)
    cached = st._cache.get(key)
    if cached is not None:
        return cached
    c = st.circuit
    locations = enumerate_locations(c)
    if noise is not None and noise.input_distribution is not None:
        rest = [loc for loc in locations if loc.kind != "input"]
        locations = ([FaultLocation("input", tuple(range(c.n)), 0)] if c.n else []) + rest
    alphabets, outs, rems, us, ts, ss = [], [], [], [], [], []
    for loc in locations:
        if loc.kind == "input" and len(loc.qubits) == c.n and noise is not None and noise.input_distribution is not None:
            alph = [p.phaseless() for p, _ in noise.input_distribution if not p.is_identity]
        else:
            alph = local_alphabet(len(loc.qubits))
        row_out, row_r, row_u, row_t, row_s = [], [], [], [], []
        for p in alph:
            full = p.embed(c.n_total, loc.qubits)
            img = propagate(full, c, loc.slice, c.T).phaseless()
            r, u, t, s = st.out_features(img)
            row_out.append(img)
            row_r.append(r)
            row_u.append(u)
            row_t.append(t)
            row_s.append(s)
        alphabets.append(alph)
        outs.append(row_out)
        rems.append(row_r)
        us.append(row_u)
        ts.append(row_t)
        ss.append(row_s)
    table = FaultTable(st, locations, alphabets, outs, rems, us, ts, ss)
    st._cache[key] = table
    return table


def fault_path_to_error(fp: FaultPath, st: SpacetimeCode, table: FaultTable | None = None) -> PauliOperator:
    """The spacetime Pauli of a fault path (faults placed on their slices)."""
    table = table or fault_table(st)
    acc = PauliOperator.identity(st.N)
    for l, a in fp.faults:
        if not 0 <= l < len(table.locations) or not 0 <= a < len(table.alphabets[l]):
            raise ValueError(f"invalid fault ({l}, {a})")
        loc = table.locations[l]
        acc = multiply(acc, embed_at(table.local_error(l, a), loc.slice, st.circuit))
    return acc


def make_path(faults: Iterable[tuple[int, PauliOperator]], table: FaultTable) -> FaultPath:
    """Build a path from ``(location index, local Pauli)`` pairs, merging repeats."""
    merged: dict[int, PauliOperator] = {}
    for l, p in faults:
        merged[l] = multiply(merged[l], p).phaseless() if l in merged else p.phaseless()
    out = []
    for l in sorted(merged):
        p = merged[l]
        if p.is_identity:
            continue
        idx = next(i for i, q in enumerate(table.alphabets[l]) if q.same_up_to_phase(p))
        out.append((l, idx))
    return FaultPath(tuple(out))


def syndrome(fp: FaultPath | PauliOperator, st: SpacetimeCode) -> SyndromeReport:
    """Unmasked syndrome: one bit per ``U_st`` generator."""
    n_u = len(st.unmasked_records)
    if isinstance(fp, FaultPath):
        _, u, _, _ = fault_table(st).features(fp)
    else:
        _, u, _, _ = st.out_features(project(fp, st.circuit, "out"))
    return SyndromeReport(u, n_u)


@dataclass(frozen=True)
class Verdict:
    kind: str
    witness: PauliOperator | None = None

    def __str__(self) -> str:
        return self.kind


def verdict_from_features(fk, fl) -> str:
    rk, uk, tk = fk[:3]
    rl, ul, tl = fl[:3]
    if uk != ul or rk == rl:
        return CORRECTED
    if tk != tl:
        return DEFERRED
    return CONFUSION


def pair_verdict(K: PauliOperator, L: PauliOperator, st: SpacetimeCode) -> Verdict:
    """Classify a pair of spacetime errors by the correctability theorem.

    ``CorrectedNow`` when ``KL`` is outside ``N(U_st)`` or inside ``G_st``;
    otherwise ``DeferredDistinct`` when ``KL`` is outside ``N(T_st)``;
    otherwise ``LogicalConfusion`` with ``KL`` as witness.
    """
    if K.n != L.n or K.n != st.N:
        raise ValueError("operators must live on the spacetime register")
    kl = multiply(K, L)
    r, u, t, _ = st.out_features(project(kl, st.circuit, "out"))
    if u != 0 or r == 0:
        return Verdict(CORRECTED)
    if t != 0:
        return Verdict(DEFERRED)
    return Verdict(CONFUSION, kl.phaseless())


@dataclass
class FaultSetReport:
    max_faults: int
    paths: int
    pairs: int
    corrected: int
    deferred: int
    confusions: int
    witness: tuple[FaultPath, FaultPath] | None
    witness_text: list[list[str]] | None = None
    d_U: object = None
    guaranteed_faults: int | None = None
    consistent: bool | None = None

    def to_json(self) -> dict:
        return {
            "max_faults": self.max_faults,
            "paths": self.paths,
            "pairs": self.pairs,
            "corrected": self.corrected,
            "deferred": self.deferred,
            "confusion_count": self.confusions,
            "confusions": [] if self.witness_text is None else [
                {"K": self.witness_text[0], "L": self.witness_text[1]}
            ],
            "d_U": self.d_U,
            "guaranteed_faults": self.guaranteed_faults,
            "consistent_with_d_U": self.consistent,
        }


def verify_fault_set(
    st: SpacetimeCode,
    max_faults: int = 1,
    *,
    budget: int = 5_000_000,
    d_u_max_weight: int | None = None,
) -> FaultSetReport:
    """Pairwise verdicts over every fault path with at most ``max_faults`` faults.

    Paths are grouped by (U-syndrome, T-syndrome); inside a group, pairs
    with different gauge classes are confusions. The reported witness is
    the lexicographically first confusing pair in path enumeration order.
    """
    if max_faults < 0:
        raise ValueError("max_faults must be non-negative")
    table = fault_table(st)
    total = table.count_paths(max_faults)
    if total > budget:
        raise BudgetExceeded(f"{total} fault paths exceed the budget of {budget}")
    cells: dict[tuple[int, int], dict] = {}
    ugroups: dict[int, int] = {}
    first: dict[tuple[int, int], tuple[int, int]] = {}  # cell -> (index, rem) of first path
    witness_idx: tuple[int, int] | None = None
    paths_list: list[FaultPath] = []
    keep_paths = total <= 200_000
    for idx, path in enumerate(table.paths(max_faults)):
        if keep_paths:
            paths_list.append(path)
        r, u, t, _ = table.features(path)
        key = (u, t)
        cell = cells.get(key)
        if cell is None:
            cell = cells[key] = {}
            first[key] = (idx, r, None)
        cell[r] = cell.get(r, 0) + 1
        ugroups[u] = ugroups.get(u, 0) + 1
        f_idx, f_rem, partner = first[key]
        if partner is None and r != f_rem:
            first[key] = (f_idx, f_rem, idx)
            cand = (f_idx, idx)
            if witness_idx is None or cand < witness_idx:
                witness_idx = cand

    def c2(m: int) -> int:
        return m * (m - 1) // 2

    same_u = sum(c2(m) for m in ugroups.values())
    same_cell = sum(c2(sum(cell.values())) for cell in cells.values())
    same_rem = sum(c2(m) for cell in cells.values() for m in cell.values())
    confusions = same_cell - same_rem
    deferred = same_u - same_cell
    pairs = c2(total)
    witness = None
    witness_text = None
    if witness_idx is not None:
        if keep_paths:
            witness = (paths_list[witness_idx[0]], paths_list[witness_idx[1]])
        else:
            it = table.paths(max_faults)
            got = {}
            for i, p in enumerate(it):
                if i in witness_idx:
                    got[i] = p
                if len(got) == 2:
                    break
            witness = (got[witness_idx[0]], got[witness_idx[1]])
        witness_text = [witness[0].describe(table), witness[1].describe(table)]
    report = FaultSetReport(
        max_faults, total, pairs, pairs - deferred - confusions, deferred, confusions, witness, witness_text
    )
    if d_u_max_weight is not None:
        res = st.base.distance("unmasked", d_u_max_weight)
        report.d_U = res.describe()
        if res.certified:
            report.guaranteed_faults = (res.value - 1) // 2
            if max_faults <= report.guaranteed_faults:
                report.consistent = confusions == 0
    return report


@dataclass(frozen=True)
class DecodeResult:
    path: FaultPath | None
    syndrome: SyndromeReport

    @property
    def found(self) -> bool:
        return self.path is not None


def _usyn_index(table: FaultTable) -> dict[int, list[tuple[int, int]]]:
    if table._by_usyn is None:
        idx: dict[int, list[tuple[int, int]]] = {}
        for l, a in table.singles:
            idx.setdefault(table.usyn[l][a], []).append((l, a))
        table._by_usyn = idx
    return table._by_usyn


def decode(s: SyndromeReport | int, st: SpacetimeCode, cap: int = 2, table: FaultTable | None = None) -> DecodeResult:
    """Minimum-size fault path with unmasked syndrome ``s``.

    Ties go to the lexicographically smallest sorted path. Returns a result
    with ``path=None`` when nothing within ``cap`` faults matches.
    """
    table = table or fault_table(st)
    bits = s.bits if isinstance(s, SyndromeReport) else int(s)
    report = s if isinstance(s, SyndromeReport) else SyndromeReport(bits, len(st.unmasked_records))
    key = (bits, cap)
    if key in table._decode_cache:
        return DecodeResult(table._decode_cache[key], report)
    path = _decode_search(table, bits, cap)
    table._decode_cache[key] = path
    return DecodeResult(path, report)


def _decode_search(table: FaultTable, bits: int, cap: int) -> FaultPath | None:
    if bits == 0:
        return FaultPath()
    index = _usyn_index(table)
    singles = list(table.singles)
    for w in range(1, cap + 1):
        found = _decode_w(table, index, singles, bits, w, [], -1)
        if found is not None:
            return FaultPath(tuple(found))
    return None


def _decode_w(table, index, singles, target, w, chosen, last_loc):
    if w == 1:
        for l, a in index.get(target, ()):
            if l > last_loc:
                return chosen + [(l, a)]
        return None
    for l, a in singles:
        if l <= last_loc:
            continue
        # need w-1 more locations after l
        if len(table.locations) - l < w:
            break
        res = _decode_w(table, index, singles, target ^ table.usyn[l][a], w - 1, chosen + [(l, a)], l)
        if res is not None:
            return res
    return None


def residual_rep(st: SpacetimeCode, out_image: PauliOperator, max_rank: int = 12) -> PauliOperator:
    """Minimum-weight representative on the output qubits, over the output-code coset."""
    c = st.circuit
    r = out_image.restrict(c.output_qubits).phaseless()
    gens = list(st.output.output_code)
    if len(gens) > max_rank:
        return r
    best = r
    for mask in range(1, 1 << len(gens)):
        cand = r
        for j, g in enumerate(gens):
            if (mask >> j) & 1:
                cand = multiply(cand, g)
        if weight(cand) < weight(best) or (weight(cand) == weight(best) and cand.letters() < best.letters()):
            best = cand
    return best.phaseless()

