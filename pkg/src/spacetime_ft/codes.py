"""Stabilizer groups, masked subsystem codes and weight-bounded distance search.

Membership and distance questions are phaseless throughout: a Pauli is
treated as its symplectic vector, interleaved so that qubit ``j`` owns bits
``2j`` (X) and ``2j+1`` (Z). Only :func:`in_group` in ``signed`` mode looks at
phases.
"""

from __future__ import annotations

import bisect
import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

from .gf2 import Basis, deinterleave, kernel, symplectic_swap, symplectic_vector
from .pauli import (
    DimensionError,
    PauliOperator,
    commutes,
    multiply,
    parse_pauli,
    popcount,
    serialize_pauli,
    weight,
)

__all__ = [
    "CodeStructureError",
    "StabilizerGroup",
    "Membership",
    "MaskedSubsystemCode",
    "DistanceResult",
    "reduce",
    "in_group",
    "in_normalizer",
    "distance",
    "surface_code",
    "rotated_surface_code",
    "parse_code",
    "serialize_code",
    "code_to_json",
    "code_from_json",
    "center",
]

DistanceKind = Literal["full", "temporarily_masked", "unmasked"]
PAULI_ORDER = ((1, 0), (1, 1), (0, 1))  # X, Y, Z as (x, z) bits


class CodeStructureError(ValueError):
    """A code violates one of its structural invariants."""


def _check_n(gens: Sequence[PauliOperator], n: int) -> None:
    for g in gens:
        if g.n != n:
            raise DimensionError(f"generator on {g.n} qubits, expected {n}")


def reduce(generators: Sequence[PauliOperator]) -> tuple[list[PauliOperator], int]:
    """Drop phaselessly dependent generators, keeping input order."""
    basis = Basis()
    kept = [g for g in generators if basis.add(symplectic_vector(g))]
    return kept, len(kept)


@dataclass(frozen=True)
class StabilizerGroup:
    n: int
    generators: tuple[PauliOperator, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        _check_n(self.generators, self.n)
        gens = self.generators
        for i, a in enumerate(gens):
            for b in gens[i + 1:]:
                if not commutes(a, b):
                    raise CodeStructureError(f"generators {a} and {b} anticommute")

    @property
    def rank(self) -> int:
        return reduce(self.generators)[1]

    @property
    def k(self) -> int:
        return self.n - self.rank

    def independent(self) -> StabilizerGroup:
        return StabilizerGroup(self.n, reduce(self.generators)[0])

    def contains(self, p: PauliOperator, mode: str = "phaseless") -> bool:
        return in_group(self.generators, p, mode).member


@dataclass(frozen=True)
class Membership:
    member: bool
    witness: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.member


def _bits(mask: int) -> tuple[int, ...]:
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def in_group(
    generators: Sequence[PauliOperator],
    p: PauliOperator,
    mode: Literal["phaseless", "signed"] = "phaseless",
) -> Membership:
    """Solve for a generator combination equal to ``p``.

    The witness lists generator indices whose ordered product equals ``p``
    up to phase. ``signed`` mode additionally requires that product to have
    exactly ``p``'s phase.
    """
    _check_n(generators, p.n)
    basis = Basis(symplectic_vector(g) for g in generators)
    combo = basis.dependency(symplectic_vector(p))
    if combo is None:
        return Membership(False)
    witness = _bits(combo)
    if mode == "signed":
        prod = PauliOperator.identity(p.n)
        for i in witness:
            prod = multiply(prod, generators[i])
        if prod.phase != p.phase:
            return Membership(False)
    elif mode != "phaseless":
        raise ValueError(f"mode must be 'phaseless' or 'signed', not {mode!r}")
    return Membership(True, witness)


def in_normalizer(generators: Sequence[PauliOperator], p: PauliOperator) -> bool:
    _check_n(generators, p.n)
    return all(commutes(g, p) for g in generators)


def center(generators: Sequence[PauliOperator]) -> list[PauliOperator]:
    """Generators of the center of the group generated by ``generators``."""
    if not generators:
        return []
    n = generators[0].n
    indep, _ = reduce(generators)
    vecs = [symplectic_vector(g) for g in indep]
    swapped = [symplectic_swap(v, n) for v in vecs]
    # commutation pattern of each generator with all others, as a row
    images = []
    for v in vecs:
        row = 0
        for j, w in enumerate(swapped):
            if popcount(v & w) & 1:
                row |= 1 << j
        images.append(row)
    out = []
    for combo in kernel(images):
        prod = PauliOperator.identity(n)
        for i in _bits(combo):
            prod = multiply(prod, indep[i])
        out.append(prod)
    return out


@dataclass
class DistanceResult:
    """Outcome of a distance search.

    ``value`` is the exact distance when ``certified``; otherwise the search
    either hit ``w_max`` (``value is None``, ``lower_bound = w_max + 1``) or
    the random method found an upper bound in ``value``.
    """

    kind: str
    value: int | None
    certified: bool
    lower_bound: int
    witness: PauliOperator | None = None
    method: str = "exhaustive"
    w_max: int | None = None

    def describe(self) -> str:
        if self.certified:
            return str(self.value)
        if self.value is None:
            return f">={self.lower_bound}"
        return f"<={self.value}"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "certified": self.certified,
            "lower_bound": self.lower_bound,
            "witness": serialize_pauli(self.witness) if self.witness is not None else None,
            "method": self.method,
            "w_max": self.w_max,
        }


@dataclass(frozen=True, eq=False)
class MaskedSubsystemCode:
    """Subsystem code ``G`` with stabilizer ``S`` and masked chain ``U <= T <= S``.

    ``temporarily_masked_generators`` generate all of ``T`` (so they include
    the generators of ``U``). Containment ``U <= T <= S <= G <= N(S)`` is
    checked at construction unless ``validate=False``.
    """

    n: int
    gauge_generators: tuple[PauliOperator, ...]
    stabilizer_generators: tuple[PauliOperator, ...]
    temporarily_masked_generators: tuple[PauliOperator, ...]
    unmasked_generators: tuple[PauliOperator, ...]
    validate: bool = True
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for name in (
            "gauge_generators",
            "stabilizer_generators",
            "temporarily_masked_generators",
            "unmasked_generators",
        ):
            gens = tuple(getattr(self, name))
            _check_n(gens, self.n)
            object.__setattr__(self, name, gens)
        if self.validate:
            self.check()

    @classmethod
    def stabilizer_code(cls, n: int, stabilizers: Sequence[PauliOperator]) -> MaskedSubsystemCode:
        """Plain stabilizer code: ``G = T = U = S``."""
        s = tuple(stabilizers)
        return cls(n, s, s, s, s)

    def check(self) -> None:
        g_basis = self.gauge_basis
        s_basis = Basis(symplectic_vector(s) for s in self.stabilizer_generators)
        t_basis = Basis(symplectic_vector(s) for s in self.temporarily_masked_generators)
        for u in self.unmasked_generators:
            if not t_basis.contains(symplectic_vector(u)):
                raise CodeStructureError(f"unmasked generator {u} not in T")
        for t in self.temporarily_masked_generators:
            if not s_basis.contains(symplectic_vector(t)):
                raise CodeStructureError(f"temporarily masked generator {t} not in S")
        for s in self.stabilizer_generators:
            if not g_basis.contains(symplectic_vector(s)):
                raise CodeStructureError(f"stabilizer generator {s} not in G")
        sw = [symplectic_swap(symplectic_vector(s), self.n) for s in self.stabilizer_generators]
        for g in self.gauge_generators:
            v = symplectic_vector(g)
            for s, w in zip(self.stabilizer_generators, sw):
                if popcount(v & w) & 1:
                    raise CodeStructureError(f"gauge generator {g} anticommutes with {s}")

    @property
    def gauge_basis(self) -> Basis:
        b = self._cache.get("gauge_basis")
        if b is None:
            b = Basis(symplectic_vector(g) for g in self.gauge_generators)
            self._cache["gauge_basis"] = b
        return b

    def checks_for(self, kind: DistanceKind) -> tuple[PauliOperator, ...]:
        if kind == "full":
            return self.stabilizer_generators
        if kind == "temporarily_masked":
            return self.temporarily_masked_generators
        if kind == "unmasked":
            return self.unmasked_generators
        raise ValueError(f"unknown distance kind {kind!r}")

    def in_gauge(self, p: PauliOperator) -> bool:
        return self.gauge_basis.contains(symplectic_vector(p))

    def is_logical(self, p: PauliOperator, kind: DistanceKind = "full") -> bool:
        """``p`` in ``N(X) \\ G`` where ``X`` is the group selected by ``kind``."""
        return in_normalizer(self.checks_for(kind), p) and not self.in_gauge(p)

    @property
    def gauge_rank(self) -> int:
        return self.gauge_basis.rank

    @property
    def stabilizer_rank(self) -> int:
        return reduce(self.stabilizer_generators)[1]

    @property
    def k(self) -> int:
        """Logical qubit count ``n - (rank G + rank S) / 2``."""
        return self.n - (self.gauge_rank + self.stabilizer_rank) // 2

    def distance(self, kind: DistanceKind = "full", w_max: int = 4, **kw) -> DistanceResult:
        key = ("distance", kind, w_max, kw.get("method", "exhaustive"))
        res = self._cache.get(key)
        if res is None:
            res = distance(self, kind, w_max, **kw)
            self._cache[key] = res
        return res


def _single_features(code: MaskedSubsystemCode, kind: DistanceKind):
    """Per (qubit, Pauli): syndrome against the check set and gauge remainder."""
    checks = [symplectic_swap(symplectic_vector(c), code.n) for c in code.checks_for(kind)]
    gb = code.gauge_basis
    feats = []
    for q in range(code.n):
        for pi, (xb, zb) in enumerate(PAULI_ORDER):
            v = (xb << (2 * q)) | (zb << (2 * q + 1))
            syn = 0
            for j, c in enumerate(checks):
                if popcount(v & c) & 1:
                    syn |= 1 << j
            feats.append((q, pi, syn, gb.remainder(v)))
    return feats


def _pauli_from_choice(n: int, choice: Sequence[tuple[int, int]]) -> PauliOperator:
    ops = {}
    for q, pi in choice:
        ops[q] = "XYZ"[pi]
    return PauliOperator.from_sparse(n, ops).phaseless()


def _exhaustive(code: MaskedSubsystemCode, kind: DistanceKind, w_max: int) -> DistanceResult:
    n = code.n
    if n == 0:
        return DistanceResult(kind, None, True, 1, None, "exhaustive", w_max)
    feats = _single_features(code, kind)
    for q, pi, syn, rem in feats:
        if syn == 0 and rem != 0:
            return DistanceResult(kind, 1, True, 1, _pauli_from_choice(n, [(q, pi)]), "exhaustive", w_max)
    by_syn: dict[int, list[tuple[int, int, int]]] = {}
    for q, pi, syn, rem in feats:
        by_syn.setdefault(syn, []).append((q, pi, rem))
    sites_of = {s: [e[0] for e in lst] for s, lst in by_syn.items()}
    per_site = [feats[3 * q: 3 * q + 3] for q in range(n)]

    def completion(syn: int, rem: int, last: int):
        lst = by_syn.get(syn)
        if not lst:
            return None
        i = bisect.bisect_right(sites_of[syn], last)
        for q, pi, r in lst[i:]:
            if r != rem:
                return q, pi
        return None

    for w in range(2, w_max + 1):
        # prefixes of w-1 distinct sites in lexicographic order, last site by lookup
        for sites in itertools.combinations(range(n), w - 1):
            if sites[-1] >= n - 1:
                continue
            found = _search_prefix(per_site, sites, 0, 0, 0, [], completion)
            if found is not None:
                return DistanceResult(kind, w, True, w, _pauli_from_choice(n, found), "exhaustive", w_max)
    return DistanceResult(kind, None, False, w_max + 1, None, "exhaustive", w_max)


def _search_prefix(per_site, sites, depth, syn, rem, chosen, completion):
    if depth == len(sites):
        hit = completion(syn, rem, sites[-1])
        if hit is None:
            return None
        return chosen + [hit]
    for q, pi, s, r in per_site[sites[depth]]:
        found = _search_prefix(per_site, sites, depth + 1, syn ^ s, rem ^ r, chosen + [(q, pi)], completion)
        if found is not None:
            return found
    return None


def _site_weight(v: int) -> int:
    return popcount((v | (v >> 1)) & int("01" * (v.bit_length() // 2 + 1), 2))


def _random_information_set(
    code: MaskedSubsystemCode, kind: DistanceKind, iterations: int, seed: int | None
) -> DistanceResult:
    n = code.n
    checks = [symplectic_swap(symplectic_vector(c), n) for c in code.checks_for(kind)]
    images = []
    for b in range(2 * n):
        v = 1 << b
        syn = 0
        for j, c in enumerate(checks):
            if popcount(v & c) & 1:
                syn |= 1 << j
        images.append(syn)
    normalizer = [c for c in kernel(images)]
    gb = code.gauge_basis
    rng = random.Random(seed)
    best: tuple[int, int] | None = None
    for _ in range(iterations):
        perm = list(range(n))
        rng.shuffle(perm)
        inv = [0] * n
        for pos, q in enumerate(perm):
            inv[q] = pos

        def permute(v: int, table) -> int:
            out = 0
            for q in range(n):
                pair = (v >> (2 * q)) & 3
                if pair:
                    out |= pair << (2 * table[q])
            return out

        rows = _rref([permute(v, inv) for v in normalizer])
        for r in rows:
            v = permute(r, perm)
            if gb.remainder(v) == 0:
                continue
            w = _site_weight(v)
            if best is None or w < best[0]:
                best = (w, v)
    if best is None:
        return DistanceResult(kind, None, False, 1, None, "random_information_set")
    x, z = deinterleave(best[1], n)
    wit = PauliOperator(n, x, z).phaseless()
    return DistanceResult(kind, best[0], False, 1, wit, "random_information_set")


def _rref(vectors: Iterable[int]) -> list[int]:
    basis = Basis(vectors)
    pivots = sorted(basis.rows)
    rows = {b: basis.rows[b] for b in pivots}
    for b in reversed(pivots):
        rb = rows[b]
        for c in pivots:
            if c < b and (rows[c] >> b) & 1:
                rows[c] ^= rb
    return [rows[b] for b in pivots]


def distance(
    code: MaskedSubsystemCode,
    kind: DistanceKind = "full",
    w_max: int = 4,
    method: Literal["exhaustive", "random_information_set"] = "exhaustive",
    *,
    iterations: int = 200,
    seed: int | None = 0,
) -> DistanceResult:
    """Minimum weight of ``N(X) \\ G`` with ``X`` one of ``S``, ``T``, ``U``.

    The exhaustive method enumerates supports by increasing weight and
    returns the lexicographically first witness (qubits ascending, then
    X < Y < Z per qubit). The random method only gives an upper bound.
    """
    if w_max < 1:
        raise ValueError("w_max must be at least 1")
    if method == "exhaustive":
        return _exhaustive(code, kind, w_max)
    if method == "random_information_set":
        return _random_information_set(code, kind, iterations, seed)
    raise ValueError(f"unknown method {method!r}")


def surface_code(L: int) -> StabilizerGroup:
    """Toric code on an ``L x L`` periodic lattice: X on faces, Z on vertices.

    Horizontal edge ``(x, y) -> (x+1, y)`` is qubit ``y*L + x``; vertical
    edge ``(x, y) -> (x, y+1)`` is qubit ``L*L + y*L + x``.
    """
    if L < 2:
        raise ValueError("surface code needs L >= 2")
    n = 2 * L * L

    def h(x, y):
        return (y % L) * L + (x % L)

    def v(x, y):
        return L * L + (y % L) * L + (x % L)

    gens = []
    for y in range(L):
        for x in range(L):
            face = {h(x, y), h(x, y + 1), v(x, y), v(x + 1, y)}
            gens.append(PauliOperator.from_sparse(n, {q: "X" for q in face}))
    for y in range(L):
        for x in range(L):
            star = {h(x, y), h(x - 1, y), v(x, y), v(x, y - 1)}
            gens.append(PauliOperator.from_sparse(n, {q: "Z" for q in star}))
    return StabilizerGroup(n, gens)


def rotated_surface_checks(L: int) -> list[tuple[str, list[int]]]:
    """Checks of the rotated planar code as ``(type, data qubits)``.

    Data qubit ``(r, c)`` is ``r*L + c``. The plaquette with top-left corner
    ``(i, j)`` is X-type when ``i + j`` is even; weight-2 plaquettes are kept
    on the top/bottom edges for X and on the left/right edges for Z. Qubits
    of each check are listed top-left, top-right, bottom-left, bottom-right.
    """
    if L < 2:
        raise ValueError("surface code needs L >= 2")
    checks = []
    for i in range(-1, L):
        for j in range(-1, L):
            kind = "X" if (i + j) % 2 == 0 else "Z"
            corners = [(i, j), (i, j + 1), (i + 1, j), (i + 1, j + 1)]
            qs = [r * L + c for r, c in corners if 0 <= r < L and 0 <= c < L]
            bulk = 0 <= i < L - 1 and 0 <= j < L - 1
            if bulk:
                checks.append((kind, qs))
            elif len(qs) == 2:
                on_tb = i in (-1, L - 1)
                if (kind == "X" and on_tb) or (kind == "Z" and not on_tb):
                    checks.append((kind, qs))
    checks.sort(key=lambda c: (c[0] != "X", c[1]))
    return checks


def rotated_surface_code(L: int) -> StabilizerGroup:
    n = L * L
    return StabilizerGroup(
        n, [PauliOperator.from_sparse(n, {q: t for q in qs}) for t, qs in rotated_surface_checks(L)]
    )


class CodeParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


_CODE_KEYS = ("gauge", "stab", "tmask", "umask")


def _assemble(n: int, groups: dict[str, list[PauliOperator]]) -> MaskedSubsystemCode:
    stab = groups["stab"]
    tm = groups["tmask"] + groups["umask"]
    um = groups["umask"]
    if not groups["tmask"] and not groups["umask"]:
        tm = um = list(stab)
    gauge = groups["gauge"] + [s for s in stab]
    return MaskedSubsystemCode(n, gauge, stab, tm, um)


def parse_code(text: str) -> MaskedSubsystemCode:
    """Read the line format ``qubits N`` / ``gauge|stab|tmask|umask <pauli>``.

    Stabilizer lines also generate the gauge group. With no ``tmask`` or
    ``umask`` lines the code is fully unmasked (``U = T = S``); otherwise
    ``T`` is generated by ``tmask`` and ``umask`` lines together.
    """
    n = None
    groups: dict[str, list[PauliOperator]] = {k: [] for k in _CODE_KEYS}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "qubits":
            if len(parts) != 2 or not parts[1].isdigit():
                raise CodeParseError("expected 'qubits N'", lineno)
            n = int(parts[1])
            continue
        if parts[0] not in _CODE_KEYS or len(parts) != 2:
            raise CodeParseError(f"unknown directive {parts[0]!r}", lineno)
        if n is None:
            raise CodeParseError("'qubits N' must come first", lineno)
        try:
            groups[parts[0]].append(parse_pauli(parts[1], n))
        except ValueError as e:
            raise CodeParseError(str(e), lineno) from e
    if n is None:
        raise CodeParseError("missing 'qubits N'", 1)
    try:
        return _assemble(n, groups)
    except (CodeStructureError, DimensionError) as e:
        raise CodeParseError(str(e), 0) from e


def serialize_code(code: MaskedSubsystemCode) -> str:
    lines = [f"qubits {code.n}"]
    stab = {symplectic_vector(s) for s in code.stabilizer_generators}
    for g in code.gauge_generators:
        if symplectic_vector(g) not in stab:
            lines.append(f"gauge {serialize_pauli(g)}")
    lines += [f"stab {serialize_pauli(s)}" for s in code.stabilizer_generators]
    umask = {symplectic_vector(u) for u in code.unmasked_generators}
    lines += [
        f"tmask {serialize_pauli(t)}"
        for t in code.temporarily_masked_generators
        if symplectic_vector(t) not in umask
    ]
    lines += [f"umask {serialize_pauli(u)}" for u in code.unmasked_generators]
    return "\n".join(lines) + "\n"


def code_to_json(code: MaskedSubsystemCode) -> dict:
    umask = {symplectic_vector(u) for u in code.unmasked_generators}
    stab = {symplectic_vector(s) for s in code.stabilizer_generators}
    return {
        "qubits": code.n,
        "gauge": [serialize_pauli(g) for g in code.gauge_generators if symplectic_vector(g) not in stab],
        "stab": [serialize_pauli(s) for s in code.stabilizer_generators],
        "tmask": [
            serialize_pauli(t)
            for t in code.temporarily_masked_generators
            if symplectic_vector(t) not in umask
        ],
        "umask": [serialize_pauli(u) for u in code.unmasked_generators],
    }


def code_from_json(data: dict | str) -> MaskedSubsystemCode:
    if isinstance(data, str):
        data = json.loads(data)
    n = int(data["qubits"])
    groups = {k: [parse_pauli(s, n) for s in data.get(k, [])] for k in _CODE_KEYS}
    return _assemble(n, groups)


def weight_of(p: PauliOperator) -> int:
    return weight(p)
