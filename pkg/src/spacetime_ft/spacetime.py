"""Compile a normalized circuit into its spacetime masked subsystem code.

Spacetime qubit ``(i, t)`` has index ``t * n_total + i``. Slice ``t`` of a
circuit operator ``P`` is ``P`` placed on the spacetime qubits of tick ``t``.

Much of the analysis is done at the output slice. Propagating every slice of
a spacetime error to slice ``T`` is a homomorphism whose kernel is exactly the
group generated by the gate generators, so

* ``K`` is in ``G_st`` iff ``Pi_out(K)`` lies in ``<Pi(S_hat), Z_measured>``;
* ``K`` commutes with ``spackle(P, T)`` iff ``Pi_out(K)`` commutes with ``P``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

from .circuit import Circuit, OutputStabilizer, input_generators, output_stabilizer
from .clifford import conjugate_through_layer, propagate
from .codes import MaskedSubsystemCode
from .gf2 import Basis, kernel, symplectic_swap, symplectic_vector
from .pauli import PauliOperator, multiply, popcount

__all__ = [
    "SpacetimeError",
    "SpacetimeCode",
    "StabilizerRecord",
    "build_spacetime_code",
    "spackle",
    "embed_at",
    "slice_of",
    "project",
    "CASE_LABELS",
]

CASE_LABELS = {
    1: "permanently_masked",  # new logical preparation
    2: "permanently_masked",  # logical measurement
    3: "unmasked",
    4: "temporarily_masked",
}


class SpacetimeError(ValueError):
    """Bad input to the spacetime compiler (for example a non-normalized circuit)."""


def _require_normalized(c: Circuit) -> None:
    if not c.normalized or c.T % 2:
        raise SpacetimeError("circuit must be normalized with even T")


def embed_at(p: PauliOperator, t: int, c: Circuit) -> PauliOperator:
    """Place a circuit operator on slice ``t`` of the spacetime register."""
    if p.n != c.n_total:
        raise SpacetimeError(f"operator on {p.n} qubits, circuit has {c.n_total}")
    if not 0 <= t <= c.T:
        raise SpacetimeError(f"tick {t} outside 0..{c.T}")
    shift = t * c.n_total
    return PauliOperator((c.T + 1) * c.n_total, p.x << shift, p.z << shift, p.phase)


def slice_of(k: PauliOperator, t: int, c: Circuit) -> PauliOperator:
    """Slice ``t`` of a spacetime operator, as a circuit operator (phase dropped)."""
    n = c.n_total
    mask = (1 << n) - 1
    shift = t * n
    return PauliOperator(n, (k.x >> shift) & mask, (k.z >> shift) & mask).phaseless()


def spackle(p: PauliOperator, t: int, c: Circuit) -> PauliOperator:
    """Product over all slices ``s`` of ``Pi_{t->s}(p)`` placed at slice ``s``."""
    _require_normalized(c)
    if not 0 <= t <= c.T:
        raise SpacetimeError(f"tick {t} outside 0..{c.T}")
    images: list[PauliOperator | None] = [None] * (c.T + 1)
    images[t] = p
    cur = p
    for s in range(t, c.T):
        cur = conjugate_through_layer(cur, c.layers[s], "forward")
        images[s + 1] = cur
    cur = p
    for s in range(t - 1, -1, -1):
        cur = conjugate_through_layer(cur, c.layers[s], "backward")
        images[s] = cur
    x = z = 0
    phase = 0
    n = c.n_total
    for s, img in enumerate(images):
        x |= img.x << (s * n)
        z |= img.z << (s * n)
        phase += img.phase
    return PauliOperator((c.T + 1) * n, x, z, phase)


def project(k: PauliOperator, c: Circuit, end: Literal["in", "out"] = "out") -> PauliOperator:
    """Propagate every slice of ``k`` to slice 0 (``in``) or ``T`` (``out``) and multiply."""
    if k.n != (c.T + 1) * c.n_total:
        raise SpacetimeError("operator is not on the spacetime register")
    n = c.n_total
    if end == "out":
        acc = PauliOperator.identity(n)
        for t in range(c.T + 1):
            if t:
                acc = conjugate_through_layer(acc, c.layers[t - 1], "forward")
            acc = multiply(acc, slice_of(k, t, c))
        return acc
    if end == "in":
        acc = PauliOperator.identity(n)
        for t in range(c.T, -1, -1):
            if t < c.T:
                acc = conjugate_through_layer(acc, c.layers[t], "backward")
            acc = multiply(acc, slice_of(k, t, c))
        return acc
    raise ValueError("end must be 'in' or 'out'")


@dataclass(frozen=True)
class StabilizerRecord:
    """One generator of ``S_st`` and why it is there.

    ``combo`` is a bitmask over the generators of ``S_hat`` (cases 1, 3, 4)
    or over measured-qubit positions (case 2). ``out_image`` is the
    corresponding operator at slice ``T``.
    """

    case: int
    label: str
    combo: int
    out_image: PauliOperator
    generator: PauliOperator


@dataclass(eq=False)
class SpacetimeCode:
    circuit: Circuit
    base: MaskedSubsystemCode
    gauge_provenance: tuple[tuple, ...]
    records: tuple[StabilizerRecord, ...]
    output: OutputStabilizer
    out_images: tuple[PauliOperator, ...]
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_total(self) -> int:
        return self.circuit.n_total

    @property
    def T(self) -> int:
        return self.circuit.T

    @property
    def N(self) -> int:
        return (self.T + 1) * self.n_total

    def index(self, i: int, t: int) -> int:
        if not (0 <= i < self.n_total and 0 <= t <= self.T):
            raise IndexError(f"({i}, {t}) outside the spacetime register")
        return t * self.n_total + i

    def coords(self, index: int) -> tuple[int, int]:
        t, i = divmod(index, self.n_total)
        return i, t

    def records_for(self, case: int) -> list[StabilizerRecord]:
        return [r for r in self.records if r.case == case]

    @property
    def unmasked_records(self) -> list[StabilizerRecord]:
        return self.records_for(3)

    @property
    def temporarily_masked_records(self) -> list[StabilizerRecord]:
        """Generators of ``T_st`` (unmasked first, then case 4)."""
        return self.records_for(3) + self.records_for(4)

    @property
    def out_group_basis(self) -> Basis:
        """``<Pi(S_hat), Z_measured>`` at slice ``T``; membership here is membership in ``G_st``."""
        b = self._cache.get("out_group")
        if b is None:
            b = Basis(symplectic_vector(p) for p in self.out_images)
            for q in self.circuit.measured_qubits:
                b.add(symplectic_vector(PauliOperator.from_sparse(self.n_total, {q: "Z"})))
            self._cache["out_group"] = b
        return b

    def _checks(self, which: str) -> list[int]:
        key = ("checks", which)
        v = self._cache.get(key)
        if v is None:
            recs = {
                "U": self.unmasked_records,
                "T": self.temporarily_masked_records,
                "S": list(self.records),
            }[which]
            v = [symplectic_swap(symplectic_vector(r.out_image), self.n_total) for r in recs]
            self._cache[key] = v
        return v

    def out_features(self, p_out: PauliOperator) -> tuple[int, int, int, int]:
        """``(remainder, U-syndrome, T-syndrome, S-syndrome)`` of an output-slice operator."""
        v = symplectic_vector(p_out)
        rem = self.out_group_basis.remainder(v)
        syn = []
        for which in ("U", "T", "S"):
            bits = 0
            for j, c in enumerate(self._checks(which)):
                if popcount(v & c) & 1:
                    bits |= 1 << j
            syn.append(bits)
        return rem, syn[0], syn[1], syn[2]

    def in_gauge(self, k: PauliOperator) -> bool:
        return self.out_group_basis.contains(symplectic_vector(project(k, self.circuit, "out")))

    def summary(self) -> dict:
        base = self.base
        return {
            "N": self.N,
            "n_total": self.n_total,
            "T": self.T,
            "gauge_generators": len(base.gauge_generators),
            "gauge_rank": base.gauge_rank,
            "rank": base.stabilizer_rank,
            "k": base.k,
            "cases": {str(c): len(self.records_for(c)) for c in (1, 2, 3, 4)},
        }


def _gate_generators(c: Circuit) -> tuple[list[PauliOperator], list[tuple]]:
    n = c.n_total
    N = (c.T + 1) * n
    gens, prov = [], []
    for t, layer in enumerate(c.layers):
        covered: dict[int, object] = {}
        for g in layer:
            for q in g.qubits:
                covered[q] = g
        for q in range(n):
            g = covered.get(q)
            if g is not None and q != g.qubits[0]:
                continue
            qubits = g.qubits if g is not None else (q,)
            for op in qubits:
                for letter in "XZ":
                    p = PauliOperator.from_sparse(n, {op: letter})
                    img = conjugate_through_layer(p, [g] if g is not None else [], "forward")
                    x = (p.x << (t * n)) | (img.x << ((t + 1) * n))
                    z = (p.z << (t * n)) | (img.z << ((t + 1) * n))
                    gens.append(PauliOperator(N, x, z, img.phase))
                    prov.append(("gate", t, str(g) if g is not None else f"I {q}", op, letter))
    return gens, prov


def build_spacetime_code(c: Circuit, validate: bool = True) -> SpacetimeCode:
    _require_normalized(c)
    n = c.n_total
    N = (c.T + 1) * n
    gens, prov = _gate_generators(c)
    for q in c.prep_qubits:
        gens.append(embed_at(PauliOperator.from_sparse(n, {q: "Z"}), 0, c))
        prov.append(("prep", q))
    for q in c.measured_qubits:
        gens.append(embed_at(PauliOperator.from_sparse(n, {q: "Z"}), c.T, c))
        prov.append(("measurement", q))
    for row, s in enumerate(c.input_stabilizer):
        gens.append(embed_at(s.embed(n, range(c.n)), 0, c))
        prov.append(("input_stabilizer", row))

    out = output_stabilizer(c)
    s_hat = list(out.S_hat)
    images = [propagate(m, c, 0, c.T) for m in s_hat]
    records = _classify(c, out, s_hat, images)
    stab = [r.generator for r in records]
    tm = [r.generator for r in records if r.case in (3, 4)]
    um = [r.generator for r in records if r.case == 3]
    base = MaskedSubsystemCode(N, gens, stab, tm, um, validate=validate)
    return SpacetimeCode(c, base, tuple(prov), tuple(records), out, tuple(images))


def _combine(gens: Sequence[PauliOperator], combo: int, n: int) -> PauliOperator:
    acc = PauliOperator.identity(n)
    i = 0
    while combo:
        if combo & 1:
            acc = multiply(acc, gens[i])
        combo >>= 1
        i += 1
    return acc


def _classify(
    c: Circuit,
    out: OutputStabilizer,
    s_hat: list[PauliOperator],
    images: list[PauliOperator],
) -> list[StabilizerRecord]:
    """Split the stabilizer of the spacetime code into the four masking cases.

    Over combinations ``M`` of ``S_hat`` generators:
    ``U = {Pi(M) in <Z_meas>}``, ``T = {Pi(M) in S_hat'}``, and
    ``A = {Pi(M) commutes with every measured Z}``, with ``U <= T <= A``.
    A basis of ``U`` is extended to ``T`` and then to ``A``; ``A \\ T`` is
    case 1. Case 2 covers products of measured ``Z`` that commute with
    ``Pi(S_hat)`` but are not already images of ``U``.
    """
    n = c.n_total
    meas = c.measured_qubits
    zvec = [symplectic_vector(PauliOperator.from_sparse(n, {q: "Z"})) for q in meas]
    zbasis = Basis(zvec)
    sp_basis = Basis(symplectic_vector(p) for p in out.S_hat_prime)
    vecs = [symplectic_vector(p) for p in images]
    meas_mask = 0
    for q in meas:
        meas_mask |= 1 << q

    u_ker = kernel([zbasis.remainder(v) for v in vecs])
    t_ker = kernel([sp_basis.remainder(v) for v in vecs])
    a_ker = kernel([p.x & meas_mask for p in images])

    chosen = Basis()
    records: list[StabilizerRecord] = []
    for case, ker in ((3, u_ker), (4, t_ker), (1, a_ker)):
        for combo in _canonical(ker):
            if chosen.add(combo):
                m = _combine(s_hat, combo, n)
                img = _combine(images, combo, n)
                records.append(StabilizerRecord(case, CASE_LABELS[case], combo, img, spackle(m, 0, c)))

    # case 2: Z products commuting with every Pi(S_hat) generator, beyond U's images
    swapped = [symplectic_swap(v, n) for v in vecs]
    z_images = []
    for zv in zvec:
        row = 0
        for j, w in enumerate(swapped):
            if popcount(zv & w) & 1:
                row |= 1 << j
        z_images.append(row)
    span = Basis(symplectic_vector(r.out_image) for r in records if r.case == 3)
    for combo in _canonical(kernel(z_images)):
        z = _combine([PauliOperator.from_sparse(n, {q: "Z"}) for q in meas], combo, n)
        if span.add(symplectic_vector(z)):
            records.append(StabilizerRecord(2, CASE_LABELS[2], combo, z, spackle(z, c.T, c)))
    return records


def _canonical(ker: list[int]) -> list[int]:
    """Reduced row-echelon form of a kernel basis, for a deterministic choice."""
    b = Basis(ker)
    piv = sorted(b.rows)
    rows = dict(b.rows)
    for p in reversed(piv):
        for q in piv:
            if q < p and (rows[q] >> p) & 1:
                rows[q] ^= rows[p]
    return [rows[p] for p in piv]
