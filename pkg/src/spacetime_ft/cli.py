"""Command-line entry point.

Exit status: 0 on success, 1 when the analysis finds a problem (for example
a LogicalConfusion pair or an unexplained syndrome), 2 on usage or input
errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import __version__
from .bounds import budget_bits, info_bound
from .circuit import Circuit, CircuitError, circuit_from_json, parse_circuit, serialize_circuit
from .codes import CodeParseError, MaskedSubsystemCode, code_from_json, code_to_json, parse_code
from .faults import (
    BudgetExceeded,
    NoiseModel,
    SyndromeReport,
    decode,
    fault_table,
    residual_rep,
    verify_fault_set,
)
from .fixtures import flag_circuit_flagged, flag_circuit_plain, surface_extraction, toy_circuit
from .pauli import serialize_pauli
from .probability import failure_probability
from .report import circuit_info, code_summary, dumps, mask_table, render_text
from .spacetime import SpacetimeCode, build_spacetime_code

WORKERS_ENV = "SPACETIME_FT_WORKERS"
FIXTURE_NAMES = ("flag-a", "flag-b", "toy", "surface")
_CODE_WORDS = {"qubits", "gauge", "stab", "tmask", "umask"}
_KINDS = {"u": "unmasked", "t": "temporarily_masked", "full": "full"}
_SUMMARY_KEY = {"full": "d", "temporarily_masked": "d_T", "unmasked": "d_U"}


class UsageError(Exception):
    pass


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _fixture(name: str, args) -> Circuit:
    stabs = getattr(args, "stab", None)
    if name == "flag-a":
        return flag_circuit_plain(stabs)
    if name == "flag-b":
        return flag_circuit_flagged(stabs)
    if name == "toy":
        return toy_circuit(stabs or ())
    if name == "surface":
        return surface_extraction(args.L, args.style, args.layout)
    raise UsageError(f"unknown fixture {name!r}")


def _read_source(src: str | None) -> tuple[str, str]:
    if src in (None, "-"):
        return sys.stdin.read(), "<stdin>"
    with open(src, encoding="utf-8") as fh:
        return fh.read(), src


def _load(args) -> tuple[Circuit | MaskedSubsystemCode, str]:
    src = args.input
    if src in FIXTURE_NAMES and not os.path.exists(src):
        return _fixture(src, args), src
    text, name = _read_source(src)
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(text)
        if "layers" in data or "preps" in data:
            return circuit_from_json(data), name
        return code_from_json(data), name
    words = {
        line.split("#", 1)[0].split()[0].lower()
        for line in text.splitlines()
        if line.split("#", 1)[0].strip()
    }
    if words and words <= _CODE_WORDS and words & {"gauge", "tmask", "umask"}:
        return parse_code(text), name
    c = parse_circuit(text)
    return c, name


def _load_circuit(args) -> tuple[Circuit, str]:
    obj, name = _load(args)
    if not isinstance(obj, Circuit):
        raise UsageError("this command needs a circuit, not a code file")
    return obj, name


def _spacetime(args) -> tuple[SpacetimeCode, dict]:
    c, name = _load_circuit(args)
    st = build_spacetime_code(c)
    return st, circuit_info(c, name)


def cmd_emit_code(args) -> tuple[dict, int]:
    st, info = _spacetime(args)
    rep = {
        "command": "emit-code",
        "circuit": info,
        "code_summary": code_summary(st),
        "masks": mask_table(st),
        "provenance": [list(p) for p in st.gauge_provenance],
        "code": code_to_json(st.base),
    }
    return rep, 0


def cmd_distance(args) -> tuple[dict, int]:
    obj, name = _load(args)
    rep: dict = {"command": "distance"}
    if isinstance(obj, Circuit):
        st = build_spacetime_code(obj)
        code = st.base
        rep["circuit"] = circuit_info(obj, name)
        summary = code_summary(st)
    else:
        code = obj
        summary = {
            "N": code.n,
            "k": code.k,
            "rank": code.stabilizer_rank,
            "gauge_rank": code.gauge_rank,
        }
    kinds = [_KINDS[args.kind]] if args.kind else ["full", "temporarily_masked", "unmasked"]
    witnesses = {}
    for kind in kinds:
        if args.method == "exhaustive":
            res = code.distance(kind, args.max_weight)
        else:
            from .codes import distance

            res = distance(code, kind, args.max_weight, "random_information_set", seed=args.seed or 0)
        key = _SUMMARY_KEY[kind]
        summary[key] = res.value if res.certified else res.describe()
        witnesses[key] = serialize_pauli(res.witness) if res.witness is not None else None
    summary["certified_to"] = args.max_weight if args.method == "exhaustive" else None
    summary["witnesses"] = witnesses
    rep["code_summary"] = summary
    return rep, 0


def cmd_verify(args) -> tuple[dict, int]:
    st, info = _spacetime(args)
    r = verify_fault_set(st, args.max_faults, d_u_max_weight=args.d_u_weight)
    rep = {
        "command": "verify",
        "circuit": info,
        "code_summary": code_summary(st),
        "verdicts": r.to_json(),
    }
    return rep, (1 if r.confusions else 0)


def cmd_decode(args) -> tuple[dict, int]:
    st, info = _spacetime(args)
    n_u = len(st.unmasked_records)
    s = SyndromeReport.from_bitstring(args.syndrome)
    if s.length != n_u:
        raise UsageError(f"syndrome needs {n_u} bits, got {s.length}")
    table = fault_table(st)
    res = decode(s, st, args.cap, table)
    out = {"syndrome": s.bitstring(), "found": res.found, "faults": None, "residual": None}
    if res.found:
        out["faults"] = res.path.describe(table)
        out["residual"] = serialize_pauli(residual_rep(st, table.out_image(res.path)))
    rep = {"command": "decode", "circuit": info, "decode": out}
    return rep, (0 if res.found else 1)


def _noise(args) -> NoiseModel:
    return NoiseModel(
        args.p,
        p_input=args.p_input,
        convention="depolarizing" if args.depolarizing else "uniform",
    )


def cmd_sample(args) -> tuple[dict, int]:
    st, info = _spacetime(args)
    noise = _noise(args)
    est = failure_probability(
        st, noise, "montecarlo", shots=args.shots, seed=args.seed, decode_cap=args.cap, workers=args.workers
    )
    fail = est.to_json()
    fail.update(p=noise.p, convention=noise.convention)
    return {"command": "sample", "circuit": info, "failure": fail}, 0


def cmd_exhaust(args) -> tuple[dict, int]:
    st, info = _spacetime(args)
    noise = _noise(args)
    est = failure_probability(st, noise, "exhaustive", order=args.order, decode_cap=args.cap)
    fail = est.to_json()
    fail.update(p=noise.p, convention=noise.convention)
    return {"command": "exhaust", "circuit": info, "failure": fail}, 0


def cmd_bound(args) -> tuple[dict, int]:
    b = info_bound(args.T, args.p, args.a)
    out = b.to_json()
    out["budget_bits"] = (
        budget_bits(args.d, args.k, args.m, args.p, args.a) if args.d is not None else None
    )
    return {"command": "bound", "bounds": out}, 0


def cmd_gen(args) -> tuple[dict, int]:
    c = _fixture(args.kind, args)
    text = serialize_circuit(c)
    return {"command": "gen", "circuit": circuit_info(c, args.kind), "generated": text}, 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--workers", type=int, default=_default_workers(),
                        help=f"worker cap (default from ${WORKERS_ENV}, else 1)")

    circ = argparse.ArgumentParser(add_help=False)
    circ.add_argument("input", nargs="?", help="circuit file, fixture name, or '-' for stdin")
    circ.add_argument("--L", type=int, default=3, help="lattice size for the surface fixture")
    circ.add_argument("--style", choices=("plain", "flagged"), default="plain")
    circ.add_argument("--layout", choices=("rotated", "toric"), default="rotated")

    noise = argparse.ArgumentParser(add_help=False)
    noise.add_argument("-p", type=float, required=True, help="per-location fault probability")
    noise.add_argument("--p-input", type=float, default=None)
    noise.add_argument("--depolarizing", action="store_true",
                       help="randomize each location with probability 4p/3 instead of spreading p")
    noise.add_argument("--cap", type=int, default=2, help="decoder fault-count cap")

    ap = argparse.ArgumentParser(prog="spacetime-ft", description="Fault-tolerance analysis of Clifford gadgets.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("emit-code", parents=[common, circ], help="compile a circuit to its spacetime code")
    p.set_defaults(func=cmd_emit_code)

    p = sub.add_parser("distance", parents=[common, circ], help="masked distances of a code or circuit")
    p.add_argument("--kind", choices=tuple(_KINDS))
    p.add_argument("--max-weight", type=int, default=4)
    p.add_argument("--method", choices=("exhaustive", "random"), default="exhaustive")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("verify", parents=[common, circ], help="pairwise verdicts over small fault sets")
    p.add_argument("--max-faults", type=int, default=1)
    p.add_argument("--d-u-weight", type=int, default=None, help="also compute d_U up to this weight")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("decode", parents=[common, circ], help="minimum fault path for a syndrome")
    p.add_argument("--syndrome", required=True)
    p.add_argument("--cap", type=int, default=2)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("sample", parents=[common, circ, noise], help="Monte Carlo failure probability")
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("exhaust", parents=[common, circ, noise], help="truncated exact failure probability")
    p.add_argument("--order", type=int, default=2)
    p.set_defaults(func=cmd_exhaust)

    p = sub.add_parser("bound", parents=[common], help="fault-counting information bound")
    p.add_argument("--T", type=int, required=True)
    p.add_argument("-p", type=float, required=True)
    p.add_argument("-a", type=int, required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--m", type=int, default=0)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("gen", parents=[common], help="print a built-in circuit")
    p.add_argument("kind", choices=("surface", "flag-a", "flag-b", "toy"))
    p.add_argument("--L", type=int, default=3)
    p.add_argument("--style", choices=("plain", "flagged"), default="plain")
    p.add_argument("--layout", choices=("rotated", "toric"), default="rotated")
    p.add_argument("--stab", action="append", default=None, help="input stabilizer (repeatable)")
    p.set_defaults(func=cmd_gen)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        report, status = args.func(args)
    except (UsageError, CircuitError, CodeParseError, BudgetExceeded, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    out = dumps(report) if args.format == "json" else render_text(report)
    sys.stdout.write(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
