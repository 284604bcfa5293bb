"""JSON report layout shared by all CLI commands.

Reports are plain dicts serialized with sorted keys, so identical inputs give
byte-identical output. ``REPORT_SCHEMA`` is the published JSON Schema.
"""

from __future__ import annotations

import hashlib
import json

from .circuit import Circuit, serialize_circuit
from .spacetime import SpacetimeCode

__all__ = ["REPORT_SCHEMA", "dumps", "circuit_info", "code_summary", "mask_table", "render_text"]

_NUM = {"type": "number"}
_INT = {"type": "integer"}
_NULLABLE_INT = {"type": ["integer", "null"]}
_DIST = {"type": ["integer", "string", "null"]}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "spacetime-ft report",
    "type": "object",
    "required": ["command"],
    "additionalProperties": False,
    "properties": {
        "command": {
            "enum": ["emit-code", "distance", "verify", "decode", "sample", "exhaust", "bound", "gen"]
        },
        "circuit": {
            "type": "object",
            "required": ["source", "qubits", "T"],
            "properties": {
                "source": {"type": "string"},
                "qubits": _INT,
                "n": _INT,
                "a": _INT,
                "b": _INT,
                "T": _INT,
                "sha256": {"type": "string"},
            },
        },
        "code_summary": {
            "type": "object",
            "properties": {
                "N": _INT,
                "k": _INT,
                "rank": _INT,
                "gauge_rank": _INT,
                "d": _DIST,
                "d_T": _DIST,
                "d_U": _DIST,
                "certified_to": _NULLABLE_INT,
                "witnesses": {"type": "object"},
            },
        },
        "masks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["index", "case", "label"],
                "properties": {
                    "index": _INT,
                    "case": {"enum": [1, 2, 3, 4]},
                    "label": {"enum": ["unmasked", "temporarily_masked", "permanently_masked"]},
                    "output_image": {"type": "string"},
                },
            },
        },
        "provenance": {"type": "array", "items": {"type": "array"}},
        "code": {"type": "object"},
        "verdicts": {
            "type": "object",
            "required": ["corrected", "deferred", "confusions"],
            "properties": {
                "corrected": _INT,
                "deferred": _INT,
                "confusions": {"type": "array"},
                "confusion_count": _INT,
                "paths": _INT,
                "pairs": _INT,
                "max_faults": _INT,
                "d_U": _DIST,
                "guaranteed_faults": _NULLABLE_INT,
                "consistent_with_d_U": {"type": ["boolean", "null"]},
            },
        },
        "decode": {
            "type": "object",
            "required": ["syndrome", "found"],
            "properties": {
                "syndrome": {"type": "string"},
                "found": {"type": "boolean"},
                "faults": {"type": ["array", "null"]},
                "residual": {"type": ["string", "null"]},
            },
        },
        "failure": {
            "type": "object",
            "required": ["per_syndrome", "marginal", "mode"],
            "properties": {
                "per_syndrome": {"type": "object"},
                "marginal": _NUM,
                "stderr": _NUM,
                "mode": {"enum": ["exhaustive", "montecarlo"]},
                "shots": _NULLABLE_INT,
                "order": _NULLABLE_INT,
                "seed": _NULLABLE_INT,
                "truncation_mass": _NUM,
                "undecodable": _NUM,
                "p": _NUM,
                "convention": {"type": "string"},
            },
        },
        "bounds": {
            "type": "object",
            "required": ["exact_log2", "entropy_bits"],
            "properties": {
                "exact_log2": _NUM,
                "entropy_bits": _NUM,
                "budget_bits": {"type": ["number", "null"]},
                "T": _INT,
                "p": _NUM,
                "a": _INT,
                "faults": _INT,
            },
        },
        "generated": {"type": "string"},
    },
}


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def circuit_info(c: Circuit, source: str) -> dict:
    text = serialize_circuit(c)
    return {
        "source": source,
        "qubits": c.n_total,
        "n": c.n,
        "a": c.a,
        "b": c.b,
        "T": c.T,
        "sha256": hashlib.sha256(text.encode()).hexdigest(),
    }


def code_summary(st: SpacetimeCode) -> dict:
    return {
        "N": st.N,
        "k": st.base.k,
        "rank": st.base.stabilizer_rank,
        "gauge_rank": st.base.gauge_rank,
    }


def mask_table(st: SpacetimeCode) -> list[dict]:
    return [
        {"index": i, "case": r.case, "label": r.label, "output_image": str(r.out_image)}
        for i, r in enumerate(st.records)
    ]


def render_text(report: dict) -> str:
    """Indented human summary of a report."""
    lines: list[str] = []

    def walk(obj, indent):
        pad = "  " * indent
        if isinstance(obj, dict):
            for k in sorted(obj):
                v = obj[k]
                if isinstance(v, (dict, list)) and v:
                    lines.append(f"{pad}{k}:")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}{k}: {v}")
        elif isinstance(obj, list):
            if len(obj) > 40:
                lines.append(f"{pad}[{len(obj)} entries]")
                return
            for v in obj:
                if isinstance(v, (dict, list)):
                    lines.append(f"{pad}-")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}- {v}")

    if "generated" in report:
        return report["generated"]
    walk(report, 0)
    return "\n".join(lines) + "\n"
