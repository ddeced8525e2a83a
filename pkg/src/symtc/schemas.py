"""JSON schemas (draft 2020-12) for everything the command line prints."""

from __future__ import annotations

_num = {"type": "number"}
_int = {"type": "integer"}
_nullable_num = {"type": ["number", "null"]}

PATH = {
    "type": "object",
    "required": ["space", "rule_id", "samples"],
    "properties": {
        "space": {"type": "string"},
        "rule_id": {"type": ["integer", "null"]},
        "samples": {"type": "array", "minItems": 2, "items": {"type": "array", "items": _num}},
        "max_step": _num,
        "step_bound": _nullable_num,
    },
}

VERIFICATION_REPORT = {
    "type": "object",
    "required": ["map", "relation", "samples", "seed", "max_residual", "worst_input", "pass", "tol"],
    "properties": {
        "map": {"type": "string"},
        "relation": {"type": "string"},
        "samples": _int,
        "seed": _int,
        "max_residual": _nullable_num,
        "worst_input": {"type": ["array", "null"]},
        "pass": {"type": "boolean"},
        "tol": _num,
        "singular": _int,
        "details": {"type": "object"},
    },
}

SECTION_REPORT = {
    "type": "object",
    "required": ["planner", "pairs", "seed", "tol", "N", "max_step", "step_bound", "checks", "pass"],
    "properties": {
        "planner": {"type": "string"},
        "pairs": _int,
        "seed": _int,
        "N": _int,
        "step_bound": _nullable_num,
        "checks": {"type": "object", "additionalProperties": {"type": "boolean"}},
        "pass": {"type": "boolean"},
        "coverage_failures": _int,
        "singular_failures": _int,
    },
}

FACT = {
    "type": "object",
    "required": ["quantity", "kind", "value", "provenance"],
    "properties": {
        "quantity": {"enum": ["TC", "TCS", "EMB_DIM", "LEVEL", "B_SNM", "IMM"]},
        "kind": {"enum": ["exact", "lower", "upper", "relation"]},
        "value": {"type": ["integer", "string"]},
        "provenance": {"type": "string", "minLength": 1},
        "evidence": {"type": "array"},
    },
}

BOUND_REPORT = {
    "type": "object",
    "required": ["space", "facts"],
    "properties": {"space": {"type": "string"}, "facts": {"type": "array", "items": FACT}},
}

TABLE = {
    "type": "object",
    "required": ["table", "all_match"],
    "properties": {
        "table": {"enum": [1, 2]},
        "all_match": {"type": "boolean"},
        "columns": {
            "type": "array",
            "items": {"type": "object", "required": ["r", "u", "l", "match"]},
        },
        "rows": {
            "type": "array",
            "items": {"type": "object", "required": ["rho", "n", "cells", "extrapolated"]},
        },
    },
}

ERROR = {
    "type": "object",
    "required": ["error", "message"],
    "properties": {"error": {"type": "string"}, "message": {"type": "string"}},
}

ENVELOPE = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["version", "seed", "tol", "config", "command"],
    "properties": {
        "version": {"type": "string"},
        "seed": _int,
        "tol": _num,
        "config": {"type": "object"},
        "command": {"enum": ["plan", "verify", "bounds", "table"]},
        "path": PATH,
        "reports": {"type": "array", "items": {"anyOf": [VERIFICATION_REPORT, SECTION_REPORT]}},
        "bounds": BOUND_REPORT,
        "table": TABLE,
        "error": ERROR,
        "pass": {"type": "boolean"},
    },
}

SCHEMAS = {
    "envelope": ENVELOPE,
    "path": PATH,
    "verification_report": VERIFICATION_REPORT,
    "section_report": SECTION_REPORT,
    "bound_report": BOUND_REPORT,
    "table": TABLE,
}
