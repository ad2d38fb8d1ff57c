"""JSON Schemas (draft 2020-12) for each subcommand's ``--format json`` output."""

from __future__ import annotations

from typing import Any

RATIONAL: dict[str, Any] = {
    "type": "object",
    "properties": {
        "value": {"type": "string", "pattern": r"^-?[0-9]+(/[0-9]+)?$"},
        "decimal": {"type": "number"},
    },
    "required": ["value", "decimal"],
    "additionalProperties": False,
}
MAYBE_RATIONAL = {"oneOf": [RATIONAL, {"type": "null"}]}
ASSIGNMENT = {"type": "object", "additionalProperties": {"type": "string"}}


def _obj(props: dict[str, Any], required: list[str] | None = None) -> dict[str, Any]:
    return {
        "type": "object",
        "properties": props,
        "required": list(props) if required is None else required,
        "additionalProperties": False,
    }


def _command(name: str) -> dict[str, Any]:
    return {"const": name}


PREIMAGE = _obj({"intervention": {"type": "string"}, "probability": RATIONAL, "weight": RATIONAL, "mass": RATIONAL})
SIDE = {
    "type": "array",
    "items": _obj({"intervention": {"type": "string"}, "probability": RATIONAL, "weight": RATIONAL}),
}
BREAKDOWN = _obj(
    {"from": SIDE, "to": SIDE, "from_aggregate": RATIONAL, "to_aggregate": RATIONAL, "effect": RATIONAL}
)

SCHEMAS: dict[str, dict[str, Any]] = {
    "validate": _obj(
        {
            "command": _command("validate"),
            "valid": {"type": "boolean"},
            "files": {
                "type": "array",
                "items": _obj(
                    {
                        "path": {"type": "string"},
                        "declarations": {"type": "integer", "minimum": 0},
                        "diagnostics": {
                            "type": "array",
                            "items": _obj(
                                {
                                    "severity": {"enum": ["error", "warning"]},
                                    "message": {"type": "string"},
                                    "line": {"type": "integer", "minimum": 1},
                                    "column": {"type": "integer", "minimum": 1},
                                    "length": {"type": "integer", "minimum": 1},
                                    "context": {"type": "string"},
                                }
                            ),
                        },
                    }
                ),
            },
        }
    ),
    "intervene": {
        "oneOf": [
            _obj(
                {
                    "command": _command("intervene"),
                    "model": {"type": "string"},
                    "intervention": {"type": "string"},
                    "exact": {"const": True},
                    "scope": {"type": "array", "items": {"type": "string"}},
                    "rows": {"type": "array", "items": _obj({"assignment": ASSIGNMENT, "probability": RATIONAL})},
                }
            ),
            _obj(
                {
                    "command": _command("intervene"),
                    "model": {"type": "string"},
                    "intervention": {"type": "string"},
                    "exact": {"const": False},
                    "samples": {"type": "integer", "minimum": 1},
                    "seed": {"type": "integer", "minimum": 0},
                    "scope": {"type": "array", "items": {"type": "string"}},
                    "rows": {
                        "type": "array",
                        "items": _obj(
                            {
                                "assignment": ASSIGNMENT,
                                "estimate": {"type": "number", "minimum": 0, "maximum": 1},
                                "stderr": {"type": "number", "minimum": 0},
                            }
                        ),
                    },
                }
            ),
        ]
    },
    "consistency": _obj(
        {
            "command": _command("consistency"),
            "alignment": {"type": "string"},
            "mode": {"enum": ["exact", "tv"]},
            "threshold": RATIONAL,
            "passed": {"type": "boolean"},
            "epsilon": RATIONAL,
            "entries": {
                "type": "array",
                "items": _obj(
                    {
                        "intervention": {"type": "string"},
                        "induced": {"type": "string"},
                        "distance": RATIONAL,
                        "pass": {"type": "boolean"},
                    }
                ),
            },
        }
    ),
    "ambiguity": _obj(
        {
            "command": _command("ambiguity"),
            "alignment": {"type": "string"},
            "intervention": {"type": "string"},
            "outcome": {"type": "string"},
            "aggregator": {"type": "string"},
            "preimages": {"type": "array", "items": PREIMAGE, "minItems": 1},
            "min": RATIONAL,
            "max": RATIONAL,
            "spread": RATIONAL,
            "aggregate": RATIONAL,
        }
    ),
    "audit": _obj(
        {
            "command": _command("audit"),
            "audit": {"type": "string"},
            "resume1": ASSIGNMENT,
            "resume2": ASSIGNMENT,
            "rule": {"enum": ["modal", "probabilistic"]},
            "aggregator": {"type": "string"},
            "masses": {"type": "array", "items": RATIONAL, "minItems": 2, "maxItems": 2},
            "races": {
                "type": "array",
                "minItems": 2,
                "maxItems": 2,
                "items": {
                    "oneOf": [
                        {"type": "null"},
                        _obj(
                            {
                                "race": {"type": ["string", "null"]},
                                "distribution": {"type": "object", "additionalProperties": RATIONAL},
                                "tie": {"type": "boolean"},
                            }
                        ),
                    ]
                },
            },
            "outcome_probabilities": {"type": "array", "items": RATIONAL, "minItems": 2, "maxItems": 2},
            "callback_ratio": MAYBE_RATIONAL,
            "audit_effect": RATIONAL,
            "race_effect": MAYBE_RATIONAL,
            "deviation": MAYBE_RATIONAL,
            "effects_equal": {"type": ["boolean", "null"]},
            "verdict": {"type": ["boolean", "null"]},
            "positivity": {
                "oneOf": [
                    {"type": "null"},
                    _obj({"passed": {"type": "boolean"}, "masses": {"type": "array", "items": RATIONAL}}),
                ]
            },
            "atypicality": {
                "type": "array",
                "items": _obj(
                    {
                        "resume": ASSIGNMENT,
                        "anchor": {"type": "string"},
                        "resume_mass": RATIONAL,
                        "anchor_mass": RATIONAL,
                        "distance": MAYBE_RATIONAL,
                        "resume_empty": {"type": "boolean"},
                        "anchor_empty": {"type": "boolean"},
                    }
                ),
            },
            "notes": {"type": "array", "items": {"type": "string"}},
        }
    ),
    "norms": _obj(
        {
            "command": _command("norms"),
            "compare": {"type": "string"},
            "contrast": _obj({"variable": {"type": "string"}, "from": {"type": "string"}, "to": {"type": "string"}}),
            "outcome": {"type": "string"},
            "aggregator": {"type": "string"},
            "attribute_effect": RATIONAL,
            "norm_effect": RATIONAL,
            "delta": RATIONAL,
            "reclassification": _obj(
                {
                    "total": RATIONAL,
                    "by_variable": {"type": "object", "additionalProperties": RATIONAL},
                    "by_value": {
                        "type": "array",
                        "items": _obj({"variable": {"type": "string"}, "value": {"type": "string"}, "mass": RATIONAL}),
                    },
                }
            ),
            "breakdown": _obj({"actual": BREAKDOWN, "ideal": BREAKDOWN}),
        }
    ),
    "quotient": _obj(
        {
            "command": _command("quotient"),
            "alignment": {"type": "string"},
            "aggregator": {"type": "string"},
            "exact": {"type": "boolean"},
            "epsilon": RATIONAL,
            "model": {"type": "string"},
        }
    ),
}

for _schema in SCHEMAS.values():
    _schema["$schema"] = "https://json-schema.org/draft/2020-12/schema"
