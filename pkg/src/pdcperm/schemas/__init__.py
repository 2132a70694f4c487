"""JSON schemas for the report documents written by the command line tool."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

SCHEMA_VERSION = 1

NAMES = (
    "test",
    "pairwise",
    "curve",
    "simulate_curves",
    "simulate_null",
    "simulate_correlation",
    "verify_mixture",
    "verify_correlation",
)


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    if name not in NAMES:
        raise KeyError(f"no schema named {name!r}")
    return json.loads(resources.files(__name__).joinpath(f"{name}.schema.json").read_text("utf-8"))


def validate(doc: dict, name: str) -> None:
    """Raise ``jsonschema.ValidationError`` when ``doc`` does not match the schema."""
    import jsonschema

    jsonschema.validate(doc, load_schema(name))
