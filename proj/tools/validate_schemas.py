#!/usr/bin/env python3
"""Validate instances and certificates against the JSON schemas."""
import json
import pathlib
import sys

import jsonschema
from referencing import Registry, Resource

root = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).resolve().parents[1])
schemas = {p.name: json.loads(p.read_text()) for p in (root / "schemas").glob("*.schema.json")}
registry = Registry().with_resources(
    (s["$id"], Resource.from_contents(s)) for s in schemas.values()
)


def check(schema_name, paths):
    validator = jsonschema.Draft202012Validator(schemas[schema_name], registry=registry)
    bad = 0
    for p in paths:
        errors = list(validator.iter_errors(json.loads(p.read_text())))
        for e in errors[:3]:
            print(f"{p.name}: {e.json_path}: {e.message[:200]}")
        bad += bool(errors)
        print(f"{'ok  ' if not errors else 'FAIL'} {schema_name:28} {p.relative_to(root)}")
    return bad


for s in schemas.values():
    jsonschema.Draft202012Validator.check_schema(s)
failures = check("instance.schema.json", sorted((root / "data/instances").glob("*.json")))
failures += check("certificate.schema.json", sorted((root / "data/golden").glob("*.json")))
sys.exit(1 if failures else 0)
