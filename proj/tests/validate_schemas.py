"""Validate a config file or an output tree against the schemas in docs/schemas."""
import argparse
import json
import sys
from pathlib import Path

import jsonschema
from referencing import Registry, Resource


def load_schemas(directory):
    schemas = {}
    for p in sorted(Path(directory).glob("*.schema.json")):
        schemas[p.name] = json.loads(p.read_text())
    registry = Registry().with_resources(
        (name, Resource.from_contents(s)) for name, s in schemas.items()
    )
    return schemas, registry


def schema_for(rel):
    parts = rel.parts
    if rel.name == "manifest.json":
        return "manifest.schema.json" if len(parts) == 1 else "trajectory_manifest.schema.json"
    if rel.name == "config.json" and len(parts) == 1:
        return "config.schema.json"
    if rel.name == "summary.json":
        return "stage_summary.schema.json"
    if parts[0] == "report" and rel.name == "report.json":
        return "report.schema.json"
    if parts[0] == "wave" and rel.suffix == ".json":
        return "wave_profile.schema.json"
    if rel.name == "ledger.json":
        return "envelope_ledger.schema.json"
    return None


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--schemas", required=True)
    ap.add_argument("--config")
    ap.add_argument("--out")
    args = ap.parse_args()
    schemas, registry = load_schemas(args.schemas)

    targets = []
    if args.config:
        targets.append((Path(args.config), "config.schema.json"))
    if args.out:
        root = Path(args.out)
        for p in sorted(root.rglob("*.json")):
            name = schema_for(p.relative_to(root))
            if name is None:
                print(f"no schema for {p}")
                return 1
            targets.append((p, name))
        if not targets:
            print(f"no JSON artifacts under {root}")
            return 1

    failures = 0
    for path, name in targets:
        validator = jsonschema.Draft202012Validator(schemas[name], registry=registry)
        errors = list(validator.iter_errors(json.loads(path.read_text())))
        for e in errors[:5]:
            print(f"{path}: {'/'.join(map(str, e.absolute_path))}: {e.message}")
        failures += bool(errors)
    print(f"{len(targets) - failures}/{len(targets)} documents valid")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
