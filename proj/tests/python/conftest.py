import json
import os
import pathlib
import subprocess

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("VSR_CLI", str(ROOT / "build" / "tools" / "vsr"))
    if not pathlib.Path(path).exists():
        pytest.skip("vsr executable not built")

    def run(*args, check=None):
        proc = subprocess.run([path, *map(str, args)], capture_output=True, text=True)
        if check is not None:
            assert proc.returncode == check, proc.stderr + proc.stdout
        return proc

    return run


@pytest.fixture(scope="session")
def validate():
    from jsonschema import Draft202012Validator
    from referencing import Registry, Resource

    schema_dir = pathlib.Path(os.environ.get("VSR_SCHEMAS", ROOT / "schemas"))
    resources = []
    for f in schema_dir.glob("*.schema.json"):
        resources.append((f.name, Resource.from_contents(json.loads(f.read_text()))))
    registry = Registry().with_resources(resources)

    def check(doc, schema_name):
        schema = json.loads((schema_dir / schema_name).read_text())
        Draft202012Validator(schema, registry=registry).validate(doc)

    return check
