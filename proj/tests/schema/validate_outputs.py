"""Runs the CLI end to end and validates every emitted JSON file against the shipped schemas."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource

SCHEMAS = {
    "manifest.json": "manifest",
    "proposals.json": "proposals",
    "report.json": "report",
    "eval.json": "eval",
    "bench.json": "bench",
    "scene_gt.json": "scene_gt",
    "camera.json": "camera",
}


def main():
    cli, schema_dir = pathlib.Path(sys.argv[1]), pathlib.Path(sys.argv[2])
    store = {}
    for p in schema_dir.glob("*.schema.json"):
        s = json.loads(p.read_text())
        jsonschema.Draft7Validator.check_schema(s)
        store[p.name] = s

    registry = Registry().with_resources(
        (name, Resource.from_contents(schema)) for name, schema in store.items())

    def validator(name):
        return jsonschema.Draft7Validator(store[name], registry=registry)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        cfg = tmp / "config.json"
        cfg.write_text(json.dumps({"N": 2, "scenes": 2, "scene": {"occlusion_fraction": 0.3}}))
        data = tmp / "data"

        def run(*args):
            subprocess.run([str(cli), "--config", str(cfg), "--seed", "11", *args], check=True)

        run("synth", "--out", str(data))
        run("render", "--data", str(data), "--scene", "1", "--out", str(tmp / "render"))
        run("propose", "--data", str(data), "--out", str(tmp / "propose"))
        run("refine", "--data", str(data), "--proposals", str(tmp / "propose" / "proposals.json"), "--out", str(tmp / "refine"))
        run("--threads", "2", "estimate", "--data", str(data), "--out", str(tmp / "estimate"))
        run("eval", "--data", str(data), "--results", str(tmp / "estimate" / "results.csv"), "--out", str(tmp / "eval"))
        run("bench", "--out", str(tmp / "bench"))

        checked = 0
        for path in sorted(tmp.rglob("*.json")):
            if path.name not in SCHEMAS:
                continue
            validator(SCHEMAS[path.name] + ".schema.json").validate(json.loads(path.read_text()))
            checked += 1
        cfg_doc = json.loads((tmp / "estimate" / "manifest.json").read_text())["config"]
        validator("run_config.schema.json").validate(cfg_doc)
        expected = 7 + 2 * 2
        if checked < expected:
            sys.exit(f"validated {checked} files, expected at least {expected}")
        print(f"validated {checked} JSON files")


if __name__ == "__main__":
    main()
