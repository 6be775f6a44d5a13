#!/usr/bin/env python3
"""Runs the CLI end to end and validates every JSON artifact it writes.

usage: validate_schemas.py <mh-phone binary> <schemas dir>
"""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def load_schema(schemas: Path, name: str) -> jsonschema.protocols.Validator:
    schema = json.loads((schemas / name).read_text())
    cls = jsonschema.validators.validator_for(schema)
    cls.check_schema(schema)
    return cls(schema)


def run(binary: str, *args: str) -> None:
    subprocess.run([binary, "--seed", "13", *args], check=True, stdout=subprocess.DEVNULL)


def main() -> int:
    binary, schemas = sys.argv[1], Path(sys.argv[2])
    model = load_schema(schemas, "model.schema.json")
    header = load_schema(schemas, "corpus-header.schema.json")
    record = load_schema(schemas, "corpus-record.schema.json")
    report = load_schema(schemas, "eval-report.schema.json")
    interp = load_schema(schemas, "interpret-report.schema.json")

    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        d = Path(tmp)
        run(binary, "synth", "--m-signs", "40", "--out", str(d / "real.jsonl"),
            "--truth-out", str(d / "truth.json"))
        checks = [(model, d / "truth.json")]
        for kind in ("dbn", "gmm", "gmm-lda"):
            out = d / f"{kind}.json"
            run(binary, "train", "--corpus", str(d / "real.jsonl"), "--model", kind,
                "--n-states", "4", "--topics", "3", "--out", str(out))
            run(binary, "generate", "--model", str(out), "--n", "10",
                "--out", str(d / f"{kind}.jsonl"))
            run(binary, "evaluate", "--real", str(d / "real.jsonl"), "--model", str(out),
                "--epochs", "5", "--seeds", "2", "--report", str(d / f"{kind}-report.json"))
            checks += [(model, out), (report, d / f"{kind}-report.json")]
        run(binary, "interpret", "--model", str(d / "dbn.json"), "--out", str(d / "interp.json"))
        checks.append((interp, d / "interp.json"))

        for validator, path in checks:
            errors = list(validator.iter_errors(json.loads(path.read_text())))
            for e in errors:
                print(f"{path.name}: {e.message}")
            failures += len(errors)

        for corpus in sorted(d.glob("*.jsonl")):
            lines = corpus.read_text().splitlines()
            for i, line in enumerate(lines):
                validator = header if i == 0 else record
                for e in validator.iter_errors(json.loads(line)):
                    print(f"{corpus.name} line {i + 1}: {e.message}")
                    failures += 1

    print("schema validation:", "ok" if failures == 0 else f"{failures} errors")
    return 0 if failures == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
