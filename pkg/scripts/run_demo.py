#!/usr/bin/env python3
"""End-to-end walkthrough on the farmland demo fixture.

Writes the fixture source files, ingests all three stores, retrieves evidence,
trains the scoring head, and prints the evaluation report. Everything runs
offline with the deterministic provider.
"""

import argparse
import json
import tempfile
from pathlib import Path

from evidentia import demo
from evidentia.cli import main as cli


def run(workdir: Path) -> None:
    paths = demo.write_farmland_fixture(workdir / "inputs")
    stores = workdir / "stores"
    for source in ("conceptnet", "wiki", "dict"):
        assert cli(["ingest", source, "--input", str(paths[source]),
                    "--out", str(stores / source)]) == 0

    config = workdir / "config.json"
    config.write_text(json.dumps({"training": {"max_steps": 200, "hidden": 32, "seed": 0}}))
    evidence = workdir / "evidence.jsonl"
    model = workdir / "model.json"
    report = workdir / "report.json"

    assert cli(["retrieve", "--data", str(paths["data"]), "--stores", str(stores),
                "--config", str(config), "--out", str(evidence)]) == 0
    assert cli(["train", "--data", str(paths["data"]), "--evidence", str(evidence),
                "--config", str(config), "--out", str(model)]) == 0
    assert cli(["evaluate", "--data", str(paths["data"]), "--evidence", str(evidence),
                "--model", str(model), "--config", str(config), "--report", str(report)]) == 0

    payload = json.loads(report.read_text())
    print("\nEvidence for the gold choice (midwest):")
    for line in evidence.read_text().splitlines():
        bundle = json.loads(line)
        if bundle["choice_label"] == "A":
            for item in bundle["items"]:
                print(f"  [{item['source']:<10}] {item['text'][:100]}")
    print(f"\naccuracy: {payload['accuracy']:.3f} ({payload['correct']}/{payload['n']})")
    print(f"artifacts in {workdir}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", type=Path, default=None,
                        help="directory for fixture files and artifacts (default: temp dir)")
    args = parser.parse_args()
    run(args.workdir or Path(tempfile.mkdtemp(prefix="evidentia-demo-")))
