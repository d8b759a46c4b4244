#!/usr/bin/env python3
"""Run every cellnet command on the example data and validate the JSON reports.

usage: validate_schemas.py <cellnet> <schemas dir> <examples dir>
"""
import json
import os
import subprocess
import sys
import tempfile

import jsonschema

CASES = [
    ["closure", "ring22.json"],
    ["closure", "fig2.json"],
    ["closure", "two_generators.json"],
    ["fundamental", "fig2.json"],
    ["fundamental", "r13.json"],
    ["partitions", "fig2.json"],
    ["partitions", "fig2.json", "--all"],
    ["quotient", "fig2.json", "--partition", "fig2_block_partition.json"],
    ["blocks", "fig2.json"],
    ["blocks", "two_generators.json", "--projection-only"],
    ["decompose", "ring22.json"],
    ["decompose", "r51.json", "--seed", "3"],
    ["decompose", "r51.json", "--mode", "exact"],
    ["decompose", "fig2.json", "--dim", "2"],
    ["verify-pb", "ring22.json", "--block", "c2,c3", "--cell", "c0"],
    ["verify-pb", "ring22.json", "--block", "c2,c3", "--cell", "c0", "--dim", "2"],
    ["simulate", "cubic_fig2.json", "--x0", "1,2,3,4", "--T", "1"],
    ["simulate", "hopf_r13.json", "--x0", "0.1,0,0,0,0,0,0,0", "--T", "1", "--frame", "rotating"],
    ["branches", "steady_r13.json"],
    ["branches", "steady_r33.json"],
    ["branches", "hopf_r13.json"],
    ["selftest", "--only", "1"],
    ["selftest"],
]


def load(path):
    with open(path) as f:
        return json.load(f)


def main():
    cellnet, schema_dir, data_dir = sys.argv[1:4]
    envelope = load(os.path.join(schema_dir, "report.schema.json"))
    jsonschema.Draft202012Validator.check_schema(envelope)
    failures = 0
    for case in CASES:
        args = [a if not a.endswith(".json") else os.path.join(data_dir, a) for a in case]
        schema = load(os.path.join(schema_dir, case[0] + ".schema.json"))
        jsonschema.Draft202012Validator.check_schema(schema)
        with tempfile.TemporaryDirectory() as tmp:
            extra = []
            if case[0] == "branches":
                # CSV goes to a file; the report file must match stdout
                extra = ["--csv", os.path.join(tmp, "b.csv"), "--report", os.path.join(tmp, "r.json")]
            proc = subprocess.run([cellnet, "--json"] + args + extra, capture_output=True, text=True)
            label = " ".join(case)
            if proc.returncode not in (0, 3):
                print(f"FAIL {label}: exit {proc.returncode}: {proc.stderr.strip()}")
                failures += 1
                continue
            try:
                report = json.loads(proc.stdout)
                jsonschema.validate(report, envelope)
                jsonschema.validate(report, schema)
                if extra and load(os.path.join(tmp, "r.json")) != report:
                    raise ValueError("--report file differs from stdout")
            except (ValueError, jsonschema.ValidationError) as e:
                msg = e.message if isinstance(e, jsonschema.ValidationError) else str(e)
                print(f"FAIL {label}: {msg}")
                failures += 1
                continue
            print(f"ok   {label}")
    print(f"{len(CASES) - failures}/{len(CASES)} reports valid")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
