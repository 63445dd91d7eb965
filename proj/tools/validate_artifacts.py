#!/usr/bin/env python3
# Copyright 2026 The thruwall Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Validate thruwall output artifacts against schemas/.

With --thruwall the full CLI pipeline is run first on --config into --out.
"""

import argparse
import csv
import fnmatch
import json
import pathlib
import shutil
import subprocess
import sys

import jsonschema

ROOT = pathlib.Path(__file__).resolve().parent.parent
SCHEMAS = ROOT / "schemas"

# artifact glob (relative to the output root) -> schema file
JSON_ARTIFACTS = {
    "data/*.provenance.json": "provenance.schema.json",
    "features/*.meta.json": "features_meta.schema.json",
    "ris/phase_config.json": "phase_config.schema.json",
    "ris/gain_report.json": "gain_report.schema.json",
    "ris/link_budget.json": "link_budget.schema.json",
    "runs/*/run.json": "run.schema.json",
    "runs/*/metrics.json": "metrics.schema.json",
    "runs/*/training.json": "training.schema.json",
    "eval/*.json": "metrics.schema.json",
    "report/report.json": "report.schema.json",
    "report/confusion.json": "confusion_report.schema.json",
}


def run_pipeline(exe, config, out):
    if out.exists():
        shutil.rmtree(out)
    base = [exe, "--config", str(config), "--out", str(out)]

    def cli(*args):
        proc = subprocess.run(base + list(args), capture_output=True, text=True)
        if proc.returncode != 0:
            sys.exit(f"{' '.join(args)} failed ({proc.returncode}): {proc.stdout}{proc.stderr}")
        for line in proc.stderr.splitlines():
            json.loads(line)  # logs are JSON lines

    cli("gen-data")
    cli("ris-optimize")
    runs = []
    for name in ("ris_off", "ris_on"):
        cli("preprocess", "--input", str(out / "data" / f"{name}.twd"))
        cli("train", "--input", str(out / "features" / f"{name}.twd"), "--name", name)
        runs.append(str(out / "runs" / name))
    cli("--variant", "time-only", "train", "--input", str(out / "features" / "ris_on.twd"),
        "--name", "time-only")
    runs.append(str(out / "runs" / "time-only"))
    cli("eval", "--checkpoint", str(out / "runs" / "ris_on" / "checkpoint.ckpt"), "--input",
        str(out / "features" / "ris_on.twd"), "--split", "test", "--output",
        str(out / "eval" / "ris_on_test.json"))
    cli("report", "--runs", *runs)


def check_csv(path, header):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        return [f"{path}: empty"]
    got = rows[0]
    errors = []
    if header[-1] == "*":
        if got[: len(header) - 1] != header[:-1]:
            errors.append(f"{path}: header {got} does not start with {header[:-1]}")
    elif got != header:
        errors.append(f"{path}: header {got} != {header}")
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(got):
            errors.append(f"{path}:{i}: {len(row)} fields, header has {len(got)}")
    return errors


def validate(out, configs):
    errors, checked = [], 0
    for pattern, schema_name in JSON_ARTIFACTS.items():
        schema = json.loads((SCHEMAS / schema_name).read_text())
        validator = jsonschema.Draft202012Validator(schema)
        for path in sorted(out.glob(pattern)):
            checked += 1
            for err in validator.iter_errors(json.loads(path.read_text())):
                errors.append(f"{path}: {err.json_path}: {err.message}")

    headers = json.loads((SCHEMAS / "csv_headers.json").read_text())
    headers.pop("$comment", None)
    for path in sorted(out.rglob("*.csv")):
        rel = path.relative_to(out).as_posix()
        match = [h for pat, h in headers.items() if fnmatch.fnmatch(rel, pat)]
        if not match:
            errors.append(f"{path}: no header specification")
            continue
        checked += 1
        errors += check_csv(path, match[0])

    config_validator = jsonschema.Draft202012Validator(
        json.loads((SCHEMAS / "config.schema.json").read_text()))
    for path in configs:
        checked += 1
        for err in config_validator.iter_errors(json.loads(pathlib.Path(path).read_text())):
            errors.append(f"{path}: {err.json_path}: {err.message}")
    return checked, errors


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=pathlib.Path, required=True, help="output root to validate")
    ap.add_argument("--thruwall", help="CLI binary; runs the pipeline into --out first")
    ap.add_argument("--config", type=pathlib.Path, default=ROOT / "configs" / "smoke.json")
    ap.add_argument("--check-config", action="append", default=[],
                    help="additional config files to validate")
    args = ap.parse_args()

    if args.thruwall:
        run_pipeline(args.thruwall, args.config, args.out)
    checked, errors = validate(args.out, [args.config, *args.check_config])
    for e in errors:
        print(e)
    print(f"{checked} artifacts checked, {len(errors)} problem(s)")
    return 1 if errors or checked == 0 else 0


if __name__ == "__main__":
    sys.exit(main())
