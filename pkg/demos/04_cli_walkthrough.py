"""
The command line, end to end
============================

sample -> center -> verify -> plot, all deterministic given the seed.  This
script drives the CLI in-process and leaves its artifacts in ./demo_output/.
"""

import json
import pathlib

from yaoyao.cli import main

out = pathlib.Path("demo_output")
out.mkdir(exist_ok=True)

spec = out / "ring.json"
spec.write_text(json.dumps({
    "kind": "mixture",
    "components": [
        {"kind": "gaussian-mixture", "means": [[-1.0, 0.0]],
         "cov_factors": [[[0.3, 0.0], [0.0, 0.3]]], "weights": [1.0]},
        {"kind": "uniform-box", "lo": [0.0, -1.0], "hi": [2.0, 1.0]},
    ],
    "weights": [1.0, 2.0],
}, indent=2))

steps = [
    ["sample", "--spec", str(spec), "-n", "1000", "--seed", "42",
     "-o", str(out / "points.csv")],
    ["center", str(out / "points.csv"), "-o", str(out / "partition.json")],
    ["verify", str(out / "partition.json"), str(out / "points.csv"),
     "--count", "500", "-o", str(out / "report.json")],
    ["plot", str(out / "partition.json"), str(out / "points.csv"),
     "-o", str(out / "partition.svg")],
]

for argv in steps:
    print("$ yaoyao " + " ".join(argv))
    code = main(argv)
    print(f"  -> exit {code}")
    assert code == 0

report = json.loads((out / "report.json").read_text())
print("\nall checks passed:", report["all_passed"])
for check in report["checks"]:
    print(f"  {check['name']}: {'PASS' if check['passed'] else 'FAIL'}")
print(f"\nartifacts in {out}/: points.csv, partition.json, report.json, partition.svg")
