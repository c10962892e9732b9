import json
import os
import subprocess
from pathlib import Path

import numpy as np
import pytest

jsonschema = pytest.importorskip("jsonschema")

ROOT = Path(__file__).resolve().parents[2]
CLI = os.path.abspath(os.environ.get("TRANSMEAN_CLI", ROOT / "build" / "transmean"))
SCHEMA = json.loads(Path(os.environ.get("TRANSMEAN_SCHEMA", ROOT / "docs" / "report.schema.json")).read_text())


def write_stack(path, x, sep="\t"):
    n, r, c = x.shape
    lines = [f"{n} {r} {c}"]
    for i in range(n):
        lines += [sep.join(repr(float(v)) for v in x[i, a]) for a in range(r)]
    path.write_text("\n".join(lines) + "\n")


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("reports")
    rng = np.random.default_rng(5)
    x = rng.normal(size=(10, 12, 5))
    x[:, :, 3:] += 2.0
    write_stack(d / "data.txt", x)
    write_stack(d / "flat.txt", np.ones((4, 3, 3)), sep=",")
    write_stack(d / "null.txt", rng.normal(size=(10, 12, 5)))
    (d / "sets.txt").write_text("all\t" + "\t".join(str(a + 1) for a in range(12)) + "\nsmall\t1\t2\n")
    (d / "m0.txt").write_text("\n".join("\t".join("0" for _ in range(5)) for _ in range(12)) + "\n")
    (d / "sim.txt").write_text("N = 10\nr = 20\nc = 4\nmean = right_block(2,0.1)\nreplicates = 100\n"
                               "methods = H4,H2_2,anova_fdr,kw_bon,cq_bon\n")
    return d


CASES = {
    "test_partition": (["test", "data.txt", "--partition", "sizes=3,2"], 0),
    "test_groups": (["test", "data.txt", "--partition", "groups=1:1,2:1,4:2,5:2"], 0),
    "test_rows": (["test", "data.txt", "--partition", "sizes=6,6", "--orientation", "rows"], 0),
    "test_m0": (["test", "data.txt", "--m0", "m0.txt"], 0),
    "test_diff": (["test", "data.txt", "--diff-cols", "1,4"], 0),
    "test_degenerate": (["test", "flat.txt", "--partition", "sizes=3"], 3),
    "screen": (["screen", "data.txt", "--sets", "sets.txt", "--partition", "sizes=3,2"], 0),
    "screen_bon": (["screen", "data.txt", "--sets", "sets.txt", "--partition", "sizes=3,2",
                    "--correction", "bonferroni", "--min-size", "2"], 0),
    "discover": (["discover", "data.txt"], 0),
    "discover_null": (["discover", "null.txt"], 0),
    "discover_degenerate": (["discover", "flat.txt"], 3),
    "convert": (["convert", "data.txt", "--to", "long", "-o", "long.csv"], 0),
    "simulate_config": (["simulate", "--config", "sim.txt", "-o", "sim.csv", "--quiet"], 0),
    "simulate_preset": (["simulate", "--preset", "table1", "--cell", "r=100,N=10", "--reps", "100",
                         "-o", "table1.csv", "--quiet"], 0),
}


@pytest.mark.parametrize("case", sorted(CASES))
def test_report_matches_schema(files, case):
    args, code = CASES[case]
    proc = subprocess.run([CLI, *args], cwd=files, capture_output=True, text=True)
    assert proc.returncode == code, proc.stderr
    report = json.loads(proc.stdout)
    jsonschema.validate(report, SCHEMA, cls=jsonschema.Draft202012Validator)
    assert report["command"] == args[0]


def test_schema_is_valid():
    jsonschema.Draft202012Validator.check_schema(SCHEMA)


def test_usage_error_exit_code(files):
    proc = subprocess.run([CLI, "test", "data.txt"], cwd=files, capture_output=True, text=True)
    assert proc.returncode == 2
    assert proc.stdout == ""


def test_parse_error_names_line(files):
    (files / "bad.txt").write_text("2 1 2\n1\t2\n1\tx\n")
    proc = subprocess.run([CLI, "test", "bad.txt", "--partition", "sizes=2"], cwd=files, capture_output=True, text=True)
    assert proc.returncode == 1
    assert "bad.txt:3" in proc.stderr
