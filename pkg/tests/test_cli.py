import json
import subprocess
import sys

import pytest

from satotate import __version__
from satotate.cli import main, run


def run_json(capsys, *argv):
    code = main(["--format", "json", *argv])
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_report_schema(capsys):
    code, rep = run_json(capsys, "moments", "--p", "7", "--n", "3", "--m", "2")
    assert code == 0
    assert rep["tool"] == "satotate" and rep["version"] == __version__
    assert rep["config"]["p"] == 7
    assert isinstance(rep["assertions"], list) and rep["passed"] is True


@pytest.mark.parametrize("argv", [
    ["moments", "--p", "2", "--n", "3", "--m", "2"],
    ["moments", "--p", "9", "--n", "3", "--m", "2"],
    ["moments", "--p", "61", "--n", "3", "--m", "2", "--budget", "10"],
    ["stable", "--family", "g2", "--size", "2"],
    ["a4"],
    ["freudenthal", "--type", "E", "--rank", "6", "--highest", "1,0"],
    ["chunk-merge", "/nonexistent/manifest.jsonl"],
])
def test_config_errors_exit_2(capsys, argv):
    assert main(argv) == 2
    assert "satotate" in capsys.readouterr().err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as e:
        main(["moments", "--p", "7"])
    assert e.value.code == 2


def test_failed_assertion_exits_1(capsys):
    code = main(["clt-demo", "--n", "1", "--N", "2000", "--ks-threshold", "0.01"])
    assert code == 1
    assert "assertion failed" in capsys.readouterr().err


def test_formats(capsys, tmp_path):
    assert main(["--format", "csv", "haar", "--family", "su2", "--m", "2", "--N", "2000"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "key,value" and any(l.startswith("tool,satotate") for l in lines)
    assert main(["--format", "text", "a4", "--family", "sp", "--g", "2"]) == 0
    assert "PASS classification" in capsys.readouterr().out
    out = tmp_path / "r.json"
    assert main(["--out", str(out), "partition-oracle", "--p", "5", "--n", "3", "--m", "2"]) == 0
    assert json.loads(out.read_text())["passed"]


def test_a4_paths(capsys):
    _, rep = run_json(capsys, "a4", "--family", "sp", "--g", "2")
    assert abs(float(rep["result"]["a4"]) - 3) < 1e-8
    _, rep = run_json(capsys, "a4", "--root-system", "C", "2")
    assert float(rep["result"]["a4"]) == 3


def test_a4_table(capsys, tmp_path):
    t = tmp_path / "a5.txt"
    t.write_text("1 3\n15 -1\n20 0\n12 (1+sqrt(5))/2\n12 (1-sqrt(5))/2\n")
    code, rep = run_json(capsys, "a4", "--table", str(t), "--order", "60")
    assert code == 0 and str(rep["result"]["a4"]) == "3"


def test_chunk_run_and_merge(capsys, tmp_path):
    man = tmp_path / "m.jsonl"
    for i in range(4):
        assert main(["chunk-run", "--p", "7", "--n", "4", "--m", "2", "--chunk-count", "4",
                     "--chunk-id", str(i), "--manifest", str(man)]) == 0
    capsys.readouterr()
    code, rep = run_json(capsys, "chunk-merge", str(man), "--verify")
    assert code == 0 and int(rep["result"]["sum"]) == 3528

    lines = man.read_text().splitlines()
    missing = tmp_path / "missing.jsonl"
    missing.write_text("\n".join(lines[:2] + lines[3:]) + "\n")
    assert main(["chunk-merge", str(missing)]) == 2
    assert "missing chunk ids [2]" in capsys.readouterr().err
    dup = tmp_path / "dup.jsonl"
    dup.write_text("\n".join(lines + lines[:1]) + "\n")
    assert main(["chunk-merge", str(dup)]) == 2
    assert "duplicate" in capsys.readouterr().err


def test_results_identical_across_threads(capsys):
    results = []
    for t in ("1", "2", "4"):
        _, rep = run_json(capsys, "moments", "--p", "11", "--n", "4", "--m", "4",
                          "--chunks", "8", "--threads", t)
        results.append(json.dumps(rep["result"], sort_keys=True))
    assert len(set(results)) == 1
    mc = []
    for t in ("1", "3"):
        _, rep = run_json(capsys, "haar", "--family", "sp", "--g", "2", "--m", "4",
                          "--N", "5000", "--threads", t, "--method", "mc")
        mc.append(json.dumps(rep["result"], sort_keys=True))
    assert mc[0] == mc[1]


def test_vrd_reports_informational_rows(capsys):
    code, rep = run_json(capsys, "vrd-bounds", "--m", "6", "--points", "500")
    names = {a["name"]: a["passed"] for a in rep["assertions"]}
    assert names["inner_m6"] and names["outerRing_m6"]
    assert not any(n.startswith("inner_literal") for n in names)
    assert code == (0 if all(names.values()) else 1)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "satotate", "--version"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and __version__ in r.stdout


def test_run_returns_report(capsys):
    code, rep = run(["weil-sweep", "--p", "5", "--degrees", "3"])
    capsys.readouterr()
    assert code == 0 and rep.passed
