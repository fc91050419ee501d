import json
import subprocess
import sys

import pytest

from tercom.cli import main


def run_cli(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_table_degree5(capsys):
    code, out, err = run_cli(["table", "--degree", "5", "--max-dim", "99"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["schema"] == "tercom/table/v1"
    assert len(payload["rows"]) == 7
    assert all(r["new"] == 0 and r["row_space_match"] for r in payload["rows"])


def test_table_degree7_finds_new(capsys):
    code, out, _ = run_cli(["table", "--degree", "7", "--max-dim", "99"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert sum(r["new"] for r in payload["rows"]) > 0


def test_table_explicit_partitions_and_csv(capsys, tmp_path):
    out_file = tmp_path / "rows.csv"
    code, out, _ = run_cli(
        [
            "table",
            "--degree",
            "11",
            "--partitions",
            "11;10,1",
            "--format",
            "csv",
            "--out",
            str(out_file),
        ],
        capsys,
    )
    assert code == 0
    lines = out_file.read_text().strip().splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("partition,")


def test_table_rejects_bad_prime(capsys):
    code, _out, err = run_cli(["table", "--prime", "1048575"], capsys)
    assert code == 2
    assert "not prime" in err


def test_table_rejects_small_prime(capsys):
    code, _out, err = run_cli(["table", "--prime", "7", "--degree", "11"], capsys)
    assert code == 2


def test_table_rejects_large_partition_without_flag(capsys):
    code, _out, err = run_cli(
        ["table", "--degree", "11", "--partitions", "6,5"], capsys
    )
    assert code == 0  # dimension 132 < 400 is allowed
    code, _out, err = run_cli(
        ["table", "--degree", "11", "--partitions", "6,3,2"], capsys
    )
    assert code == 2
    assert "allow-large" in err


def test_extract_no_new_identity_errors(capsys):
    code, _out, err = run_cli(
        ["extract", "--degree", "11", "--partitions", "10,1"], capsys
    )
    assert code == 2
    assert "no new identity" in err


def test_table_check_prime(capsys):
    code, out, _ = run_cli(
        ["table", "--degree", "11", "--partitions", "11;2,1,1,1,1,1,1,1,1,1",
         "--check-prime"],
        capsys,
    )
    assert code == 0
    payload = json.loads(out)
    assert [r["all"] for r in payload["rows"]] == [8, 76]


def test_cache_on_off_identical(capsys, tmp_path):
    argv = ["table", "--degree", "11", "--partitions", "2,1,1,1,1,1,1,1,1,1"]
    code1, out1, _ = run_cli(argv, capsys)
    code2, out2, _ = run_cli(argv + ["--cache-dir", str(tmp_path)], capsys)
    code3, out3, _ = run_cli(argv + ["--cache-dir", str(tmp_path)], capsys)
    assert code1 == code2 == code3 == 0
    assert out1 == out2 == out3


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "tercom.cli", "table", "--degree", "5"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    payload = json.loads(proc.stdout)
    assert payload["degree"] == 5
