import csv
import json
import shutil
from pathlib import Path

import pytest

from zero_regrets.cli import main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def _csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_solve_example1_writes_json_and_csv(tmp_path, capsys):
    out = tmp_path / "ex1.json"
    assert main(["solve", str(FIXTURES / "example1.json"), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["status"] == "PNE_FOUND"
    assert report["pnes"] == [{"profile": [[1, 0], [1, 0]], "welfare": 5}]
    assert report["osw"] == 8 and report["pos"] == "8/5"
    row = _csv(tmp_path / "ex1.csv")[0]
    assert row["instance"] == "example1" and row["PoS"] == "1.6000"
    assert row["#EI"] == "1" and row["#It"] == "2" and row["PNE*"] == "5" and row["OSW"] == "8"
    assert json.loads(capsys.readouterr().out)["status"] == "PNE_FOUND"


def test_csv_appends_rows(tmp_path):
    out = tmp_path / "r.json"
    for _ in range(2):
        main(["solve", str(FIXTURES / "example1.json"), "--out", str(out)])
    assert len(_csv(tmp_path / "r.csv")) == 2


def test_enumerate_example2(capsys):
    assert main(["enumerate", str(FIXTURES / "example2.json")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert [p["welfare"] for p in report["pnes"]] == [18, 16, 16]
    assert report["pos"] == "10/9" and report["poa"] == "5/4"


def test_epsilon_example1(capsys):
    assert main(["epsilon", str(FIXTURES / "example1.json"), "--epsilon", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["pnes"][0]["welfare"] == 8


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"type": "kpg", "n": 2,\n  "m": }')
    out = tmp_path / "bad_out.json"
    assert main(["solve", str(bad), "--out", str(out)]) == 1
    err = capsys.readouterr().err
    assert "line 2" in err
    assert not out.exists() and not (tmp_path / "bad_out.csv").exists()


def test_missing_field(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"type": "kpg", "n": 2}')
    assert main(["solve", str(bad)]) == 1
    assert "error" in capsys.readouterr().err


def test_time_limit_exit_code(tmp_path, capsys):
    path = tmp_path / "big.json"
    main(["gen", "kpg", "--n", "2", "--m", "25", "--seed", "3", "--out", str(path)])
    assert main(["solve", str(path), "--time-limit", "0"]) == 2
    assert json.loads(capsys.readouterr().out)["status"] == "TIME_LIMIT"


def test_gen_is_deterministic(tmp_path):
    for family, extra in (("kpg", ["--m", "5"]), ("nfg", ["--vertices", "20"]), ("qipg", []), ("cfld", [])):
        a, b = tmp_path / f"{family}_a.json", tmp_path / f"{family}_b.json"
        for p in (a, b):
            assert main(["gen", family, *extra, "--seed", "4", "--out", str(p)]) == 0
        assert a.read_text() == b.read_text()


def test_oracle_json(capsys):
    assert main(["oracle", str(FIXTURES / "example1.json")]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["pnes"] == [{"profile": [[1, 0], [1, 0]], "welfare": 5}]
    assert res["pos"] == "8/5" and res["profiles"] == 9


def test_reduce_bkp(tmp_path, capsys):
    out = tmp_path / "kpg.json"
    assert main(["reduce", "bkp", str(FIXTURES / "bkp_small.json"), "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["n"] == 2 and data["m"] == 2
    assert main(["solve", str(out)]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "PNE_FOUND"


def test_bkp_file_solves_directly(capsys):
    assert main(["solve", str(FIXTURES / "bkp_small.json")]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "PNE_FOUND"


def test_batch_groups(tmp_path, capsys):
    for seed in range(2):
        main(["gen", "kpg", "--m", "4", "--seed", str(seed), "--out", str(tmp_path / f"k{seed}.json")])
    shutil.copy(FIXTURES / "example1.json", tmp_path / "example1.json")
    assert main(["batch", str(tmp_path)]) == 0
    rows = _csv(tmp_path / "batch.csv")
    avg = [r for r in rows if r["instance"] == "AVG"]
    assert {r["group"] for r in avg} == {"(kpg, 2, 4, A)", "(kpg, 2, 2, -)"}
    assert all(r["Tl"] == f"0/{2 if '4' in r['group'] else 1}" for r in avg)
    assert len(rows) == 5


def test_batch_empty_directory(tmp_path):
    assert main(["batch", str(tmp_path)]) == 0
    assert len(_csv(tmp_path / "batch.csv")) == 0


def test_dump_lp(tmp_path):
    lp = tmp_path / "m.lp"
    assert main(["solve", str(FIXTURES / "example1.json"), "--dump-lp", str(lp)]) == 0
    text = lp.read_text()
    assert "Subject To" in text and "End" in text
