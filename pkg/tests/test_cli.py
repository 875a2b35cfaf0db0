import csv
import io
import json

import pytest

from ecsjack import __version__
from ecsjack.cli import build_parser, main, resolve_config
from ecsjack.elliptic import theta


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def records(text):
    return [json.loads(l) for l in text.splitlines() if l.strip()]


def test_eval_theta(capsys):
    code, out, _ = run(capsys, "eval", "--what", "theta", "--z", "0.5", "--p", "0.1")
    assert code == 0
    (rec,) = records(out)
    assert rec["value"][0] == pytest.approx(theta(0.5, 0.1).real)
    assert rec["version"] == __version__ and len(rec["config_hash"]) == 16


def test_eval_P_at_ones(capsys):
    code, out, _ = run(capsys, "eval", "--what", "P", "--g", "1.5", "--k", "1", "--r", "1,0",
                       "--p", "0", "--z", "1,1")
    assert code == 0
    v = records(out)[0]["value"]
    assert v[0] == pytest.approx(3.0) and abs(v[1]) < 1e-12


def test_config_errors_exit_2(capsys):
    assert run(capsys, "eval", "--what", "P", "--r", "1,0", "--p", "1.5")[0] == 2
    assert run(capsys, "eval", "--what", "P", "--r", "1,0", "--z", "1,1,1")[0] == 2


def test_numerical_error_exit_3(capsys):
    assert run(capsys, "eval", "--what", "V", "--x", "0", "--p", "0.1")[0] == 3


def test_verify_recursion_suite(capsys):
    code, out, err = run(capsys, "verify", "--suite", "recursion", "--seed", "7", "--p", "0.05")
    recs = records(out)
    assert code == 0
    assert recs[-1]["summary"] and recs[-1]["passed"] == 50
    assert "50 passed" in err


def test_verify_pde_and_negative_control(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "pde", "--n", "2", "--g", "1.5", "--p", "0.05")
    assert code == 0
    assert all(r["passed"] for r in records(out)[:-1])
    code, out, _ = run(capsys, "verify", "--suite", "pde", "--n", "2", "--g", "1.5", "--p", "0.05",
                       "--negative-control")
    recs = records(out)
    assert code == 0 and recs[-1]["controls_detected"]
    assert not any(r["passed"] for r in recs[:-1])


def test_table_empty_points_header_only(capsys):
    code, out, _ = run(capsys, "table", "--what", "points", "--points", "0")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert len(rows) == 1 and rows[0][0] == "point_index"


def test_table_pscan_row_at_p0_matches_limit(capsys):
    code, out, _ = run(capsys, "table", "--what", "pscan", "--g", "1.5", "--r", "1,0", "--z", "1,1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 31
    assert float(rows[0]["p"]) == 0 and float(rows[0]["re"]) == pytest.approx(3.0)


def test_table_Escan_monotone(capsys):
    code, out, _ = run(capsys, "table", "--what", "Escan", "--g", "1.5", "--r", "1,0")
    rows = list(csv.DictReader(io.StringIO(out)))
    gaps = [abs(float(r["E_re"]) - float(r["E_trig"])) for r in rows]
    assert code == 0 and all(b <= a for a, b in zip(gaps, gaps[1:]))


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ng = 2.0\np = 0.2\nseed = 5\n")
    args = build_parser().parse_args(["eval", "--config", str(cfg), "--g", "1.1"])
    rc = resolve_config(args)
    assert rc.g == 1.1 and rc.p == 0.2 and rc.seed == 5 and rc.grid_m == 32
    assert {"g", "p", "seed"} <= rc.explicit


def test_output_byte_identical(tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"o{i}.jsonl"
        main(["eval", "--what", "P", "--r", "2,0", "--p", "0.05", "--points", "3", "--seed", "4",
              "--output", str(path)])
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] and len(records(outs[0].decode())) == 3


def test_threads_do_not_change_hash():
    p = build_parser()
    a = resolve_config(p.parse_args(["verify", "--suite", "orth"]))
    b = resolve_config(p.parse_args(["verify", "--suite", "orth", "--threads", "4"]))
    c = resolve_config(p.parse_args(["verify", "--suite", "orth", "--g", "2.0"]))
    assert a.hash() == b.hash() != c.hash()
