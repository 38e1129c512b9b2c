import csv
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from nashcap.cli import BENCH_HEADER, main, parse_rat
from nashcap.generators import gen_lower_bound, gen_random
from nashcap.instance import load_instance, save_instance
from nashcap.numerics import next_power_up, rat_from_json


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_capped_example(tmp_path, capsys):
    inst = tmp_path / "c.json"
    assert run(capsys, "gen", "capped-envy", "--epsilon", "1/100", "--output", inst)[0] == 0
    code, out, _ = run(capsys, "solve", "--input", inst, "--epsilon", "1/100")
    assert code == 0
    doc = json.loads(out)
    assert sorted(sum(row) for row in doc["allocation"]) == [2, 2]
    assert doc["prices"][0]["approx"] == pytest.approx(float(rat_from_json(doc["prices"][0])))


def test_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "solve", "--input", bad, "--epsilon", "1/4")[0] == 2
    good = tmp_path / "g.json"
    save_instance(gen_random(2, 2, 1, 3, seed=0), good)
    code, _, err = run(capsys, "solve", "--input", good, "--epsilon", "1/3")
    assert code == 2 and "epsilon" in err
    assert run(capsys, "solve", "--input", good, "--epsilon", "0.25")[0] == 2
    assert run(capsys, "solve", "--input", tmp_path / "missing.json", "--epsilon", "1/4")[0] == 2
    incr = tmp_path / "incr.json"
    incr.write_text(json.dumps({"agents": [{"cap": None}], "goods": [{"copies": 2}], "utilities": [[[3, 5]]]}))
    code, _, err = run(capsys, "solve", "--input", incr, "--epsilon", "1/4")
    assert code == 2 and "utilities increasing at (agent 1, good 1)" in err


def test_parse_rat():
    assert parse_rat("1/4") == Fraction(1, 4) and parse_rat("3") == 3


def test_certify_three_one_one(tmp_path, capsys):
    inst = tmp_path / "i.json"
    inst.write_text(json.dumps({"agents": [{"cap": None}] * 2, "goods": [{"copies": 1}] * 3,
                                "utilities": [[[3], [1], [1]]] * 2}))
    sol = tmp_path / "s.json"
    assert run(capsys, "solve", "--input", inst, "--epsilon", "1/4", "--output", sol)[0] == 0
    code, out, _ = run(capsys, "certify", "--input", inst, "--solution", sol)
    assert code == 0
    doc = json.loads(out)
    # 3 is rounded up to r^5 = 3125/1024 first, so the bound is 2 r^5 instead of 6
    r5 = next_power_up(3, Fraction(5, 4)).value
    assert rat_from_json(doc["upper_bound_nth_power"]) == 2 * r5
    assert (doc["aux_h"], doc["aux_k"]) == (1, 0)


def test_certify_rejects_non_ef1_solution(tmp_path, capsys):
    from nashcap.generators import gen_multicopy_envy
    from nashcap.numerics import rat_to_json

    mc = gen_multicopy_envy(Fraction(1, 100))
    inst = tmp_path / "mc.json"
    save_instance(mc, inst)
    s = mc.utils[0][0][0]
    sol = tmp_path / "s.json"
    sol.write_text(json.dumps({"epsilon": "1/100", "allocation": [[2, 0], [3, 2]],
                               "prices": [rat_to_json(s)] * 2, "mbb": ["1", "1"]}))
    code, out, err = run(capsys, "certify", "--input", inst, "--solution", sol)
    assert code == 4 and json.loads(out)["ef1_ok"] is False and "EF1" in err
    sol.write_text(json.dumps({"epsilon": "1/100", "allocation": [[2, 0]], "prices": ["1", "1"], "mbb": ["1"]}))
    assert run(capsys, "certify", "--input", inst, "--solution", sol)[0] == 2
    sol.write_text(json.dumps({"epsilon": "1/100", "allocation": [[2, 0], [2, 2]],
                               "prices": ["1", "1"], "mbb": ["1", "1"]}))
    assert run(capsys, "certify", "--input", inst, "--solution", sol)[0] == 2


def test_certify_lower_bound(tmp_path, capsys):
    inst = tmp_path / "lb.json"
    assert run(capsys, "gen", "lower-bound", "--k", 3, "--K", 666, "--s", 1, "--output", inst)[0] == 0
    assert load_instance(inst) == gen_lower_bound(3, 1, 666)
    sol = tmp_path / "s.json"
    run(capsys, "solve", "--input", inst, "--epsilon", "1/4", "--output", sol)
    code, out, _ = run(capsys, "certify", "--input", inst, "--solution", sol)
    assert code == 0 and json.loads(out)["ratio"] >= 1.44


def test_oracle_and_refusal(tmp_path, capsys):
    inst = tmp_path / "mc.json"
    run(capsys, "gen", "multicopy-envy", "--epsilon", "1/100", "--output", inst)
    code, out, _ = run(capsys, "oracle", "--input", inst)
    assert code == 0 and json.loads(out)["allocation"] == [[2, 0], [3, 2]]
    big = tmp_path / "big.json"
    big.write_text(json.dumps({"agents": [{"cap": None}] * 4, "goods": [{"copies": 2}] * 10,
                               "utilities": [[[2, 1]] * 10] * 4}))
    code, _, err = run(capsys, "oracle", "--input", big)
    assert code == 2 and "100000000" in err and str(10 ** 10) in err


def test_gen_families(tmp_path, capsys):
    for fam in ["random", "delta-large", "multicopy-envy", "capped-envy"]:
        p = tmp_path / f"{fam}.json"
        extra = ["--m", "8"] if fam == "delta-large" else []
        assert run(capsys, "gen", fam, "--seed", 3, "--output", p, *extra)[0] == 0
        load_instance(p)
    assert run(capsys, "gen", "delta-large", "--m", "1", "--delta", "1/10")[0] == 2


def test_bench(tmp_path, capsys):
    d = tmp_path / "corpus"
    d.mkdir()
    for seed in range(100):
        save_instance(gen_random(3, 3, 2, 8, cap_mode="random", seed=seed), d / f"r{seed:03d}.json")
    out = tmp_path / "bench.csv"
    assert run(capsys, "bench", "--dir", d, "--epsilon", "1/100", "--csv", out, "--jobs", 2)[0] == 0
    with open(out) as fh:
        assert fh.readline().strip() == ",".join(BENCH_HEADER)
    rows = list(csv.DictReader(open(out)))
    assert [r["id"] for r in rows] == [f"r{s:03d}" for s in range(100)]
    for r in rows:
        assert float(r["ratio_ub"]) <= 1.01 * 1.445 + 1e-6
        assert float(r["ratio_ub"]) >= 1 - 1e-12
        assert float(r["ratio_opt"]) <= float(r["ratio_ub"]) + 1e-9


def test_bench_records_failures(tmp_path, capsys):
    d = tmp_path / "corpus"
    d.mkdir()
    (d / "a.json").write_text("[]")
    save_instance(gen_random(2, 2, 1, 3, seed=1), d / "b.json")
    code, out, _ = run(capsys, "bench", "--dir", d, "--epsilon", "1/4")
    rows = list(csv.DictReader(out.splitlines()))
    assert code == 0 and len(rows) == 2
    assert rows[0]["alg_nsw"].startswith("error") and rows[1]["iterations"] != ""


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "nashcap", "gen", "capped-envy"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["agents"][0]["cap"] == 3
