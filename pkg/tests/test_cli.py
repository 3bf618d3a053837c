import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from localheights import generators
from localheights.cli import main
from localheights.io import InstanceDocument, parse_instance, serialize_instance

FIX = Path(__file__).parent / "fixtures"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_intersect_finite(capsys):
    code, out, _ = run(capsys, "intersect", str(FIX / "finite_n2.json"), "--json")
    res = json.loads(out)
    assert code == 0
    assert res["values"] == {"algebraic": -1, "geometric": -1}
    assert res["gates"]["k_A"] == 0 and res["gates"]["k_B"] == 1
    assert res["agree"] is True


def test_intersect_arch(capsys):
    code, out, _ = run(capsys, "intersect", str(FIX / "arch_n2.json"), "--json")
    res = json.loads(out)
    assert code == 0
    for v in res["values"].values():
        assert abs(v - 2 * math.log(2)) <= 1e-8
    assert set(res["values"]) == {"closed_form", "geometric", "levine"}


def test_intersect_improper(capsys):
    code, out, _ = run(capsys, "intersect", str(FIX / "finite_improper.json"), "--json")
    res = json.loads(out)
    assert code == 2
    assert res["status"] == "hypothesis_failure"
    assert res["diagnostics"]["condition"] == "proper_intersection"


def test_intersect_text_output(capsys):
    code, out, _ = run(capsys, "intersect", str(FIX / "finite_n2.json"))
    assert code == 0
    assert "algebraic: -1" in out and "status: ok" in out


def test_schema_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2, "place": "finite", "A": [["1"]]}')
    assert run(capsys, "intersect", str(bad))[0] == 1
    bad.write_text("not json")
    assert run(capsys, "intersect", str(bad))[0] == 1
    doc = json.loads((FIX / "finite_n2.json").read_text())
    doc["B"] = [["1", "2"], ["5", "1"]]
    bad.write_text(json.dumps(doc))
    assert run(capsys, "intersect", str(bad))[0] == 1
    doc = json.loads((FIX / "finite_n2.json").read_text())
    doc["A"] = [["1/0"], ["1"]]
    bad.write_text(json.dumps(doc))
    assert run(capsys, "intersect", str(bad))[0] == 1
    assert run(capsys, "intersect", str(tmp_path / "missing.json"))[0] == 1


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as err:
        main(["building", "nope", str(FIX / "distance.json")])
    assert err.value.code == 1
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 1


def test_building_commands(capsys):
    code, out, _ = run(capsys, "building", "half-geodesic", str(FIX / "half_geodesic.json"), "--json")
    assert code == 0
    assert json.loads(out)["vertices"] == [[["1", "0"], ["0", "1"]], [["1", "0"], ["0", "3"]], [["1", "0"], ["0", "9"]]]
    code, out, _ = run(capsys, "building", "distance", str(FIX / "distance.json"), "--json")
    assert json.loads(out) == {"distance": 2}
    code, out, _ = run(capsys, "building", "reduction-equal", str(FIX / "reduction_m1.json"), "--json")
    assert json.loads(out) == {"equal": True}
    code, out, _ = run(capsys, "building", "reduction-equal", str(FIX / "reduction_m2.json"), "--json")
    assert json.loads(out) == {"equal": False}
    code, _, _ = run(capsys, "building", "reduction-equal", str(FIX / "distance.json"))
    assert code == 1


def test_output_is_byte_deterministic(capsys):
    outs = set()
    for _ in range(3):
        for flag in ("--json", "--pretty"):
            outs.add((flag, run(capsys, "intersect", str(FIX / "arch_n2.json"), flag)[1]))
    assert len(outs) == 2


def test_timing_flag(capsys):
    _, out, _ = run(capsys, "intersect", str(FIX / "finite_n2.json"), "--json", "--timing")
    assert json.loads(out)["timing_seconds"] >= 0


def test_pretty_is_indented(capsys):
    _, out, _ = run(capsys, "building", "distance", str(FIX / "distance.json"), "--pretty")
    assert out == '{\n  "distance": 2\n}\n'


def _roundtrip(doc):
    text = serialize_instance(doc)
    back = parse_instance(text)
    assert serialize_instance(back) == text
    return back


def test_document_roundtrip():
    rng = np.random.default_rng(0)
    for i in range(100):
        n = int(rng.integers(2, 7))
        p = int(rng.integers(1, n // 2 + 1))
        if i % 2:
            inst = generators.nonarch_adapted(rng, n, p, int(rng.choice([2, 3, 5, 13])))
            doc = InstanceDocument.from_nonarch(inst.quad, inst.L_A, inst.L_B, seed=i)
            back = _roundtrip(doc)
            assert back.A == doc.A and back.L_B == doc.L_B
        else:
            inst = generators.arch_adapted(rng, n, p)
            doc = InstanceDocument.from_arch(inst.quad, seed=i)
            back = _roundtrip(doc)
            assert np.array_equal(back.A, doc.A) and np.array_equal(back.h_B, doc.h_B)


def test_roundtrip_preserves_value():
    rng = np.random.default_rng(1)
    from localheights.cli import cmd_intersect

    for _ in range(5):
        inst = generators.nonarch_adapted(rng, 4, 2, 3)
        res, code = cmd_intersect(serialize_instance(InstanceDocument.from_nonarch(inst.quad, inst.L_A, inst.L_B)))
        assert code == 0 and res["values"]["geometric"] == inst.expected
        inst = generators.arch_adapted(rng, 4, 2)
        res, code = cmd_intersect(serialize_instance(InstanceDocument.from_arch(inst.quad)))
        assert code == 0 and abs(res["values"]["geometric"] - inst.expected) <= 1e-8


def test_selftest_zero_count(capsys):
    code, out, _ = run(capsys, "selftest", "--count", "0", "--json")
    assert code == 0
    assert json.loads(out)["ok"] is True


def test_selftest_deterministic(capsys):
    args = ("selftest", "--seed", "5", "--count", "6", "--sizes", "2,3,5", "--json")
    code, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert code == 0
    assert first == second
    res = json.loads(first)
    assert res["suites"]["finite/oracle"] == {"passed": 6, "total": 6}


def test_selftest_bad_sizes(capsys):
    assert run(capsys, "selftest", "--sizes", "1")[0] == 1


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "localheights", "building", "distance", str(FIX / "distance.json"), "--json"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == '{"distance":2}'
