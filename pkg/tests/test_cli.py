"""CLI contract: outputs, sidecars, reproducibility, exit codes."""

import csv
import json
import os

import pytest

from mannrates import cli


def _read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def run(argv):
    return cli.main(argv)


def test_bounds_halpern_harmonic(tmp_path):
    out = str(tmp_path)
    code = run(["bounds", "--scheme", "halpern", "--beta", "n/(n+2)",
                "--N", "6", "--out", out])
    assert code == 0
    rows = _read_csv(os.path.join(out, "bounds.csv"))
    assert rows[0] == ["n", "R", "inv_R", "certificate"]
    assert float(rows[1][1]) == pytest.approx(1.0)
    assert float(rows[2][1]) == pytest.approx(7 / 9, abs=1e-12)
    assert rows[1][3] == "unverified"
    assert os.path.exists(os.path.join(out, "distance-table.csv"))
    assert os.path.exists(os.path.join(out, "bounds.config.json"))


def test_bounds_certify_flag(tmp_path):
    out = str(tmp_path)
    code = run(["bounds", "--scheme", "halpern", "--beta", "optimal",
                "--N", "5", "--out", out, "--certify"])
    assert code == 0
    rows = _read_csv(os.path.join(out, "bounds.csv"))
    assert rows[1][3] == "witness-verified"


def test_bounds_array_file(tmp_path):
    apath = tmp_path / "array.json"
    apath.write_text(json.dumps({"rows": [[1.0], [0.5, 0.5]]}))
    out = str(tmp_path / "o")
    code = run(["bounds", "--array", str(apath), "--N", "1", "--out", out])
    assert code == 0
    rows = _read_csv(os.path.join(out, "bounds.csv"))
    assert float(rows[2][1]) == pytest.approx(0.75, abs=1e-12)


def test_bounds_requires_scheme_or_array(tmp_path):
    assert run(["bounds", "--out", str(tmp_path)]) == 1


def test_bad_array_file_is_input_error(tmp_path):
    apath = tmp_path / "bad.json"
    apath.write_text("{not json")
    assert run(["bounds", "--array", str(apath), "--out", str(tmp_path)]) == 1
    apath2 = tmp_path / "bad2.json"
    apath2.write_text(json.dumps({"rows": [[1.0], [0.9, 0.9]]}))
    assert run(["bounds", "--array", str(apath2), "--out", str(tmp_path)]) == 1


def test_optimize_ms_small(tmp_path):
    out = str(tmp_path)
    code = run(["optimize", "--mode", "ms", "--N", "4", "--restarts", "4",
                "--out", out, "--certify"])
    assert code == 0
    rows = _read_csv(os.path.join(out, "optimize-ms.csv"))
    assert float(rows[2][1]) == pytest.approx(0.75, abs=1e-8)
    assert float(rows[3][1]) == pytest.approx(17 / 28, abs=1e-7)
    assert rows[1][3] == "witness-verified"
    with open(os.path.join(out, "optimize-ms-array.json")) as fh:
        doc = json.load(fh)
    assert len(doc["rows"]) == 5
    assert doc["rows"][1] == pytest.approx([0.5, 0.5], abs=1e-7)


def test_optimize_exact_mode(tmp_path):
    out = str(tmp_path)
    code = run(["optimize", "--mode", "ms", "--N", "2", "--exact",
                "--out", out])
    assert code == 0
    rows = _read_csv(os.path.join(out, "optimize-ms.csv"))
    assert float(rows[3][1]) == pytest.approx(17 / 28, abs=1e-15)


def test_optimize_scheme_requires_kind(tmp_path):
    assert run(["optimize", "--mode", "scheme", "--N", "4",
                "--out", str(tmp_path)]) == 1


def test_optimize_unknown_mode(tmp_path):
    assert run(["optimize", "--mode", "quench", "--out", str(tmp_path)]) == 1


def test_certification_failure_exit_code(tmp_path, monkeypatch):
    from mannrates.witness import CertificationError

    def boom(*a, **k):
        raise CertificationError("forced")

    monkeypatch.setattr(cli, "build_worst_case_witness", boom)
    code = run(["bounds", "--scheme", "halpern", "--beta", "optimal",
                "--N", "3", "--out", str(tmp_path), "--certify"])
    assert code == 2


def test_byte_identical_reruns(tmp_path):
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    for out in (out1, out2):
        assert run(["optimize", "--mode", "ms", "--N", "4", "--restarts", "4",
                    "--seed", "7", "--out", out]) == 0
    b1 = open(os.path.join(out1, "optimize-ms.csv"), "rb").read()
    b2 = open(os.path.join(out2, "optimize-ms.csv"), "rb").read()
    assert b1 == b2
    a1 = open(os.path.join(out1, "optimize-ms-array.json"), "rb").read()
    a2 = open(os.path.join(out2, "optimize-ms-array.json"), "rb").read()
    assert a1 == a2


def test_reproduce_remarks_table(tmp_path):
    out = str(tmp_path)
    assert run(["reproduce", "--target", "remarks-table", "--N", "30",
                "--out", out]) == 0
    rows = _read_csv(os.path.join(out, "remarks-table.csv"))
    # harmonic stepsizes vs closed form, and the ratio column peaks at n = 4
    ratios = {int(r[0]): float(r[4]) for r in rows[1:]}
    assert max(ratios, key=ratios.get) == 4
    assert ratios[4] == pytest.approx(1.05223, abs=1e-4)
    for r in rows[1:]:
        assert float(r[1]) == pytest.approx(float(r[2]), abs=1e-10)


def test_reproduce_lower_bounds(tmp_path):
    out = str(tmp_path)
    assert run(["reproduce", "--target", "lower-bounds", "--N", "20",
                "--out", out, "--seed", "3"]) == 0
    rows = _read_csv(os.path.join(out, "lower-bounds.csv"))
    for r in rows[1:]:
        n = int(r[0])
        assert float(r[1]) >= 1 / (n + 1) - 1e-12
        assert float(r[3]) >= 1 / (n + 1) ** 0.5 - 1e-12


def test_sidecar_contents(tmp_path):
    out = str(tmp_path)
    run(["bounds", "--scheme", "halpern", "--beta", "n/(n+1)", "--N", "4",
         "--out", out, "--seed", "9"])
    with open(os.path.join(out, "bounds.config.json")) as fh:
        doc = json.load(fh)
    assert doc["command"] == "bounds"
    assert doc["seed"] == 9
    assert doc["N"] == 4


def test_constant_and_list_stepsizes(tmp_path):
    out = str(tmp_path)
    assert run(["bounds", "--scheme", "km", "--alpha", "constant:0.5",
                "--N", "4", "--out", out]) == 0
    assert run(["bounds", "--scheme", "km", "--alpha", "0,0.5,0.5,0.5,0.5",
                "--N", "4", "--out", out]) == 0
    rows = _read_csv(os.path.join(out, "bounds.csv"))
    assert len(rows) == 6
