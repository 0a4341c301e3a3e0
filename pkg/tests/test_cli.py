import csv
import io
import json
import math
import subprocess
import sys
from fractions import Fraction

import pytest

from illumination.cli import CSV_HEADER, SCHEMA_VERSION, region_grid, run


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _doc(capsys, *argv):
    code, out, err = _run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_index_examples(capsys):
    doc = _doc(capsys, "index", "--fn", "x*atan(x)", "--point", "0,-0.5")
    assert doc["version"] == SCHEMA_VERSION and doc["command"] == "index"
    assert doc["result"]["index"] == 2 and doc["result"]["method"] == "convex-theorem"
    doc = _doc(capsys, "index", "--fn", "x^3", "--point", "1,1/2")
    assert doc["result"] == {**doc["result"], "index": 3, "method": "exact-poly"}
    assert doc["query"]["point"] == ["1", "1/2"]
    assert "wall_time" not in doc


def test_tangents_lists_exact_lines(capsys):
    doc = _doc(capsys, "tangents", "--fn", "x^2", "--point", "0,-1")
    lines = doc["result"]["lines"]
    assert [(g["line"]["slope"], g["line"]["intercept"]) for g in lines] == [("-2", "-1"), ("2", "-1")]
    assert [g["tangencies"][0]["value"] for g in lines] == ["-1", "1"]


def test_classify_and_missing_certificate(capsys):
    doc = _doc(capsys, "classify", "--fn", "exp(x)", "--point", "0,-3")
    assert doc["result"]["index"] == 1
    code, out, err = _run(capsys, "classify", "--fn", "x^3", "--point", "0,1")
    assert code == 1 and out == "" and "no convexity certificate" in err


def test_normals_theta_multitangents(capsys):
    assert _doc(capsys, "normals", "--fn", "x^2", "--point", "0,2")["result"]["count"] == 3
    assert _doc(capsys, "theta", "--fn", "0*x", "--point", "0,1", "--angle", "0.7853981633974483")["result"]["count"] == 2
    doc = _doc(capsys, "multitangents", "--fn", "x^4-2*x^2")
    (line,) = doc["result"]["lines"]
    assert line["line"]["slope"] == "0" and line["line"]["intercept"] == "-1"
    doc = _doc(capsys, "theta", "--fn", "x^2", "--point", "0,1", "--explore", "--steps", "5")
    assert [c["theta"] for c in doc["result"]["candidates"]] == [0.0]


def test_text_and_timing(capsys):
    code, out, _ = _run(capsys, "index", "--fn", "x^3", "--point", "1,0", "--text")
    assert code == 0 and out.split()[:2] == ["2", "exact-poly"]
    doc = _doc(capsys, "index", "--fn", "x^3", "--point", "1,0", "--timing")
    assert doc["wall_time"] >= 0


@pytest.mark.parametrize(
    "argv, code",
    [
        (["index", "--fn", "x^2", "--point", "2,4"], 2),  # on the graph
        (["index", "--fn", "1/x", "--point", "0,1", "--method", "numeric"], 2),
        (["index", "--fn", "x^", "--point", "0,1"], 1),
        (["index", "--fn", "x^2"], 1),
        (["index", "--fn", "x^2", "--point", "1,2,3"], 1),
        (["bogus"], 1),
        (["theta", "--fn", "x^2", "--point", "0,1", "--angle", "3"], 1),
        (["multitangents", "--fn", "exp(x)"], 1),
        (["index", "--fn", "exp(x)", "--point", "0,1/2", "--method", "exact"], 2),
    ],
)
def test_exit_codes(capsys, argv, code):
    got, out, err = _run(capsys, *argv)
    assert got == code
    assert out == "" and err.startswith("error: ") and err.count("\n") == 1


def _csv(capsys, *argv):
    code, out, err = _run(capsys, "region", *argv, "--out", "-")
    assert code == 0, err
    return list(csv.reader(io.StringIO(out)))


def test_region_csv_shape_and_order(capsys):
    rows = _csv(capsys, "--fn", "x^2", "--rect", "-1,1,-2,2", "--res", "2,2")
    assert tuple(rows[0]) == CSV_HEADER == ("x", "y", "index", "method", "flags")
    assert [(r[0], r[1]) for r in rows[1:]] == [("-0.5", "-1"), ("0.5", "-1"), ("-0.5", "1"), ("0.5", "1")]
    assert [r[2] for r in rows[1:]] == ["2", "2", "0", "0"]
    rows = _csv(capsys, "--fn", "x^3-x", "--rect", "-2,2,-1,3", "--res", "7,5")
    assert len(rows) == 1 + 35


def test_region_file_output(tmp_path, capsys):
    path = tmp_path / "grid.csv"
    doc = _doc(capsys, "region", "--fn", "exp(x)", "--rect", "-2,2,-1,3", "--res", "4,4", "--out", str(path))
    assert doc["result"]["cells"] == 16
    assert path.read_text().splitlines()[0] == "x,y,index,method,flags"


def _xatanx_oracle(s, t):
    fs = s * math.atan(s)
    if t > fs:
        return 0
    lo, hi = sorted((-math.pi / 2 * s - 1, math.pi / 2 * s - 1))
    if t > hi:
        return 2
    return 1 if t > lo else 0


def _exp_oracle(s, t):
    if t > math.exp(s):
        return 0
    return 2 if t > 0 else 1


@pytest.mark.parametrize(
    "text, rect, res, oracle",
    [
        ("x*atan(x)", (-3, 3, -5, 3), (60, 80), _xatanx_oracle),
        ("exp(x)", (-2, 2, -1, 3), (40, 40), _exp_oracle),
    ],
)
def test_region_matches_region_formulas(text, rect, res, oracle):
    grid = region_grid(text, rect, res, jobs=4)
    assert len(grid.cells) == res[0] * res[1]
    for cell in grid.cells:
        assert cell.index in (0, 1, 2)
        if not cell.flags:
            assert cell.index == oracle(float(cell.x), float(cell.y)), cell


def test_region_threads_do_not_change_output():
    a = region_grid("x^3-x", (-2, 2, -3, 3), (9, 7), jobs=1).to_csv()
    b = region_grid("x^3-x", (-2, 2, -3, 3), (9, 7), jobs=3).to_csv()
    assert a == b
    assert region_grid("x^2", (Fraction(-1, 3), 1, 0, 1), (2, 2)).cells[0].x == 0
    assert region_grid("x^2", (Fraction(-1, 3), 1, 0, 1), (2, 2)).cells[1].x == Fraction(2, 3)


def test_module_entry_point_is_deterministic():
    argv = [sys.executable, "-m", "illumination", "tangents", "--fn", "exp(x)", "--point", "0,1/2"]
    outs = [subprocess.run(argv, capture_output=True, check=True).stdout for _ in range(2)]
    assert outs[0] == outs[1] and json.loads(outs[0])["result"]["index"] == 2
