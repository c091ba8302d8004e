import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from dlpet.cli import main

SVG = "{http://www.w3.org/2000/svg}"


def test_tiling_svg_and_json(tmp_path):
    svg, js = tmp_path / "t.svg", tmp_path / "t.json"
    assert main(["tiling", "--s", "2/5", "--svg", str(svg), "--json", str(js)]) == 0
    root = ET.parse(svg).getroot()
    doc = json.loads(js.read_text())
    assert root.tag == SVG + "svg"
    assert len(root.findall(f".//{SVG}polygon")) == len(doc["tiles"]) == doc["tile_count"]
    assert doc["complete"] and doc["covered_area"] == "8/5" and doc["uncovered_area"] == "0"


def test_svg_coordinates_have_12_significant_digits(tmp_path):
    svg = tmp_path / "t.svg"
    main(["tiling", "--s", "5/13", "--svg", str(svg), "--json", str(tmp_path / "t.json")])
    for poly in ET.parse(svg).getroot().iter(SVG + "polygon"):
        for pair in poly.get("points").split():
            for c in pair.split(","):
                digits = c.lstrip("-").replace(".", "").split("e")[0].lstrip("0")
                assert len(digits) <= 12


def test_tiling_at_one(tmp_path):
    js = tmp_path / "one.json"
    assert main(["tiling", "--s", "1", "--svg", str(tmp_path / "one.svg"), "--json", str(js),
                 "--color", "shape"]) == 0
    assert {t["shape"] for t in json.loads(js.read_text())["tiles"]} <= {"square", "triangle"}


def test_tiling_is_deterministic(tmp_path):
    outs = []
    for k in range(2):
        svg, js = tmp_path / f"a{k}.svg", tmp_path / f"a{k}.json"
        main(["tiling", "--s", "8/13", "--svg", str(svg), "--json", str(js)])
        outs.append((svg.read_bytes(), js.read_bytes()))
    assert outs[0] == outs[1]


@pytest.mark.parametrize("argv", [
    ["tiling", "--s", "0"],
    ["tiling", "--s=-1/2"],
    ["tiling", "--s", "abc"],
    ["renorm", "--s", "1"],
    ["renorm", "--s", "3/2"],
    ["verify", "calc9"],
    ["derive-partition", "[1/2,3]"],
    ["derive-partition", "[1/2]"],
    ["orbit", "--s", "2/5", "--point", "9,9"],
])
def test_usage_errors_exit_2(argv):
    assert main(argv) == 2


def test_argparse_errors_exit_2():
    assert main(["tiling"]) == 2
    assert main(["frobnicate"]) == 2


def test_renorm_traces(capsys):
    assert main(["renorm", "--s", "2/5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [v for _, v in doc["trace"]] == ["2/5", "1/4", "0"]
    assert doc["terminal"] == "zero" and doc["stages"] == ["square", "square", "triangle"]
    main(["renorm", "--s", "5/13", "--depth", "3"])
    doc = json.loads(capsys.readouterr().out)
    assert [v for _, v in doc["trace"]][:2] == ["5/13", "3/10"]
    assert doc["oddly_even"] is False
    main(["renorm", "--s", "1/4"])
    doc = json.loads(capsys.readouterr().out)
    assert doc["trace"] == [[0, "1/4"], [1, "0"]]


def test_orbit(capsys):
    assert main(["orbit", "--s", "2/5", "--point=-3/5,1/5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "periodic" and doc["period"] == 6


def test_verify_calc_and_json(tmp_path):
    out = tmp_path / "c5.json"
    assert main(["verify", "calc5", "--json", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["calc"] == "calc5" and doc["passed"]


def test_verify_partition_reports_failing_check(capsys):
    code = main(["verify", "partition"])
    captured = capsys.readouterr()
    doc = json.loads(captured.out)
    failing = [c["name"] for c in doc["checks"] if not c["passed"]]
    assert code == (0 if not failing else 1)
    assert failing == ["vertex_in_exactly_3_faces"]
    assert "failing check: vertex_in_exactly_3_faces" in captured.err
    assert next(c for c in doc["checks"] if c["name"] == "piece_count")["count"] == 51


def test_verify_missing_fixtures(tmp_path):
    assert main(["verify", "partition", "--fixtures", str(tmp_path)]) == 2


def test_console_script_entry():
    r = subprocess.run([sys.executable, "-m", "dlpet.cli", "renorm", "--s", "8/13", "--depth", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["trace"][1] == [1, "5/13"]
