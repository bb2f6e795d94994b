import json
import os
import subprocess
import sys

import pytest

from anonlab.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_group_examples(capsys):
    assert run(["group", "commutator", "--g", "affine:2,0", "--h", "affine:1,1"], capsys) == (0, "affine:1,1\n")
    assert run(["group", "fixed", "--g", "affine:1,3"], capsys) == (0, "none\n")
    assert run(["group", "holder", "--g", "affine:1,1", "--h", "affine:1,2", "--x0", "0"], capsys) == (0, "Less\n")


def test_group_json_and_more_actions(capsys):
    code, out = run(["group", "compose", "--g", "affine:2,0", "--h", "affine:1,1", "--json"], capsys)
    assert code == 0 and json.loads(out)["result"] == {"kind": "affine", "a": "2/1", "b": "2/1"}
    assert run(["group", "invert", "--g", "affine:2,4"], capsys) == (0, "affine:1/2,-2\n")
    assert run(["group", "archimedean", "--g", "affine:1,1", "--h", "affine:1,5", "--x0", "0"], capsys) == (0, "6\n")
    assert run(["group", "archimedean", "--g", "affine:1,1", "--h", "affine:1,5000", "--max-n", "3"], capsys)[0] == 1
    assert run(["group", "free", "--family", "affine:1,1", "affine:1,2", "--sample", "0", "5"], capsys) == (0, "ok\n")
    assert run(["group", "free", "--family", "affine:2,0", "--sample", "0"], capsys)[0] == 1
    assert run(["group", "propagate", "--g", "lifted:2", "--h", "affine:1,1", "--n", "3"], capsys) == (0, "[0/1,1/1,2/1,3/1]\n")
    assert run(["group", "apply", "--g", "power:2", "--x", "1/2"], capsys) == (0, "1/4\n")


def test_predict_examples(capsys):
    past = '{"breakpoints":["0/1"],"values":[0,1],"cutoff":"3/1"}'
    code, out = run(["predict", "--past", past], capsys)
    assert code == 0 and json.loads(out) == {"state": 1}
    holed = '{"breakpoints":["0/1"],"values":[0,1],"hole":"0/1"}'
    code, out = run(["predict", "weak", "--holed", holed], capsys)
    assert code == 0 and json.loads(out) == {"state": 0}
    code, out = run(["predict", "amalgamate", "--phi", "affine:2,0", "--s0", "2",
                     "--past", '{"breakpoints":[],"values":[1],"cutoff":"0/1"}'], capsys)
    assert json.loads(out)["state"] == 2


def test_verify_examples(capsys):
    code, out = run(["verify", "anonymity", "--trials", "200", "--seed", "7"], capsys)
    assert code == 0 and json.loads(out)["failures"] == []
    code, out = run(["verify", "badset", "--total", '{"breakpoints":["0/1","2/1"],"values":[0,1,2]}'], capsys)
    assert code == 0 and json.loads(out)["certified"] == ["0/1", "2/1"]
    code, out = run(["verify", "welldef-suite", "--trials", "10"], capsys)
    assert code == 0 and json.loads(out)["suite"] == "welldef"


def test_diffeo_build_and_certify(tmp_path, capsys):
    code, out = run(["diffeo", "build", "--target", "1,1", "--depth", "20", "--out", str(tmp_path)], capsys)
    assert code == 0
    assembly = json.loads((tmp_path / "assembly.json").read_text())
    assert assembly["depth"] == 20 and assembly["target"] == ["1/1", "1/1"]
    header = (tmp_path / "curve.csv").read_text().splitlines()[0]
    assert header == "x,G,G_prime,piece_id,zone"
    code, out = run(["diffeo", "certify", "--orders", "4"], capsys)
    assert code == 0 and json.loads(out)["status"] == "pass"
    assert run(["diffeo", "certify-lipschitz"], capsys)[0] == 0


def test_diffeo_inconclusive_exits_one(capsys):
    code, out = run(["diffeo", "certify", "--depth", "6", "--scales", "1/64,1/256,1/1024"], capsys)
    assert code == 1
    assert json.loads(out)["suggestion"]["depth"] > 6
    code, out = run(["diffeo", "witness", "--depth", "6", "--z", "255/256"], capsys)
    assert code == 1 and json.loads(out)["status"] == "inconclusive"


def test_diffeo_witness_and_blocking(capsys):
    code, out = run(["diffeo", "witness", "--z", "3/5"], capsys)
    assert code == 0 and json.loads(out)["member"]["gamma"] == "31/64"
    code, out = run(["diffeo", "blocking-demo", "--target", "1/3,2", "--samples", "50", "--seed", "4"], capsys)
    assert code == 0 and json.loads(out)["witnessed"] == 50


def test_equiv_explore(tmp_path, capsys):
    fam = tmp_path / "demo.json"
    fam.write_text(json.dumps({"members": [{"kind": "line", "slope": "2/1", "x0": "0/1", "y0": "0/1"}]}))
    pts = tmp_path / "grid.json"
    pts.write_text(json.dumps(["1/4", "1/2", "3/1"]))
    code, out = run(["equiv", "explore", "--family", str(fam), "--points", str(pts)], capsys)
    body = json.loads(out)
    assert code == 0
    assert [c["members"] for c in body["classes"]] == [["1/4", "1/2"], ["3/1"]]
    assert body["classes"][0]["paths_from_first"]["1/2"]["replayed"]


@pytest.mark.parametrize("argv", [
    ["group", "commutator", "--g", "affine:2,0"],
    ["group", "compose", "--g", "{oops", "--h", "affine:1,1"],
    ["predict", "--past", "{not json"],
    ["predict", "--past", '{"breakpoints":["2/1"],"values":[0,1],"cutoff":"1/1"}'],
    ["diffeo", "build", "--target", "1"],
])
def test_usage_errors_exit_two(argv, capsys):
    assert main(argv) == 2


def test_argparse_usage_exits_two():
    with pytest.raises(SystemExit) as info:
        main(["nonsense"])
    assert info.value.code == 2


def test_report_file_and_determinism(tmp_path):
    env = dict(os.environ, LAB_SEED="3")
    cmd = [sys.executable, "-m", "anonlab.cli", "verify", "weak", "--trials", "40", "--seed", "1"]
    outs = [subprocess.run(cmd + ["--report", str(tmp_path / f"r{i}.json")], env=env,
                           capture_output=True, check=True).stdout for i in range(2)]
    assert outs[0] == outs[1]
    assert (tmp_path / "r0.json").read_bytes() == (tmp_path / "r1.json").read_bytes()
    assert json.loads(outs[0])["seed"] == 3


def test_build_artifacts_byte_identical(tmp_path, capsys):
    for d in ("a", "b"):
        main(["diffeo", "build", "--depth", "8", "--out", str(tmp_path / d)])
    for name in ("assembly.json", "curve.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
