import json

import numpy as np
import pytest

from slimsim import app
from slimsim.app import Image
from slimsim.cli import main


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def test_pulse(capsys):
    rc, out, _ = run(capsys, "pulse", "P3", "P3", "P2", "--start", "11")
    assert rc == 0
    assert out.splitlines()[0] == "11 -> 10 -> 01 -> 10"


def test_write_read_logic_with_state(tmp_path, capsys):
    state = str(tmp_path / "arr.txt")
    assert run(capsys, "write", "0.0.0.0", "1010", "--state", state)[0] == 0
    rc, out, _ = run(capsys, "read", "0.0.0.0", "--width", "4", "--state", state)
    assert out.splitlines() == ["memory 1010", "logic  1111"]
    rc, out, _ = run(capsys, "logic", "0.0.0.1", "nor", "1", "1", "--state", state)
    assert rc == 0 and out.startswith("NOR(1, 1) = 0") and "'10'" in out
    rc, out, _ = run(capsys, "read", "0.0.0.0", "--width", "4", "--state", state)
    assert out.splitlines() == ["memory 1010", "logic  1101"]


def test_compile(tmp_path, capsys):
    path = tmp_path / "mul.txt"
    rc, out, _ = run(capsys, "compile", "MUL4", "--out", str(path))
    assert rc == 0 and "140 cells" in out
    assert path.read_text().startswith("netlist MUL4")


def test_gate_report(capsys):
    rc, out, _ = run(capsys, "gate-report", "--json")
    rows = {r["gate"]: r for r in json.loads(out)}
    assert (rows["AND"]["cells"], rows["AND"]["energy"], rows["AND"]["latency"]) == (3, 1.75, 2)
    rc, out, _ = run(capsys, "gate-report")
    assert any(line.split()[:4] == ["AND", "3", "1.75", "2"] for line in out.splitlines())


def test_edp_ratios(tmp_path, capsys):
    report = tmp_path / "r.json"
    rc, out, _ = run(capsys, "edp", "--config", "default", "--json", "--report", str(report))
    ratios = json.loads(out)["computed"]["Ratio"]
    assert ratios["data_transfer"] == pytest.approx(783.44, rel=0.05)
    assert ratios["overall"] == pytest.approx(45.89, rel=0.05)
    assert json.loads(report.read_text()) == json.loads(out)
    rc, out, _ = run(capsys, "edp")
    assert rc == 0 and out.splitlines()[-2].startswith("Ratio")


def test_sobel_constant_image_is_black(tmp_path, capsys):
    src, dst, rep = tmp_path / "in.pgm", tmp_path / "out.pgm", tmp_path / "rep.json"
    app.save_pgm(Image(np.full((16, 16), 200), 8), src)
    rc, out, _ = run(capsys, "sobel", str(src), "--out", str(dst), "--verify", "--report", str(rep))
    assert rc == 0 and "zero-padded" in out
    img = app.load_pgm(dst)
    assert np.all(img.pixels[1:-1, 1:-1] == 0)
    first = rep.read_text()
    run(capsys, "sobel", str(src), "--out", str(dst), "--report", str(rep))
    assert rep.read_text() == first


@pytest.mark.parametrize("argv", [
    ["pulse", "P9"],
    ["read", "99.0.0.0"],
    ["edp", "--config", "/nonexistent.cfg"],
    ["compile", "DIV4"],
])
def test_errors_exit_nonzero(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["logic", "0.0.0.0", "xor", "1", "0"])
    assert exc.value.code != 0
