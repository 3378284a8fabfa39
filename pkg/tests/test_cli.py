import json
import math
import os
import subprocess
import sys

import pytest

from boundary_paths.cli import RunConfig, main, random_pairs
from boundary_paths.errors import GeometryError
from boundary_paths.fixtures import square_hole

DATA = os.path.join(os.path.dirname(__file__), "..", "data")
SQ = os.path.join(DATA, "square_hole.json")
TRI = os.path.join(DATA, "triangle.json")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


@pytest.fixture(scope="module")
def sq_index(tmp_path_factory):
    path = str(tmp_path_factory.mktemp("idx") / "sq.json")
    assert main(["build", SQ, "-o", path]) == 0
    return path


@pytest.fixture(scope="module")
def tri_index(tmp_path_factory):
    path = str(tmp_path_factory.mktemp("idx") / "tri.json.gz")
    assert main(["build", TRI, "-o", path]) == 0
    return path


def test_validate(capsys):
    assert run(capsys, "validate", SQ) == (0, {"n": 8, "h": 1, "perimeter": 48.0})
    assert run(capsys, "validate", TRI) == (0, {"n": 3, "h": 0, "perimeter": 24.0})


def test_validate_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    code, out = run(capsys, "validate", bad)
    assert code == 2 and out["error"] == "ParseError"
    bow = tmp_path / "bow.json"
    bow.write_text(json.dumps({"outer": [[0, 0], [10, 0], [0, 10], [10, 10]], "holes": []}))
    code, out = run(capsys, "validate", bow)
    assert code == 2 and out["error"] == "SelfIntersectingRing"
    code, out = run(capsys, "validate", tmp_path / "missing.json")
    assert code == 2 and out["error"] == "IoError"


def test_build_stats(capsys, tmp_path):
    code, out = run(capsys, "build", TRI, "-o", tmp_path / "t.json")
    assert code == 0
    assert out["breakpoints"] == 3 and out["blocks"] == 9
    code, out = run(capsys, "build", SQ, "-o", tmp_path / "s.json", "--delta", "0.5")
    assert code == 0 and out["m"] == 3
    assert 8 <= out["breakpoints"] <= 256


def test_build_bad_delta(capsys, tmp_path):
    code, out = run(capsys, "build", SQ, "-o", tmp_path / "x.json", "--delta", "2")
    assert code == 2 and "delta" in out["message"]
    assert main(["build", SQ]) == 2  # missing -o


def test_query(capsys, sq_index):
    code, out = run(capsys, "query", sq_index, "--px", 0, "--py", 5, "--qx", 10, "--qy", 5, "--path")
    assert code == 0
    assert out["length"] == pytest.approx(10.246211, abs=1e-6)
    assert out["length"] == pytest.approx(2 + 2 * math.sqrt(17), rel=1e-12)
    assert out["direct"] is False
    assert out["path"] == [[0, 5], [4, 4], [6, 4], [10, 5]]
    code, out = run(capsys, "query", sq_index, "--s", 7.5, "--t", 7.5)
    assert code == 0 and out["length"] == 0 and "path" not in out
    code, out = run(capsys, "query", sq_index, "--s", 0, "--t", 10)
    assert out["length"] == pytest.approx(10.0)


def test_query_errors(capsys, sq_index, tmp_path):
    code, out = run(capsys, "query", sq_index, "--s", 0, "--t", 48)
    assert code == 2 and out["error"] == "OutOfRange"
    code, out = run(capsys, "query", sq_index, "--s", 1)
    assert code == 2
    idx = json.load(open(sq_index))
    idx["version"] = 999
    old = tmp_path / "old.json"
    old.write_text(json.dumps(idx))
    code, out = run(capsys, "query", old, "--s", 0, "--t", 1)
    assert code == 2 and out["error"] == "IndexVersionMismatch"


def test_batch(capsys, sq_index, tmp_path):
    q = tmp_path / "q.txt"
    q.write_text("# s t\n35 15\n\n0 10\n")
    code, out = run(capsys, "batch", sq_index, q)
    assert code == 0 and len(out) == 2
    assert out[0]["length"] == pytest.approx(2 + 2 * math.sqrt(17))
    q.write_text("1 2 3\n")
    assert run(capsys, "batch", sq_index, q)[0] == 2


def test_verify(capsys, sq_index, tri_index):
    code, out = run(capsys, "verify", sq_index, "--random", 1000, "--seed", 42)
    assert code == 0 and out["queries"] == 1000 and out["failures"] == []
    assert out["max_rel_error"] <= 1e-9
    code, out = run(capsys, "verify", tri_index, "--random", 1000)
    assert code == 0 and out["direct"] == 1000
    code, out = run(capsys, "verify", sq_index, "--random", 0)
    assert code == 0 and out["queries"] == 0 and out["failures"] == []


def test_verify_failure_exit_code(capsys, sq_index, monkeypatch):
    import boundary_paths.cli as cli

    real = cli.oracle_shortest_path
    monkeypatch.setattr(cli, "oracle_shortest_path", lambda *a: (real(*a)[0] + 1.0, None))
    code, out = run(capsys, "verify", sq_index, "--random", 5)
    assert code == 1 and len(out["failures"]) == 5


def test_verify_deterministic(capsys, sq_index):
    a = run(capsys, "verify", sq_index, "--random", 100, "--seed", 7)[1]
    b = run(capsys, "verify", sq_index, "--random", 100, "--seed", 7)[1]
    a.pop("timings")
    b.pop("timings")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_stats(capsys, sq_index, tri_index, tmp_path):
    code, out = run(capsys, "stats", tri_index)
    assert code == 0 and out["blocks"] == 9 and out["max_regions_per_block"] <= 3
    code, out = run(capsys, "stats", sq_index)
    assert code == 0 and out["grid_intervals"] <= 256
    assert len(out["row_breakpoints"]) == 8
    assert out["max_vertices_per_block"] <= 64 * 16 ** 2
    code, out = run(capsys, "stats", "")
    assert code == 2 and out["error"] == "IoError"


def test_export(capsys, sq_index, tmp_path):
    code, out = run(capsys, "export", sq_index, "--block", 0, "-o", tmp_path / "b.svg")
    assert code == 0 and os.path.exists(tmp_path / "b.svg") and os.path.exists(tmp_path / "b.csv")
    code, out = run(capsys, "export", sq_index, "--block", 10 ** 6, "-o", tmp_path / "c.svg")
    assert code == 2 and out["error"] == "UnknownBlock"


def test_segments(capsys, tmp_path):
    idx = tmp_path / "seg.json"
    code, out = run(capsys, "segbuild", SQ, "--sources", os.path.join(DATA, "square_hole_src.json"),
                    "--targets", os.path.join(DATA, "square_hole_dst.json"), "-o", idx)
    assert code == 0 and out["sources"] == 1 and out["targets"] == 1
    code, out = run(capsys, "segquery", idx, "--src", 0, 4, "--dst", 0, 4, "--path")
    assert code == 0
    assert out["length"] == pytest.approx(2 + 2 * math.sqrt(10), rel=1e-12)
    code, out = run(capsys, "segquery", idx, "--src", 0, 9, "--dst", 0, 4)
    assert code == 2 and out["error"] == "OffsetOutOfRange"
    bad = tmp_path / "segs.json"
    bad.write_text("[[1, 2]]")
    code, out = run(capsys, "segbuild", SQ, "--sources", bad, "-o", tmp_path / "x.json")
    assert code == 2 and out["error"] == "ParseError"


def test_run_config():
    RunConfig("build", delta=0.5)
    for kw in ({"delta": 0.0}, {"seed": -1}, {"tol": 0.0}, {"samples": -3}, {"eps_env": -1.0}):
        with pytest.raises(GeometryError):
            RunConfig("verify", **kw)


def test_random_pairs_deterministic():
    d = square_hole()
    a = random_pairs(d, 50, 3)
    assert a == random_pairs(d, 50, 3)
    assert all(0 <= s < 48 and 0 <= t < 48 for s, t in a)


def test_console_script(tmp_path):
    out = subprocess.run([sys.executable, "-m", "boundary_paths", "validate", SQ], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["n"] == 8
    out = subprocess.run([sys.executable, "-m", "boundary_paths", "nope"], capture_output=True, text=True)
    assert out.returncode == 2
