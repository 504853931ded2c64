import json
import subprocess
import sys

import pytest

from quarkflow.cli import main
from quarkflow.decompose import render_dot, write_decomposition_json
from quarkflow.frontend import HEAT1D_SOURCE
from quarkflow.graph import read_graph_json, swept_depth
from quarkflow.pipeline import run


def call(capsys, *argv):
    status = main(list(argv))
    out = capsys.readouterr()
    return status, out.out, out.err


def summary(text):
    return dict(line.split(": ", 1) for line in text.strip().splitlines())


def test_decompose_heat3d_summary(capsys):
    status, out, _ = call(capsys, "decompose", "--example", "heat3d", "--format", "summary")
    s = summary(out)
    assert status == 0
    assert s["stages"] == "2" and s["shared_weight"] == "2" and s["shared_count"] == "2"
    assert float(s["time_ms"]) > 0


def test_decompose_euler3d_summary(capsys):
    status, out, _ = call(capsys, "decompose", "--example", "euler3d")
    assert status == 0 and summary(out)["stages"] == "8"


def test_decompose_json_input_to_dot(capsys, tmp_path):
    gpath = tmp_path / "g.json"
    call(capsys, "example", "manu-c", "--out", str(gpath))
    out_path = tmp_path / "g.dot"
    status, _, _ = call(capsys, "decompose", "--input", str(gpath), "--format", "dot",
                        "--out", str(out_path))
    assert status == 0
    graph = read_graph_json(gpath.read_text())
    assert out_path.read_text() == render_dot(run(graph).decomposition)


def test_stencil_input_kernels(capsys, tmp_path):
    src = tmp_path / "heat.stencil"
    src.write_text(HEAT1D_SOURCE)
    outdir = tmp_path / "k"
    status, _, _ = call(capsys, "decompose", "--input", str(src), "--format", "kernels",
                        "--out", str(outdir))
    assert status == 0
    assert sorted(p.name for p in outdir.iterdir()) == ["stage_1.kernel", "stage_2.kernel"]
    assert "# uHalf" in (outdir / "stage_1.kernel").read_text()


def test_kernels_on_plain_json_is_an_error(capsys, tmp_path):
    gpath = tmp_path / "g.json"
    call(capsys, "example", "heat1d", "--out", str(gpath))
    status, _, err = call(capsys, "decompose", "--input", str(gpath), "--format", "kernels")
    assert status == 1 and "MissingExprMetadata" in err


def test_verify_round_trip_and_tamper(capsys, tmp_path):
    gpath, dpath = tmp_path / "g.json", tmp_path / "d.json"
    call(capsys, "example", "heat1d", "--out", str(gpath))
    call(capsys, "decompose", "--input", str(gpath), "--format", "json", "--out", str(dpath))
    status, out, _ = call(capsys, "verify", "--input", str(gpath), "--decomposition", str(dpath))
    assert status == 0 and json.loads(out)["overall"] == "pass"

    doc = json.loads(dpath.read_text())
    edge = doc["stages"][0]["edges"][0]
    doc["stages"][1]["edges"].append(edge)
    doc["stages"][1]["vertices"] = sorted(set(doc["stages"][1]["vertices"]) | set(edge))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    status, out, _ = call(capsys, "verify", "--input", str(gpath), "--decomposition", str(bad))
    report = json.loads(out)
    assert status == 2
    assert report["criterion1"]["result"] == "fail"
    assert report["criterion1"]["witness"]["edge"] == edge


def test_verify_missing_file(capsys, tmp_path):
    gpath = tmp_path / "g.json"
    call(capsys, "example", "heat1d", "--out", str(gpath))
    status, _, err = call(capsys, "verify", "--input", str(gpath),
                          "--decomposition", str(tmp_path / "nope.json"))
    assert status == 1 and err.startswith("error:")


def test_example_outputs(capsys):
    status, out, _ = call(capsys, "example", "heat1d")
    g = read_graph_json(out)
    assert status == 0
    assert len(g.sources) == 1 and len(g.sinks) == 1 and g.n_swept == 4
    status, out, _ = call(capsys, "example", "euler3d")
    assert swept_depth(read_graph_json(out)) == 8


def test_unknown_example(capsys):
    status, _, err = call(capsys, "example", "nope")
    assert status == 1 and "UnknownExample" in err


def test_wk_sweep_report(capsys):
    status, out, _ = call(capsys, "decompose", "--example", "heat1d", "--wk-sweep", "1,5,100")
    s = summary(out)
    assert s["wk_sweep_stable"] == "yes"
    assert s["wk_sweep_100"] == "K=2 shared_weight=2 objective=202"


def test_bad_wk_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["decompose", "--example", "heat1d", "--wk", "0"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_outputs_are_deterministic(capsys, tmp_path):
    texts = []
    for k in range(2):
        path = tmp_path / f"d{k}.json"
        call(capsys, "decompose", "--example", "heat3d", "--format", "json", "--out", str(path))
        texts.append(path.read_bytes())
    assert texts[0] == texts[1]
    a = call(capsys, "decompose", "--example", "heat3d")[1]
    b = call(capsys, "decompose", "--example", "heat3d")[1]
    strip = lambda t: [ln for ln in t.splitlines() if not ln.startswith("time_ms")]
    assert strip(a) == strip(b)


def test_cli_matches_library(capsys, heat3d_run):
    _, out, _ = call(capsys, "decompose", "--example", "heat3d", "--format", "json")
    assert out == write_decomposition_json(heat3d_run.decomposition)


def test_render_writes_figure(capsys, tmp_path):
    status, out, _ = call(capsys, "render", "--example", "manu-f", "--out", str(tmp_path))
    assert status == 0
    png = tmp_path / "manu-f.png"
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert (tmp_path / "manu-f.dot").exists() and (tmp_path / "manu-f.summary.txt").exists()
    assert summary(out.replace(f"figure: {png}", "figure: x"))["stages"] == "4"


def test_bench_single_run_with_oracle(capsys, tmp_path):
    status, out, _ = call(capsys, "bench", "--repeat", "1", "--examples", "heat1d,heat3d",
                          "--random", "25", "--out", str(tmp_path))
    lines = out.strip().splitlines()
    assert status == 0
    assert lines[0].split("\t")[0] == "name"
    rows = [ln.split("\t") for ln in lines[1:3]]
    assert [r[0] for r in rows] == ["heat1d", "heat3d"] and all(r[-1] == "ok" for r in rows)
    assert lines[3] == "oracle_match: 25/25 (100.0%)"
    assert (tmp_path / "bench.png").exists() and (tmp_path / "bench.tsv").exists()


def test_color_disabled(capsys, monkeypatch):
    monkeypatch.setenv("QUARKFLOW_COLOR", "0")
    _, out, _ = call(capsys, "bench", "--repeat", "1", "--examples", "heat1d")
    assert "\033[" not in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "quarkflow", "decompose", "--example", "heat1d"],
                          capture_output=True, text=True, check=True)
    assert "stages: 2" in proc.stdout
