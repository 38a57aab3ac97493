import json
import subprocess
import sys

import pytest

from propgen.cli import main
from propgen.dataio import bundle_paths, load_bundle


def read_bytes(prefix):
    return [open(p, "rb").read() for p in bundle_paths(prefix)]


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--vertices", "2000", "--edges", "90000", "--seed", "7", "--out", str(d / "fx")]) == 0
    return d


def manifest(prefix):
    return json.loads(open(str(prefix) + ".manifest.json").read())


def test_synth_writes_bundle_and_manifest(workdir):
    m = manifest(workdir / "fx")
    assert m["command"] == "synth" and m["vertices"] == 2000 and m["edges"] == 90000
    assert m["seed"] == 7


def test_synth_deterministic(workdir):
    assert main(["synth", "--vertices", "2000", "--edges", "90000", "--seed", "7", "--out", str(workdir / "fx2")]) == 0
    assert read_bytes(workdir / "fx") == read_bytes(workdir / "fx2")


def test_missing_flag_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["synth", "--vertices", "10", "--out", "x"])
    assert info.value.code == 2


def test_exit_codes_subprocess(tmp_path):
    r = subprocess.run([sys.executable, "-m", "propgen.cli", "synth", "--vertices", "5"],
                       capture_output=True, text=True)
    assert r.returncode == 2
    r = subprocess.run([sys.executable, "-m", "propgen.cli", "fit", "--source", str(tmp_path / "none"),
                        "--out", str(tmp_path / "m.json")], capture_output=True, text=True)
    assert r.returncode == 1


def test_fit(workdir):
    assert main(["fit", "--source", str(workdir / "fx"), "--out", str(workdir / "model.json")]) == 0
    doc = json.loads((workdir / "model.json").read_text())
    assert abs(sum(doc["label_probs"]) - 1) < 1e-9
    assert main(["fit", "--source", str(workdir / "fx"), "--augment", "4", "--out", str(workdir / "aug.json")]) == 0
    doc = json.loads((workdir / "aug.json").read_text())
    assert len(doc["label_counts"]) == 16
    assert manifest(workdir / "aug")["categories"] == 16


def test_fit_edgeless_fails(tmp_path):
    (tmp_path / "e.vertices.csv").write_text("id,x\n0,0\n1,1\n")
    (tmp_path / "e.edges.txt").write_text("")
    (tmp_path / "e.schema.json").write_text('{"labels": [{"name": "x", "size": 2}]}')
    assert main(["fit", "--source", str(tmp_path / "e"), "--out", str(tmp_path / "m.json")]) == 1


def test_generate_and_evaluate_agree(workdir):
    out = workdir / "regen"
    assert main(["generate", "--source", str(workdir / "fx"), "--seed", "3", "--out", str(out)]) == 0
    m = manifest(out)
    assert m["jsd"] <= 0.08
    assert m["vertices"] == 2000 and m["edges"] == 90000
    assert main(["evaluate", "--source", str(workdir / "fx"), "--target", str(out), "--out", str(workdir / "ev")]) == 0
    rep = json.loads((workdir / "ev.json").read_text())
    assert rep["jsd"] == m["jsd"]
    assert (workdir / "ev.source.ccdf.csv").read_text().splitlines()[1] == "0,1.0"
    assert main(["evaluate", "--source", str(workdir / "fx"), "--target", str(workdir / "fx"), "--out", str(workdir / "self")]) == 0
    assert json.loads((workdir / "self.json").read_text())["jsd"] == 0


def test_generate_from_model_matches_source_route(workdir):
    a, b = workdir / "via_model", workdir / "via_source"
    assert main(["generate", "--model", str(workdir / "model.json"), "--seed", "4", "--out", str(a)]) == 0
    assert main(["generate", "--source", str(workdir / "fx"), "--seed", "4", "--out", str(b)]) == 0
    assert read_bytes(a) == read_bytes(b)
    assert manifest(a)["jsd"] == manifest(b)["jsd"]


def test_generate_augmented_model_strips_label(workdir):
    out = workdir / "aug_gen"
    assert main(["generate", "--model", str(workdir / "aug.json"), "--out", str(out)]) == 0
    assert load_bundle(out).schema.names == ("role", "zone")
    assert manifest(out)["n_a"] == 4
    assert main(["generate", "--model", str(workdir / "aug.json"), "--keep-augmented", "--out", str(out)]) == 0
    assert len(load_bundle(out).schema) == 3


def test_generate_auto_records_trace(tmp_path):
    src = tmp_path / "ht"
    assert main(["synth", "--kind", "heavy-tailed", "--vertices", "1500", "--edges", "20000", "--out", str(src)]) == 0
    out = tmp_path / "auto"
    assert main(["generate", "--source", str(src), "--augment", "auto", "--tolerance", "0.05",
                 "--max-na", "6", "--out", str(out)]) == 0
    m = manifest(out)
    assert [t[0] for t in m["trace"]][0] == 2
    lines = (tmp_path / "auto.trace.csv").read_text().splitlines()
    assert lines[0] == "n_a,jsd" and len(lines) == len(m["trace"]) + 1


def test_generate_usage_errors(workdir):
    with pytest.raises(SystemExit) as info:
        main(["generate", "--out", str(workdir / "x")])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["generate", "--model", str(workdir / "model.json"), "--augment", "2", "--out", str(workdir / "x")])
    assert info.value.code == 2


def test_expand_default_scales(workdir):
    out = workdir / "big"
    assert main(["expand", "--source", str(workdir / "fx"), "--out", str(out)]) == 0
    m = manifest(out)
    assert (m["vertices"], m["edges"]) == (20000, 1125000)
    assert m["normalized_jsd"] <= 0.1
    out2 = workdir / "big2"
    assert main(["generate", "--source", str(workdir / "fx"), "--vertices-scale", "10",
                 "--edges-scale", "12.5", "--out", str(out2)]) == 0
    assert read_bytes(out) == read_bytes(out2)


def test_seed_from_environment(workdir, monkeypatch):
    monkeypatch.setenv("PROPGEN_SEED", "4")
    out = workdir / "envseed"
    assert main(["generate", "--model", str(workdir / "model.json"), "--out", str(out)]) == 0
    assert manifest(out)["seed"] == 4
    assert read_bytes(out) == read_bytes(workdir / "via_model")
