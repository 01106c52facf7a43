import json
import subprocess
import sys

import pytest

from prepgraph.cli import parse_graph_spec, run


def test_enumerate_writes_cache(tmp_path, capsys):
    assert run(["enumerate-w6", "--t", "3", "--cache-dir", str(tmp_path)]) == 0
    assert capsys.readouterr().out.strip() == "count: 112"
    assert (tmp_path / "w6_t3_p11.bin").exists()


def test_cache_dir_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("PREPGRAPH_CACHE_DIR", str(tmp_path))
    assert run(["enumerate-w6", "--t", "3"]) == 0
    assert (tmp_path / "w6_t3_p11.bin").exists()


def test_field_table(capsys):
    assert run(["field-table", "--t", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "element,log,cube,inverse"
    assert len(lines) == 9


def test_usage_errors(capsys):
    for argv in (["enumerate-w6", "--t", "4"], ["enumerate-w6", "--bogus"], ["analyze", "--t", "3"],
                 ["field-table", "--poly", "9"], ["equivalence", "--t", "5", "scramble=x", "poly=41"]):
        with pytest.raises(SystemExit) as exc:
            run(argv)
        assert exc.value.code == 2
    err = capsys.readouterr().err
    assert "--bogus" in err and "--t" in err


def test_graph_spec():
    assert parse_graph_spec("poly=41,perm=3,scramble=2") == {"poly": 41, "perm": 3, "scramble": 2}
    assert parse_graph_spec("anchor=00FF") == {"anchor": "00ff"}


def test_build_and_export_deterministic(tmp_path, capsys):
    out = tmp_path / "g.g6"
    assert run(["build-graph", "--t", "3", "--scramble", "4", "--graph-out", str(out), "--format", "graph6"]) == 0
    assert "vertices: 113" in capsys.readouterr().out
    again = tmp_path / "h.g6"
    assert run(["export", "--t", "3", "--scramble", "4", "--format", "graph6", "--output", str(again)]) == 0
    assert out.read_bytes() == again.read_bytes()
    assert run(["build-graph", "--t", "3", "--full"]) == 0
    assert "edges: 14336" in capsys.readouterr().out


def test_hidden_oracle(capsys):
    assert run(["oracle", "theorem1", "--t", "3"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["C_equals_P_union_Z"] and res["Z"] == 1792
    help_text = subprocess.run([sys.executable, "-m", "prepgraph", "--help"],
                               capture_output=True, text=True).stdout
    assert "oracle" not in help_text and "reconstruct" in help_text


def test_reconstruct_then_verify_t5(tmp_path, capsys):
    cert = tmp_path / "cert.json"
    cache = tmp_path / "cache"
    argv = ["--t", "5", "--scramble", "2", "--cache-dir", str(cache)]
    assert run(["reconstruct", "--canonical", "--output", str(cert)] + argv) == 0
    doc = json.loads(cert.read_text())
    assert doc["certificate"]["checks"]["vertices_certified"] == 41665
    assert (tmp_path / "cert.labels.npz").exists()
    assert run(["verify", str(cert), "--t", "5"]) == 0
    assert "valid" in capsys.readouterr().out
    # identical flags -> identical bytes (the clique cache is hit this time)
    cert2 = tmp_path / "cert2.json"
    assert run(["reconstruct", "--canonical", "--output", str(cert2)] + argv) == 0
    a = json.loads(cert.read_text())
    b = json.loads(cert2.read_text())
    a.pop("labels"), b.pop("labels")
    assert a == b
    # a tampered certificate is rejected with exit 1
    doc["certificate"]["translation_support"] = [1, 2]
    cert.write_text(json.dumps(doc))
    assert run(["verify", str(cert)]) == 1
