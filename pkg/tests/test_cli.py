import json

import pytest

from gallerysync.cli import main


def run(argv):
    return main([str(a) for a in argv])


@pytest.fixture()
def scenario(tmp_path):
    out = tmp_path / "scen"
    code = run([
        "gen", "--galleries", 4, "--photos", 10, "--offset-range", 5000,
        "--noise", 0, "--jitter", 0, "--seed", 3, "--out", out,
    ])
    assert code == 0
    return out


def sync_args(scenario, out, extra=()):
    return [
        "sync",
        "--manifest", scenario / "manifest.json",
        "--features", scenario / "features",
        "--layer", "synth/flat",
        "--encoding", "raw",
        "--approach", "exact",
        "--alpha", 0.1,
        "--out", out,
        *extra,
    ]


def test_gen_sync_eval_happy_path(tmp_path, scenario, capsys):
    offsets_path = tmp_path / "offsets.json"
    assert run(sync_args(scenario, offsets_path)) == 0
    payload = json.loads(offsets_path.read_text())
    assert payload["reference"] == "g01"
    assert set(payload["offsets"]) == {"g01", "g02", "g03", "g04"}

    truth = json.loads((scenario / "ground_truth.json").read_text())
    for gid, true in truth.items():
        assert payload["offsets"][gid] == true

    assert run(["eval", "--pred", offsets_path, "--gt", scenario / "ground_truth.json",
                "--max-error", 1800]) == 0
    out = capsys.readouterr().out
    assert "P: 100.0" in out
    assert '"m_syn": 3' in out


def test_sync_outputs_are_deterministic(tmp_path, scenario):
    out1, out2 = tmp_path / "o1.json", tmp_path / "o2.json"
    assert run(sync_args(scenario, out1)) == 0
    assert run(sync_args(scenario, out2)) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_sync_json_keys_sorted(tmp_path, scenario):
    out = tmp_path / "o.json"
    assert run(sync_args(scenario, out)) == 0
    payload = json.loads(out.read_text())
    assert list(payload) == sorted(payload)
    assert list(payload["offsets"]) == sorted(payload["offsets"])


def test_sync_writes_dot_and_links(tmp_path, scenario):
    out = tmp_path / "o.json"
    dot = tmp_path / "graph.dot"
    links = tmp_path / "links.jsonl"
    assert run(sync_args(scenario, out, extra=["--dot", dot, "--links-out", links])) == 0
    assert dot.read_text().startswith("graph galleries {")
    first = json.loads(links.read_text().splitlines()[0])
    assert set(first) == {"a", "b", "sim", "offset"}


def test_graph_subcommand(tmp_path, scenario):
    dot = tmp_path / "g.dot"
    code = run([
        "graph", "--manifest", scenario / "manifest.json", "--features", scenario / "features",
        "--layer", "synth/flat", "--encoding", "raw", "--dot", dot,
    ])
    assert code == 0
    assert '"g01"' in dot.read_text()


def test_eval_missing_gallery_names_it(tmp_path, scenario, capsys):
    offsets_path = tmp_path / "offsets.json"
    assert run(sync_args(scenario, offsets_path)) == 0
    bad_gt = tmp_path / "gt.json"
    truth = json.loads((scenario / "ground_truth.json").read_text())
    truth.pop("g03")
    bad_gt.write_text(json.dumps(truth))
    code = run(["eval", "--pred", offsets_path, "--gt", bad_gt])
    assert code == 2
    assert "g03" in capsys.readouterr().err


def test_unknown_flag_exits_2(scenario):
    with pytest.raises(SystemExit) as exc:
        run(sync_args(scenario, "x.json", extra=["--bogus"]))
    assert exc.value.code == 2


def test_alpha_out_of_range_exits_2(tmp_path, scenario, capsys):
    args = sync_args(scenario, tmp_path / "o.json")
    args[args.index("--alpha") + 1] = 1.5
    assert run(args) == 2
    assert "alpha" in capsys.readouterr().err


def test_missing_manifest_reports_error(tmp_path, capsys):
    code = run([
        "sync", "--manifest", tmp_path / "nope.json", "--features", tmp_path,
        "--out", tmp_path / "o.json",
    ])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_params_file(tmp_path, scenario):
    params = tmp_path / "params.json"
    params.write_text(json.dumps({"gamma": 2.0, "delta": 0.5}))
    out = tmp_path / "o.json"
    assert run(sync_args(scenario, out, extra=["--params", params])) == 0


def test_invalid_params_file_rejected(tmp_path, scenario, capsys):
    params = tmp_path / "params.json"
    params.write_text(json.dumps({"gamma": -1.0, "delta": 0.5}))
    code = run(sync_args(scenario, tmp_path / "o.json", extra=["--params", params]))
    assert code == 2


def test_vocab_subcommand(tmp_path, scenario):
    vocab_path = tmp_path / "vocab.npz"
    code = run([
        "vocab", "--features", scenario / "features", "--layer", "synth/flat",
        "--k", 6, "--seed", 1, "--out", vocab_path,
    ])
    assert code == 0
    from gallerysync.cli import load_vocabulary

    vocab = load_vocabulary(vocab_path)
    assert vocab.k == 6


def test_gen_rejects_impossible_config(tmp_path, capsys):
    code = run(["gen", "--galleries", 1, "--out", tmp_path / "x"])
    assert code == 2
    assert "galleries" in capsys.readouterr().err


def test_eval_writes_report_json(tmp_path, scenario):
    offsets_path = tmp_path / "offsets.json"
    assert run(sync_args(scenario, offsets_path)) == 0
    report_path = tmp_path / "report.json"
    assert run(["eval", "--pred", offsets_path, "--gt", scenario / "ground_truth.json",
                "--out", report_path]) == 0
    payload = json.loads(report_path.read_text())
    assert payload["precision"] == 1.0
