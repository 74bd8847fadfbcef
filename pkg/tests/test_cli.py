
import pytest

from carcassonne_lab.cli import main, parse_args


def test_parse_match_example():
    spec = parse_args(["match", "mcts:k=0.5,sims=400", "random", "--games", "25", "--seed", "7"])
    assert spec.command == "match" and spec.games == 25 and spec.seed == 7
    assert spec.controllers == ["mcts:k=0.5,sims=400", "random"]


def test_parse_config_file(tmp_path):
    cfg = tmp_path / "league.cfg"
    cfg.write_text("# demo\ncontroller mcts:k=0.5,sims=40\ncontroller random\ngames 3\nseed 11\njobs 1\nnormalize-q\n")
    spec = parse_args(["league", "--config", str(cfg)])
    assert spec.controllers == ["mcts:k=0.5,sims=40", "random"]
    assert (spec.games, spec.seed, spec.jobs, spec.normalize_q) == (3, 11, 1, True)
    spec = parse_args(["league", "--config", str(cfg), "--games", "5", "--seed", "2"])
    assert (spec.games, spec.seed) == (5, 2)


@pytest.mark.parametrize(
    "argv",
    [
        ["match", "mcts:k=abc", "random", "--seed", "1"],
        ["match", "nosuch", "random", "--seed", "1"],
        ["match", "random", "random"],
        ["match", "random", "--seed", "1"],
        ["league", "random", "random", "--seed", "1"],
        ["match", "random", "random", "--seed", "1", "--games", "0"],
        ["frobnicate"],
    ],
)
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        parse_args(argv)
    assert exc.value.code == 2
    assert "error" in capsys.readouterr().err


def test_bad_config_directive(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("controller random\nplayers 3\n")
    with pytest.raises(SystemExit):
        parse_args(["league", "--config", str(cfg)])


def test_play_and_replay(tmp_path, capsys):
    out = tmp_path / "p"
    assert main(["play", "mcts:sims=5", "random", "--seed", "3", "--out", str(out), "--trace"]) == 0
    assert (out / "game.txt").exists() and (out / "trace.jsonl").stat().st_size > 0
    assert main(["replay", str(out / "game.txt")]) == 0
    lines = (out / "game.txt").read_text().splitlines()
    lines[-1] = "final 1 2"
    bad = tmp_path / "bad.txt"
    bad.write_text("\n".join(lines) + "\n")
    assert main(["replay", str(bad)]) == 1
    assert main(["replay", str(tmp_path / "missing.txt")]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_match_writes_only_under_out(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    out = tmp_path / "m"
    assert main(["match", "random", "mcts:sims=4", "--games", "2", "--seed", "5", "--out", str(out), "--jobs", "1"]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["m"]
    names = {p.name for p in out.iterdir()}
    assert {"results.csv", "league.txt", "ttest.csv", "expressions.jsonl", "fig2_node_counts.csv", "records"} <= names
    rec = sorted((out / "records").iterdir())[0]
    assert main(["replay", str(rec)]) == 0


def test_league_parallel_matches_serial(tmp_path):
    args = ["league", "random", "mcts:sims=3", "--games", "2", "--seed", "9"]
    assert main(args + ["--out", str(tmp_path / "a"), "--jobs", "1"]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--jobs", "2"]) == 0
    for f in ("results.csv", "league.txt", "expressions.jsonl"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_verify_tiles(tmp_path, capsys):
    assert main(["verify-tiles"]) == 0
    assert "72 tiles" in capsys.readouterr().out
    bad = tmp_path / "t.json"
    bad.write_text('{"version": 1, "start_tile": "Z", "tiles": []}')
    assert main(["verify-tiles", "--tiles", str(bad)]) == 1
