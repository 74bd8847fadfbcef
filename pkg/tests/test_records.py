import pytest

from carcassonne_lab.carcassonne import apply, parse_record, play_random_game, verify_record
from carcassonne_lab.carcassonne.engine import new_game
from carcassonne_lab.carcassonne.records import GameRecord, RecordError
from carcassonne_lab.tournament import play_game


@pytest.fixture(scope="module")
def game():
    return play_game("random", "random", 17, keep_record=True)


@pytest.fixture(scope="module")
def text(game):
    return game.record


def test_round_trip(game, text):
    rec = parse_record(text)
    # 71 draws minus any discarded unplaceable tiles
    assert rec.seed == 17 and len(rec.turns) == game.turns <= 71 and rec.final == (game.score1, game.score2)
    assert rec.dumps() == text
    report = verify_record(rec)
    assert report.ok and report.turns_checked == game.turns
    assert str(report).startswith("OK")


def test_tampered_score_line(text):
    lines = text.splitlines()
    i = 20
    parts = lines[i].split()
    parts[-1] = str(int(parts[-1]) + 1)
    lines[i] = " ".join(parts)
    report = verify_record(parse_record("\n".join(lines)))
    assert not report.ok and report.failed_turn == 20 and "score mismatch" in report.message


def test_tampered_final(text):
    lines = text.splitlines()
    lines[-1] = "final 0 999"
    report = verify_record(parse_record("\n".join(lines)))
    assert not report.ok and "final mismatch" in report.message


def test_illegal_placement_reports_coordinates(text):
    lines = text.splitlines()
    parts = lines[5].split()
    parts[1:3] = ["40", "40"]
    lines[5] = " ".join(parts)
    report = verify_record(parse_record("\n".join(lines)))
    assert not report.ok and report.failed_turn == 5
    assert "(40, 40)" in report.message


def test_wrong_tile_id(text):
    lines = text.splitlines()
    parts = lines[3].split()
    parts[0] = "X" if parts[0] != "X" else "B"
    lines[3] = " ".join(parts)
    report = verify_record(parse_record("\n".join(lines)))
    assert not report.ok and "drawn tile" in report.message


@pytest.mark.parametrize(
    "bad",
    ["", "L 0 1 0 - 0 0", "seed 1\nL 0 1 0 - 0", "seed x", "seed 1\nL a 1 0 - 0 0"],
)
def test_malformed(bad):
    with pytest.raises(RecordError):
        parse_record(bad)


def test_comments_and_actions():
    state, actions = play_random_game(3)
    rec = GameRecord(state.seed)
    s = new_game(state.seed)
    for a in actions:
        nxt = apply(s, a)
        rec.add(s, a, nxt)
        s = nxt
    text = "# a comment\n" + rec.dumps()
    assert parse_record(text).actions == actions
    assert verify_record(parse_record(text)).ok
