"""Line-oriented game records and replay verification.

Format::

    # free-form comment lines
    seed 42
    A 0 -1 3 - 0 0
    U 1 0 1 0 0 0
    ...
    final 31 27

After the ``seed`` line every turn is ``<tile id> <x> <y> <rotation>
<meeple slot or -> <score P1> <score P2>``, with the running scores after the
turn.  The optional ``final`` line holds the end-game outcome.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

from ..game_api import ContractError
from .engine import Action, GameState, apply, final_scoring, new_game


class RecordError(ValueError):
    pass


@dataclass
class TurnRecord:
    tile: str
    action: Action
    scores: Tuple[int, int]

    def line(self) -> str:
        m = "-" if self.action.meeple is None else str(self.action.meeple)
        a = self.action
        return f"{self.tile} {a.x} {a.y} {a.rot} {m} {self.scores[0]} {self.scores[1]}"


@dataclass
class GameRecord:
    seed: int
    turns: List[TurnRecord] = field(default_factory=list)
    final: Optional[Tuple[int, int]] = None

    def add(self, state_before: GameState, action: Action, state_after: GameState) -> None:
        tile = state_before.ts.kinds[state_before.drawn].id
        self.turns.append(TurnRecord(tile, action, (state_after.scores[0], state_after.scores[1])))

    def dumps(self) -> str:
        lines = [f"seed {self.seed}"]
        lines += [t.line() for t in self.turns]
        if self.final is not None:
            lines.append(f"final {self.final[0]} {self.final[1]}")
        return "\n".join(lines) + "\n"

    @property
    def actions(self) -> List[Action]:
        return [t.action for t in self.turns]


def parse_record(text: str) -> GameRecord:
    rec: Optional[GameRecord] = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "seed":
                rec = GameRecord(seed=int(parts[1]))
                continue
            if rec is None:
                raise RecordError(f"line {lineno}: turn before seed line")
            if parts[0] == "final":
                rec.final = (int(parts[1]), int(parts[2]))
                continue
            if len(parts) != 7:
                raise RecordError(f"line {lineno}: expected 7 fields, got {len(parts)}")
            tile, x, y, rot, m, s1, s2 = parts
            action = Action(int(x), int(y), int(rot), None if m == "-" else int(m))
            rec.turns.append(TurnRecord(tile, action, (int(s1), int(s2))))
        except (IndexError, ValueError) as exc:
            if isinstance(exc, RecordError):
                raise
            raise RecordError(f"line {lineno}: {exc}") from None
    if rec is None:
        raise RecordError("missing seed line")
    return rec


@dataclass
class ReplayReport:
    ok: bool
    turns_checked: int
    message: str = ""
    failed_turn: Optional[int] = None

    def __str__(self) -> str:
        if self.ok:
            return f"OK: {self.turns_checked} turns replayed"
        return f"FAIL at turn {self.failed_turn}: {self.message}"


def verify_record(rec: GameRecord) -> ReplayReport:
    state = new_game(rec.seed)
    for i, t in enumerate(rec.turns, 1):
        if state.drawn is None:
            return ReplayReport(False, i - 1, "game already over", i)
        drawn = state.ts.kinds[state.drawn].id
        if drawn != t.tile:
            return ReplayReport(False, i - 1, f"drawn tile {drawn} but record says {t.tile}", i)
        try:
            state = apply(state, t.action)
        except ContractError as exc:
            a = t.action
            return ReplayReport(False, i - 1, f"illegal action at ({a.x}, {a.y}) rot {a.rot}: {exc}", i)
        got = (state.scores[0], state.scores[1])
        if got != t.scores:
            return ReplayReport(False, i - 1, f"score mismatch: record {t.scores}, replay {got}", i)
    if rec.final is not None:
        if not state.is_terminal:
            return ReplayReport(False, len(rec.turns), "final line but game not over", len(rec.turns))
        out = final_scoring(state)
        if (out.score_p1, out.score_p2) != rec.final:
            return ReplayReport(
                False, len(rec.turns), f"final mismatch: record {rec.final}, replay {(out.score_p1, out.score_p2)}", None
            )
    return ReplayReport(True, len(rec.turns))


def replay(path: Union[str, Path]) -> ReplayReport:
    return verify_record(parse_record(Path(path).read_text()))
