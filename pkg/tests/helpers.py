"""Position builders shared by several test modules."""

import json
import random
from importlib import resources

from carcassonne_lab.carcassonne import apply, legal_actions, new_game, parse_tileset


def single_action_state():
    """P1 to move with exactly one legal action (tile L beside start tile E, no meeples)."""
    data = json.loads(resources.files("carcassonne_lab.carcassonne").joinpath("tiles.json").read_text())
    data["tiles"] = [t for t in data["tiles"] if t["id"] in ("E", "L")]
    data["start_tile"] = "E"
    s = new_game(deck=["L", "L"], tileset=parse_tileset(data))
    s.meeples[0] = 0
    return s


def random_state(seed, plies):
    rng = random.Random(f"pos/{seed}")
    s = new_game(seed)
    for _ in range(plies):
        if s.is_terminal:
            break
        s = apply(s, rng.choice(legal_actions(s)))
    return s


def midgame_states(n, seed=5, lo=10, hi=60):
    rng = random.Random(seed)
    out = []
    g = 0
    while len(out) < n:
        s = new_game(10_000 + seed * 1000 + g)
        g += 1
        for _ in range(rng.randrange(lo, hi)):
            if s.is_terminal:
                break
            s = apply(s, rng.choice(legal_actions(s)))
        if not s.is_terminal:
            out.append(s)
    return out
