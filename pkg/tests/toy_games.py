"""Tiny deterministic games for exercising the search code against exhaustive oracles."""

import itertools

from carcassonne_lab.game_api import GameOutcome, Player, StochasticGame


class TreeGame(StochasticGame):
    """Players alternate picking branch labels; leaves carry P1's payoff.

    ``payoff`` maps full move tuples to the P1 score (P2 scores zero), so the
    R2 reward from P1's view is exactly the payoff.
    """

    def __init__(self, branching, payoff, scale=1):
        self.branching = branching  # actions per ply
        self.payoff = payoff
        self.scale = scale

    def legal_actions(self, state):
        return list(self.branching[len(state)])

    def apply(self, state, action):
        return state + (action,)

    def is_terminal(self, state):
        return len(state) == len(self.branching)

    def current_player(self, state):
        return Player(len(state) % 2)

    def outcome(self, state):
        v = self.payoff[state] * self.scale
        return GameOutcome(max(v, 0), max(-v, 0))

    def context(self, state):
        return None


def minimax(game, state):
    if game.is_terminal(state):
        o = game.outcome(state)
        return o.score_p1 - o.score_p2
    vals = [minimax(game, game.apply(state, a)) for a in game.legal_actions(state)]
    return max(vals) if game.current_player(state) == Player.P1 else min(vals)


def left_right_game():
    """P1 chooses left (+10 whatever P2 does) or right (-10 whatever P2 does)."""
    payoff = {}
    for a, b in itertools.product("LR", "ab"):
        payoff[(a, b)] = 10 if a == "L" else -10
    return TreeGame(["LR", "ab"], payoff)


def trap_game():
    """Left has a higher average but a refutation; minimax prefers right."""
    payoff = {
        ("L", "a"): 20, ("L", "b"): 20, ("L", "c"): -30,
        ("R", "a"): 2, ("R", "b"): 3, ("R", "c"): 1,
    }
    return TreeGame(["LR", "abc"], payoff)
