"""Two-player stochastic game contract and reward systems.

Every search controller in this package talks to a game through
:class:`StochasticGame`.  Carcassonne is the only full implementation; the
test-suite also uses tiny deterministic toy games.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Any, Hashable, List, Optional, Sequence


class ContractError(ValueError):
    """Raised when an operation is called outside its precondition."""


class Player(enum.IntEnum):
    P1 = 0
    P2 = 1

    @property
    def other(self) -> "Player":
        return Player(1 - self)

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.name


def opponent(p: Player) -> Player:
    return Player(1 - p)


class RewardSystem(enum.Enum):
    R1 = "R1"  # +1 / 0 / -1
    R2 = "R2"  # own score minus opponent score


@dataclass(frozen=True)
class GameOutcome:
    score_p1: int
    score_p2: int
    terminal: bool = True

    def score(self, p: Player) -> int:
        return self.score_p1 if p == Player.P1 else self.score_p2

    @property
    def winner(self) -> Optional[Player]:
        if self.score_p1 > self.score_p2:
            return Player.P1
        if self.score_p2 > self.score_p1:
            return Player.P2
        return None


def reward(outcome: GameOutcome, perspective: Player, system: RewardSystem) -> float:
    if not outcome.terminal:
        raise ContractError("reward of a non-terminal outcome")
    diff = outcome.score(perspective) - outcome.score(opponent(perspective))
    if system is RewardSystem.R2:
        return diff
    return (diff > 0) - (diff < 0)


class StochasticGame:
    """Capabilities a controller needs from a game.

    ``apply`` must not mutate its input.  ``step`` may mutate a scratch state
    obtained from ``determinize`` or ``copy`` and returns the successor; the
    default simply delegates to ``apply``.
    """

    def legal_actions(self, state: Any) -> List[Any]:
        raise NotImplementedError

    def apply(self, state: Any, action: Any) -> Any:
        raise NotImplementedError

    def is_terminal(self, state: Any) -> bool:
        raise NotImplementedError

    def current_player(self, state: Any) -> Player:
        raise NotImplementedError

    def outcome(self, state: Any) -> GameOutcome:
        """Final scores of a terminal state."""
        raise NotImplementedError

    def step(self, state: Any, action: Any) -> Any:
        return self.apply(state, action)

    def copy(self, state: Any) -> Any:
        return state

    def determinize(self, state: Any, rng: random.Random) -> Any:
        """Scratch copy with unseen chance events re-sampled."""
        return self.copy(state)

    def context(self, state: Any) -> Hashable:
        """Chance context the current legal actions depend on (e.g. the drawn tile)."""
        return None

    def action_key(self, state: Any, action: Any) -> Hashable:
        return action

    def playout(
        self,
        state: Any,
        rng: random.Random,
        trace: Optional[list] = None,
    ) -> GameOutcome:
        """Uniformly random play until terminal.  ``state`` may be consumed.

        When ``trace`` is given, ``(player, action_key)`` pairs are appended.
        """
        while not self.is_terminal(state):
            actions = self.legal_actions(state)
            action = actions[rng.randrange(len(actions))]
            if trace is not None:
                trace.append((self.current_player(state), self.action_key(state, action)))
            state = self.step(state, action)
        return self.outcome(state)


def uniform_choice(items: Sequence[Any], rng: random.Random) -> Any:
    return items[rng.randrange(len(items))]
