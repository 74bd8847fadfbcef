"""MCTS-RAVE: AMAF statistics blended into the exploitation term.

value = (1 - beta) * Q + beta * Q_amaf + 2k * sqrt(2 ln N(s) / N(s, a))
beta  = sqrt(b / (3 N(s) + b))
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Any, Hashable, List, Optional, Sequence, Tuple

from .carcassonne.engine import CARCASSONNE
from .game_api import ContractError, RewardSystem, StochasticGame
from .mcts import Node, SelectFn, Tree, _argmax, amaf_update, backpropagate


@dataclass
class RaveConfig:
    simulations: int = 400
    k: float = math.sqrt(2)
    b_tilde: float = 10.0
    reward_system: RewardSystem = RewardSystem.R2
    seed: int = 0
    normalize_q: bool = False

    def __post_init__(self) -> None:
        if self.b_tilde <= 0:
            raise ValueError("b_tilde must be positive")
        if self.simulations <= 0:
            raise ValueError("simulations must be positive")


def beta(n_s: float, b_tilde: float) -> float:
    return math.sqrt(b_tilde / (3 * n_s + b_tilde))


def rave_value(node: Node, child: Node, cfg: RaveConfig, sign: int = 1, scale: float = 1.0) -> float:
    if child.visits < 1:
        raise ContractError("rave_value on an unvisited child")
    n_s = node.visits
    q = sign * child.value_sum / child.visits / scale
    explore = 2 * cfg.k * math.sqrt(2 * math.log(n_s) / child.visits) if n_s > 0 else 0.0
    entry = node.amaf.get(child.key) if node.amaf else None
    if not entry or entry[0] == 0:
        return q + explore
    b = beta(n_s, cfg.b_tilde)
    q_amaf = sign * entry[1] / entry[0] / scale
    return (1 - b) * q + b * q_amaf + explore


def rave_selector(cfg: RaveConfig, rng: random.Random, tree: Optional[Tree] = None) -> SelectFn:
    def select(node: Node, children: List[Node], sign: int) -> Node:
        scale = tree.q_scale() if tree is not None else 1.0
        return _argmax(children, [rave_value(node, c, cfg, sign, scale) for c in children], rng)

    return select


def rave_backpropagate(path: Sequence[Node], actions_taken: Sequence[Tuple[int, Hashable]], value: float) -> None:
    """Plain backpropagation plus per-player, per-simulation-deduplicated AMAF credit."""
    backpropagate(path, value)
    amaf_update(path, actions_taken, value)


def rave_search(
    state: Any,
    cfg: RaveConfig,
    rng: Optional[random.Random] = None,
    game: StochasticGame = CARCASSONNE,
    tree_out: Optional[list] = None,
    trace: Optional[list] = None,
) -> Any:
    if game.is_terminal(state):
        raise ContractError("search from a terminal state")
    rng = rng if rng is not None else random.Random(cfg.seed)
    actions = game.legal_actions(state)
    if len(actions) == 1:
        return actions[0]
    tree = Tree(state, game, cfg.reward_system, cfg.normalize_q, amaf=True)
    select = rave_selector(cfg, rng, tree)
    for _ in range(cfg.simulations):
        tree.iterate(select, rng, trace=trace)
    if tree_out is not None:
        tree_out.append(tree)
    return tree.best_action(rng)
