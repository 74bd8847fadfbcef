"""Monte Carlo Tree Search with a pluggable selection expression.

Chance is handled open-loop: every simulation starts from a fresh
determinization of the root state (the remaining deck is reshuffled), so a
node aggregates statistics over tile draws.  Children are keyed by the
game's ``action_key`` (for Carcassonne: tile, placement and meeple slot) and
grouped by the chance context (the drawn tile) they were created under.

All values are stored from the root player's perspective; the sign flip for
opponent nodes happens in :func:`select_child`.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Any, Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from .carcassonne.engine import CARCASSONNE
from .expression import Expr, compile_expr, seeded_uct
from .game_api import ContractError, Player, RewardSystem, StochasticGame, reward


@dataclass
class SearchConfig:
    simulations: int = 400
    k: float = math.sqrt(2)
    reward_system: RewardSystem = RewardSystem.R2
    seed: int = 0
    selection_expr: Optional[Expr] = None  # defaults to seeded_uct(k)
    normalize_q: bool = False

    def __post_init__(self) -> None:
        if self.simulations <= 0:
            raise ValueError("simulations must be positive")

    def expression(self) -> Expr:
        return self.selection_expr if self.selection_expr is not None else seeded_uct(self.k)


class Node:
    __slots__ = ("key", "action", "player", "visits", "value_sum", "children", "by_ctx", "untried", "amaf", "parent")

    def __init__(self, key: Hashable, action: Any, player: int, parent: Optional["Node"] = None):
        self.key = key
        self.action = action
        self.player = player  # player to move at this node
        self.visits = 0
        self.value_sum = 0.0
        self.children: Dict[Hashable, Node] = {}
        self.by_ctx: Dict[Hashable, List[Node]] = {}
        self.untried: Dict[Hashable, List[Tuple[Hashable, Any]]] = {}
        self.amaf: Optional[Dict[Hashable, List[float]]] = None
        self.parent = parent

    @property
    def q(self) -> float:
        return self.value_sum / self.visits

    def __repr__(self) -> str:
        return f"Node(key={self.key!r}, visits={self.visits}, value_sum={self.value_sum})"

    def iter_nodes(self):
        stack = [self]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(n.children.values())

    def clone(self, parent: Optional["Node"] = None) -> "Node":
        c = Node(self.key, self.action, self.player, parent)
        c.visits = self.visits
        c.value_sum = self.value_sum
        c.untried = {ctx: list(v) for ctx, v in self.untried.items()}
        if self.amaf is not None:
            c.amaf = {k: list(v) for k, v in self.amaf.items()}
        for ctx, kids in self.by_ctx.items():
            cl = []
            for kid in kids:
                kc = kid.clone(c)
                c.children[kc.key] = kc
                cl.append(kc)
            c.by_ctx[ctx] = cl
        return c


SelectFn = Callable[[Node, List[Node], int], Node]


def _argmax(items: Sequence[Any], values: Sequence[float], rng: random.Random) -> Any:
    best = max(values)
    tied = [it for it, v in zip(items, values) if v == best]
    return tied[0] if len(tied) == 1 else tied[rng.randrange(len(tied))]


class ExpressionSelector:
    """Selection function maximizing ``expr``; ``rng`` (tie-breaks) may be swapped per simulation."""

    def __init__(self, expr: Expr, rng: random.Random, q_scale: Optional[Callable[[], float]] = None):
        self.expr = expr
        self.f = compile_expr(expr)
        self.rng = rng
        self.q_scale = q_scale

    def __call__(self, node: Node, children: List[Node], sign: int) -> Node:
        f = self.f
        n_s = node.visits
        scale = self.q_scale() if self.q_scale is not None else 1.0
        vals = [f(sign * c.value_sum / c.visits / scale, n_s, c.visits) for c in children]
        return _argmax(children, vals, self.rng)


def expression_selector(expr: Expr, rng: random.Random, q_scale: Optional[Callable[[], float]] = None) -> ExpressionSelector:
    return ExpressionSelector(expr, rng, q_scale)


def select_child(
    node: Node,
    expr: Expr,
    root_player: int,
    rng: random.Random,
    ctx: Hashable = None,
) -> Node:
    """Child maximizing ``expr`` with Q sign-flipped at opponent nodes."""
    if node.untried.get(ctx):
        raise ContractError("select_child with untried actions; expand first")
    children = node.by_ctx.get(ctx) or []
    if not children:
        raise ContractError("select_child on a node without children")
    sign = 1 if node.player == root_player else -1
    return expression_selector(expr, rng)(node, children, sign)


def expand(node: Node, rng: random.Random, ctx: Hashable = None, child_player: Optional[int] = None) -> Node:
    """Move one uniformly chosen untried action into a new child."""
    untried = node.untried.get(ctx)
    if not untried:
        raise ContractError("expand without untried actions")
    i = rng.randrange(len(untried))
    untried[i], untried[-1] = untried[-1], untried[i]
    key, action = untried.pop()
    player = (1 - node.player) if child_player is None else child_player
    child = Node(key, action, player, node)
    node.children[key] = child
    node.by_ctx.setdefault(ctx, []).append(child)
    return child


def rollout(
    state: Any,
    perspective: int,
    system: RewardSystem,
    rng: random.Random,
    game: StochasticGame = CARCASSONNE,
    trace: Optional[list] = None,
) -> float:
    """Uniform random play to the end; ``state`` is consumed."""
    return reward(game.playout(state, rng, trace), Player(perspective), system)


def backpropagate(path: Sequence[Node], value: float) -> None:
    for n in path:
        n.visits += 1
        n.value_sum += value


class Tree:
    """A search tree rooted at one decision state.

    ``iterate`` runs one select-expand-rollout-backpropagate simulation with
    the given selection function and returns its reward.
    """

    def __init__(
        self,
        state: Any,
        game: StochasticGame = CARCASSONNE,
        reward_system: RewardSystem = RewardSystem.R2,
        normalize_q: bool = False,
        amaf: bool = False,
    ):
        if game.is_terminal(state):
            raise ContractError("search from a terminal state")
        self.game = game
        self.state = state
        self.root_player = int(game.current_player(state))
        self.reward_system = reward_system
        self.normalize_q = normalize_q
        self.amaf = amaf
        self.root = Node(None, None, self.root_player)
        self.iterations = 0
        self.max_abs_reward = 1.0

    def q_scale(self) -> float:
        return self.max_abs_reward if self.normalize_q else 1.0

    def clone(self) -> "Tree":
        t = Tree.__new__(Tree)
        t.__dict__.update(self.__dict__)
        t.root = self.root.clone()
        return t

    def _untried(self, node: Node, s: Any, ctx: Hashable) -> List[Tuple[Hashable, Any]]:
        u = node.untried.get(ctx)
        if u is None:
            game = self.game
            u = []
            for a in game.legal_actions(s):
                k = game.action_key(s, a)
                if k not in node.children:
                    u.append((k, a))
            node.untried[ctx] = u
            if self.amaf:
                if node.amaf is None:
                    node.amaf = {}
                for k, _a in u:
                    node.amaf.setdefault(k, [0, 0.0])
        return u

    def iterate(
        self,
        select: SelectFn,
        rng: random.Random,
        max_depth: Optional[int] = None,
        backprop_path: bool = True,
        trace: Optional[list] = None,
    ) -> float:
        """One simulation.  ``max_depth`` limits descent (1 = root only)."""
        game = self.game
        s = game.determinize(self.state, rng)
        node = self.root
        path = [node]
        moves: Optional[list] = [] if self.amaf else None
        rp = self.root_player
        depth = 0
        while True:
            if game.is_terminal(s):
                value = reward(game.outcome(s), Player(rp), self.reward_system)
                break
            if max_depth is not None and depth >= max_depth:
                value = reward(game.playout(s, rng, moves), Player(rp), self.reward_system)
                break
            ctx = game.context(s)
            untried = self._untried(node, s, ctx)
            mover = int(game.current_player(s))
            if untried:
                child = expand(node, rng, ctx, 1 - mover)
                if moves is not None:
                    moves.append((mover, child.key))
                s = game.step(s, child.action)
                if not game.is_terminal(s):
                    child.player = int(game.current_player(s))
                path.append(child)
                value = reward(game.playout(s, rng, moves), Player(rp), self.reward_system)
                break
            sign = 1 if node.player == rp else -1
            child = select(node, node.by_ctx[ctx], sign)
            if moves is not None:
                moves.append((mover, child.key))
            s = game.step(s, child.action)
            node = child
            path.append(node)
            depth += 1
        if backprop_path:
            backpropagate(path, value)
        else:
            backpropagate((path[0], path[-1]) if len(path) > 1 else path, value)
        if self.amaf and moves is not None:
            amaf_update(path, moves, value)
        av = abs(value)
        if av > self.max_abs_reward:
            self.max_abs_reward = av
        self.iterations += 1
        if trace is not None:
            trace.append({"sim": self.iterations, "path": [n.key for n in path[1:]], "reward": value})
        return value

    def best_action(self, rng: random.Random) -> Any:
        """Root child with the highest mean value (not visit count); ties uniform."""
        ctx = self.game.context(self.state)
        kids = [c for c in self.root.by_ctx.get(ctx, []) if c.visits > 0]
        if not kids:
            raise ContractError("no visited root children")
        return _argmax(kids, [c.value_sum / c.visits for c in kids], rng).action


def amaf_update(path: Sequence[Node], moves: Sequence[Tuple[int, Hashable]], value: float) -> None:
    """All-moves-as-first credit.

    ``moves[t]`` is the move played from ``path[t]`` onwards (tree part then
    rollout).  A node is credited once per simulation for each key played by
    its own player to move at or after it, for keys legal at that node.
    """
    for t, node in enumerate(path):
        table = node.amaf
        if table is None:
            continue
        me = node.player
        seen = set()
        for mover, key in moves[t:]:
            if mover != me or key in seen:
                continue
            seen.add(key)
            entry = table.get(key)
            if entry is None:
                continue
            entry[0] += 1
            entry[1] += value


def search(
    state: Any,
    cfg: SearchConfig,
    rng: Optional[random.Random] = None,
    game: StochasticGame = CARCASSONNE,
    trace: Optional[list] = None,
    tree_out: Optional[list] = None,
) -> Any:
    """Run ``cfg.simulations`` MCTS iterations and return the chosen action."""
    if game.is_terminal(state):
        raise ContractError("search from a terminal state")
    rng = rng if rng is not None else random.Random(cfg.seed)
    actions = game.legal_actions(state)
    if len(actions) == 1:
        return actions[0]
    tree = Tree(state, game, cfg.reward_system, cfg.normalize_q)
    select = expression_selector(cfg.expression(), rng, tree.q_scale)
    for _ in range(cfg.simulations):
        tree.iterate(select, rng, trace=trace)
    if tree_out is not None:
        tree_out.append(tree)
    return tree.best_action(rng)
